//! One-nearest-neighbour search, with LB_Keogh pruning and early
//! abandoning, and leave-one-out selection of the DTW warping window.

use super::distance::{band_radius, dtw_banded, lb_keogh_bounded, squared_euclidean_bounded, Envelope};
use crate::dataset::{LabeledDataset, TimeSeries};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistanceSpec {
    SquaredEuclidean,
    /// DTW with warping window as a proportion of the series length.
    Dtw { window: f64 },
}

impl DistanceSpec {
    pub fn radius(&self, m: usize) -> usize {
        match *self {
            DistanceSpec::SquaredEuclidean => 0,
            DistanceSpec::Dtw { window } => band_radius(window, m),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DistanceSpec::Dtw { window } if !(0.0..=1.0).contains(&window) => Err(
                Error::Parameter(format!("warping window {window} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

fn check(train: &LabeledDataset, query: &TimeSeries, dist: &DistanceSpec) -> Result<()> {
    dist.validate()?;
    if train.is_empty() {
        return Err(Error::Validation("1-NN needs a non-empty training set".into()));
    }
    if train.series_length() != query.len() {
        return Err(Error::Validation(format!(
            "query length {} differs from training length {}",
            query.len(),
            train.series_length()
        )));
    }
    Ok(())
}

fn full_distance(a: &[f64], b: &[f64], radius: usize) -> f64 {
    dtw_banded(a, b, radius, f64::INFINITY)
}

/// Reference full scan: exact distance to every training series, lowest
/// index wins ties.
pub fn nn1_classify_naive(train: &LabeledDataset, query: &TimeSeries, dist: &DistanceSpec) -> Result<String> {
    check(train, query, dist)?;
    let r = dist.radius(query.len());
    let mut best = (f64::INFINITY, 0);
    for (i, x) in train.instances().iter().enumerate() {
        let d = full_distance(query.values(), x.series.values(), r);
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(train.instances()[best.1].label.clone())
}

/// Index of the nearest training series, skipping `exclude`. Candidates are
/// visited in index order and only a strictly smaller distance replaces the
/// incumbent, so ties resolve to the lowest index, as in the full scan.
pub(crate) fn nearest_index(
    series: &[&[f64]],
    query: &[f64],
    query_envelope: Option<&Envelope>,
    radius: usize,
    exclude: Option<usize>,
) -> Option<usize> {
    let mut best = f64::INFINITY;
    let mut best_idx = None;
    for (i, cand) in series.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        let d = if radius == 0 {
            squared_euclidean_bounded(query, cand, best)
        } else {
            if let Some(env) = query_envelope {
                if lb_keogh_bounded(cand, env, best) >= best {
                    continue;
                }
            }
            dtw_banded(query, cand, radius, best)
        };
        if d < best || best_idx.is_none() {
            best = d;
            best_idx = Some(i);
        }
    }
    best_idx
}

/// Label of the nearest training instance.
pub fn nn1_classify(train: &LabeledDataset, query: &TimeSeries, dist: &DistanceSpec) -> Result<String> {
    check(train, query, dist)?;
    let r = dist.radius(query.len());
    let series: Vec<&[f64]> = train.instances().iter().map(|x| x.series.values()).collect();
    let env = (r > 0).then(|| Envelope::new(query.values(), r));
    let idx = nearest_index(&series, query.values(), env.as_ref(), r, None).expect("non-empty");
    Ok(train.instances()[idx].label.clone())
}

/// Leave-one-out accuracy of every grid window `p / 100`, `p = 0..=100`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSearch {
    pub window: f64,
    pub accuracy: Vec<f64>,
}

/// Pick the DTW window by leave-one-out 1-NN accuracy over the 101-point
/// grid; the smallest window wins ties.
pub fn tune_dtw_window(train: &LabeledDataset) -> Result<f64> {
    Ok(search_dtw_window(train)?.window)
}

pub fn search_dtw_window(train: &LabeledDataset) -> Result<WindowSearch> {
    if train.len() < 2 {
        return Err(Error::Validation("window tuning needs at least 2 instances".into()));
    }
    let m = train.series_length();
    let series: Vec<&[f64]> = train.instances().iter().map(|x| x.series.values()).collect();
    let labels: Vec<&str> = train.instances().iter().map(|x| x.label.as_str()).collect();
    let n = series.len();

    let mut accuracy = Vec::with_capacity(101);
    let mut last: Option<(usize, f64)> = None;
    for p in 0..=100usize {
        let r = band_radius(p as f64 / 100.0, m).min(m.saturating_sub(1));
        let acc = match last {
            Some((lr, acc)) if lr == r => acc,
            _ => {
                let correct = (0..n)
                    .filter(|&i| {
                        let env = (r > 0).then(|| Envelope::new(series[i], r));
                        let j = nearest_index(&series, series[i], env.as_ref(), r, Some(i))
                            .expect("at least one other instance");
                        labels[j] == labels[i]
                    })
                    .count();
                correct as f64 / n as f64
            }
        };
        last = Some((r, acc));
        accuracy.push(acc);
    }
    let mut best = 0;
    for (p, &acc) in accuracy.iter().enumerate() {
        if acc > accuracy[best] {
            best = p;
        }
    }
    Ok(WindowSearch {
        window: best as f64 / 100.0,
        accuracy,
    })
}
