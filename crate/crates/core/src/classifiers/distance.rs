//! Squared Euclidean and banded DTW distances, LB_Keogh envelopes.
//!
//! DTW uses the squared pointwise cost, so `dtw(x, y, 0)` is exactly the
//! squared Euclidean distance and LB_Keogh lower-bounds it.

use std::collections::VecDeque;

use crate::error::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Sakoe-Chiba band radius `ceil(window * m)`, capped at `m`.
///
/// A small slack keeps grid windows like `0.07` at radius 7 for `m = 100`
/// rather than 8 through representation error.
pub fn band_radius(window: f64, m: usize) -> usize {
    let r = (window * m as f64 - 1e-9).ceil();
    if r <= 0.0 {
        0
    } else {
        (r as usize).min(m)
    }
}

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(squared_euclidean_bounded(a, b, f64::INFINITY))
}

/// Squared Euclidean distance, or `INFINITY` once the partial sum reaches
/// `cutoff`.
pub(crate) fn squared_euclidean_bounded(a: &[f64], b: &[f64], cutoff: f64) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
        if acc >= cutoff {
            return f64::INFINITY;
        }
    }
    acc
}

/// DTW with squared pointwise cost, warping confined to the band of radius
/// `ceil(window * m)`.
pub fn dtw_distance(a: &[f64], b: &[f64], window: f64) -> Result<f64> {
    check_lengths(a, b)?;
    if !(0.0..=1.0).contains(&window) {
        return Err(Error::Parameter(format!("warping window {window} outside [0, 1]")));
    }
    Ok(dtw_banded(a, b, band_radius(window, a.len()), f64::INFINITY))
}

/// Banded DTW on equal-length inputs. Returns `INFINITY` as soon as a whole
/// row of the cost matrix is `>= cutoff`; otherwise the exact distance.
pub(crate) fn dtw_banded(a: &[f64], b: &[f64], radius: usize, cutoff: f64) -> f64 {
    let m = a.len();
    if radius == 0 {
        return squared_euclidean_bounded(a, b, cutoff);
    }
    let inf = f64::INFINITY;
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, &ai) in a.iter().enumerate() {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(m - 1);
        let mut row_min = inf;
        for j in lo..=hi {
            let d = ai - b[j];
            let cost = d * d;
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = if i > 0 { prev[j] } else { inf };
                let left = if j > lo { cur[j - 1] } else { inf };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { inf };
                up.min(left).min(diag)
            };
            cur[j] = cost + best;
            row_min = row_min.min(cur[j]);
        }
        if row_min >= cutoff {
            return inf;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Upper/lower running extrema of a series over a window of radius `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub radius: usize,
}

impl Envelope {
    pub fn new(series: &[f64], radius: usize) -> Self {
        Envelope {
            upper: running_extreme(series, radius, |a, b| a >= b),
            lower: running_extreme(series, radius, |a, b| a <= b),
            radius,
        }
    }

    pub fn for_window(series: &[f64], window: f64) -> Self {
        Envelope::new(series, band_radius(window, series.len()))
    }
}

/// Monotone-deque sliding extreme over `[i - r, i + r]`.
fn running_extreme(x: &[f64], r: usize, keeps: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let m = x.len();
    let mut out = Vec::with_capacity(m);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..m {
        let hi = (i + r).min(m - 1);
        while next <= hi {
            while let Some(&back) = dq.back() {
                if keeps(x[next], x[back]) {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        while let Some(&front) = dq.front() {
            if front + r < i {
                dq.pop_front();
            } else {
                break;
            }
        }
        out.push(x[*dq.front().expect("window is non-empty")]);
    }
    out
}

/// LB_Keogh of `query` against an envelope: squared excursions outside the
/// band. A lower bound on the DTW distance under the same window.
pub fn lb_keogh(query: &[f64], envelope: &Envelope) -> Result<f64> {
    check_lengths(query, &envelope.upper)?;
    Ok(lb_keogh_bounded(query, envelope, f64::INFINITY))
}

pub(crate) fn lb_keogh_bounded(query: &[f64], envelope: &Envelope, cutoff: f64) -> f64 {
    let mut acc = 0.0;
    for ((q, u), l) in query.iter().zip(&envelope.upper).zip(&envelope.lower) {
        let d = if q > u {
            q - u
        } else if q < l {
            q - l
        } else {
            continue;
        };
        acc += d * d;
        if acc >= cutoff {
            return f64::INFINITY;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_examples() {
        assert_eq!(squared_euclidean(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(squared_euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(squared_euclidean(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 5.0);
        assert!(squared_euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn dtw_examples() {
        let x = [0.3, -1.0, 2.0, 0.5];
        assert_eq!(dtw_distance(&x, &x, 0.5).unwrap(), 0.0);
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], 1.0).unwrap(), 2.0);
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0], 0.0).unwrap(), 2.0);
        assert!(dtw_distance(&[1.0, 2.0], &[1.0], 0.1).is_err());
        assert!(dtw_distance(&[1.0, 2.0], &[1.0, 2.0], 1.5).is_err());
    }

    #[test]
    fn radius_rounding() {
        assert_eq!(band_radius(0.07, 100), 7);
        assert_eq!(band_radius(0.0, 100), 0);
        assert_eq!(band_radius(0.01, 150), 2);
        assert_eq!(band_radius(1.0, 30), 30);
    }

    #[test]
    fn envelope_of_self_gives_zero_bound() {
        let x = [0.0, 2.0, -1.0, 3.0, 1.0];
        let env = Envelope::new(&x, 1);
        assert_eq!(env.upper, vec![2.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(env.lower, vec![0.0, -1.0, -1.0, -1.0, 1.0]);
        assert_eq!(lb_keogh(&x, &env).unwrap(), 0.0);
        let inside = [1.0, 1.0, 0.0, 0.0, 2.0];
        assert_eq!(lb_keogh(&inside, &env).unwrap(), 0.0);
        assert_eq!(lb_keogh(&[5.0, 1.0, 0.0, 0.0, 2.0], &env).unwrap(), 9.0);
    }

    #[test]
    fn abandoning_only_when_bound_reached() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let b = [3.0, 2.0, 1.0, 0.0];
        let exact = dtw_banded(&a, &b, 2, f64::INFINITY);
        assert_eq!(dtw_banded(&a, &b, 2, exact + 1.0), exact);
        assert_eq!(dtw_banded(&a, &b, 2, 0.5), f64::INFINITY);
    }
}
