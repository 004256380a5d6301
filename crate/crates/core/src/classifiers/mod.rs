//! Benchmark classifiers: 1-NN with squared Euclidean distance, 1-NN with
//! DTW and a cross-validated warping window, and rotation forest.

mod distance;
mod nn;
mod rotation;
mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use distance::{band_radius, dtw_distance, lb_keogh, squared_euclidean, Envelope};
pub use nn::{nn1_classify, nn1_classify_naive, search_dtw_window, tune_dtw_window, DistanceSpec, WindowSearch};
pub use rotation::{RotationBlock, RotationForest, RotationForestConfig};
pub use tree::DecisionTree;

use crate::dataset::{LabeledDataset, TimeSeries};
use crate::error::{Error, Result};

/// Classifier selector, as written in configs and on the command line:
/// `ed1nn`, `dtw1nn`, `dtw1nn:w=<p>`, `rotf[:trees=N,seed=S]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassifierSpec {
    Ed1nn,
    /// `None` tunes the window on the training data.
    Dtw1nn { window: Option<f64> },
    /// Without an explicit seed the caller's task seed is used.
    RotationForest { trees: usize, seed: Option<u64> },
}

impl ClassifierSpec {
    /// Short family name used in pipeline labels.
    pub fn family(&self) -> &'static str {
        match self {
            ClassifierSpec::Ed1nn => "ed1nn",
            ClassifierSpec::Dtw1nn { .. } => "dtw1nn",
            ClassifierSpec::RotationForest { .. } => "rotf",
        }
    }

    pub fn train(&self, train: &LabeledDataset, seed: u64) -> Result<TrainedClassifier> {
        if train.is_empty() {
            return Err(Error::Validation("cannot train on an empty dataset".into()));
        }
        match *self {
            ClassifierSpec::Ed1nn => Ok(TrainedClassifier::NearestNeighbour {
                train: train.clone(),
                dist: DistanceSpec::SquaredEuclidean,
            }),
            ClassifierSpec::Dtw1nn { window } => {
                let window = match window {
                    Some(w) => w,
                    None if train.len() < 2 => 0.0,
                    None => tune_dtw_window(train)?,
                };
                Ok(TrainedClassifier::NearestNeighbour {
                    train: train.clone(),
                    dist: DistanceSpec::Dtw { window },
                })
            }
            ClassifierSpec::RotationForest { trees, seed: fixed } => {
                let cfg = RotationForestConfig {
                    tree_count: trees,
                    seed: fixed.unwrap_or(seed),
                    ..Default::default()
                };
                Ok(TrainedClassifier::RotationForest(RotationForest::fit(train, &cfg)?))
            }
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Ed1nn => write!(f, "ed1nn"),
            ClassifierSpec::Dtw1nn { window: None } => write!(f, "dtw1nn"),
            ClassifierSpec::Dtw1nn { window: Some(w) } => write!(f, "dtw1nn:w={w}"),
            ClassifierSpec::RotationForest { trees, seed } => {
                let default_trees = RotationForestConfig::default().tree_count;
                let mut parts = Vec::new();
                if *trees != default_trees {
                    parts.push(format!("trees={trees}"));
                }
                if let Some(s) = seed {
                    parts.push(format!("seed={s}"));
                }
                if parts.is_empty() {
                    write!(f, "rotf")
                } else {
                    write!(f, "rotf:{}", parts.join(","))
                }
            }
        }
    }
}

fn bad(s: &str, why: &str) -> Error {
    Error::Parameter(format!("classifier `{s}`: {why}"))
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let pairs: Vec<(&str, &str)> = match params {
            None => Vec::new(),
            Some(p) => p
                .split(',')
                .map(|kv| kv.split_once('=').ok_or_else(|| bad(s, "expected key=value")))
                .collect::<Result<_>>()?,
        };
        match name {
            "ed1nn" if pairs.is_empty() && params.is_none() => Ok(ClassifierSpec::Ed1nn),
            "dtw1nn" if params.is_none() => Ok(ClassifierSpec::Dtw1nn { window: None }),
            "dtw1nn" => match pairs.as_slice() {
                [("w", v)] => {
                    let w: f64 = v.parse().map_err(|_| bad(s, "window is not a number"))?;
                    if !(0.0..=1.0).contains(&w) {
                        return Err(bad(s, "window outside [0, 1]"));
                    }
                    Ok(ClassifierSpec::Dtw1nn { window: Some(w) })
                }
                _ => Err(bad(s, "expected dtw1nn:w=<proportion>")),
            },
            "rotf" => {
                let mut trees = RotationForestConfig::default().tree_count;
                let mut seed = None;
                for (k, v) in pairs {
                    match k {
                        "trees" => {
                            trees = v.parse().map_err(|_| bad(s, "trees is not an integer"))?;
                            if trees == 0 {
                                return Err(bad(s, "trees must be positive"));
                            }
                        }
                        "seed" => seed = Some(v.parse().map_err(|_| bad(s, "seed is not an integer"))?),
                        _ => return Err(bad(s, "unknown key")),
                    }
                }
                Ok(ClassifierSpec::RotationForest { trees, seed })
            }
            _ => Err(bad(s, "unknown classifier")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// Class probabilities in label order.
    pub distribution: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainedClassifier {
    NearestNeighbour { train: LabeledDataset, dist: DistanceSpec },
    RotationForest(RotationForest),
}

impl TrainedClassifier {
    pub fn series_length(&self) -> usize {
        match self {
            TrainedClassifier::NearestNeighbour { train, .. } => train.series_length(),
            TrainedClassifier::RotationForest(f) => f.n_attributes(),
        }
    }

    /// The DTW window in use, if any.
    pub fn window(&self) -> Option<f64> {
        match self {
            TrainedClassifier::NearestNeighbour {
                dist: DistanceSpec::Dtw { window },
                ..
            } => Some(*window),
            _ => None,
        }
    }

    /// Number of correct predictions on `test`.
    pub fn correct(&self, test: &LabeledDataset) -> Result<usize> {
        let hits: Vec<bool> = test
            .instances()
            .par_iter()
            .map(|x| Ok(classify(self, &x.series)?.label == x.label))
            .collect::<Result<_>>()?;
        Ok(hits.into_iter().filter(|&h| h).count())
    }
}

pub fn train_rotation_forest(train: &LabeledDataset, cfg: &RotationForestConfig) -> Result<TrainedClassifier> {
    Ok(TrainedClassifier::RotationForest(RotationForest::fit(train, cfg)?))
}

pub fn classify(model: &TrainedClassifier, query: &TimeSeries) -> Result<Prediction> {
    match model {
        TrainedClassifier::NearestNeighbour { train, dist } => {
            let label = nn1_classify(train, query, dist)?;
            let distribution = train
                .classes()
                .into_iter()
                .map(|c| {
                    let p = if c == label { 1.0 } else { 0.0 };
                    (c, p)
                })
                .collect();
            Ok(Prediction { label, distribution })
        }
        TrainedClassifier::RotationForest(f) => {
            let probs = f.distribution(query.values())?;
            // classes are sorted, so the first maximum is the smallest label
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = i;
                }
            }
            Ok(Prediction {
                label: f.classes()[best].clone(),
                distribution: f.classes().iter().cloned().zip(probs).collect(),
            })
        }
    }
}
