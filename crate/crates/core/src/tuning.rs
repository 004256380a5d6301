//! Supervised smoother selection by stratified cross-validation on the
//! training data, with "no smoothing" always among the candidates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::classifiers::ClassifierSpec;
use crate::dataset::{stratified_folds, FoldAssignment, LabeledDataset};
use crate::error::{Error, Result};
use crate::seed;
use crate::smoothing::{apply_smoother, default_grid, SmootherKind, SmootherSpec};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TuningMode {
    None,
    Default,
    Tuned,
}

/// What a tuned arm searches over: one family's grid, or every family's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyChoice {
    One(SmootherKind),
    All,
}

impl FamilyChoice {
    /// Candidate specs at length `m`: `none` first, then grid order.
    pub fn candidates(self, m: usize) -> Vec<SmootherSpec> {
        let families: Vec<SmootherKind> = match self {
            FamilyChoice::One(k) => vec![k],
            FamilyChoice::All => SmootherKind::FAMILIES.to_vec(),
        };
        let mut out = vec![SmootherSpec::None];
        for k in families {
            if k != SmootherKind::None {
                out.extend(default_grid(k, m).specs);
            }
        }
        out
    }
}

/// One smoother arm of an experiment: `none`, a family at its default
/// parameters (`ma`), or a family tuned by CV (`ma-tuned`, `all-tuned`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    None,
    Default(SmootherKind),
    Tuned(FamilyChoice),
}

impl Arm {
    pub fn mode(&self) -> TuningMode {
        match self {
            Arm::None => TuningMode::None,
            Arm::Default(_) => TuningMode::Default,
            Arm::Tuned(_) => TuningMode::Tuned,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::None => write!(f, "none"),
            Arm::Default(k) => write!(f, "{k}"),
            Arm::Tuned(FamilyChoice::One(k)) => write!(f, "{k}-tuned"),
            Arm::Tuned(FamilyChoice::All) => write!(f, "all-tuned"),
        }
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, tuned) = match s.strip_suffix("-tuned") {
            Some(b) => (b, true),
            None => (s, false),
        };
        if base == "all" {
            return if tuned {
                Ok(Arm::Tuned(FamilyChoice::All))
            } else {
                Err(Error::Parameter("arm `all` only exists as `all-tuned`".into()))
            };
        }
        let kind: SmootherKind = base.parse()?;
        Ok(match (kind, tuned) {
            (SmootherKind::None, false) => Arm::None,
            (SmootherKind::None, true) => {
                return Err(Error::Parameter("arm `none` cannot be tuned".into()));
            }
            (k, false) => Arm::Default(k),
            (k, true) => Arm::Tuned(FamilyChoice::One(k)),
        })
    }
}

/// Classifier plus smoother arm, written `<classifier>+<arm>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSpec {
    pub classifier: ClassifierSpec,
    pub arm: Arm,
}

impl PipelineSpec {
    pub fn mode(&self) -> TuningMode {
        self.arm.mode()
    }
}

impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.classifier, self.arm)
    }
}

impl FromStr for PipelineSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (c, a) = s
            .rsplit_once('+')
            .ok_or_else(|| Error::Parameter(format!("pipeline `{s}`: expected <classifier>+<arm>")))?;
        Ok(PipelineSpec {
            classifier: c.parse()?,
            arm: a.parse()?,
        })
    }
}

/// Seed of the shared fold assignment for one (dataset, resample).
pub fn folds_seed(dataset: &str, resample: u64) -> u64 {
    seed::derive_seed(&["cv-folds", dataset, &resample.to_string()])
}

/// Fold assignment used for tuning: `k` stratified folds, or leave-one-out
/// when there are fewer than `k` instances.
pub fn tuning_folds(train: &LabeledDataset, k: usize, folds_seed: u64) -> Result<FoldAssignment> {
    let k = k.min(train.len());
    stratified_folds(train, k, folds_seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvScore {
    /// Correct held-out predictions over all folds divided by instance count.
    pub mean: f64,
    pub per_fold: Vec<f64>,
}

/// Cross-validated accuracy of `classifier` on `train` smoothed with `spec`.
/// `Ok(None)` when `spec` is not valid for the series length.
pub fn cv_accuracy(
    spec: &SmootherSpec,
    classifier: &ClassifierSpec,
    train: &LabeledDataset,
    folds: &FoldAssignment,
) -> Result<Option<CvScore>> {
    if folds.folds().len() != train.len() {
        return Err(Error::Validation(format!(
            "fold assignment covers {} instances, train has {}",
            folds.folds().len(),
            train.len()
        )));
    }
    if spec.validate(train.series_length()).is_err() {
        return Ok(None);
    }
    // smoothing acts per series, so smoothing once equals smoothing each fold
    let smoothed = apply_smoother(spec, train)?;
    let fold_seed = seed::derive_seed(&["cv-model", &folds.fingerprint()]);
    let mut correct = 0;
    let mut per_fold = Vec::with_capacity(folds.k());
    for f in 0..folds.k() {
        let (tr, held) = folds.split(f);
        let fold_train = smoothed.subset(&tr);
        let fold_test = smoothed.subset(&held);
        let model = classifier.train(&fold_train, fold_seed.wrapping_add(f as u64))?;
        let c = model.correct(&fold_test)?;
        correct += c;
        per_fold.push(c as f64 / held.len() as f64);
    }
    Ok(Some(CvScore {
        mean: correct as f64 / train.len() as f64,
        per_fold,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuningResult {
    pub selected: SmootherSpec,
    /// Every candidate in evaluation order; `None` marks a spec that is
    /// invalid for the series length.
    pub table: Vec<(SmootherSpec, Option<CvScore>)>,
    pub folds_seed: u64,
    pub folds: usize,
    pub fold_fingerprint: String,
}

impl TuningResult {
    pub fn accuracy_of(&self, spec: &SmootherSpec) -> Option<f64> {
        self.table
            .iter()
            .find(|(s, _)| s == spec)
            .and_then(|(_, c)| c.as_ref().map(|c| c.mean))
    }

    /// Tab-separated table: spec, mean CV accuracy to 9 decimals, then the
    /// per-fold accuracies.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "# folds={} seed={} fingerprint={} selected={}\n",
            self.folds, self.folds_seed, self.fold_fingerprint, self.selected
        );
        for (spec, score) in &self.table {
            out.push_str(&spec.to_string());
            match score {
                None => out.push_str("\tabsent"),
                Some(s) => {
                    out.push_str(&format!("\t{:.9}", s.mean));
                    for a in &s.per_fold {
                        out.push_str(&format!("\t{a:.9}"));
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Choose among `none` and the candidate grid by CV accuracy on one shared
/// fold assignment. The first maximum in candidate order wins, so `none`
/// beats any spec it ties with and smaller parameters beat larger ones.
pub fn select_smoother(
    choice: FamilyChoice,
    classifier: &ClassifierSpec,
    train: &LabeledDataset,
    folds_seed: u64,
) -> Result<TuningResult> {
    select_among(&choice.candidates(train.series_length()), classifier, train, folds_seed, DEFAULT_FOLDS)
}

/// As [`select_smoother`] over an explicit candidate list and fold count.
pub fn select_among(
    candidates: &[SmootherSpec],
    classifier: &ClassifierSpec,
    train: &LabeledDataset,
    folds_seed: u64,
    k: usize,
) -> Result<TuningResult> {
    if candidates.is_empty() {
        return Err(Error::Validation("no candidate smoothers".into()));
    }
    if train.len() < 2 {
        return Err(Error::Validation("tuning needs at least 2 training instances".into()));
    }
    let folds = tuning_folds(train, k, folds_seed)?;
    let table: Vec<(SmootherSpec, Option<CvScore>)> = candidates
        .par_iter()
        .map(|spec| Ok((*spec, cv_accuracy(spec, classifier, train, &folds)?)))
        .collect::<Result<_>>()?;
    let mut best: Option<(SmootherSpec, f64)> = None;
    for (spec, score) in &table {
        if let Some(s) = score {
            if best.is_none_or(|(_, b)| s.mean > b) {
                best = Some((*spec, s.mean));
            }
        }
    }
    let (selected, _) = best.ok_or_else(|| {
        Error::Validation(format!(
            "no candidate smoother is valid for series length {}",
            train.series_length()
        ))
    })?;
    Ok(TuningResult {
        selected,
        table,
        folds_seed,
        folds: folds.k(),
        fold_fingerprint: folds.fingerprint(),
    })
}
