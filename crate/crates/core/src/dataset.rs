//! Labelled univariate time series, archive-format I/O, z-normalisation and
//! stratified resampling / fold assignment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Below this population standard deviation a series counts as constant.
pub const CONSTANT_STD: f64 = 1e-12;

/// A finite, non-empty real-valued sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("empty time series".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(TimeSeries(values))
    }

    /// Caller guarantees non-empty finite values (filters of finite input).
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        TimeSeries(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub series: TimeSeries,
    pub label: String,
}

impl Instance {
    pub fn new(series: TimeSeries, label: impl Into<String>) -> Self {
        Instance {
            series,
            label: label.into(),
        }
    }
}

/// An equal-length collection of labelled series.
///
/// Construction enforces equal lengths only. The "at least two classes"
/// rule is checked at ingestion, since CV folds legitimately hold a single
/// class.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    name: String,
    instances: Vec<Instance>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Result<Self> {
        let name = name.into();
        if let Some(first) = instances.first() {
            let m = first.series.len();
            if let Some(i) = instances.iter().position(|x| x.series.len() != m) {
                return Err(Error::Validation(format!(
                    "dataset {name}: instance {i} has length {} but instance 0 has length {m}",
                    instances[i].series.len()
                )));
            }
        }
        Ok(LabeledDataset { name, instances })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Common series length, or 0 for an empty dataset.
    pub fn series_length(&self) -> usize {
        self.instances.first().map_or(0, |x| x.series.len())
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for x in &self.instances {
            *counts.entry(x.label.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Replace every series through `f`, keeping labels and order.
    pub fn map_series<F>(&self, mut f: F) -> Result<LabeledDataset>
    where
        F: FnMut(&TimeSeries) -> Result<TimeSeries>,
    {
        let instances = self
            .instances
            .iter()
            .map(|x| Ok(Instance::new(f(&x.series)?, x.label.clone())))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(self.name.clone(), instances)
    }
}

/// z-normalise with the population (divide-by-m) standard deviation.
/// Constant series map to all zeros.
pub fn znormalize(series: &TimeSeries) -> TimeSeries {
    TimeSeries::from_finite(znormalize_values(series.values()))
}

pub fn znormalize_values(values: &[f64]) -> Vec<f64> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let std = var.sqrt();
    if std < CONSTANT_STD {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / std).collect()
}

// ---------------------------------------------------------------------------
// Archive format

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parse archive text: one instance per line, label first, comma or
/// tab/whitespace separated. Blank lines are skipped. `origin` is used in
/// error messages only.
pub fn parse_archive_text(text: &str, origin: &str) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    let mut width: Option<(usize, usize)> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() < 2 {
            return Err(Error::Format {
                path: origin.into(),
                line: lineno,
                message: "expected a label followed by at least one value".into(),
            });
        }
        match width {
            None => width = Some((fields.len(), lineno)),
            Some((w, first)) if w != fields.len() => {
                return Err(Error::Format {
                    path: origin.into(),
                    line: lineno,
                    message: format!(
                        "ragged row: {} values, line {first} has {}",
                        fields.len() - 1,
                        w - 1
                    ),
                })
            }
            _ => {}
        }
        let label = fields[0];
        if label.is_empty() {
            return Err(Error::Format {
                path: origin.into(),
                line: lineno,
                message: "empty class label".into(),
            });
        }
        let values = fields[1..]
            .iter()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        path: origin.into(),
                        line: lineno,
                        token: (*tok).to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Instance::new(TimeSeries(values), label));
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn dataset_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for suffix in ["_TRAIN", "_TEST"] {
        if let Some(base) = stem.strip_suffix(suffix) {
            return base.to_string();
        }
    }
    stem
}

/// Read a TRAIN/TEST file pair into two datasets sharing one label domain.
pub fn parse_archive(train_path: &Path, test_path: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = parse_archive_text(&read_text(train_path)?, &train_path.display().to_string())?;
    let test = parse_archive_text(&read_text(test_path)?, &test_path.display().to_string())?;
    build_pair(&dataset_name(train_path), train, test)
}

/// Validate and assemble a train/test pair from parsed instances.
pub fn build_pair(
    name: &str,
    train: Vec<Instance>,
    test: Vec<Instance>,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Validation(format!("{name}: train and test must be non-empty")));
    }
    let (mt, ms) = (train[0].series.len(), test[0].series.len());
    if mt != ms {
        return Err(Error::Validation(format!(
            "{name}: train series have length {mt} but test series have length {ms}"
        )));
    }
    if mt < 2 {
        return Err(Error::Validation(format!("{name}: series length {mt} is below 2")));
    }
    let train = LabeledDataset::new(name, train)?;
    let test = LabeledDataset::new(name, test)?;
    let mut classes = train.class_counts();
    classes.extend(test.class_counts());
    if classes.len() < 2 {
        return Err(Error::Validation(format!(
            "{name}: found {} class label(s), at least 2 required",
            classes.len()
        )));
    }
    Ok((train, test))
}

const EXTENSIONS: [&str; 4] = ["tsv", "txt", "csv", "arff.txt"];

/// Locate `<Name>_TRAIN.<ext>` / `<Name>_TEST.<ext>` either directly in `dir`
/// or in `dir/<Name>/`.
pub fn locate_pair(dir: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
    for base in [dir.join(name), dir.to_path_buf()] {
        for ext in EXTENSIONS {
            let train = base.join(format!("{name}_TRAIN.{ext}"));
            let test = base.join(format!("{name}_TEST.{ext}"));
            if train.is_file() && test.is_file() {
                return Ok((train, test));
            }
        }
    }
    Err(Error::io(
        dir.join(name),
        std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no {name}_TRAIN/{name}_TEST file pair"),
        ),
    ))
}

pub fn load_pair(dir: &Path, name: &str) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = locate_pair(dir, name)?;
    let (mut tr, mut te) = parse_archive(&train, &test)?;
    tr.name = name.to_string();
    te.name = name.to_string();
    Ok((tr, te))
}

/// Serialise in comma-separated archive format. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn to_archive_text(dataset: &LabeledDataset) -> String {
    let mut out = String::new();
    for x in &dataset.instances {
        out.push_str(&x.label);
        for v in x.series.values() {
            write!(out, ",{v}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn write_archive(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_archive_text(dataset)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Resampling

/// Train/test partition of the pooled instance list `train ++ test`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResamplePlan {
    pub resample_id: u64,
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

fn resample_key(name: &str, resample_id: u64) -> [String; 3] {
    ["resample".into(), name.to_string(), resample_id.to_string()]
}

pub fn plan_resample(
    train: &LabeledDataset,
    test: &LabeledDataset,
    resample_id: u64,
) -> Result<ResamplePlan> {
    if train.series_length() != test.series_length() {
        return Err(Error::Validation(format!(
            "{}: train/test series lengths differ ({} vs {})",
            train.name,
            train.series_length(),
            test.series_length()
        )));
    }
    let key = resample_key(train.name(), resample_id);
    let key: Vec<&str> = key.iter().map(String::as_str).collect();
    let seed = seed::derive_seed(&key);
    let n_train = train.len();
    let n = n_train + test.len();
    if resample_id == 0 {
        return Ok(ResamplePlan {
            resample_id,
            seed,
            train_indices: (0..n_train).collect(),
            test_indices: (n_train..n).collect(),
        });
    }

    let label_of = |i: usize| -> &str {
        if i < n_train {
            &train.instances[i].label
        } else {
            &test.instances[i - n_train].label
        }
    };
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        by_class.entry(label_of(i)).or_default().push(i);
    }

    let mut rng = seed::rng_for(&key);
    let required = train.class_counts();
    let mut in_train = vec![false; n];
    for (class, pool) in by_class.iter_mut() {
        let need = required.get(*class).copied().unwrap_or(0);
        if pool.len() < need {
            return Err(Error::Stratification {
                class: class.to_string(),
                available: pool.len(),
                required: need,
            });
        }
        pool.shuffle(&mut rng);
        for &i in &pool[..need] {
            in_train[i] = true;
        }
    }
    let (train_indices, test_indices): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_train[i]);
    Ok(ResamplePlan {
        resample_id,
        seed,
        train_indices,
        test_indices,
    })
}

/// Resample 0 returns clones of the inputs; other ids draw a stratified
/// split that keeps the original per-class train counts.
pub fn make_resample(
    train: &LabeledDataset,
    test: &LabeledDataset,
    resample_id: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let plan = plan_resample(train, test, resample_id)?;
    if resample_id == 0 {
        return Ok((train.clone(), test.clone()));
    }
    Ok(apply_plan(train, test, &plan))
}

pub fn apply_plan(
    train: &LabeledDataset,
    test: &LabeledDataset,
    plan: &ResamplePlan,
) -> (LabeledDataset, LabeledDataset) {
    let n_train = train.len();
    let pick = |indices: &[usize]| LabeledDataset {
        name: train.name.clone(),
        instances: indices
            .iter()
            .map(|&i| {
                if i < n_train {
                    train.instances[i].clone()
                } else {
                    test.instances[i - n_train].clone()
                }
            })
            .collect(),
    };
    (pick(&plan.train_indices), pick(&plan.test_indices))
}

// ---------------------------------------------------------------------------
// Cross-validation folds

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold id per instance.
    pub fn folds(&self) -> &[usize] {
        &self.fold_of
    }

    /// (training indices, held-out indices) for fold `f`, both ascending.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&i| self.fold_of[i] != f)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn fingerprint(&self) -> String {
        let text: Vec<String> = self.fold_of.iter().map(usize::to_string).collect();
        seed::fingerprint(format!("{}:{}", self.k, text.join(",")).as_bytes())
    }
}

/// Stratified k-fold assignment. Classes are visited in label order, each
/// class's instances shuffled, and the concatenation dealt round-robin, so
/// fold sizes and per-class fold counts each differ by at most one.
pub fn stratified_folds(dataset: &LabeledDataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Validation(format!("need at least 2 folds, got {k}")));
    }
    if k > dataset.len() {
        return Err(Error::Validation(format!(
            "{} folds requested for {} instances",
            k,
            dataset.len()
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, x) in dataset.instances.iter().enumerate() {
        by_class.entry(&x.label).or_default().push(i);
    }
    let mut rng = seed::rng_for(&["folds", &seed.to_string(), &k.to_string()]);
    let mut fold_of = vec![0; dataset.len()];
    let mut position = 0;
    for pool in by_class.values_mut() {
        pool.shuffle(&mut rng);
        for &i in pool.iter() {
            fold_of[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(name: &str, rows: &[(&str, &[f64])]) -> LabeledDataset {
        let instances = rows
            .iter()
            .map(|(l, v)| Instance::new(TimeSeries::new(v.to_vec()).unwrap(), *l))
            .collect();
        LabeledDataset::new(name, instances).unwrap()
    }

    #[test]
    fn parses_single_line() {
        let xs = parse_archive_text("1,0.5,-0.5\n", "mem").unwrap();
        assert_eq!(xs.len(), 1);
        assert_eq!(xs[0].label, "1");
        assert_eq!(xs[0].series.values(), &[0.5, -0.5]);
    }

    #[test]
    fn parses_tabs_and_blank_lines() {
        let xs = parse_archive_text("a\t1\t2\n\n  \nb\t3\t4\n", "mem").unwrap();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[1].series.values(), &[3.0, 4.0]);
    }

    #[test]
    fn three_lines_two_classes() {
        let xs = parse_archive_text("0,1,2\n0,2,3\n1,3,4\n", "mem").unwrap();
        let d = LabeledDataset::new("x", xs).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.classes(), vec!["0", "1"]);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_archive_text("0,1,2\n1,1\n", "f.txt").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_numeric_token_is_parse_error() {
        let err = parse_archive_text("0,1,x\n", "f.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn length_mismatch_between_files() {
        let tr = parse_archive_text(&format!("0{}\n1{}\n", ",1".repeat(10), ",2".repeat(10)), "a").unwrap();
        let te = parse_archive_text(&format!("0{}\n", ",1".repeat(11)), "b").unwrap();
        assert!(matches!(build_pair("x", tr, te), Err(Error::Validation(_))));
    }

    #[test]
    fn single_class_rejected() {
        let tr = parse_archive_text("0,1,2\n0,2,3\n", "a").unwrap();
        let te = parse_archive_text("0,1,2\n", "b").unwrap();
        assert!(matches!(build_pair("x", tr, te), Err(Error::Validation(_))));
    }

    #[test]
    fn znormalize_examples() {
        let z = znormalize_values(&[2.0, 4.0, 6.0]);
        let s = (8.0f64 / 3.0).sqrt();
        assert!((z[0] + 2.0 / s).abs() < 1e-12 && z[1].abs() < 1e-12 && (z[2] - 2.0 / s).abs() < 1e-12);
        assert!((z[2] - 1.224744871391589).abs() < 1e-12);
        assert_eq!(znormalize_values(&[0.0, 1.0]), vec![-1.0, 1.0]);
        assert_eq!(znormalize_values(&[5.0, 5.0, 5.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn resample_zero_is_identity() {
        let tr = ds("d", &[("a", &[1.0, 2.0]), ("b", &[3.0, 1.0])]);
        let te = ds("d", &[("a", &[0.0, 2.0]), ("b", &[3.0, 3.0])]);
        let (a, b) = make_resample(&tr, &te, 0).unwrap();
        assert_eq!(a, tr);
        assert_eq!(b, te);
    }

    #[test]
    fn resample_keeps_train_class_counts() {
        let mut rows_tr = Vec::new();
        let mut rows_te = Vec::new();
        for i in 0..10 {
            let v = [i as f64, 1.0];
            let label = if i % 2 == 0 { "A" } else { "B" };
            rows_tr.push((label, v));
            rows_te.push((label, [i as f64 + 100.0, 1.0]));
        }
        let tr: Vec<(&str, &[f64])> = rows_tr.iter().map(|(l, v)| (*l, &v[..])).collect();
        let te: Vec<(&str, &[f64])> = rows_te.iter().map(|(l, v)| (*l, &v[..])).collect();
        let (tr, te) = (ds("d", &tr), ds("d", &te));
        for id in 1..20 {
            let (a, b) = make_resample(&tr, &te, id).unwrap();
            assert_eq!(a.class_counts(), tr.class_counts());
            assert_eq!(a.len() + b.len(), 20);
            let again = make_resample(&tr, &te, id).unwrap();
            assert_eq!(again.0, a);
        }
        let p1 = plan_resample(&tr, &te, 1).unwrap();
        let p2 = plan_resample(&tr, &te, 2).unwrap();
        assert_ne!(p1.train_indices, p2.train_indices);
    }

    #[test]
    fn resample_plan_partitions_pool() {
        let tr = ds("d", &[("A", &[1.0, 2.0]), ("B", &[1.0, 2.0]), ("B", &[2.0, 2.0])]);
        let te = ds("d", &[("A", &[1.0, 0.0]), ("B", &[0.0, 0.0])]);
        for id in 0..10 {
            let plan = plan_resample(&tr, &te, id).unwrap();
            let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
            all.sort();
            assert_eq!(all, (0..5).collect::<Vec<_>>());
            assert_eq!(plan.train_indices.len(), 3);
        }
    }

    #[test]
    fn folds_balanced_example() {
        let rows: Vec<(String, Vec<f64>)> = (0..20)
            .map(|i| (if i < 10 { "A" } else { "B" }.to_string(), vec![i as f64, 0.0]))
            .collect();
        let rows: Vec<(&str, &[f64])> = rows.iter().map(|(l, v)| (l.as_str(), &v[..])).collect();
        let d = ds("d", &rows);
        let f = stratified_folds(&d, 10, 7).unwrap();
        assert_eq!(f.sizes(), vec![2; 10]);
        for fold in 0..10 {
            let (_, held) = f.split(fold);
            let labels: Vec<&str> = held.iter().map(|&i| d.instances()[i].label.as_str()).collect();
            assert!(labels.contains(&"A") && labels.contains(&"B"));
        }
        assert_eq!(f, stratified_folds(&d, 10, 7).unwrap());
    }

    #[test]
    fn folds_odd_class_splits_three_two() {
        let d = ds(
            "d",
            &[("A", &[0.0, 1.0]), ("A", &[1.0, 1.0]), ("A", &[2.0, 1.0]), ("A", &[3.0, 1.0]), ("A", &[4.0, 1.0]), ("B", &[5.0, 1.0])],
        );
        let f = stratified_folds(&d, 2, 1).unwrap();
        let mut per_fold = [0; 2];
        for (i, x) in d.instances().iter().enumerate() {
            if x.label == "A" {
                per_fold[f.folds()[i]] += 1;
            }
        }
        per_fold.sort();
        assert_eq!(per_fold, [2, 3]);
    }

    #[test]
    fn too_many_folds() {
        let d = ds("d", &[("A", &[0.0, 1.0]), ("B", &[1.0, 1.0])]);
        assert!(stratified_folds(&d, 3, 0).is_err());
        assert!(stratified_folds(&d, 1, 0).is_err());
    }
}
