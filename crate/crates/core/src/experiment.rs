//! Experiment configuration, the resumable (dataset, resample, classifier,
//! arm) task sweep, and report generation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::dataset::{locate_pair, make_resample, parse_archive, LabeledDataset};
use crate::error::{Error, Result};
use crate::evaluation::{
    average_ranks, emit_cd_diagram, rank_length_svg, rank_length_table, rank_vs_length, write_records,
    AccuracyMatrix, ResultRecord,
};
use crate::seed;
use crate::smoothing::{apply_smoother, default_grid, SmootherSpec};
use crate::tuning::{folds_seed, select_among, Arm, FamilyChoice, PipelineSpec, TuningResult, DEFAULT_FOLDS};

pub const CONFIG_FILE: &str = "config.txt";
pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub datasets: Vec<String>,
    pub classifiers: Vec<ClassifierSpec>,
    /// Fully expanded arm list, in the order given.
    pub arms: Vec<Arm>,
    pub resamples: u64,
    pub folds: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    /// Write wall-clock seconds into the records (breaks byte-identity).
    pub timings: bool,
    pub alpha: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_dir: PathBuf::from("data"),
            datasets: Vec::new(),
            classifiers: vec![ClassifierSpec::Ed1nn],
            arms: vec![Arm::None],
            resamples: 10,
            folds: DEFAULT_FOLDS,
            seed: 0,
            out_dir: PathBuf::from("results"),
            threads: 0,
            timings: false,
            alpha: 0.05,
        }
    }
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

/// Expand arm names; with `tuned`, every family arm also gets its tuned
/// twin.
pub fn expand_arms(names: &[String], tuned: bool) -> Result<Vec<Arm>> {
    let mut arms: Vec<Arm> = Vec::new();
    for n in names {
        let a: Arm = n.parse()?;
        if !arms.contains(&a) {
            arms.push(a);
        }
    }
    if tuned {
        let extra: Vec<Arm> = arms
            .iter()
            .filter_map(|a| match a {
                Arm::Default(k) => Some(Arm::Tuned(FamilyChoice::One(*k))),
                _ => None,
            })
            .collect();
        for a in extra {
            if !arms.contains(&a) {
                arms.push(a);
            }
        }
    }
    Ok(arms)
}

impl ExperimentConfig {
    /// Parse `key = value` lines; list keys (`dataset`, `classifier`, `arm`)
    /// repeat or take comma-free values one per line. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut classifiers = Vec::new();
        let mut arms = Vec::new();
        let mut tuned = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| cfg_err(line, "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |what: &str| cfg_err(line, format!("{what} must be a non-negative integer, got `{v}`"));
            match k {
                "data_dir" => cfg.data_dir = base.join(v),
                "out" => cfg.out_dir = base.join(v),
                "dataset" => cfg.datasets.push(v.to_string()),
                "classifier" => classifiers.push(v.parse::<ClassifierSpec>().map_err(|e| cfg_err(line, e))?),
                "arm" => arms.push(v.to_string()),
                "tuned" => tuned = v.parse().map_err(|_| cfg_err(line, "tuned must be true or false"))?,
                "resamples" => cfg.resamples = v.parse().map_err(|_| num("resamples"))?,
                "folds" => cfg.folds = v.parse().map_err(|_| num("folds"))?,
                "seed" => cfg.seed = v.parse().map_err(|_| num("seed"))?,
                "threads" => cfg.threads = v.parse().map_err(|_| num("threads"))?,
                "timings" => cfg.timings = v.parse().map_err(|_| cfg_err(line, "timings must be true or false"))?,
                "alpha" => cfg.alpha = v.parse().map_err(|_| cfg_err(line, "alpha must be a number"))?,
                _ => return Err(cfg_err(line, format!("unknown key `{k}`"))),
            }
        }
        if !classifiers.is_empty() {
            cfg.classifiers = classifiers;
        }
        if !arms.is_empty() || tuned {
            if arms.is_empty() {
                arms.push("none".into());
            }
            cfg.arms = expand_arms(&arms, tuned)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets given".into()));
        }
        if self.classifiers.is_empty() || self.arms.is_empty() {
            return Err(Error::Config("need at least one classifier and one arm".into()));
        }
        if self.resamples < 1 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        crate::evaluation::nemenyi_q(self.alpha, 2)?;
        Ok(())
    }

    /// Canonical text form, as copied into the output directory. Parsing it
    /// back (relative to `/`) gives the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "data_dir = {}", self.data_dir.display());
        for d in &self.datasets {
            let _ = writeln!(s, "dataset = {d}");
        }
        for c in &self.classifiers {
            let _ = writeln!(s, "classifier = {c}");
        }
        for a in &self.arms {
            let _ = writeln!(s, "arm = {a}");
        }
        let _ = writeln!(s, "resamples = {}", self.resamples);
        let _ = writeln!(s, "folds = {}", self.folds);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "timings = {}", self.timings);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        s
    }

    /// Everything that determines results (paths, threads and timings do not).
    fn fingerprint(&self) -> String {
        let mut s = String::new();
        for d in &self.datasets {
            let _ = writeln!(s, "dataset={d}");
        }
        for c in &self.classifiers {
            let _ = writeln!(s, "classifier={c}");
        }
        for a in &self.arms {
            let _ = writeln!(s, "arm={a}");
        }
        let _ = writeln!(s, "resamples={} folds={} seed={}", self.resamples, self.folds, self.seed);
        seed::fingerprint(s.as_bytes())
    }

    pub fn pipelines(&self) -> Vec<PipelineSpec> {
        let mut out = Vec::new();
        for c in &self.classifiers {
            for a in &self.arms {
                out.push(PipelineSpec {
                    classifier: c.clone(),
                    arm: *a,
                });
            }
        }
        out
    }

    /// All tasks in canonical order.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::new();
        for d in &self.datasets {
            for r in 0..self.resamples {
                for p in self.pipelines() {
                    out.push(Task {
                        dataset: d.clone(),
                        resample: r,
                        pipeline: p,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub dataset: String,
    pub resample: u64,
    pub pipeline: PipelineSpec,
}

impl Task {
    pub fn id(&self) -> String {
        format!("{}/{}/{}", self.dataset, self.resample, self.pipeline)
    }

    pub fn seed(&self, base_seed: u64) -> u64 {
        seed::derive_seed(&[
            "task",
            &base_seed.to_string(),
            &self.dataset,
            &self.resample.to_string(),
            &self.pipeline.classifier.to_string(),
            &self.pipeline.arm.to_string(),
        ])
    }
}

/// Outcome of fitting one pipeline on a train/test split.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub correct: usize,
    pub total: usize,
    pub applied: SmootherSpec,
    pub tuning: Option<TuningResult>,
}

/// Resolve the arm's smoother (tuning on `train` only if the arm is tuned),
/// fit on the smoothed train set and score once on the smoothed test set.
pub fn run_pipeline(
    pipeline: &PipelineSpec,
    train: &LabeledDataset,
    test: &LabeledDataset,
    folds_seed: u64,
    folds: usize,
    model_seed: u64,
) -> Result<PipelineOutcome> {
    let m = train.series_length();
    let (applied, tuning) = match pipeline.arm {
        Arm::None => (SmootherSpec::None, None),
        Arm::Default(kind) => {
            let spec = default_grid(kind, m)
                .default_spec()
                .ok_or_else(|| Error::Parameter(format!("{kind} has no default at series length {m}")))?;
            (spec, None)
        }
        Arm::Tuned(choice) => {
            let t = select_among(&choice.candidates(m), &pipeline.classifier, train, folds_seed, folds)?;
            (t.selected, Some(t))
        }
    };
    let tr = apply_smoother(&applied, train)?;
    let te = apply_smoother(&applied, test)?;
    let model = pipeline.classifier.train(&tr, model_seed)?;
    let correct = model.correct(&te)?;
    Ok(PipelineOutcome {
        correct,
        total: te.len(),
        applied,
        tuning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub correct: usize,
    pub total: usize,
    pub selected_spec: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub status: TaskStatus,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub record: Option<StoredRecord>,
    /// Fingerprint of the stored record.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fingerprint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub fingerprint: String,
    pub series_length: usize,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: String,
    pub config_fingerprint: String,
    pub inputs: BTreeMap<String, DatasetEntry>,
    pub tasks: BTreeMap<String, TaskEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn count(&self, status: TaskStatus) -> usize {
        self.tasks.values().filter(|t| t.status == status).count()
    }
}

fn record_fingerprint(task_id: &str, r: &StoredRecord) -> String {
    seed::fingerprint(format!("{task_id}\n{}/{}\n{}", r.correct, r.total, r.selected_spec).as_bytes())
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Stop after executing this many pending tasks (checkpoint testing).
    pub max_tasks: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub records: Vec<ResultRecord>,
    pub executed: usize,
    pub skipped: usize,
    pub failed: Vec<(String, String)>,
    pub pending: usize,
}

impl RunSummary {
    pub fn complete(&self) -> bool {
        self.pending == 0 && self.failed.is_empty()
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

struct LoadedDataset {
    train: LabeledDataset,
    test: LabeledDataset,
}

fn load_dataset(dir: &Path, name: &str) -> Result<(LoadedDataset, DatasetEntry)> {
    let (tp, sp) = locate_pair(dir, name)?;
    let mut bytes = std::fs::read(&tp).map_err(|e| Error::io(&tp, e))?;
    bytes.extend(std::fs::read(&sp).map_err(|e| Error::io(&sp, e))?);
    let (train, test) = parse_archive(&tp, &sp)?;
    let (train, test) = (rename(train, name)?, rename(test, name)?);
    let entry = DatasetEntry {
        fingerprint: seed::fingerprint(&bytes),
        series_length: train.series_length(),
        train_size: train.len(),
        test_size: test.len(),
    };
    Ok((LoadedDataset { train, test }, entry))
}

fn rename(d: LabeledDataset, name: &str) -> Result<LabeledDataset> {
    LabeledDataset::new(name, d.instances().to_vec())
}

/// Run every task of `cfg` not already completed in the output directory's
/// manifest, then write the canonical results file.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let cfg_path = out.join(CONFIG_FILE);
    std::fs::write(&cfg_path, cfg.to_text()).map_err(|e| Error::io(&cfg_path, e))?;
    let manifest_path = out.join(MANIFEST_FILE);
    let fingerprint = cfg.fingerprint();
    let mut manifest = if manifest_path.is_file() {
        let m = RunManifest::load(&manifest_path)?;
        if m.config_fingerprint != fingerprint {
            return Err(Error::Config(format!(
                "{} holds a run of a different configuration",
                out.display()
            )));
        }
        m
    } else {
        RunManifest {
            config: cfg.to_text(),
            config_fingerprint: fingerprint,
            inputs: BTreeMap::new(),
            tasks: BTreeMap::new(),
        }
    };
    manifest.config = cfg.to_text();

    let tasks = cfg.tasks();
    let mut loaded: BTreeMap<String, std::result::Result<LoadedDataset, String>> = BTreeMap::new();
    for d in &cfg.datasets {
        match load_dataset(&cfg.data_dir, d) {
            Ok((ld, entry)) => {
                if let Some(prev) = manifest.inputs.get(d) {
                    if prev.fingerprint != entry.fingerprint {
                        return Err(Error::Validation(format!(
                            "dataset `{d}` changed since the recorded run"
                        )));
                    }
                }
                manifest.inputs.insert(d.clone(), entry);
                loaded.insert(d.clone(), Ok(ld));
            }
            Err(e) => {
                loaded.insert(d.clone(), Err(e.to_string()));
            }
        }
    }

    let mut pending: Vec<&Task> = Vec::new();
    let mut skipped = 0;
    for t in &tasks {
        let id = t.id();
        match manifest.tasks.get(&id) {
            Some(e) if e.status == TaskStatus::Done => skipped += 1,
            _ => {
                manifest.tasks.insert(
                    id,
                    TaskEntry {
                        status: TaskStatus::Pending,
                        seed: t.seed(cfg.seed),
                        record: None,
                        fingerprint: None,
                        error: None,
                        seconds: None,
                    },
                );
                pending.push(t);
            }
        }
    }
    let run_now = opts.max_tasks.map_or(pending.len(), |n| n.min(pending.len()));
    let batch = &pending[..run_now];
    manifest.save(&manifest_path)?;

    // resamples are shared by every pipeline on the same (dataset, resample)
    let mut splits: BTreeMap<(String, u64), std::result::Result<(LabeledDataset, LabeledDataset), String>> =
        BTreeMap::new();
    for t in batch {
        let key = (t.dataset.clone(), t.resample);
        if splits.contains_key(&key) {
            continue;
        }
        let split = match &loaded[&t.dataset] {
            Ok(ld) => make_resample(&ld.train, &ld.test, t.resample).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        splits.insert(key, split);
    }

    let tuning_dir = out.join("tuning");
    let shared = Mutex::new(manifest);
    let work = || {
        batch.par_iter().for_each(|t| {
            let id = t.id();
            let task_seed = t.seed(cfg.seed);
            let start = Instant::now();
            let result = match &splits[&(t.dataset.clone(), t.resample)] {
                Err(e) => Err(e.clone()),
                Ok((train, test)) => run_pipeline(
                    &t.pipeline,
                    train,
                    test,
                    folds_seed(&t.dataset, t.resample),
                    cfg.folds,
                    task_seed,
                )
                .map_err(|e| e.to_string()),
            };
            let seconds = start.elapsed().as_secs_f64();
            let mut tuning_error = None;
            if let Ok(PipelineOutcome { tuning: Some(tr), .. }) = &result {
                let dir = tuning_dir.join(sanitize(&t.dataset));
                let path = dir.join(format!("{}_{}.tsv", t.resample, sanitize(&t.pipeline.to_string())));
                if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, tr.to_table())) {
                    tuning_error = Some(Error::io(&path, e).to_string());
                }
            }
            let entry = match (result, tuning_error) {
                (Ok(o), None) => {
                    let rec = StoredRecord {
                        correct: o.correct,
                        total: o.total,
                        selected_spec: o.applied.to_string(),
                    };
                    TaskEntry {
                        status: TaskStatus::Done,
                        seed: task_seed,
                        fingerprint: Some(record_fingerprint(&id, &rec)),
                        record: Some(rec),
                        error: None,
                        seconds: Some(seconds),
                    }
                }
                (Err(e), _) | (Ok(_), Some(e)) => TaskEntry {
                    status: TaskStatus::Failed,
                    seed: task_seed,
                    record: None,
                    fingerprint: None,
                    error: Some(e),
                    seconds: Some(seconds),
                },
            };
            let mut m = shared.lock().expect("manifest lock");
            m.tasks.insert(id, entry);
            // checkpoint; a failed write only costs recomputation on resume
            let _ = m.save(&manifest_path);
        })
    };
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work);
    } else {
        work();
    }
    let manifest = shared.into_inner().expect("manifest lock");
    manifest.save(&manifest_path)?;

    let mut records = Vec::new();
    let mut failed = Vec::new();
    let mut pending_left = 0;
    for t in &tasks {
        let id = t.id();
        let e = &manifest.tasks[&id];
        match e.status {
            TaskStatus::Done => {
                let r = e.record.as_ref().expect("done task has a record");
                records.push(ResultRecord {
                    dataset: t.dataset.clone(),
                    pipeline: t.pipeline.to_string(),
                    resample: t.resample,
                    correct: r.correct,
                    total: r.total,
                    selected_spec: Some(r.selected_spec.clone()),
                    seconds: if cfg.timings { e.seconds } else { None },
                });
            }
            TaskStatus::Failed => failed.push((id, e.error.clone().unwrap_or_default())),
            TaskStatus::Pending => pending_left += 1,
        }
    }
    write_records(&out.join(RESULTS_FILE), &records)?;
    crate::evaluation::sort_records(&mut records);
    Ok(RunSummary {
        records,
        executed: run_now,
        skipped,
        failed,
        pending: pending_left,
    })
}

/// Files written by [`report`] and the no-smoothing selection counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportSummary {
    pub files: Vec<PathBuf>,
    /// Per tuned pipeline: (times `none` was selected, tuned tasks).
    pub none_selected: BTreeMap<String, (usize, usize)>,
}

impl ReportSummary {
    /// (times `none` was selected, tuned tasks) pooled over the
    /// single-family tuned pipelines; `all-tuned` is left out.
    pub fn none_pooled(&self) -> (usize, usize) {
        self.none_selected
            .iter()
            .filter(|(p, _)| {
                p.parse::<PipelineSpec>()
                    .is_ok_and(|p| matches!(p.arm, Arm::Tuned(FamilyChoice::One(_))))
            })
            .fold((0, 0), |(a, b), (_, (n, t))| (a + n, b + t))
    }

    /// Fraction of single-family tuned tasks that kept the unsmoothed series.
    pub fn none_fraction(&self) -> Option<f64> {
        let (n, t) = self.none_pooled();
        (t > 0).then(|| n as f64 / t as f64)
    }
}

/// Pipelines of one classifier compared in one diagram: `none` first, then
/// the default (`tuned == false`) or tuned family arms.
pub fn comparison(cfg: &ExperimentConfig, classifier: &ClassifierSpec, tuned: bool) -> Vec<String> {
    let mut out = Vec::new();
    for a in &cfg.arms {
        let keep = match a {
            Arm::None => true,
            Arm::Default(_) => !tuned,
            Arm::Tuned(_) => tuned,
        };
        if keep {
            out.push(
                PipelineSpec {
                    classifier: classifier.clone(),
                    arm: *a,
                }
                .to_string(),
            );
        }
    }
    out
}

/// CD diagrams, rank-against-length tables and the selection summary for a
/// finished run directory.
pub fn report(dir: &Path) -> Result<ReportSummary> {
    let cfg_path = dir.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let cfg = ExperimentConfig::parse(&text, Path::new("/"))?;
    let records = crate::evaluation::read_records(&dir.join(RESULTS_FILE))?;
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;

    let mut have: BTreeMap<(String, String, u64), &ResultRecord> = BTreeMap::new();
    for r in &records {
        have.insert((r.dataset.clone(), r.pipeline.clone(), r.resample), r);
    }
    let mut missing = Vec::new();
    for t in cfg.tasks() {
        let key = (t.dataset.clone(), t.pipeline.to_string(), t.resample);
        if !have.contains_key(&key) {
            missing.push(format!("{}/{}/{}", key.0, key.1, key.2));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Incomplete { missing });
    }
    let records: Vec<ResultRecord> = records
        .into_iter()
        .filter(|r| cfg.datasets.contains(&r.dataset) && r.resample < cfg.resamples)
        .collect();
    let lengths: BTreeMap<String, usize> = manifest
        .inputs
        .iter()
        .map(|(k, v)| (k.clone(), v.series_length))
        .collect();

    let mut files = Vec::new();
    let none_arm = Arm::None.to_string();
    for c in &cfg.classifiers {
        for (tuned, variant) in [(false, "default"), (true, "tuned")] {
            let pipes = comparison(&cfg, c, tuned);
            if pipes.len() < 2 || (tuned && !cfg.arms.iter().any(|a| matches!(a, Arm::Tuned(_)))) {
                continue;
            }
            let matrix = AccuracyMatrix::from_records(&records, &pipes);
            let summary = average_ranks(&matrix)?;
            let stem = format!("{}_{variant}", sanitize(&c.to_string()));
            let svg = dir.join(format!("cd_{stem}.svg"));
            let title = format!(
                "{c}, {variant} smoothing: average ranks over {} datasets",
                summary.n_datasets()
            );
            emit_cd_diagram(&summary, cfg.alpha, &title, &svg)?;
            files.push(svg.clone());
            files.push(svg.with_extension("txt"));

            let reference = PipelineSpec {
                classifier: c.clone(),
                arm: Arm::None,
            }
            .to_string();
            if pipes.contains(&reference) {
                let rows = rank_vs_length(&matrix, &lengths, &reference)?;
                let csv = dir.join(format!("rank_length_{stem}.csv"));
                std::fs::write(&csv, rank_length_table(&rows)).map_err(|e| Error::io(&csv, e))?;
                let svg = dir.join(format!("rank_length_{stem}.svg"));
                let title = format!("{c}: rank of {none_arm} against series length ({variant})");
                std::fs::write(&svg, rank_length_svg(&rows, pipes.len(), &title)).map_err(|e| Error::io(&svg, e))?;
                files.push(csv);
                files.push(svg);
            }
        }
    }

    let mut none_selected: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in &records {
        let Ok(p) = r.pipeline.parse::<PipelineSpec>() else { continue };
        if !matches!(p.arm, Arm::Tuned(_)) {
            continue;
        }
        let e = none_selected.entry(r.pipeline.clone()).or_insert((0, 0));
        e.1 += 1;
        if r.selected_spec.as_deref() == Some(&SmootherSpec::None.to_string()) {
            e.0 += 1;
        }
    }
    let summary = ReportSummary {
        files: Vec::new(),
        none_selected,
    };
    let mut s = String::from("pipeline,none_selected,tuned_tasks,fraction\n");
    for (p, (n, t)) in &summary.none_selected {
        let _ = writeln!(s, "\"{p}\",{n},{t},{:.6}", *n as f64 / *t as f64);
    }
    if let Some(f) = summary.none_fraction() {
        let (n, t) = summary.none_pooled();
        let _ = writeln!(s, "family tuned,{n},{t},{f:.6}");
    }
    let sel = dir.join("none_selection.csv");
    std::fs::write(&sel, s).map_err(|e| Error::io(&sel, e))?;
    files.push(sel);
    Ok(ReportSummary { files, ..summary })
}
