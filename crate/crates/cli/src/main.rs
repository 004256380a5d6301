use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smoothtsc::classifiers::ClassifierSpec;
use smoothtsc::dataset::TimeSeries;
use smoothtsc::experiment::{expand_arms, report, run_experiment, ExperimentConfig, RunOptions};
use smoothtsc::smoothing::SmootherSpec;
use smoothtsc::{Error, Result};

/// Smoothing filters as preprocessing for time series classifiers.
#[derive(Parser, Debug)]
#[command(name = "smoothtsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run (or resume) an experiment sweep.
    Run(RunArgs),
    /// Critical difference diagrams and summaries for a finished run.
    Report {
        /// Output directory of a previous `run`.
        #[arg(long = "in")]
        dir: PathBuf,
    },
    /// Apply one smoother to every series (one per line) of a file.
    Smooth {
        /// Smoother spec, e.g. `ma:w=5`, `sg:w=9,n=3`, `siv:k=5`.
        #[arg(long)]
        method: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Key/value config file; the other flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dataset names.
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<String>,
    /// Directory holding `<Name>_TRAIN`/`<Name>_TEST` files.
    #[arg(long, default_value = "data")]
    data: PathBuf,
    /// Comma-separated classifier selectors. Use `;` to separate entries
    /// that contain commas themselves, e.g. `rotf:trees=5,seed=1`.
    #[arg(long, default_value = "ed1nn")]
    classifiers: String,
    /// Comma-separated smoother arms: none, ma, exp, gf, sg, dft, siv.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    arms: Vec<String>,
    /// Also run a CV-tuned variant of every family arm.
    #[arg(long)]
    tuned: bool,
    #[arg(long, default_value_t = 10)]
    resamples: u64,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Record wall-clock seconds in the results file.
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Stop after this many tasks; a later run resumes.
    #[arg(long)]
    max_tasks: Option<usize>,
}

fn split_classifiers(s: &str) -> Result<Vec<ClassifierSpec>> {
    let parts: Vec<&str> = if s.contains(';') {
        s.split(';').collect()
    } else {
        s.split(',').collect()
    };
    parts
        .into_iter()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect()
}

fn config_from_flags(a: &RunArgs) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig {
        data_dir: a.data.clone(),
        datasets: a.datasets.clone(),
        classifiers: split_classifiers(&a.classifiers)?,
        arms: expand_arms(&a.arms, a.tuned)?,
        resamples: a.resamples,
        folds: a.folds,
        seed: a.seed,
        out_dir: a.out.clone(),
        threads: a.threads,
        timings: a.timings,
        alpha: a.alpha,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => config_from_flags(&a)?,
    };
    let summary = run_experiment(&cfg, &RunOptions { max_tasks: a.max_tasks })?;
    println!(
        "{} tasks run, {} already done, {} failed, {} pending; results in {}",
        summary.executed,
        summary.skipped,
        summary.failed.len(),
        summary.pending,
        cfg.out_dir.display()
    );
    for (task, err) in &summary.failed {
        eprintln!("failed: {task}: {err}");
    }
    if summary.complete() {
        Ok(())
    } else {
        let mut missing: Vec<String> = summary.failed.into_iter().map(|(t, _)| t).collect();
        if summary.pending > 0 {
            missing.push(format!("{} pending tasks", summary.pending));
        }
        Err(Error::Incomplete { missing })
    }
}

fn parse_series_file(path: &Path) -> Result<Vec<TimeSeries>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let values = tokens
            .iter()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: origin.clone(),
                    line: i + 1,
                    token: t.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(TimeSeries::new(values).map_err(|e| Error::Format {
            path: origin.clone(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn smooth(method: &str, input: &Path, output: &Path) -> Result<()> {
    let spec: SmootherSpec = method.parse()?;
    let mut text = String::new();
    for s in parse_series_file(input)? {
        let values: Vec<String> = spec.smooth(&s)?.values().iter().map(f64::to_string).collect();
        text.push_str(&values.join(","));
        text.push('\n');
    }
    std::fs::write(output, text).map_err(|e| Error::io(output, e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Report { dir } => report(&dir).map(|s| {
            for f in &s.files {
                println!("{}", f.display());
            }
            if let Some(frac) = s.none_fraction() {
                println!("no smoothing selected in {:.1}% of single-family tuned tasks", 100.0 * frac);
            }
        }),
        Command::Smooth { method, input, output } => smooth(&method, &input, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
