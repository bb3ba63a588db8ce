//! Command-line front end for `dp-invariance`.
//!
//! Exit codes: 0 success, 1 check or threshold failure, 2 usage or data error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dp_invariance::inference::{self, Functional, TwoArmData};
use dp_invariance::process::{self, BaseCdf, DiscreteCdfDraw, DpParams};
use dp_invariance::verify::{self, CheckConfig, RunMode, VerificationReport};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = verify::DEFAULT_SEED;
pub const THREADS_ENV: &str = "DP_INVARIANCE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] dp_invariance::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn data(path: &Path, message: impl Into<String>) -> Self {
        CliError::Data {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "dp-invariance",
    version,
    about = "Invariant Dirichlet priors: verification and posterior inference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the theorem checks and write a verification report.
    Verify(VerifyArgs),
    /// Two-arm posterior analysis of a functional difference.
    Analyze(AnalyzeArgs),
    /// Draw random distributions from a Dirichlet process.
    Sample(SampleArgs),
    /// Compare the Bayesian and frequentist bootstraps by KS distance.
    BootstrapCompare(BootstrapCompareArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON check configuration; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report whether the falsified variants slip through; a sound harness exits 1.
    #[arg(long)]
    pub negative_control: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Control arm CSV with a `value` column.
    #[arg(long, requires = "b", conflicts_with = "data")]
    pub a: Option<PathBuf>,
    /// Treatment arm CSV with a `value` column.
    #[arg(long, requires = "a", conflicts_with = "data")]
    pub b: Option<PathBuf>,
    /// Single CSV with `value,arm` columns, arm ∈ {A, B}.
    #[arg(long, required_unless_present = "a")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    pub functional: Functional,
    #[arg(long, default_value_t = 4000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Observations; the base becomes their empirical CDF.
    #[arg(long, required_unless_present = "base", conflicts_with = "base")]
    pub data: Option<PathBuf>,
    /// `uniform:<lo>,<hi>` or `gaussian:<mu>,<sigma>`.
    #[arg(long)]
    pub base: Option<String>,
    /// Concentration; defaults to the number of observations with --data.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BootstrapCompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "mean")]
    pub functional: Functional,
    #[arg(long, default_value_t = 5000)]
    pub draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = inference::DEFAULT_KS_THRESHOLD)]
    pub threshold: f64,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailed,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => ExitCode::SUCCESS,
            Outcome::CheckFailed => ExitCode::from(1),
        }
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Verify(a) => cmd_verify(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::BootstrapCompare(a) => cmd_bootstrap_compare(&a),
    }
}

/// Worker count from `DP_INVARIANCE_THREADS`, if set.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(path: &Path, command: &'static str, body: &T) -> CliResult<()> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    write_pretty(path, &doc)
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialise");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

fn parse_value(path: &Path, row: usize, field: &str) -> CliResult<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::data(path, format!("row {row}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::data(path, format!("row {row}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn open_csv(path: &Path) -> CliResult<(csv::StringRecord, csv::Reader<fs::File>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(path, e.to_string()))?
        .clone();
    Ok((headers, reader))
}

fn column(path: &Path, headers: &csv::StringRecord, name: &str) -> CliResult<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::data(path, format!("missing `{name}` column")))
}

/// Reads the `value` column of a CSV file.
pub fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let (headers, mut reader) = open_csv(path)?;
    let col = column(path, &headers, "value")?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::data(path, e.to_string()))?;
        values.push(parse_value(path, i + 1, record.get(col).unwrap_or(""))?);
    }
    if values.is_empty() {
        return Err(CliError::data(path, "no observations"));
    }
    Ok(values)
}

/// Reads a `value,arm` CSV into (arm A, arm B).
pub fn read_two_arm(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let (headers, mut reader) = open_csv(path)?;
    let value = column(path, &headers, "value")?;
    let arm = column(path, &headers, "arm")?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::data(path, e.to_string()))?;
        let v = parse_value(path, i + 1, record.get(value).unwrap_or(""))?;
        match record.get(arm).unwrap_or("") {
            "A" => a.push(v),
            "B" => b.push(v),
            other => {
                return Err(CliError::data(
                    path,
                    format!("row {}: arm must be A or B, got {other:?}", i + 1),
                ))
            }
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(CliError::data(path, "both arms A and B need observations"));
    }
    Ok((a, b))
}

/// Parses `uniform:<lo>,<hi>` or `gaussian:<mu>,<sigma>`.
pub fn parse_base(spec: &str) -> CliResult<BaseCdf> {
    let usage = || {
        CliError::Usage(format!(
            "--base expects uniform:<lo>,<hi> or gaussian:<mu>,<sigma>, got {spec:?}"
        ))
    };
    let (kind, params) = spec.split_once(':').ok_or_else(usage)?;
    let (x, y) = params.split_once(',').ok_or_else(usage)?;
    let x: f64 = x.trim().parse().map_err(|_| usage())?;
    let y: f64 = y.trim().parse().map_err(|_| usage())?;
    let base = match kind.trim() {
        "uniform" => BaseCdf::uniform(x, y),
        "gaussian" => BaseCdf::gaussian(x, y),
        _ => return Err(usage()),
    };
    base.map_err(|e| CliError::Usage(format!("--base {spec:?}: {e}")))
}

fn load_config(args: &VerifyArgs) -> CliResult<CheckConfig> {
    let mut cfg = match &args.config {
        None => CheckConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))?
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("invalid check configuration: {e}")))?;
    Ok(cfg)
}

fn timing_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".timing.json");
    out.with_file_name(name)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let cfg = load_config(args)?;
    let mode = if args.negative_control {
        RunMode::NegativeControls
    } else {
        RunMode::Claims
    };
    let report: VerificationReport = verify::run_with_mode(&cfg, mode);
    write_pretty(&args.out, &report)?;
    #[derive(Serialize)]
    struct Timings<'a> {
        timings: &'a [verify::CheckTiming],
    }
    write_json(
        &timing_path(&args.out),
        "verify_timing",
        &Timings {
            timings: &report.timings,
        },
    )?;
    for c in &report.checks {
        println!(
            "{:<5} {:<34} {} = {:.3e} (threshold {:.3e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.worst_statistic,
            c.threshold
        );
    }
    println!("overall: {}", if report.overall_pass { "PASS" } else { "FAIL" });
    Ok(if report.overall_pass {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<Outcome> {
    let (control, treatment) = match (&args.a, &args.b, &args.data) {
        (Some(a), Some(b), None) => (read_values(a)?, read_values(b)?),
        (None, None, Some(d)) => read_two_arm(d)?,
        _ => return Err(CliError::Usage("give either --a and --b, or --data".into())),
    };
    let data = TwoArmData::new(control, treatment)?;
    let summary = inference::analyze_two_arm(&data, args.functional, args.draws, args.level, args.seed)?;
    write_json(&args.out, "analyze", &summary)?;
    let ci = &summary.credible_interval;
    println!(
        "{} difference (B − A): {:.6} [{:.6}, {:.6}] at {:.0}% (n_A = {}, n_B = {}, {} draws)",
        summary.functional,
        summary.point_estimate,
        ci.lo,
        ci.hi,
        100.0 * ci.level,
        summary.control.observations,
        summary.treatment.observations,
        summary.draws_used
    );
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SampleDocument<'a> {
    process: &'a DpParams,
    /// True when draws are exact Dirichlet weights on the data atoms.
    exact_on_atoms: bool,
    seed: u64,
    draws: &'a [DiscreteCdfDraw],
}

pub fn cmd_sample(args: &SampleArgs) -> CliResult<Outcome> {
    let base = match (&args.data, &args.base) {
        (Some(path), None) => BaseCdf::Empirical(process::empirical_cdf(&read_values(path)?)?),
        (None, Some(spec)) => parse_base(spec)?,
        _ => return Err(CliError::Usage("give exactly one of --data or --base".into())),
    };
    let alpha = match (args.alpha, &args.data) {
        (Some(a), _) => a,
        (None, Some(path)) => read_values(path)?.len() as f64,
        (None, None) => return Err(CliError::Usage("--alpha is required with --base".into())),
    };
    let params = DpParams::new(alpha, base)?;
    let draws = process::sample_process(&params, process::DEFAULT_TRUNCATION_TOL, args.seed, args.draws)?;
    write_json(
        &args.out,
        "sample",
        &SampleDocument {
            process: &params,
            exact_on_atoms: matches!(params.base(), BaseCdf::Empirical(_)),
            seed: args.seed,
            draws: &draws,
        },
    )?;
    let atoms: usize = draws.iter().map(|d| d.atoms.len()).sum();
    println!("{} draws from DP(α = {alpha}), {atoms} atoms in total", draws.len());
    Ok(Outcome::Success)
}

pub fn cmd_bootstrap_compare(args: &BootstrapCompareArgs) -> CliResult<Outcome> {
    if args.threshold.is_nan() || args.threshold < 0.0 {
        return Err(CliError::Usage(format!(
            "--threshold must be nonnegative, got {}",
            args.threshold
        )));
    }
    let data = read_values(&args.data)?;
    let out = inference::bootstrap_equivalence(&data, args.functional, args.draws, args.seed, args.threshold)?;
    println!(
        "{} ks_distance = {:.6} threshold = {} ({} draws per method)",
        if out.pass { "PASS" } else { "FAIL" },
        out.ks_distance,
        out.threshold,
        out.draws
    );
    Ok(if out.pass {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}
