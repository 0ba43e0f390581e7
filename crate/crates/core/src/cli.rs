//! Command-line front end: argument parsing into a serializable [`RunConfig`]
//! and dispatch to the `simulate`, `density`, `verify` and `stability`
//! subcommands.
//!
//! Exit codes: 0 on success or a passing verification, 1 on a failing
//! verification or an I/O error, 2 on a usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alpha::{AlphaSpec, AlphaStep};
use crate::error::{Error, Result};
use crate::kernel::{transition_density_detailed, KernelQuery};
use crate::path::make_grid;
use crate::report::{ExperimentReport, Rule};
use crate::verify::{self, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelReduction,
    KernelNormalization,
    ChapmanKolmogorov,
    Reflection,
    Marginal,
    LocalTime,
    Identities,
    Moments,
    Martingale,
    Stability,
    Determinism,
    Uniqueness,
    All,
}

impl Suite {
    /// The acceptance set, in order.
    pub const ACCEPTANCE: [Suite; 11] = [
        Suite::KernelReduction,
        Suite::KernelNormalization,
        Suite::ChapmanKolmogorov,
        Suite::Reflection,
        Suite::Marginal,
        Suite::LocalTime,
        Suite::Identities,
        Suite::Moments,
        Suite::Martingale,
        Suite::Stability,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelReduction => "kernel-reduction",
            Suite::KernelNormalization => "kernel-normalization",
            Suite::ChapmanKolmogorov => "chapman-kolmogorov",
            Suite::Reflection => "reflection",
            Suite::Marginal => "marginal",
            Suite::LocalTime => "local-time",
            Suite::Identities => "identities",
            Suite::Moments => "moments",
            Suite::Martingale => "martingale",
            Suite::Stability => "stability",
            Suite::Determinism => "determinism",
            Suite::Uniqueness => "uniqueness",
            Suite::All => "all",
        }
    }

    /// Desk-scale `(dt, paths, eps)` used when the flags leave them unset.
    fn budget(self) -> (f64, usize, f64) {
        match self {
            Suite::Reflection | Suite::Marginal | Suite::Moments => (1e-4, 50_000, 0.03),
            Suite::LocalTime => (1e-5, 2_000, 0.02),
            Suite::Identities => (1e-5, 200, 0.03),
            Suite::Martingale => (1e-5, 20_000, 0.03),
            Suite::Stability => (1e-4, 10_000, 0.03),
            Suite::Determinism | Suite::Uniqueness => (1e-4, 8, 0.03),
            _ => (1e-4, 0, 0.03),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Simulate skew paths and write them as CSV `path,t,value`.
    Simulate,
    /// Evaluate the transition density on a y-grid, CSV `y,p`.
    Density,
    /// Run a named verification suite.
    Verify,
    /// Coupled stability experiment over a sequence of skew functions.
    Stability,
}

#[derive(Debug, Parser)]
#[command(name = "isbm", version, about = "Time-inhomogeneous skew Brownian motion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// Every flag is optional here; unset values fall back to the config file,
/// then to defaults.
#[derive(Debug, Default, Clone, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Skew function inline, `t0:a0,t1:a1,…` with t0 = 0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Skew function as CSV `t,alpha`.
    #[arg(long, global = true)]
    pub alpha_file: Option<PathBuf>,
    /// Sequence of skew functions as CSV `n,t,alpha`.
    #[arg(long, global = true)]
    pub alpha_seq: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Starting point.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// `min:max:step`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y_grid: Option<String>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; output never depends on it.
    #[arg(long, global = true, env = "ISBM_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// JSON file with any of the above (kebab-case keys); flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    fn overlay(self, base: Flags) -> Flags {
        macro_rules! pick {
            ($($f:ident),*) => { Flags { $($f: self.$f.or(base.$f),)* } };
        }
        pick!(alpha, alpha_file, alpha_seq, s, t, x, y_grid, paths, dt, eps, horizon, seed, threads, out, report, suite, quad_tol, config)
    }
}

/// Fully resolved invocation; echoed into every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Inline form of the skew function (resolved from a file if needed).
    pub alpha: Option<String>,
    pub alpha_file: Option<PathBuf>,
    pub alpha_seq: Option<PathBuf>,
    pub horizon: f64,
    pub s: f64,
    pub t: Option<f64>,
    pub x: f64,
    pub y_grid: Option<String>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub suite: Suite,
    pub quad_tol: f64,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit code 2.
    Usage(String),
    /// Failure while running; exit code 1.
    Run(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => CliError::Run(e),
            Error::Parse(_) | Error::InvalidAlpha(_) | Error::InvalidGrid(_) | Error::InvalidQuery(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Run(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) => EXIT_FAIL,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `argv` (including the program name) into a validated config.
/// `--help` and `--version` print and exit the process directly.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
        _ => CliError::Usage(e.render().to_string()),
    })?;
    let flags = match &cli.flags.config {
        Some(path) => {
            let text = read(path).map_err(CliError::Run)?;
            let base: Flags = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            cli.flags.clone().overlay(base)
        }
        None => cli.flags.clone(),
    };
    resolve(cli.command, flags)
}

fn positive(name: &str, v: Option<f64>) -> std::result::Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("--{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn resolve(command: Command, f: Flags) -> std::result::Result<RunConfig, CliError> {
    let horizon = f.horizon.unwrap_or(1.0);
    positive("horizon", Some(horizon))?;
    positive("dt", f.dt)?;
    positive("eps", f.eps)?;
    positive("quad-tol", f.quad_tol)?;
    if f.alpha.is_some() && f.alpha_file.is_some() {
        return Err(CliError::Usage("give either --alpha or --alpha-file, not both".into()));
    }
    let alpha = match (&f.alpha, &f.alpha_file) {
        (Some(text), _) => Some(AlphaStep::parse_inline(text, horizon)?.to_string()),
        (None, Some(path)) => Some(AlphaStep::from_csv(&read(path).map_err(CliError::Run)?, horizon)?.to_string()),
        (None, None) => None,
    };
    if let Some(0) = f.paths {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    if let Some(0) = f.threads {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    if let Some(g) = &f.y_grid {
        parse_y_grid(g)?;
    }
    let needs_alpha = match command {
        Command::Simulate | Command::Density | Command::Stability => true,
        Command::Verify => false,
    };
    if needs_alpha && alpha.is_none() {
        return Err(CliError::Usage("--alpha or --alpha-file is required".into()));
    }
    match command {
        Command::Density => {
            if f.t.is_none() {
                return Err(CliError::Usage("density needs --t".into()));
            }
            if f.y_grid.is_none() {
                return Err(CliError::Usage("density needs --y-grid min:max:step".into()));
            }
        }
        Command::Stability if f.alpha_seq.is_none() => {
            return Err(CliError::Usage("stability needs --alpha-seq".into()));
        }
        _ => {}
    }
    Ok(RunConfig {
        command,
        alpha,
        alpha_file: f.alpha_file,
        alpha_seq: f.alpha_seq,
        horizon,
        s: f.s.unwrap_or(0.0),
        t: f.t,
        x: f.x.unwrap_or(0.0),
        y_grid: f.y_grid,
        paths: f.paths,
        dt: f.dt,
        eps: f.eps,
        seed: f.seed.unwrap_or(0),
        threads: f.threads,
        out: f.out,
        report: f.report,
        suite: f.suite.unwrap_or(Suite::All),
        quad_tol: f.quad_tol.unwrap_or(1e-8),
    })
}

/// `min:max:step` → the grid points `min + i·step ≤ max`.
pub fn parse_y_grid(text: &str) -> std::result::Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid --y-grid \"{text}\": expected min:max:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<std::result::Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(CliError::Usage(format!("--y-grid \"{text}\" has too many points")));
    }
    Ok((0..=n).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}

impl RunConfig {
    fn alpha_step(&self) -> Result<AlphaStep> {
        let text = self
            .alpha
            .as_deref()
            .ok_or_else(|| Error::Parse("no skew function given".into()))?;
        AlphaStep::parse_inline(text, self.horizon)
    }

    fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses `n,t,alpha` rows into one step function per `n` (in order of first
/// appearance).
pub fn parse_alpha_seq(text: &str, horizon: f64) -> Result<(Vec<usize>, Vec<AlphaStep>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("n,t,alpha") => {}
        other => return Err(Error::Parse(format!("expected header `n,t,alpha`, got {other:?}"))),
    }
    let mut groups: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [n, t, a] = cols[..] else {
            return Err(Error::Parse(format!("malformed row `{line}`")));
        };
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad n in row `{line}`")))?;
        let t: f64 = t.parse().map_err(|_| Error::Parse(format!("bad time in row `{line}`")))?;
        let a: f64 = a.parse().map_err(|_| Error::Parse(format!("bad alpha in row `{line}`")))?;
        match groups.iter_mut().find(|g| g.0 == n) {
            Some(g) => g.1.push((t, a)),
            None => groups.push((n, vec![(t, a)])),
        }
    }
    if groups.is_empty() {
        return Err(Error::Parse("empty skew sequence".into()));
    }
    let mut labels = Vec::new();
    let mut steps = Vec::new();
    for (n, pairs) in groups {
        labels.push(n);
        steps.push(AlphaStep::from_pairs(&pairs, horizon)?);
    }
    Ok((labels, steps))
}

/// Runs a parsed config and returns the process exit code, printing a short
/// summary to stdout and errors to stderr.
pub fn run(config: &RunConfig) -> i32 {
    let pool = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_FAIL;
        }
    };
    match pool.install(|| dispatch(config)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn finish(config: &RunConfig, report: ExperimentReport) -> std::result::Result<i32, CliError> {
    let report = report.with_config(config.echo());
    if let Some(path) = &config.report {
        write(path, &report.to_json()?)?;
    }
    // keep stdout clean when it carries CSV
    if config.command == Command::Verify || config.out.is_some() {
        print!("{}", report.summary());
    } else {
        eprint!("{}", report.summary());
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn dispatch(config: &RunConfig) -> std::result::Result<i32, CliError> {
    match config.command {
        Command::Simulate => {
            let (csv, report) = simulate(config)?;
            if let Some(path) = &config.out {
                write(path, &csv)?;
            } else if config.report.is_none() {
                print!("{csv}");
                return Ok(EXIT_OK);
            }
            finish(config, report)
        }
        Command::Density => {
            let (csv, report) = density(config)?;
            match &config.out {
                Some(path) => write(path, &csv)?,
                None => print!("{csv}"),
            }
            finish(config, report)
        }
        Command::Verify => {
            let report = verify_suite(config, config.suite)?;
            finish(config, report)
        }
        Command::Stability => {
            let (csv, report) = stability(config)?;
            match &config.out {
                Some(path) => write(path, &csv)?,
                None => print!("{csv}"),
            }
            finish(config, report)
        }
    }
}

/// Long-format CSV `path,t,value` of `paths` skew paths, plus a report with
/// the terminal mean.
pub fn simulate(config: &RunConfig) -> Result<(String, ExperimentReport)> {
    let alpha = config.alpha_step()?;
    let dt = config.dt.unwrap_or(1e-4);
    let paths = config.paths.unwrap_or(10);
    let grid = make_grid(0.0, config.horizon, dt)?;
    let cfg = SimConfig::new(dt, paths, config.seed, config.eps.unwrap_or(0.03));
    let spec = AlphaSpec::Step(alpha.clone());
    let chunks = verify::map_paths(&spec, &grid, &cfg, config.x, |p| {
        let mut out = String::with_capacity(p.x.len() * 50);
        for (k, v) in p.x.values().iter().enumerate() {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", p.rng.path_index, grid.time(k), v);
        }
        Ok((out, p.x.last()))
    })?;
    let mut csv = String::from("path,t,value\n");
    let mut last = Vec::with_capacity(paths);
    for (chunk, x) in chunks {
        csv.push_str(&chunk);
        last.push(x);
    }
    let m = crate::stats::mean_se(&last);
    let mut report = ExperimentReport::new(
        "simulate",
        json!({"alpha": alpha.to_string(), "x0": config.x, "horizon": config.horizon, "dt": dt, "paths": paths, "seed": config.seed}),
    );
    report.stat("mean_terminal", m.value, if paths > 1 { m.std_error } else { 0.0 });
    Ok((csv, report))
}

/// CSV `y,p` of the transition density over the y-grid, plus a report with
/// the quadrature settings and the worst error estimate.
pub fn density(config: &RunConfig) -> std::result::Result<(String, ExperimentReport), CliError> {
    let alpha = config.alpha_step()?;
    let t = config.t.ok_or_else(|| CliError::Usage("density needs --t".into()))?;
    let ys = parse_y_grid(config.y_grid.as_deref().unwrap_or(""))?;
    let q = KernelQuery::new(config.s, t, config.x, 0.0).with_tol(config.quad_tol);
    q.validate()?;
    let values = ys
        .par_iter()
        .map(|&y| transition_density_detailed(&q.at(config.x, y), &alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("y,p\n");
    for (y, d) in ys.iter().zip(&values) {
        let _ = writeln!(csv, "{y},{:.16e}", d.value);
    }
    let worst = values.iter().map(|d| d.error_estimate).fold(0.0, f64::max);
    let subdiv: usize = values.iter().map(|d| d.subdivisions).sum();
    let mut report = ExperimentReport::new(
        "density",
        json!({
            "alpha": alpha.to_string(), "s": config.s, "t": t, "x": config.x,
            "y_grid": config.y_grid, "quad_tol": q.quad_tol, "max_subdiv": q.max_subdiv,
        }),
    );
    report.exact("max_error_estimate", worst);
    report.exact("total_subdivisions", subdiv as f64);
    report.exact("points", ys.len() as f64);
    Ok((csv, report))
}

fn sim_config(config: &RunConfig, suite: Suite) -> SimConfig {
    let (dt, paths, eps) = suite.budget();
    SimConfig::new(
        config.dt.unwrap_or(dt),
        config.paths.unwrap_or(paths),
        config.seed,
        config.eps.unwrap_or(eps),
    )
}

fn default_step(horizon: f64) -> Result<AlphaStep> {
    AlphaStep::from_pairs(&[(0.0, 0.9), (0.5 * horizon, 0.1)], horizon)
}

/// Runs one suite (or all of them, merged into a single report).
pub fn verify_suite(config: &RunConfig, suite: Suite) -> std::result::Result<ExperimentReport, CliError> {
    let h = config.horizon;
    let cfg = sim_config(config, suite);
    let given = config.alpha.as_ref().map(|_| config.alpha_step()).transpose()?;
    let alpha_or = |fallback: Result<AlphaStep>| -> Result<AlphaStep> {
        match &given {
            Some(a) => Ok(a.clone()),
            None => fallback,
        }
    };
    let t = config.t.unwrap_or(h);
    let report = match suite {
        Suite::KernelReduction => verify::kernel_reduction_suite(config.quad_tol)?,
        Suite::KernelNormalization => verify::kernel_normalization_suite(20, config.seed)?,
        Suite::ChapmanKolmogorov => verify::chapman_kolmogorov_suite(10, config.seed)?,
        Suite::Reflection => verify::reflection_law_test(&alpha_or(AlphaStep::constant(0.5, h))?, t, config.x, &cfg)?,
        Suite::Marginal => verify::marginal_vs_kernel_test(&alpha_or(default_step(h))?, t, config.x, &cfg)?,
        Suite::LocalTime => verify::local_time_calibration(h, &cfg)?,
        Suite::Identities => verify::identity_residual_test(&alpha_or(default_step(h))?, &cfg, 0.05)?,
        Suite::Moments => {
            let t0 = config.t.unwrap_or(0.5 * h);
            let lags: Vec<f64> = [1e-3, 1e-2, 1e-1].iter().map(|e| e * h).collect();
            verify::moment_scaling_test(&alpha_or(AlphaStep::constant(0.5, h))?, t0, &lags, &cfg)?
        }
        Suite::Martingale => {
            let s = if config.s > 0.0 { config.s } else { 0.5 * h };
            verify::martingale_identity_test(&alpha_or(default_step(h))?, s, t, &cfg)?
        }
        Suite::Stability => {
            let limit = AlphaSpec::function(h, move |u| u / h);
            let labels = vec![2, 8, 32];
            let seq = labels
                .iter()
                .map(|&n| crate::alpha::discretize_alpha(&limit, n).map(AlphaSpec::Step))
                .collect::<Result<Vec<_>>>()?;
            verify::stability_experiment(&seq, &labels, &limit, &cfg)?.report
        }
        Suite::Determinism => determinism_suite(config, &cfg)?,
        Suite::Uniqueness => verify::uniqueness_probe(&alpha_or(AlphaStep::constant(0.5, h))?, &cfg)?,
        Suite::All => {
            let mut merged = ExperimentReport::new("all", json!({}));
            let mut params = serde_json::Map::new();
            for s in Suite::ACCEPTANCE {
                let r = verify_suite(config, s)?;
                let prefix = s.name();
                params.insert(prefix.to_string(), r.params.clone());
                for (k, v) in &r.stats {
                    merged.stat(format!("{prefix}.{k}"), v.value, v.std_error);
                }
                for (k, th) in &r.thresholds {
                    merged.threshold(
                        format!("{prefix}.{k}"),
                        &format!("{prefix}.{}", th.stat),
                        th.rule,
                        th.null_quantile,
                        th.allowance,
                    );
                }
            }
            merged.params = Value::Object(params);
            merged
        }
    };
    Ok(report)
}

/// Simulates the same paths under worker pools of 1 and 4 threads and
/// compares the CSV bytes.
fn determinism_suite(config: &RunConfig, cfg: &SimConfig) -> Result<ExperimentReport> {
    let alpha = match &config.alpha {
        Some(_) => config.alpha_step()?,
        None => default_step(config.horizon)?,
    };
    let sim = RunConfig {
        command: Command::Simulate,
        alpha: Some(alpha.to_string()),
        paths: Some(cfg.paths),
        dt: Some(cfg.dt),
        ..config.clone()
    };
    let render = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidExperiment(e.to_string()))?;
        pool.install(|| simulate(&sim).map(|r| r.0))
    };
    let one = render(1)?;
    let again = render(1)?;
    let four = render(4)?;
    let mut report = ExperimentReport::new(
        "determinism",
        json!({"alpha": alpha.to_string(), "dt": cfg.dt, "paths": cfg.paths, "seed": cfg.seed, "threads": [1, 1, 4]}),
    );
    report.exact("repeat_identical", if one == again { 1.0 } else { 0.0 });
    report.exact("threads_identical", if one == four { 1.0 } else { 0.0 });
    report.exact("bytes", one.len() as f64);
    report.threshold("repeat", "repeat_identical", Rule::Exact { target: 1.0 }, 0.0, 0.0);
    report.threshold("threads", "threads_identical", Rule::Exact { target: 1.0 }, 0.0, 0.0);
    Ok(report)
}

/// CSV of `D_n` for the sequence in `--alpha-seq` against the limit `--alpha`.
pub fn stability(config: &RunConfig) -> Result<(String, ExperimentReport)> {
    let limit = config.alpha_step()?;
    let path = config
        .alpha_seq
        .as_ref()
        .ok_or_else(|| Error::Parse("stability needs --alpha-seq".into()))?;
    let (labels, steps) = parse_alpha_seq(&read(path)?, config.horizon)?;
    let cfg = sim_config(config, Suite::Stability);
    let seq: Vec<AlphaSpec> = steps.into_iter().map(AlphaSpec::Step).collect();
    let out = verify::stability_experiment(&seq, &labels, &AlphaSpec::Step(limit), &cfg)?;
    Ok((out.to_csv(), out.report))
}
