//! Command runners behind the `grekit` binary.
//!
//! Each command writes one CSV (plus JSON counterexamples for failed fuzz
//! trials) into the output directory and reports an [`ExitStatus`]. Trials run
//! in parallel but are collected in trial order, so outputs are byte-identical
//! for a given seed.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::ConvexEta;
use crate::extreal::ExtendedReal;
use crate::fuzz::{random_stochastic_matrix, trial_rng, CsiszarTrial, FuzzOptions, LrTrial, ProjectionMode};
use crate::growth::{run_growth_config, GrowthConfig};
use crate::io::{format_extended, format_float, read_matrix_csv, read_vector_csv, write_csv, write_growth_trace, write_power_trace, write_transport_trace};
use crate::transport::{run_transport_config, TransportConfig};
use crate::weighted::{power_iterate_gre, verify_csiszar, verify_lr, GridFunction, Measure, PositiveOperator};

/// Relative tolerance on `Σᵢ μ₂ᵢ (LR margin)ᵢ = H₁ − H₂` for stochastic trials.
pub const INTEGRATED_TOL: f64 = 1e-10;

pub const GROWTH_PRESETS: &[&str] = &["binary-fragmentation"];
pub const TRANSPORT_PRESETS: &[&str] = &["beam-isotropic"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyLr,
    VerifyCsiszar,
    PowerIterate,
    SimulateGrowth,
    SimulateTransport,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyLr => "verify-lr",
            Command::VerifyCsiszar => "verify-csiszar",
            Command::PowerIterate => "power-iterate",
            Command::SimulateGrowth => "simulate-growth",
            Command::SimulateTransport => "simulate-transport",
        }
    }

    pub fn csv_name(self) -> &'static str {
        match self {
            Command::VerifyLr => "verify_lr.csv",
            Command::VerifyCsiszar => "verify_csiszar.csv",
            Command::PowerIterate => "power_iterate.csv",
            Command::SimulateGrowth => "growth_trace.csv",
            Command::SimulateTransport => "transport_trace.csv",
        }
    }
}

/// Process exit status: 0 pass, 1 usage or I/O, 2 inequality or invariant
/// violated, 3 runtime precondition lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    Usage,
    Violation,
    PreconditionLost,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Usage => 1,
            ExitStatus::Violation => 2,
            ExitStatus::PreconditionLost => 3,
        }
    }

    pub fn from_error(err: &Error) -> Self {
        if err.is_runtime_precondition() {
            ExitStatus::PreconditionLost
        } else {
            ExitStatus::Usage
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Command,
    pub seed: u64,
    pub trials: usize,
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub output_dir: PathBuf,
}

impl RunManifest {
    pub fn new(command: Command, output_dir: impl Into<PathBuf>) -> Self {
        RunManifest { command, seed: 0, trials: 1000, config: None, preset: None, output_dir: output_dir.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn failed(status: ExitStatus, message: String) -> Self {
        Outcome { status, summary: vec![message], files: Vec::new() }
    }
}

/// Runs a command; errors become an [`Outcome`] with the matching status.
pub fn execute(manifest: &RunManifest) -> Outcome {
    let result = fs::create_dir_all(&manifest.output_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", manifest.output_dir.display())))
        .and_then(|_| match manifest.command {
            Command::VerifyLr => verify_lr_command(manifest),
            Command::VerifyCsiszar => verify_csiszar_command(manifest),
            Command::PowerIterate => power_iterate_command(manifest),
            Command::SimulateGrowth => simulate_growth_command(manifest),
            Command::SimulateTransport => simulate_transport_command(manifest),
        });
    result.unwrap_or_else(|e| Outcome::failed(ExitStatus::from_error(&e), format!("error: {e}")))
}

/// Reads a config file: JSON when the extension is `.json`, TOML otherwise.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn growth_preset(name: &str) -> Result<GrowthConfig> {
    match name {
        "binary-fragmentation" => GrowthConfig::binary_fragmentation(200, 2000),
        _ => Err(Error::Config(format!("unknown growth preset `{name}` (known: {})", GROWTH_PRESETS.join(", ")))),
    }
}

pub fn transport_preset(name: &str) -> Result<TransportConfig> {
    match name {
        "beam-isotropic" => TransportConfig::beam_isotropic(100, 1000),
        _ => Err(Error::Config(format!("unknown transport preset `{name}` (known: {})", TRANSPORT_PRESETS.join(", ")))),
    }
}

fn optional_config<T: DeserializeOwned + Default>(manifest: &RunManifest) -> Result<T> {
    if manifest.preset.is_some() {
        return Err(Error::Config(format!("{} has no presets", manifest.command.name())));
    }
    manifest.config.as_deref().map_or_else(|| Ok(T::default()), load_config)
}

fn config_or_preset<T: DeserializeOwned>(
    manifest: &RunManifest,
    default_preset: &str,
    preset: fn(&str) -> Result<T>,
) -> Result<T> {
    match (&manifest.config, &manifest.preset) {
        (Some(_), Some(_)) => Err(Error::Config("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => load_config(path),
        (None, Some(name)) => preset(name),
        (None, None) => preset(default_preset),
    }
}

fn check_fuzz_options(opts: &FuzzOptions, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if opts.max_dim == 0 {
        return Err(Error::Config("max_dim must be at least 1".into()));
    }
    for (name, p) in [
        ("zero_fraction", opts.zero_fraction),
        ("zero_line_fraction", opts.zero_line_fraction),
        ("substochastic_fraction", opts.substochastic_fraction),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    if opts.tolerance.is_nan() || opts.tolerance < 0.0 {
        return Err(Error::Config(format!("tolerance must be nonnegative, got {}", opts.tolerance)));
    }
    Ok(())
}

#[derive(Serialize)]
struct Counterexample<'a, T: Serialize> {
    seed: u64,
    instance: &'a T,
    min_margin: f64,
    argmin_index: usize,
    lhs: Vec<String>,
    rhs: Vec<String>,
}

fn write_counterexample<T: Serialize>(
    dir: &Path,
    name: String,
    seed: u64,
    instance: &T,
    report: &crate::weighted::MarginReport,
) -> Result<PathBuf> {
    let example = Counterexample {
        seed,
        instance,
        min_margin: report.min_margin,
        argmin_index: report.argmin_index,
        lhs: report.lhs.iter().map(|x| format_extended(*x)).collect(),
        rhs: report.rhs.iter().map(|x| format_extended(*x)).collect(),
    };
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(&example).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// One verified LR trial.
#[derive(Debug, Clone)]
pub struct LrOutcome {
    pub trial: LrTrial,
    pub report: crate::weighted::MarginReport,
}

/// Generates and checks LR trials `0..trials` in parallel.
pub fn run_lr_fuzz(seed: u64, trials: usize, opts: &FuzzOptions) -> Result<Vec<LrOutcome>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = LrTrial::generate(seed, t, opts);
            let (f, g) = trial.functions()?;
            let report = verify_lr(&trial.operator()?, &trial.eta, &f, &g, opts.tolerance)?;
            Ok(LrOutcome { trial, report })
        })
        .collect()
}

fn verify_lr_command(manifest: &RunManifest) -> Result<Outcome> {
    let opts: FuzzOptions = optional_config(manifest)?;
    check_fuzz_options(&opts, manifest.trials)?;
    let outcomes = run_lr_fuzz(manifest.seed, manifest.trials, &opts)?;

    let mut files = Vec::new();
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        min_margin = min_margin.min(o.report.min_margin);
        rows.push(vec![
            o.trial.trial.to_string(),
            o.trial.matrix.nrows().to_string(),
            o.trial.matrix.ncols().to_string(),
            o.trial.eta.label(),
            format_float(o.report.min_margin),
            o.report.argmin_index.to_string(),
            o.report.passed.to_string(),
        ]);
        if !o.report.passed {
            failures += 1;
            let name = format!("counterexample_lr_{}.json", o.trial.trial);
            files.push(write_counterexample(&manifest.output_dir, name, manifest.seed, &o.trial, &o.report)?);
        }
    }
    let csv = manifest.output_dir.join(Command::VerifyLr.csv_name());
    write_csv(&csv, &["trial", "rows", "cols", "eta", "min_margin", "argmin", "passed"], &rows)?;
    files.insert(0, csv);

    Ok(Outcome {
        status: if failures == 0 { ExitStatus::Pass } else { ExitStatus::Violation },
        summary: vec![format!(
            "verify-lr: {} trials, {failures} failed, min margin {}",
            outcomes.len(),
            format_float(min_margin)
        )],
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiszarStatus {
    Pass,
    Fail,
    /// The projection hit a zero column; nothing was checked.
    Skipped,
}

impl CsiszarStatus {
    pub fn label(self) -> &'static str {
        match self {
            CsiszarStatus::Pass => "pass",
            CsiszarStatus::Fail => "fail",
            CsiszarStatus::Skipped => "skipped",
        }
    }
}

/// One Csiszár trial. For stochastic trials with finite entropies,
/// `integrated_gap = |Σᵢ μ₂ᵢ mᵢ − (H₁ − H₂)| / max(1, |H₁|)` where `mᵢ` are
/// the pointwise LR margins.
#[derive(Debug, Clone)]
pub struct CsiszarOutcome {
    pub trial: CsiszarTrial,
    pub status: CsiszarStatus,
    pub h_before: Option<ExtendedReal>,
    pub h_after: Option<ExtendedReal>,
    pub margin: Option<f64>,
    pub integrated_gap: Option<f64>,
    pub report: Option<crate::weighted::MarginReport>,
}

fn csiszar_outcome(trial: CsiszarTrial, tolerance: f64) -> Result<CsiszarOutcome> {
    if let Some(col) = trial.degenerate_column {
        info!("trial {}: column {col} is zero, projection skipped", trial.trial);
        return Ok(CsiszarOutcome {
            trial,
            status: CsiszarStatus::Skipped,
            h_before: None,
            h_after: None,
            margin: None,
            integrated_gap: None,
            report: None,
        });
    }
    let op = trial.operator()?;
    let (f, g) = trial.functions()?;
    let report = verify_csiszar(&op, &trial.eta, &f, &g, tolerance)?;
    let (h_after, h_before) = (report.lhs[0], report.rhs[0]);
    let integrated_gap = match (trial.mode, h_before, h_after) {
        (ProjectionMode::Stochastic, ExtendedReal::Finite(h1), ExtendedReal::Finite(h2)) => {
            let lr = verify_lr(&op, &trial.eta, &f, &g, tolerance)?;
            let integrated: f64 = lr.margins.iter().zip(op.codomain_measure().weights()).map(|(m, w)| m * w).sum();
            Some((integrated - (h1 - h2)).abs() / h1.abs().max(1.0))
        }
        _ => None,
    };
    let ok = report.passed && integrated_gap.is_none_or(|gap| gap <= INTEGRATED_TOL);
    Ok(CsiszarOutcome {
        trial,
        status: if ok { CsiszarStatus::Pass } else { CsiszarStatus::Fail },
        h_before: Some(h_before),
        h_after: Some(h_after),
        margin: Some(report.min_margin),
        integrated_gap,
        report: Some(report),
    })
}

/// Generates and checks Csiszár trials `0..trials` in parallel.
pub fn run_csiszar_fuzz(seed: u64, trials: usize, opts: &FuzzOptions) -> Result<Vec<CsiszarOutcome>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| csiszar_outcome(CsiszarTrial::generate(seed, t, opts), opts.tolerance))
        .collect()
}

fn verify_csiszar_command(manifest: &RunManifest) -> Result<Outcome> {
    let opts: FuzzOptions = optional_config(manifest)?;
    check_fuzz_options(&opts, manifest.trials)?;
    let outcomes = run_csiszar_fuzz(manifest.seed, manifest.trials, &opts)?;

    let mut files = Vec::new();
    let (mut failures, mut skipped) = (0, 0);
    let mut max_gap = 0.0f64;
    let opt_ext = |x: Option<ExtendedReal>| x.map(format_extended).unwrap_or_default();
    let opt_f = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        rows.push(vec![
            o.trial.trial.to_string(),
            o.trial.mode.label().to_string(),
            o.trial.eta.label(),
            opt_ext(o.h_before),
            opt_ext(o.h_after),
            opt_f(o.margin),
            opt_f(o.integrated_gap),
            o.status.label().to_string(),
        ]);
        if let Some(gap) = o.integrated_gap {
            max_gap = max_gap.max(gap);
        }
        match (o.status, &o.report) {
            (CsiszarStatus::Skipped, _) => skipped += 1,
            (CsiszarStatus::Fail, Some(report)) => {
                failures += 1;
                let name = format!("counterexample_csiszar_{}.json", o.trial.trial);
                files.push(write_counterexample(&manifest.output_dir, name, manifest.seed, &o.trial, report)?);
            }
            _ => {}
        }
    }
    if skipped > 0 {
        warn!("{skipped} trial(s) skipped: degenerate zero column");
    }
    let csv = manifest.output_dir.join(Command::VerifyCsiszar.csv_name());
    write_csv(
        &csv,
        &["trial", "mode", "eta", "h_before", "h_after", "margin", "integrated_gap", "status"],
        &rows,
    )?;
    files.insert(0, csv);

    Ok(Outcome {
        status: if failures == 0 { ExitStatus::Pass } else { ExitStatus::Violation },
        summary: vec![format!(
            "verify-csiszar: {} trials, {failures} failed, {skipped} skipped, max integrated gap {}",
            outcomes.len(),
            format_float(max_gap)
        )],
        files,
    })
}

/// Optional config for `power-iterate`. Without `matrix`, a random
/// column-stochastic `dim × dim` matrix and random data are drawn from the seed.
/// Paths are relative to the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub matrix: Option<PathBuf>,
    /// Weights `μ` (default: all ones).
    pub measure: Option<PathBuf>,
    pub f0: Option<PathBuf>,
    pub g0: Option<PathBuf>,
    pub dim: usize,
    pub steps: usize,
    pub eta: ConvexEta,
    pub tolerance: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            matrix: None,
            measure: None,
            f0: None,
            g0: None,
            dim: 5,
            steps: 100,
            eta: ConvexEta::kl(),
            tolerance: 1e-10,
        }
    }
}

/// Operator and initial pair for a power iteration.
pub struct PowerProblem {
    pub operator: PositiveOperator,
    pub f0: GridFunction,
    pub g0: GridFunction,
}

impl PowerConfig {
    /// Loads the files named in the config or draws a random problem from `seed`.
    pub fn problem(&self, base: &Path, seed: u64) -> Result<PowerProblem> {
        let mut rng = trial_rng(seed, 0);
        let matrix = match &self.matrix {
            Some(p) => read_matrix_csv(&base.join(p))?,
            None => {
                if self.dim == 0 {
                    return Err(Error::Config("dim must be at least 1".into()));
                }
                random_stochastic_matrix(&mut rng, self.dim)
            }
        };
        let n = matrix.ncols();
        let measure = match &self.measure {
            Some(p) => Measure::new(read_vector_csv(&base.join(p))?)?,
            None => Measure::uniform(n, 1.0)?,
        };
        let f0 = match &self.f0 {
            Some(p) => read_vector_csv(&base.join(p))?,
            None => (0..n).map(|_| rng.random::<f64>()).collect(),
        };
        let g0 = match &self.g0 {
            Some(p) => read_vector_csv(&base.join(p))?,
            None => (0..n).map(|_| 0.1 + 0.9 * rng.random::<f64>()).collect(),
        };
        let operator = PositiveOperator::new(matrix, measure.clone(), measure)?;
        Ok(PowerProblem { operator, f0: GridFunction::new(f0)?, g0: GridFunction::new(g0)? })
    }
}

fn power_iterate_command(manifest: &RunManifest) -> Result<Outcome> {
    let cfg: PowerConfig = optional_config(manifest)?;
    let base = manifest
        .config
        .as_deref()
        .and_then(Path::parent)
        .map_or_else(PathBuf::new, Path::to_path_buf);
    let problem = cfg.problem(&base, manifest.seed)?;
    let trace = power_iterate_gre(&problem.operator, &cfg.eta, &problem.f0, &problem.g0, cfg.steps)?;

    let csv = manifest.output_dir.join(Command::PowerIterate.csv_name());
    write_power_trace(&csv, &trace)?;
    let increase = trace.max_relative_increase();
    let last = trace.rows.last().map(|r| r.entropy).unwrap_or_default();
    Ok(Outcome {
        status: if increase <= cfg.tolerance { ExitStatus::Pass } else { ExitStatus::Violation },
        summary: vec![format!(
            "power-iterate: {} steps, eta {}, final entropy {}, max relative increase {}",
            cfg.steps,
            cfg.eta.label(),
            format_extended(last),
            format_float(increase)
        )],
        files: vec![csv],
    })
}

fn violation_outcome(violations: Vec<String>, mut summary: Vec<String>, files: Vec<PathBuf>) -> Outcome {
    let status = if violations.is_empty() { ExitStatus::Pass } else { ExitStatus::Violation };
    summary.extend(violations.into_iter().map(|v| format!("violation: {v}")));
    Outcome { status, summary, files }
}

fn simulate_growth_command(manifest: &RunManifest) -> Result<Outcome> {
    let cfg = config_or_preset(manifest, GROWTH_PRESETS[0], growth_preset)?;
    let run = match run_growth_config(&cfg) {
        Ok(run) => run,
        Err(e @ Error::NotStochastic { .. }) => {
            return Ok(Outcome::failed(ExitStatus::Violation, format!("violation: {e}")));
        }
        Err(e) => return Err(e),
    };
    let csv = manifest.output_dir.join(Command::SimulateGrowth.csv_name());
    write_growth_trace(&csv, &run.trace)?;
    let summary = vec![format!(
        "simulate-growth: {} steps, weighted mass drift {}, max stochasticity residual {}, max relative entropy increase {}, min Csiszár margin {}",
        run.trace.len() - 1,
        format_float(run.conservation_residual()),
        format_float(run.max_stochasticity_residual()),
        format_float(run.trace.max_relative_increase()),
        run.trace.min_margin().map(format_float).unwrap_or_default(),
    )];
    Ok(violation_outcome(run.violations(), summary, vec![csv]))
}

fn simulate_transport_command(manifest: &RunManifest) -> Result<Outcome> {
    let cfg = config_or_preset(manifest, TRANSPORT_PRESETS[0], transport_preset)?;
    let run = run_transport_config(&cfg)?;
    let csv = manifest.output_dir.join(Command::SimulateTransport.csv_name());
    write_transport_trace(&csv, &run.trace)?;
    let last = run.trace.rows.last().expect("trace has an initial row");
    let summary = vec![format!(
        "simulate-transport: {} steps, dt {}, final mass f {}, min g {}, max relative entropy increase {}, min LR margin {}",
        run.trace.len() - 1,
        format_float(run.dt),
        format_float(last.mass),
        format_float(run.min_g),
        format_float(run.trace.max_relative_increase()),
        run.trace.min_margin().map(format_float).unwrap_or_default(),
    )];
    Ok(violation_outcome(run.violations(), summary, vec![csv]))
}

/// Writes `matrix` as a `# rows m cols n` CSV (handy for building `power-iterate` inputs).
pub fn write_matrix(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    fs::write(path, crate::io::matrix_to_csv(matrix)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
