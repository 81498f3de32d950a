//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines always appear in the output.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use grekit_core::fuzz::{trial_rng, FuzzOptions};
use grekit_core::growth::{run_growth_config, GrowthConfig};
use grekit_core::presets::FragKernel;
use grekit_core::reports::{execute, run_csiszar_fuzz, run_lr_fuzz, Command, CsiszarStatus, ExitStatus, PowerConfig, RunManifest};
use grekit_core::transport::{run_transport, run_transport_config, Scattering, TransportConfig};
use grekit_core::{power_iterate_gre, ConvexEta, EtaKind, ExtendedReal};
use rand::Rng;

const SEED: u64 = 20240917;

// Criterion 1
const LR_TOL: f64 = 1e-9;
const LR_TRIALS: usize = 1000;
const LR_BUDGET: Duration = Duration::from_secs(10);
// Criterion 2
const CSISZAR_TOL: f64 = 1e-9;
const CSISZAR_TRIALS: usize = 1000;
const INTEGRATED_TOL: f64 = 1e-10;
// Criterion 3
const ORACLE_ETAS: usize = 200;
const ORACLE_PAIRS: usize = 10_000;
const ORACLE_TOL: f64 = 1e-12;
/// Rounding allowance for "minorant never exceeds the generator".
const MINORANT_SLACK: f64 = 1e-12;
// Criterion 4
const GROWTH_CELLS: usize = 200;
const GROWTH_STEPS: usize = 2000;
const GROWTH_DRIFT_TOL: f64 = 1e-10;
const GROWTH_STOCHASTIC_TOL: f64 = 1e-12;
const GROWTH_ENTROPY_SLACK: f64 = 1e-10;
const GROWTH_BUDGET: Duration = Duration::from_secs(30);
// Criterion 5
const SLAB_CELLS: usize = 100;
const SLAB_STEPS: usize = 1000;
const SLAB_ENTROPY_SLACK: f64 = 1e-10;
/// Relative round-off on "mass nonincreasing"; exact conservation in the
/// interior leaves ulp-level wobble in the floating-point totals.
const SLAB_MASS_ROUNDOFF: f64 = 1e-14;
const LINEARITY_TOL: f64 = 1e-12;
// Criterion 6
const POWER_DIM: usize = 5;
const POWER_STEPS: usize = 100;
const POWER_SLACK: f64 = 1e-10;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lr_fuzz() -> Check {
    let opts = FuzzOptions { tolerance: LR_TOL, ..FuzzOptions::default() };
    let start = Instant::now();
    let outcomes = run_lr_fuzz(SEED, LR_TRIALS, &opts).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(outcomes.len() == LR_TRIALS, || format!("{} trials ran", outcomes.len()))?;

    let mut worst = f64::INFINITY;
    let mut zero_rows = 0;
    let mut zero_cols = 0;
    for o in &outcomes {
        for (m, r) in o.report.margins.iter().zip(&o.report.rhs) {
            if let ExtendedReal::Finite(r) = r {
                worst = worst.min(m / (1.0 + r.abs()));
            }
            ensure(
                r.is_infinite() || *m >= -LR_TOL * (1.0 + r.to_f64().abs()),
                || format!("trial {} margin {m:e}", o.trial.trial),
            )?;
        }
        ensure(o.report.passed, || format!("trial {} reported failure", o.trial.trial))?;
        let mat = &o.trial.matrix;
        zero_rows += mat.row_iter().any(|r| r.iter().all(|&x| x == 0.0)) as usize;
        zero_cols += mat.column_iter().any(|c| c.iter().all(|&x| x == 0.0)) as usize;
    }
    ensure(zero_rows > 0 && zero_cols > 0, || "no zero rows/columns were exercised".into())?;
    ensure(elapsed < LR_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{LR_TRIALS} trials, min scaled margin {worst:.3e}, {zero_rows} with zero rows, {zero_cols} with zero columns, {elapsed:.2?}"
    ))
}

fn csiszar_fuzz() -> Check {
    let opts = FuzzOptions { tolerance: CSISZAR_TOL, substochastic_fraction: 0.0, ..FuzzOptions::default() };
    let outcomes = run_csiszar_fuzz(SEED, CSISZAR_TRIALS, &opts).map_err(err)?;
    let (mut checked, mut skipped, mut integrated) = (0, 0, 0);
    let mut max_gap = 0.0f64;
    for o in &outcomes {
        if o.status == CsiszarStatus::Skipped {
            skipped += 1;
            continue;
        }
        checked += 1;
        let (before, after) = (o.h_before.unwrap(), o.h_after.unwrap());
        match (before, after) {
            (ExtendedReal::PosInf, _) => {}
            (ExtendedReal::Finite(h1), ExtendedReal::Finite(h2)) => {
                ensure(h2 <= h1 + CSISZAR_TOL, || format!("trial {}: {h2} > {h1}", o.trial.trial))?;
            }
            (ExtendedReal::Finite(_), ExtendedReal::PosInf) => {
                return Err(format!("trial {}: finite entropy became infinite", o.trial.trial));
            }
        }
        if let Some(gap) = o.integrated_gap {
            integrated += 1;
            max_gap = max_gap.max(gap);
            ensure(gap <= INTEGRATED_TOL, || format!("trial {}: integrated gap {gap:e}", o.trial.trial))?;
        }
        ensure(o.status == CsiszarStatus::Pass, || format!("trial {} failed", o.trial.trial))?;
    }
    Ok(format!(
        "{checked} stochastic trials checked, {skipped} skipped (zero column), {integrated} integrated identities, max gap {max_gap:.3e}"
    ))
}

/// `maxᵢ (aᵢu + bᵢv)`, the homogeneous form of an affine maximum.
fn max_of_affine(pieces: &[(f64, f64)], u: f64, v: f64) -> f64 {
    pieces.iter().map(|&(a, b)| a * u + b * v).fold(f64::NEG_INFINITY, f64::max)
}

fn random_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(0.0..10.0) };
    let v = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..10.0) };
    (u, v)
}

fn oracle_equivalence() -> Check {
    let mut rng = trial_rng(SEED, 3);
    let mut worst = 0.0f64;
    let mut boundary = 0;
    for e in 0..ORACLE_ETAS {
        let n = rng.random_range(1..=5);
        let pieces: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0))).collect();
        let eta = ConvexEta::piecewise_affine(pieces.clone()).map_err(err)?;
        for _ in 0..ORACLE_PAIRS {
            let (u, v) = random_pair(&mut rng);
            boundary += (v == 0.0) as usize;
            let expected = max_of_affine(&pieces, u, v);
            let got = eta.phi(u, v).map_err(err)?.finite().ok_or("PA phi is infinite")?;
            let rel = (got - expected).abs() / expected.abs().max(1.0);
            worst = worst.max(rel);
            ensure(rel <= ORACLE_TOL, || format!("eta {e} at ({u}, {v}): {got} vs {expected}"))?;
        }
    }

    let builtins = [ConvexEta::kl(), ConvexEta::quad(), ConvexEta::tv(), ConvexEta::power(1.5).map_err(err)?];
    let mut minorants = 0;
    for eta in &builtins {
        for _ in 0..50 {
            let k = rng.random_range(1..=10);
            let mut samples: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
            samples.sort_by(f64::total_cmp);
            samples.dedup();
            let minorant = eta.tangent_minorant(&samples).map_err(err)?;
            ensure(matches!(minorant.kind(), EtaKind::PiecewiseAffine(_)), || "minorant is not affine".into())?;
            minorants += 1;
            for _ in 0..ORACLE_PAIRS / 10 {
                let (u, v) = random_pair(&mut rng);
                let below = minorant.phi(u, v).map_err(err)?;
                let above = eta.phi(u, v).map_err(err)?;
                if let (ExtendedReal::Finite(lo), ExtendedReal::Finite(hi)) = (below, above) {
                    ensure(lo <= hi + MINORANT_SLACK * hi.abs().max(1.0), || {
                        format!("{eta} minorant exceeds at ({u}, {v}): {lo} > {hi}")
                    })?;
                } else {
                    ensure(below <= above, || format!("{eta} minorant infinite at ({u}, {v})"))?;
                }
            }
        }
    }
    Ok(format!(
        "{} pairs, {boundary} on v = 0, max relative deviation {worst:.3e}; {minorants} minorants below their generators",
        ORACLE_ETAS * ORACLE_PAIRS
    ))
}

fn growth() -> Check {
    let cfg = GrowthConfig::binary_fragmentation(GROWTH_CELLS, GROWTH_STEPS).map_err(err)?;
    ensure(cfg.frag_kernel == FragKernel::Binary && cfg.eta == ConvexEta::quad(), || "preset drifted".into())?;
    let start = Instant::now();
    let run = run_growth_config(&cfg).map_err(err)?;
    let elapsed = start.elapsed();
    let steps = run.trace.len() - 1;
    ensure(steps == GROWTH_STEPS, || format!("{steps} steps"))?;
    let drift = run.conservation_residual();
    let residual = run.max_stochasticity_residual();
    let increase = run.trace.max_relative_increase();
    ensure(drift <= GROWTH_DRIFT_TOL, || format!("weighted mass drift {drift:e}"))?;
    ensure(residual <= GROWTH_STOCHASTIC_TOL, || format!("stochasticity residual {residual:e}"))?;
    ensure(increase <= GROWTH_ENTROPY_SLACK, || format!("entropy increase {increase:e}"))?;
    ensure(elapsed < GROWTH_BUDGET, || format!("took {elapsed:?}"))?;
    let first = run.trace.rows[0].entropy;
    let last = run.trace.rows[steps].entropy;
    ensure(last < first, || "entropy did not decay".into())?;
    Ok(format!(
        "drift {drift:.3e}, stochasticity residual {residual:.3e}, max entropy increase {increase:.3e}, entropy {first} -> {last}, {elapsed:.2?}"
    ))
}

fn transport() -> Check {
    let cfg = TransportConfig::beam_isotropic(SLAB_CELLS, SLAB_STEPS).map_err(err)?;
    ensure(
        cfg.n_v == 8 && cfg.sigma == 1.0 && cfg.scattering == Scattering::Isotropic && cfg.eta == ConvexEta::quad(),
        || "preset drifted".into(),
    )?;
    let run = run_transport_config(&cfg).map_err(err)?;
    ensure(run.trace.len() == SLAB_STEPS + 1, || format!("{} rows", run.trace.len()))?;
    let mut worst_rise = f64::NEG_INFINITY;
    for pair in run.trace.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (ga, gb) = (a.reference_mass.ok_or("missing g mass")?, b.reference_mass.ok_or("missing g mass")?);
        ensure(b.mass <= a.mass * (1.0 + SLAB_MASS_ROUNDOFF), || format!("mass of f increased at step {}", b.step))?;
        ensure(gb <= ga * (1.0 + SLAB_MASS_ROUNDOFF), || format!("mass of g increased at step {}", b.step))?;
        worst_rise = worst_rise.max((b.mass - a.mass) / a.mass).max((gb - ga) / ga);
    }
    ensure(run.min_g > 0.0, || format!("g reached {}", run.min_g))?;
    let increase = run.trace.max_relative_increase();
    ensure(increase <= SLAB_ENTROPY_SLACK, || format!("entropy increase {increase:e}"))?;
    ensure(run.lr_passed, || "pointwise LR check failed".into())?;

    let (_, g0) = cfg.initial_data().map_err(err)?;
    ensure(g0.values().iter().all(|&x| x == 1.0), || "g0 is not identically 1".into())?;
    let f0 = g0.scaled(2.0);
    let linear = run_transport(&cfg, &f0, &g0).map_err(err)?;
    let eta2 = cfg.eta.eval(2.0).map_err(err)?.to_f64();
    let mut worst = 0.0f64;
    for row in &linear.trace.rows {
        let expected = eta2 * row.reference_mass.ok_or("missing g mass")?;
        let got = row.entropy.to_f64();
        let rel = (got - expected).abs() / expected.abs();
        worst = worst.max(rel);
        ensure(rel <= LINEARITY_TOL, || format!("step {}: {got} vs {expected}", row.step))?;
    }
    let last = run.trace.rows.last().unwrap();
    Ok(format!(
        "final masses f {:.6} g {:.6}, largest relative mass change {worst_rise:.3e}, min g {:.3e}, max entropy increase {increase:.3e}, linearity deviation {worst:.3e}",
        last.mass,
        last.reference_mass.unwrap(),
        run.min_g
    ))
}

fn semigroup() -> Check {
    let cfg = PowerConfig { dim: POWER_DIM, steps: POWER_STEPS, eta: ConvexEta::kl(), ..PowerConfig::default() };
    let problem = cfg.problem(Path::new(""), SEED).map_err(err)?;
    ensure(problem.g0.is_strictly_positive(), || "g0 not positive".into())?;
    let trace = power_iterate_gre(&problem.operator, &cfg.eta, &problem.f0, &problem.g0, POWER_STEPS).map_err(err)?;
    let increase = trace.max_relative_increase();
    ensure(increase <= POWER_SLACK, || format!("entropy increase {increase:e}"))?;

    let same = power_iterate_gre(&problem.operator, &cfg.eta, &problem.g0, &problem.g0, POWER_STEPS).map_err(err)?;
    ensure(same.entropies().all(|e| e == ExtendedReal::ZERO), || "f0 = g0 gave nonzero entropy".into())?;
    let first = trace.rows[0].entropy;
    let last = trace.rows[POWER_STEPS].entropy;
    Ok(format!("entropy {first} -> {last}, max increase {increase:.3e}; f0 = g0 stays at 0"))
}

fn run_all_commands(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let commands = [
        Command::VerifyLr,
        Command::VerifyCsiszar,
        Command::PowerIterate,
        Command::SimulateGrowth,
        Command::SimulateTransport,
    ];
    let mut files = Vec::new();
    for command in commands {
        let manifest = RunManifest { seed: SEED, trials: 300, ..RunManifest::new(command, dir.join(command.name())) };
        let outcome = execute(&manifest);
        assert_eq!(outcome.status, ExitStatus::Pass, "{}: {:?}", command.name(), outcome.summary);
        for path in outcome.files {
            let name = path.strip_prefix(dir).unwrap().display().to_string();
            files.push((name, fs::read(&path).unwrap()));
        }
    }
    files
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(err)?;
    let b = tempfile::tempdir().map_err(err)?;
    let first = run_all_commands(a.path());
    let second = run_all_commands(b.path());
    ensure(first.len() == second.len(), || "different file sets".into())?;
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
        ensure(name_a == name_b, || format!("{name_a} vs {name_b}"))?;
        ensure(bytes_a == bytes_b, || format!("{name_a} differs between runs"))?;
    }
    let bytes: usize = first.iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} CSV files, {bytes} bytes, identical across reruns", first.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("LR fuzz", lr_fuzz),
        ("Csiszar fuzz", csiszar_fuzz),
        ("oracle equivalence", oracle_equivalence),
        ("growth-fragmentation", growth),
        ("transport slab", transport),
        ("discrete semigroup", semigroup),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
