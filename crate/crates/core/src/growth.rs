//! Growth-fragmentation with drift, discretized so that relative entropy
//! decays exactly.
//!
//! The primal equation `∂ₜn + ∂ₓ(v n) + w n = F n` with the fragmentation
//! operator `(F n)(x) = ∫ b(y, x) n(y) dy − B(x) n(x)` becomes a Metzler
//! generator `A` on a uniform cell-centered grid:
//!
//! - drift: first-order upwind, zero inflow at `x = 0`, free outflow at `x_max`;
//! - fragmentation: daughters of cell `j` land in cells `i < j` with weights
//!   `b(xⱼ, xᵢ)Δx`, rescaled per column so that `Σᵢ xᵢ b̂ᵢⱼ = xⱼ Bⱼ` holds in
//!   floating point; the first cell has no smaller cell and does not fragment;
//! - death: `−w` on the diagonal.
//!
//! Time stepping is explicit Euler, `nᵏ⁺¹ = (I + Δt A) nᵏ`, and the dual weight
//! is advanced by the discrete adjoint solve `(I + Δt A)ᵀ ψᵏ⁺¹ = ψᵏ`. The
//! update matrix is therefore stochastic from `L¹(ψᵏΔx)` to `L¹(ψᵏ⁺¹Δx)`, the
//! pairing `⟨nᵏ, ψᵏ⟩Δx` is conserved, and the Csiszár contraction makes
//! `Σ Δx ψᵏ φ_η(nᵏ, mᵏ)` nonincreasing.

use log::warn;
use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonnegative, Error, Result};
use crate::eta::ConvexEta;
use crate::presets::{FragKernel, InitialData, Profile};
use crate::trace::{EntropyTrace, TraceRow};
use crate::weighted::{entropy_raw, verify_csiszar, GridFunction, Measure, PositiveOperator};

/// Tolerance on the per-step Csiszár margin and entropy increase.
pub const ENTROPY_TOL: f64 = 1e-10;
/// Relative tolerance on the drift of `⟨n, ψ⟩Δx`.
pub const CONSERVATION_TOL: f64 = 1e-10;
/// A dual weight with `|(Uᵀψ − ψ)_j| ≤ tol · ψ_j` is carried over unchanged.
///
/// The adjoint map `ψ ↦ U⁻ᵀψ` has norm up to `1/(1 − θ)`, so rounding left by
/// a dense solve grows geometrically over many steps even when `ψ` is an
/// exact invariant such as `x` for pure fragmentation.
pub const STATIONARY_DUAL_TOL: f64 = 1e-13;

fn default_safety() -> f64 {
    0.9
}

fn default_psi0() -> Profile {
    Profile::Linear(1.0)
}

fn default_n0() -> InitialData {
    InitialData::Gaussian { x0: 1.0, s: 0.25 }
}

fn default_m0() -> InitialData {
    InitialData::Uniform(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub x_max: f64,
    pub n_cells: usize,
    #[serde(rename = "v", alias = "velocity")]
    pub velocity: Profile,
    #[serde(rename = "w", alias = "death_rate")]
    pub death_rate: Profile,
    #[serde(rename = "B", alias = "total_frag_rate")]
    pub total_frag_rate: Profile,
    #[serde(rename = "b", alias = "frag_kernel")]
    pub frag_kernel: FragKernel,
    #[serde(default = "default_safety")]
    pub dt_safety: f64,
    pub t_end: f64,
    pub eta: ConvexEta,
    #[serde(default = "default_psi0")]
    pub psi0: Profile,
    #[serde(default = "default_n0")]
    pub n0: InitialData,
    #[serde(default = "default_m0")]
    pub m0: InitialData,
}

impl GrowthConfig {
    /// Pure binary fragmentation with `B(x) = x`, `ψ₀ = x`, a spike in the
    /// top cell against uniform `m₀`, run for exactly `steps` time steps.
    ///
    /// Nothing flows into the top cell, so it keeps a factor `1 − θ` per step.
    /// With `θ = 0.25` that stays above the underflow threshold for a few
    /// thousand steps; at `0.9`, `m` would underflow to 0 while `n` is still
    /// positive there and the entropy would jump to `+∞`.
    pub fn binary_fragmentation(n_cells: usize, steps: usize) -> Result<Self> {
        let mut cfg = GrowthConfig {
            x_max: 10.0,
            n_cells,
            velocity: Profile::Zero,
            death_rate: Profile::Zero,
            total_frag_rate: Profile::Linear(1.0),
            frag_kernel: FragKernel::Binary,
            dt_safety: 0.25,
            t_end: 1.0,
            eta: ConvexEta::quad(),
            psi0: Profile::Linear(1.0),
            n0: InitialData::Spike { x0: 10.0 },
            m0: InitialData::Uniform(1.0),
        };
        let generator = build_generator(&cfg)?;
        cfg.t_end = steps as f64 * generator.time_step(cfg.dt_safety);
        Ok(cfg)
    }

    pub fn dx(&self) -> f64 {
        self.x_max / self.n_cells as f64
    }

    /// Cell centers `(j + ½)Δx`.
    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_cells).map(|j| (j as f64 + 0.5) * dx).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return Err(Error::Config(format!("x_max must be positive, got {}", self.x_max)));
        }
        if self.n_cells == 0 {
            return Err(Error::Config("n_cells must be at least 1".into()));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return Err(Error::CflViolation(format!(
                "dt_safety must lie in (0, 1), got {}",
                self.dt_safety
            )));
        }
        let centers = self.centers();
        for (name, profile, strict) in [
            ("v", self.velocity, false),
            ("B", self.total_frag_rate, false),
            ("psi0", self.psi0, true),
        ] {
            for (j, value) in profile.sample(&centers).into_iter().enumerate() {
                let bad = !value.is_finite() || value < 0.0 || (strict && value == 0.0);
                if bad {
                    return Err(Error::Config(format!("{name} = {value} at cell {j} is not admissible")));
                }
            }
        }
        if let Some(w) = self.death_rate.sample(&centers).into_iter().find(|w| !w.is_finite()) {
            return Err(Error::Config(format!("w = {w} is not finite")));
        }
        Ok(())
    }
}

/// Metzler generator of the semi-discrete growth-fragmentation dynamics.
#[derive(Debug, Clone)]
pub struct Generator {
    matrix: DMatrix<f64>,
    centers: Vec<f64>,
    dx: f64,
}

impl Generator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `max_j |A_jj|`.
    pub fn max_diagonal(&self) -> f64 {
        self.matrix.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// `θ / max_j |A_jj|`, or `+∞` for a vanishing diagonal.
    pub fn time_step(&self, safety: f64) -> f64 {
        let d = self.max_diagonal();
        if d > 0.0 {
            safety / d
        } else {
            f64::INFINITY
        }
    }

    pub fn is_metzler(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] >= 0.0))
    }
}

/// Assembles `A = A_drift + A_frag + A_death`.
pub fn build_generator(cfg: &GrowthConfig) -> Result<Generator> {
    cfg.validate()?;
    let n = cfg.n_cells;
    let dx = cfg.dx();
    let centers = cfg.centers();
    let v = cfg.velocity.sample(&centers);
    let w = cfg.death_rate.sample(&centers);
    let rate = cfg.total_frag_rate.sample(&centers);
    let mut a = DMatrix::<f64>::zeros(n, n);

    for j in 0..n {
        let flux = v[j] / dx;
        a[(j, j)] -= flux;
        if j + 1 < n {
            a[(j + 1, j)] += flux;
        }
    }

    for j in 0..n {
        if rate[j] == 0.0 || cfg.frag_kernel == FragKernel::None {
            continue;
        }
        if j == 0 {
            // no smaller cell can receive the fragments
            continue;
        }
        let weights: Vec<f64> = (0..j)
            .map(|i| cfg.frag_kernel.eval(centers[j], centers[i], rate[j]) * dx)
            .collect();
        let moment: f64 = weights.iter().zip(&centers).map(|(b, x)| b * x).sum();
        if moment <= 0.0 || moment.is_nan() {
            return Err(Error::InvalidKernel { column: j, rate: rate[j] });
        }
        let scale = centers[j] * rate[j] / moment;
        for (i, b) in weights.iter().enumerate() {
            a[(i, j)] += b * scale;
        }
        a[(j, j)] -= rate[j];
    }

    for j in 0..n {
        a[(j, j)] -= w[j];
    }

    Ok(Generator { matrix: a, centers, dx })
}

/// Result of one explicit Euler step with its dual update.
#[derive(Debug, Clone)]
pub struct GrowthStep {
    pub n_next: GridFunction,
    pub psi_next: GridFunction,
    /// `I + Δt A`, from `L¹(ψΔx)` to `L¹(ψ_next Δx)`.
    pub operator: PositiveOperator,
}

/// `max_j |(Uᵀψ)_j − ψ_j| / ψ_j`: how far `ψ` is from solving `Uᵀψ' = ψ` with `ψ' = ψ`.
fn stationary_residual(transpose: &DMatrix<f64>, psi: &DVector<f64>) -> f64 {
    (transpose * psi)
        .iter()
        .zip(psi.iter())
        .map(|(a, p)| (a - p).abs() / p)
        .fold(0.0, f64::max)
}

/// `I + Δt A` with a cached LU factorization of its transpose.
struct EulerUpdate {
    matrix: DMatrix<f64>,
    transpose_lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    transpose: DMatrix<f64>,
}

impl EulerUpdate {
    fn new(generator: &Generator, dt: f64) -> Result<Self> {
        let courant = dt * generator.max_diagonal();
        if !(dt > 0.0 && courant < 1.0) {
            return Err(Error::CflViolation(format!(
                "dt * max|A_jj| = {courant} must be < 1 (dt = {dt})"
            )));
        }
        let n = generator.len();
        let matrix = DMatrix::<f64>::identity(n, n) + generator.matrix() * dt;
        let transpose = matrix.transpose();
        let transpose_lu = transpose.clone().lu();
        Ok(EulerUpdate { matrix, transpose_lu, transpose })
    }

    fn advance(&self, step: usize, dx: f64, n: &[f64], psi: &[f64]) -> Result<GrowthStep> {
        let n_next: Vec<f64> = (&self.matrix * DVector::from_column_slice(n)).iter().copied().collect();
        let rhs = DVector::from_column_slice(psi);
        let dual = if stationary_residual(&self.transpose, &rhs) <= STATIONARY_DUAL_TOL {
            // ψ already solves the adjoint system to round-off; the solve would
            // only inject rounding that U⁻ᵀ amplifies from step to step.
            rhs.clone()
        } else {
            let mut dual = self.transpose_lu.solve(&rhs).ok_or(Error::SingularDual { step })?;
            // one round of iterative refinement
            let residual = &rhs - &self.transpose * &dual;
            if let Some(correction) = self.transpose_lu.solve(&residual) {
                dual += correction;
            }
            dual
        };
        if let Some((cell, &value)) = dual.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            warn!("dual weight lost positivity at step {step}, cell {cell}: {value}");
            return Err(Error::DualPositivityLost { step, cell, value });
        }
        if let Some((index, &value)) = n_next.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeInput { index, value });
        }
        let psi_next: Vec<f64> = dual.iter().copied().collect();
        let domain = Measure::new(psi.iter().map(|p| p * dx).collect())?;
        let codomain = Measure::new(psi_next.iter().map(|p| p * dx).collect())?;
        let operator = PositiveOperator::new(self.matrix.clone(), domain, codomain)?;
        Ok(GrowthStep {
            n_next: GridFunction::new(n_next)?,
            psi_next: GridFunction::new(psi_next)?,
            operator,
        })
    }
}

/// One explicit Euler step of the primal and the adjoint solve for the dual weight.
///
/// Requires `Δt · max|A_jj| < 1` and `ψ > 0`.
pub fn step(generator: &Generator, n: &GridFunction, psi: &GridFunction, dt: f64) -> Result<GrowthStep> {
    check_len(generator.len(), n.len())?;
    check_len(generator.len(), psi.len())?;
    check_nonnegative(n.values())?;
    if let Some((cell, &value)) = psi.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::DualPositivityLost { step: 0, cell, value });
    }
    EulerUpdate::new(generator, dt)?.advance(0, generator.dx(), n.values(), psi.values())
}

/// Trace of a growth-fragmentation run plus per-step certificates.
#[derive(Debug, Clone)]
pub struct GrowthRun {
    /// Rows: `entropy = Σ Δx ψ φ_η(n, m)`, `mass = ⟨n, ψ⟩Δx`, `margin` = Csiszár margin of the step.
    pub trace: EntropyTrace,
    /// Per-step `max_j |Σᵢ ψᵢᵏ⁺¹ Uᵢⱼ − ψⱼᵏ| / ψⱼᵏ`.
    pub stochasticity_residuals: Vec<f64>,
    pub final_n: GridFunction,
    pub final_m: GridFunction,
    pub final_psi: GridFunction,
}

impl GrowthRun {
    /// `max_k |⟨nᵏ, ψᵏ⟩ − ⟨n⁰, ψ⁰⟩| / ⟨n⁰, ψ⁰⟩`.
    pub fn conservation_residual(&self) -> f64 {
        let m0 = self.trace.rows[0].mass;
        self.trace
            .rows
            .iter()
            .map(|r| (r.mass - m0).abs() / m0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn max_stochasticity_residual(&self) -> f64 {
        self.stochasticity_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Invariants that fail at the module tolerances.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let conservation = self.conservation_residual();
        if conservation > CONSERVATION_TOL {
            out.push(format!("weighted mass drift {conservation:e} > {CONSERVATION_TOL:e}"));
        }
        let increase = self.trace.max_relative_increase();
        if increase > ENTROPY_TOL {
            out.push(format!("entropy increased by {increase:e} (relative) in one step"));
        }
        if let Some(margin) = self.trace.min_margin() {
            if margin < -ENTROPY_TOL {
                out.push(format!("Csiszár margin {margin:e} < -{ENTROPY_TOL:e}"));
            }
        }
        out
    }
}

/// Time steps covering `[0, t_end]`: full steps of size `dt`, then one truncated step.
pub(crate) fn schedule(t_end: f64, dt: f64) -> Vec<f64> {
    if !dt.is_finite() || dt >= t_end {
        return vec![t_end];
    }
    let full = (t_end / dt + 1e-9).floor() as usize;
    let mut steps = vec![dt; full];
    let rest = t_end - full as f64 * dt;
    if rest > 1e-12 * t_end {
        steps.push(rest);
    }
    steps
}

/// Runs the scheme from `(n0, m0)` with `ψ₀` from the config up to `t_end`.
pub fn run_growth(cfg: &GrowthConfig, n0: &GridFunction, m0: &GridFunction) -> Result<GrowthRun> {
    let generator = build_generator(cfg)?;
    check_len(generator.len(), n0.len())?;
    check_len(generator.len(), m0.len())?;
    check_nonnegative(n0.values())?;
    check_nonnegative(m0.values())?;
    let dx = generator.dx();
    let psi0 = cfg.psi0.sample(generator.centers());

    let dt = generator.time_step(cfg.dt_safety);
    let steps = schedule(cfg.t_end, dt);
    let mut updates: Vec<(f64, EulerUpdate)> = Vec::new();

    let mut n = n0.values().to_vec();
    let mut m = m0.values().to_vec();
    let mut psi = psi0;
    let mut time = 0.0;
    let mut rows = Vec::with_capacity(steps.len() + 1);
    let mut residuals = Vec::with_capacity(steps.len());
    let weights = |psi: &[f64]| psi.iter().map(|p| p * dx).collect::<Vec<_>>();
    rows.push(TraceRow {
        step: 0,
        time,
        entropy: entropy_raw(&cfg.eta, &n, &m, &weights(&psi))?,
        mass: pairing(&n, &psi, dx),
        reference_mass: None,
        margin: None,
    });

    for (k, &h) in steps.iter().enumerate() {
        let idx = match updates.iter().position(|(d, _)| *d == h) {
            Some(i) => i,
            None => {
                updates.push((h, EulerUpdate::new(&generator, h)?));
                updates.len() - 1
            }
        };
        let update = &updates[idx].1;
        let stepped = update.advance(k + 1, dx, &n, &psi)?;
        let m_next = update.matrix.clone() * DVector::from_column_slice(&m);
        let m_next = GridFunction::new(m_next.iter().copied().collect())?;
        let report = verify_csiszar(
            &stepped.operator,
            &cfg.eta,
            &GridFunction::new(n.clone())?,
            &GridFunction::new(m.clone())?,
            ENTROPY_TOL,
        )?;
        residuals.push(stepped.operator.stochasticity_residual());

        n = stepped.n_next.into_values();
        m = m_next.into_values();
        psi = stepped.psi_next.into_values();
        time += h;
        let entropy = entropy_raw(&cfg.eta, &n, &m, &weights(&psi))?;
        rows.push(TraceRow {
            step: k + 1,
            time,
            entropy,
            mass: pairing(&n, &psi, dx),
            reference_mass: None,
            margin: Some(report.min_margin),
        });
    }

    Ok(GrowthRun {
        trace: EntropyTrace { rows },
        stochasticity_residuals: residuals,
        final_n: GridFunction::new(n)?,
        final_m: GridFunction::new(m)?,
        final_psi: GridFunction::new(psi)?,
    })
}

/// Samples `n0`, `m0` from the config presets and runs.
pub fn run_growth_config(cfg: &GrowthConfig) -> Result<GrowthRun> {
    let centers = cfg.centers();
    let dx = cfg.dx();
    let n0 = GridFunction::new(cfg.n0.sample_1d(&centers, dx)?)?;
    let m0 = GridFunction::new(cfg.m0.sample_1d(&centers, dx)?)?;
    run_growth(cfg, &n0, &m0)
}

fn pairing(n: &[f64], psi: &[f64], dx: f64) -> f64 {
    n.iter().zip(psi).map(|(a, b)| a * b).sum::<f64>() * dx
}
