//! Discrete-ordinates transport in the slab `(0, L)` with absorbing ends.
//!
//! Solves `∂ₜf + v ∂ₓf + σ (f − K f) = 0` with `f = 0` on incoming boundary
//! faces. Velocities are the symmetric ordinates `±(m + ½)Δv`, `Δv = 2 v_max / n_v`,
//! and `K` is either the isotropic average over ordinates or zero (pure
//! absorption). The explicit upwind update is a nonnegative matrix whose
//! diagonal stays above `1 − θ`, so strictly positive data stay strictly
//! positive, and mass leaves only through the boundary faces.
//!
//! Phase-space vectors are flattened ordinate-major: index `k * n_x + i` for
//! ordinate `k` and cell `i`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonnegative, Error, Result};
use crate::eta::ConvexEta;
use crate::presets::InitialData;
use crate::trace::{EntropyTrace, TraceRow};
use crate::weighted::{entropy_raw, verify_lr, GridFunction, Measure, PositiveOperator};

/// Per-step tolerance on entropy increase.
pub const ENTROPY_TOL: f64 = 1e-10;
/// Tolerance handed to the pointwise LR check of each step.
pub const LR_TOL: f64 = 1e-9;
/// Relative round-off allowed when checking that total mass does not grow.
/// While nothing reaches the boundary the update conserves mass exactly, and
/// the floating-point sums wobble by a few ulps.
pub const MASS_ROUNDOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scattering {
    /// `K f = ` average of `f` over ordinates.
    Isotropic,
    /// `K = 0`: pure absorption at rate `σ`.
    None,
}

fn default_safety() -> f64 {
    0.9
}

fn default_g0() -> InitialData {
    InitialData::Uniform(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    #[serde(alias = "L")]
    pub length: f64,
    pub n_x: usize,
    pub v_max: f64,
    pub n_v: usize,
    pub sigma: f64,
    pub scattering: Scattering,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    pub t_end: f64,
    pub eta: ConvexEta,
    pub f0: InitialData,
    #[serde(default = "default_g0")]
    pub g0: InitialData,
}

impl TransportConfig {
    /// Beam in the middle of a unit slab, eight ordinates, `σ = 1`, isotropic
    /// scattering, `g₀ ≡ 1`, QUAD entropy, exactly `steps` time steps.
    pub fn beam_isotropic(n_x: usize, steps: usize) -> Result<Self> {
        let mut cfg = TransportConfig {
            length: 1.0,
            n_x,
            v_max: 1.0,
            n_v: 8,
            sigma: 1.0,
            scattering: Scattering::Isotropic,
            cfl_safety: 0.9,
            t_end: 1.0,
            eta: ConvexEta::quad(),
            f0: InitialData::Beam { x0: 0.5, v_index: 6 },
            g0: InitialData::Uniform(1.0),
        };
        cfg.validate()?;
        cfg.t_end = steps as f64 * cfg.time_step();
        Ok(cfg)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_x).map(|i| (i as f64 + 0.5) * dx).collect()
    }

    /// Ordinates in increasing order, `−v_max + (k + ½)Δv`.
    pub fn velocities(&self) -> Vec<f64> {
        let dv = self.dv();
        (0..self.n_v).map(|k| -self.v_max + (k as f64 + 0.5) * dv).collect()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Phase-space cell volume `Δx Δv`.
    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dv()
    }

    fn max_speed(&self) -> f64 {
        self.v_max - 0.5 * self.dv()
    }

    /// `Δt · (max|v|/Δx + σ)`.
    pub fn courant(&self, dt: f64) -> f64 {
        dt * (self.max_speed() / self.dx() + self.sigma)
    }

    /// `θ / (max|v|/Δx + σ)`.
    pub fn time_step(&self) -> f64 {
        self.cfl_safety / (self.max_speed() / self.dx() + self.sigma)
    }

    /// Number of fixed-size steps covering `[0, t_end]`.
    pub fn num_steps(&self) -> usize {
        ((self.t_end / self.time_step()) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config(format!("length must be positive, got {}", self.length)));
        }
        if self.n_x == 0 {
            return Err(Error::Config("n_x must be at least 1".into()));
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(Error::Config(format!("v_max must be positive, got {}", self.v_max)));
        }
        if self.n_v == 0 || !self.n_v.is_multiple_of(2) {
            return Err(Error::Config(format!("n_v must be a positive even count, got {}", self.n_v)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::CflViolation(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        Ok(())
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        let c = self.courant(dt);
        if !(dt > 0.0 && c < 1.0) {
            return Err(Error::CflViolation(format!(
                "dt (max|v|/dx + sigma) = {c} must be < 1 (dt = {dt})"
            )));
        }
        Ok(())
    }

    /// Samples `f0` and `g0` on the phase-space grid.
    pub fn initial_data(&self) -> Result<(GridFunction, GridFunction)> {
        let centers = self.centers();
        let f0 = self.f0.sample_phase(&centers, self.dx(), self.n_v, self.dv())?;
        let g0 = self.g0.sample_phase(&centers, self.dx(), self.n_v, self.dv())?;
        Ok((GridFunction::new(f0)?, GridFunction::new(g0)?))
    }
}

/// Output of one upwind step.
#[derive(Debug, Clone)]
pub struct TransportStep {
    pub f_next: GridFunction,
    /// Mass that left through the boundary faces during the step.
    pub outflux: f64,
    /// Linear update matrix with uniform `Δx Δv` weights.
    pub operator: PositiveOperator,
}

/// Validated configuration with a fixed time step and its update matrix.
#[derive(Debug, Clone)]
pub struct TransportScheme {
    cfg: TransportConfig,
    dt: f64,
    velocities: Vec<f64>,
    operator: PositiveOperator,
}

impl TransportScheme {
    pub fn new(cfg: &TransportConfig) -> Result<Self> {
        cfg.validate()?;
        TransportScheme::with_dt(cfg, cfg.time_step())
    }

    pub fn with_dt(cfg: &TransportConfig, dt: f64) -> Result<Self> {
        cfg.validate()?;
        cfg.check_dt(dt)?;
        let velocities = cfg.velocities();
        let matrix = step_matrix(cfg, &velocities, dt);
        let weights = Measure::uniform(cfg.len(), cfg.cell_volume())?;
        let operator = PositiveOperator::new(matrix, weights.clone(), weights)?;
        Ok(TransportScheme { cfg: cfg.clone(), dt, velocities, operator })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn operator(&self) -> &PositiveOperator {
        &self.operator
    }

    pub fn config(&self) -> &TransportConfig {
        &self.cfg
    }

    /// Applies the upwind stencil directly (no matrix product).
    ///
    /// Returns the updated values and the outflux `Δt Σ |v| f_boundary Δv`.
    pub fn advance(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let n_x = self.cfg.n_x;
        let n_v = self.cfg.n_v;
        let dt = self.dt;
        let dx = self.cfg.dx();
        let dv = self.cfg.dv();
        let absorb = dt * self.cfg.sigma;
        let gain = match self.cfg.scattering {
            Scattering::Isotropic => absorb / n_v as f64,
            Scattering::None => 0.0,
        };

        let mut velocity_sum = vec![0.0; n_x];
        if gain > 0.0 {
            for k in 0..n_v {
                for (s, x) in velocity_sum.iter_mut().zip(&f[k * n_x..(k + 1) * n_x]) {
                    *s += x;
                }
            }
        }

        let mut out = vec![0.0; f.len()];
        let mut outflux = 0.0;
        for (k, &v) in self.velocities.iter().enumerate() {
            let c = v.abs() * dt / dx;
            let row = &f[k * n_x..(k + 1) * n_x];
            let next = &mut out[k * n_x..(k + 1) * n_x];
            for i in 0..n_x {
                let inflow = if v > 0.0 {
                    if i > 0 { row[i - 1] } else { 0.0 }
                } else if i + 1 < n_x {
                    row[i + 1]
                } else {
                    0.0
                };
                next[i] = row[i] - c * row[i] + c * inflow - absorb * row[i] + gain * velocity_sum[i];
            }
            let exit = if v > 0.0 { row[n_x - 1] } else { row[0] };
            outflux += dt * v.abs() * exit * dv;
        }
        (out, outflux)
    }
}

fn step_matrix(cfg: &TransportConfig, velocities: &[f64], dt: f64) -> DMatrix<f64> {
    let n_x = cfg.n_x;
    let n_v = cfg.n_v;
    let n = cfg.len();
    let dx = cfg.dx();
    let absorb = dt * cfg.sigma;
    let gain = match cfg.scattering {
        Scattering::Isotropic => absorb / n_v as f64,
        Scattering::None => 0.0,
    };
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (k, &v) in velocities.iter().enumerate() {
        let c = v.abs() * dt / dx;
        for i in 0..n_x {
            let row = k * n_x + i;
            m[(row, row)] += 1.0 - c - absorb;
            let upstream = if v > 0.0 {
                i.checked_sub(1)
            } else {
                (i + 1 < n_x).then_some(i + 1)
            };
            if let Some(j) = upstream {
                m[(row, k * n_x + j)] += c;
            }
            if gain > 0.0 {
                for kk in 0..n_v {
                    m[(row, kk * n_x + i)] += gain;
                }
            }
        }
    }
    m
}

/// One upwind step of size `dt` from `f`.
pub fn transport_step(cfg: &TransportConfig, f: &GridFunction, dt: f64) -> Result<TransportStep> {
    let scheme = TransportScheme::with_dt(cfg, dt)?;
    check_len(cfg.len(), f.len())?;
    check_nonnegative(f.values())?;
    let (next, outflux) = scheme.advance(f.values());
    Ok(TransportStep {
        f_next: GridFunction::new(next)?,
        outflux,
        operator: scheme.operator,
    })
}

/// Trace of a transport run.
#[derive(Debug, Clone)]
pub struct TransportRun {
    /// Rows: `entropy = Σ ΔxΔv φ_η(f, g)`, `mass` of `f`, `reference_mass` of `g`,
    /// `margin` = minimum pointwise LR margin of the step.
    pub trace: EntropyTrace,
    /// Boundary outflux of `f` per step.
    pub outflux: Vec<f64>,
    /// Whether the entropy is asserted monotone (`η ≥ 0`).
    pub entropy_checked: bool,
    /// Whether every step passed the pointwise LR check.
    pub lr_passed: bool,
    pub min_g: f64,
    pub dt: f64,
    pub final_f: GridFunction,
    pub final_g: GridFunction,
}

impl TransportRun {
    /// Invariants that fail at the module tolerances.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for pair in self.trace.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if mass_increased(a.mass, b.mass) {
                out.push(format!("mass of f increased at step {}", b.step));
            }
            if let (Some(ga), Some(gb)) = (a.reference_mass, b.reference_mass) {
                if mass_increased(ga, gb) {
                    out.push(format!("mass of g increased at step {}", b.step));
                }
            }
        }
        if self.entropy_checked {
            let increase = self.trace.max_relative_increase();
            if increase > ENTROPY_TOL {
                out.push(format!("entropy increased by {increase:e} (relative) in one step"));
            }
        }
        if !self.lr_passed {
            out.push("pointwise LR check failed on some step".into());
        }
        out
    }
}

fn mass_increased(before: f64, after: f64) -> bool {
    after > before * (1.0 + MASS_ROUNDOFF)
}

/// Evolves `f0` and `g0` with the same fixed step up to `t_end`.
pub fn run_transport(cfg: &TransportConfig, f0: &GridFunction, g0: &GridFunction) -> Result<TransportRun> {
    let scheme = TransportScheme::new(cfg)?;
    check_len(cfg.len(), f0.len())?;
    check_len(cfg.len(), g0.len())?;
    check_nonnegative(f0.values())?;
    check_nonnegative(g0.values())?;
    if let Some((index, &value)) = g0.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveG { step: 0, index, value });
    }

    let volume = cfg.cell_volume();
    let weights = vec![volume; cfg.len()];
    let mass = |x: &[f64]| x.iter().sum::<f64>() * volume;
    let steps = cfg.num_steps();

    let mut f = f0.values().to_vec();
    let mut g = g0.values().to_vec();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut outflux = Vec::with_capacity(steps);
    let mut lr_passed = true;
    let mut min_g = g.iter().copied().fold(f64::INFINITY, f64::min);
    rows.push(TraceRow {
        step: 0,
        time: 0.0,
        entropy: entropy_raw(&cfg.eta, &f, &g, &weights)?,
        mass: mass(&f),
        reference_mass: Some(mass(&g)),
        margin: None,
    });

    for k in 1..=steps {
        let lr = verify_lr(
            &scheme.operator,
            &cfg.eta,
            &GridFunction::new(f.clone())?,
            &GridFunction::new(g.clone())?,
            LR_TOL,
        )?;
        lr_passed &= lr.passed;
        let (f_next, out_f) = scheme.advance(&f);
        let (g_next, _) = scheme.advance(&g);
        if let Some((index, &value)) = g_next.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::NonPositiveG { step: k, index, value });
        }
        min_g = g_next.iter().copied().fold(min_g, f64::min);
        f = f_next;
        g = g_next;
        outflux.push(out_f);
        rows.push(TraceRow {
            step: k,
            time: k as f64 * scheme.dt,
            entropy: entropy_raw(&cfg.eta, &f, &g, &weights)?,
            mass: mass(&f),
            reference_mass: Some(mass(&g)),
            margin: Some(lr.min_margin),
        });
    }

    Ok(TransportRun {
        trace: EntropyTrace { rows },
        outflux,
        entropy_checked: cfg.eta.is_nonnegative_sampled(),
        lr_passed,
        min_g,
        dt: scheme.dt,
        final_f: GridFunction::new(f)?,
        final_g: GridFunction::new(g)?,
    })
}

/// Samples the initial data from the config and runs.
pub fn run_transport_config(cfg: &TransportConfig) -> Result<TransportRun> {
    cfg.validate()?;
    let (f0, g0) = cfg.initial_data()?;
    run_transport(cfg, &f0, &g0)
}
