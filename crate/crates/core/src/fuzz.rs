//! Seeded random instances for the inequality fuzzers.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`, so
//! trials are independent of evaluation order and can run in parallel.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eta::ConvexEta;
use crate::weighted::{GridFunction, Measure, PositiveOperator};

/// Independent generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzOptions {
    /// Matrix dimensions are drawn from `1..=max_dim`.
    pub max_dim: usize,
    /// Probability that an entry of a matrix or vector is zeroed.
    pub zero_fraction: f64,
    /// Probability that a whole row (and, independently, a column) is zeroed.
    pub zero_line_fraction: f64,
    /// Share of Csiszár trials projected to substochastic instead of stochastic.
    pub substochastic_fraction: f64,
    pub tolerance: f64,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions {
            max_dim: 8,
            zero_fraction: 0.2,
            zero_line_fraction: 0.2,
            substochastic_fraction: 0.25,
            tolerance: 1e-9,
        }
    }
}

/// One of `KL`, `QUAD`, `TV`, `POWER(1.5)` or a random 3-piece affine maximum.
/// With `nonnegative`, `KL` is excluded and the affine family gets a `(0, 0)` floor.
pub fn random_eta<R: Rng>(rng: &mut R, nonnegative: bool) -> ConvexEta {
    let choices = if nonnegative { 4 } else { 5 };
    let pick = rng.random_range(0..choices);
    let pick = if nonnegative { pick + 1 } else { pick };
    match pick {
        0 => ConvexEta::kl(),
        1 => ConvexEta::quad(),
        2 => ConvexEta::tv(),
        3 => ConvexEta::power(1.5).expect("1.5 > 1"),
        _ => {
            let mut pieces: Vec<(f64, f64)> = (0..3)
                .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)))
                .collect();
            if nonnegative {
                pieces.push((0.0, 0.0));
            }
            ConvexEta::piecewise_affine(pieces).expect("finite pieces")
        }
    }
}

fn random_matrix<R: Rng>(rng: &mut R, m: usize, n: usize, opts: &FuzzOptions) -> DMatrix<f64> {
    let mut mat = DMatrix::from_fn(m, n, |_, _| {
        if rng.random_bool(opts.zero_fraction) {
            0.0
        } else {
            rng.random::<f64>()
        }
    });
    if rng.random_bool(opts.zero_line_fraction) {
        let r = rng.random_range(0..m);
        mat.row_mut(r).fill(0.0);
    }
    if rng.random_bool(opts.zero_line_fraction) {
        let c = rng.random_range(0..n);
        mat.column_mut(c).fill(0.0);
    }
    mat
}

fn random_vector<R: Rng>(rng: &mut R, n: usize, opts: &FuzzOptions) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random_bool(opts.zero_fraction) { 0.0 } else { rng.random::<f64>() })
        .collect()
}

/// A positive matrix with unit weights and a nonnegative pair `(f, g)`.
#[derive(Debug, Clone, Serialize)]
pub struct LrTrial {
    pub trial: u64,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub eta: ConvexEta,
}

impl LrTrial {
    pub fn generate(seed: u64, trial: u64, opts: &FuzzOptions) -> Self {
        let mut rng = trial_rng(seed, trial);
        let m = rng.random_range(1..=opts.max_dim);
        let n = rng.random_range(1..=opts.max_dim);
        let matrix = random_matrix(&mut rng, m, n, opts);
        let f = random_vector(&mut rng, n, opts);
        let g = random_vector(&mut rng, n, opts);
        let eta = random_eta(&mut rng, false);
        LrTrial { trial, matrix, f, g, eta }
    }

    pub fn operator(&self) -> Result<PositiveOperator> {
        PositiveOperator::with_unit_weights(self.matrix.clone())
    }

    pub fn functions(&self) -> Result<(GridFunction, GridFunction)> {
        Ok((GridFunction::new(self.f.clone())?, GridFunction::new(self.g.clone())?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    Stochastic,
    Substochastic,
}

impl ProjectionMode {
    pub fn label(self) -> &'static str {
        match self {
            ProjectionMode::Stochastic => "stochastic",
            ProjectionMode::Substochastic => "substochastic",
        }
    }
}

/// A matrix projected column by column onto the (sub)stochastic operators
/// between two random weight vectors.
#[derive(Debug, Clone, Serialize)]
pub struct CsiszarTrial {
    pub trial: u64,
    pub mode: ProjectionMode,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<f64>,
    pub domain_weights: Vec<f64>,
    pub codomain_weights: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub eta: ConvexEta,
    /// First column that could not be projected (all zeros).
    pub degenerate_column: Option<usize>,
}

impl CsiszarTrial {
    pub fn generate(seed: u64, trial: u64, opts: &FuzzOptions) -> Self {
        let mut rng = trial_rng(seed, trial);
        let m = rng.random_range(1..=opts.max_dim);
        let n = rng.random_range(1..=opts.max_dim);
        let mode = if rng.random_bool(opts.substochastic_fraction) {
            ProjectionMode::Substochastic
        } else {
            ProjectionMode::Stochastic
        };
        let mut matrix = random_matrix(&mut rng, m, n, opts);
        let domain_weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let codomain_weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
        let mut degenerate_column = None;
        for (j, mut col) in matrix.column_iter_mut().enumerate() {
            let mass: f64 = col.iter().zip(&codomain_weights).map(|(a, w)| a * w).sum();
            if mass == 0.0 {
                degenerate_column.get_or_insert(j);
                continue;
            }
            let shrink = match mode {
                ProjectionMode::Stochastic => 1.0,
                ProjectionMode::Substochastic => rng.random_range(0.5..1.0),
            };
            col *= shrink * domain_weights[j] / mass;
        }
        let f = random_vector(&mut rng, n, opts);
        let g = random_vector(&mut rng, n, opts);
        let eta = random_eta(&mut rng, mode == ProjectionMode::Substochastic);
        CsiszarTrial { trial, mode, matrix, domain_weights, codomain_weights, f, g, eta, degenerate_column }
    }

    pub fn operator(&self) -> Result<PositiveOperator> {
        PositiveOperator::new(
            self.matrix.clone(),
            Measure::new(self.domain_weights.clone())?,
            Measure::new(self.codomain_weights.clone())?,
        )
    }

    pub fn functions(&self) -> Result<(GridFunction, GridFunction)> {
        Ok((GridFunction::new(self.f.clone())?, GridFunction::new(self.g.clone())?))
    }
}

/// Column-stochastic `n × n` matrix (unit weights) with entries drawn in `(0, 1]`
/// before normalization.
pub fn random_stochastic_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, n, |_, _| 1.0 - rng.random::<f64>());
    for mut col in m.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    m
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}
