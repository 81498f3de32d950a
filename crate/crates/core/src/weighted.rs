//! Weighted `L¹` spaces on finite grids, positive operators between them,
//! and the contraction verifiers.
//!
//! A [`PositiveOperator`] maps `L¹(μ₁)` (the domain measure) into `L¹(μ₂)`
//! (the codomain measure). It is stochastic when it preserves the weighted
//! mass of nonnegative vectors, i.e. when every column `j` satisfies
//! `Σᵢ μ₂ᵢ Mᵢⱼ = μ₁ⱼ`.
//!
//! On a finite grid the lattice extension of a positive operator to
//! arbitrary measurable functions is the matrix itself, so the pointwise
//! inequality `φ_η(Uf, Ug) ≤ U φ_η(f, g)` is checked with `U` directly.
//! Entries of `φ_η(f, g)` may be `+∞`; the matrix product skips structural
//! zeros so `0 · (+∞)` never arises.

use nalgebra::DMatrix;

use crate::error::{check_len, check_nonnegative, Error, Result};
use crate::eta::ConvexEta;
use crate::extreal::ExtendedReal;
use crate::trace::{EntropyTrace, TraceRow};

/// Relative per-column tolerance for the stochasticity classification.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Strictly positive weights `μⱼ` on grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one point".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} at index {i} is not strictly positive")));
        }
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize, weight: f64) -> Result<Self> {
        Measure::new(vec![weight; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: &GridFunction) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self.weights.iter().zip(f.values()).map(|(w, x)| w * x).sum())
    }
}

/// Values on grid points. Densities are nonnegative; operations that need
/// nonnegativity check it and fail with [`Error::NegativeInput`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(n: usize) -> Self {
        GridFunction { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        GridFunction::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        GridFunction { values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stochasticity {
    GeneralPositive,
    Substochastic,
    Stochastic,
}

impl Stochasticity {
    pub fn label(self) -> &'static str {
        match self {
            Stochasticity::GeneralPositive => "GENERAL_POSITIVE",
            Stochasticity::Substochastic => "SUBSTOCHASTIC",
            Stochasticity::Stochastic => "STOCHASTIC",
        }
    }

    /// Stochastic operators are in particular substochastic.
    pub fn is_substochastic(self) -> bool {
        !matches!(self, Stochasticity::GeneralPositive)
    }
}

/// Entrywise nonnegative `m × n` matrix from `L¹(μ₁)` (length `n`) to `L¹(μ₂)` (length `m`).
#[derive(Debug, Clone)]
pub struct PositiveOperator {
    matrix: DMatrix<f64>,
    domain: Measure,
    codomain: Measure,
    stochasticity: Stochasticity,
    column_residual: f64,
}

impl PositiveOperator {
    pub fn new(matrix: DMatrix<f64>, domain: Measure, codomain: Measure) -> Result<Self> {
        check_len(domain.len(), matrix.ncols())?;
        check_len(codomain.len(), matrix.nrows())?;
        check_nonnegative(matrix.as_slice())?;
        let (stochasticity, column_residual) = classify(&matrix, &domain, &codomain);
        Ok(PositiveOperator { matrix, domain, codomain, stochasticity, column_residual })
    }

    /// Operator on a single space with unit weights.
    pub fn with_unit_weights(matrix: DMatrix<f64>) -> Result<Self> {
        let domain = Measure::uniform(matrix.ncols(), 1.0)?;
        let codomain = Measure::uniform(matrix.nrows(), 1.0)?;
        PositiveOperator::new(matrix, domain, codomain)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain_measure(&self) -> &Measure {
        &self.domain
    }

    pub fn codomain_measure(&self) -> &Measure {
        &self.codomain
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn stochasticity(&self) -> Stochasticity {
        self.stochasticity
    }

    /// `max_j |Σᵢ μ₂ᵢ Mᵢⱼ − μ₁ⱼ| / μ₁ⱼ`.
    pub fn stochasticity_residual(&self) -> f64 {
        self.column_residual
    }

    /// `(Uf)ᵢ = Σⱼ Mᵢⱼ fⱼ` for `f ≥ 0`.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        check_len(self.ncols(), f.len())?;
        check_nonnegative(f.values())?;
        Ok(GridFunction::from_unchecked(self.apply_raw(f.values())))
    }

    pub(crate) fn apply_raw(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for (j, col) in self.matrix.column_iter().enumerate() {
            let fj = f[j];
            if fj == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * fj;
            }
        }
        out
    }

    /// Matrix product with an extended-real vector; zero entries contribute nothing.
    pub fn apply_extended(&self, phi: &[ExtendedReal]) -> Result<Vec<ExtendedReal>> {
        check_len(self.ncols(), phi.len())?;
        let mut finite = vec![0.0; self.nrows()];
        let mut infinite = vec![false; self.nrows()];
        for (j, col) in self.matrix.column_iter().enumerate() {
            match phi[j] {
                ExtendedReal::Finite(p) => {
                    if p == 0.0 {
                        continue;
                    }
                    for (o, &m) in finite.iter_mut().zip(col.iter()) {
                        *o += m * p;
                    }
                }
                ExtendedReal::PosInf => {
                    for (inf, &m) in infinite.iter_mut().zip(col.iter()) {
                        if m > 0.0 {
                            *inf = true;
                        }
                    }
                }
            }
        }
        Ok(finite
            .into_iter()
            .zip(infinite)
            .map(|(x, inf)| if inf { ExtendedReal::PosInf } else { ExtendedReal::from_f64(x) })
            .collect())
    }
}

fn classify(matrix: &DMatrix<f64>, domain: &Measure, codomain: &Measure) -> (Stochasticity, f64) {
    let mut all_equal = true;
    let mut all_below = true;
    let mut residual = 0.0f64;
    for (j, col) in matrix.column_iter().enumerate() {
        let mass: f64 = col.iter().zip(codomain.weights()).map(|(m, w)| m * w).sum();
        let target = domain.weights()[j];
        let rel = (mass - target) / target;
        residual = residual.max(rel.abs());
        all_equal &= rel.abs() <= STOCHASTIC_TOL;
        all_below &= rel <= STOCHASTIC_TOL;
    }
    let class = if all_equal {
        Stochasticity::Stochastic
    } else if all_below {
        Stochasticity::Substochastic
    } else {
        Stochasticity::GeneralPositive
    };
    (class, residual)
}

/// `H_η(f | g) = Σⱼ μⱼ φ_η(fⱼ, gⱼ)`.
pub fn relative_entropy(
    eta: &ConvexEta,
    f: &GridFunction,
    g: &GridFunction,
    mu: &Measure,
) -> Result<ExtendedReal> {
    check_len(mu.len(), f.len())?;
    check_len(mu.len(), g.len())?;
    check_nonnegative(f.values())?;
    check_nonnegative(g.values())?;
    entropy_raw(eta, f.values(), g.values(), mu.weights())
}

pub(crate) fn entropy_raw(eta: &ConvexEta, f: &[f64], g: &[f64], mu: &[f64]) -> Result<ExtendedReal> {
    let mut total = ExtendedReal::ZERO;
    for ((&u, &v), &w) in f.iter().zip(g).zip(mu) {
        total = total + eta.phi(u, v)?.scale(w)?;
        if total.is_infinite() {
            break;
        }
    }
    Ok(total)
}

/// Outcome of an inequality check: one margin per compared entry
/// (`right side − left side`, `±∞` when one side is infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin_index: usize,
    pub passed: bool,
    /// Left side (`φ_η(Uf, Ug)` or `H_{η,2}(Uf|Ug)`).
    pub lhs: Vec<ExtendedReal>,
    /// Right side (`U φ_η(f, g)` or `H_{η,1}(f|g)`).
    pub rhs: Vec<ExtendedReal>,
}

impl MarginReport {
    fn from_sides(lhs: Vec<ExtendedReal>, rhs: Vec<ExtendedReal>, passes: impl Fn(f64, ExtendedReal, ExtendedReal) -> bool) -> Self {
        let margins: Vec<f64> = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| r.margin_over(*l).unwrap_or(f64::INFINITY))
            .collect();
        let (argmin_index, min_margin) = margins
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bm), (i, m)| if m < bm { (i, m) } else { (bi, bm) });
        let passed = margins
            .iter()
            .zip(lhs.iter().zip(&rhs))
            .all(|(&m, (&l, &r))| passes(m, l, r));
        MarginReport { margins, min_margin, argmin_index, passed, lhs, rhs }
    }
}

/// Pointwise perspective inequality `φ_η(Uf, Ug) ≤ U φ_η(f, g)`.
///
/// Row `i` passes when its margin is at least `−tolerance · (1 + |s|)` with
/// `s` the finite side; `+∞` on the right always passes and `+∞` on the left
/// against a finite right side fails.
pub fn verify_lr(
    u: &PositiveOperator,
    eta: &ConvexEta,
    f: &GridFunction,
    g: &GridFunction,
    tolerance: f64,
) -> Result<MarginReport> {
    check_len(u.ncols(), f.len())?;
    check_len(u.ncols(), g.len())?;
    check_nonnegative(f.values())?;
    check_nonnegative(g.values())?;

    let uf = u.apply_raw(f.values());
    let ug = u.apply_raw(g.values());
    let phi: Vec<ExtendedReal> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(&a, &b)| eta.phi(a, b))
        .collect::<Result<_>>()?;
    let rhs = u.apply_extended(&phi)?;
    let lhs: Vec<ExtendedReal> = uf
        .iter()
        .zip(&ug)
        .map(|(&a, &b)| eta.phi(a, b))
        .collect::<Result<_>>()?;

    Ok(MarginReport::from_sides(lhs, rhs, |m, _, r| match r {
        ExtendedReal::PosInf => true,
        ExtendedReal::Finite(x) => m >= -tolerance * (1.0 + x.abs()),
    }))
}

/// Csiszár contraction `H_{η,2}(Uf|Ug) ≤ H_{η,1}(f|g)`.
///
/// Requires a stochastic `U`, or a substochastic one together with `η ≥ 0`
/// (checked by sampling). Passes when the margin is at least `−tolerance`
/// or when `H_{η,1}(f|g) = +∞`.
pub fn verify_csiszar(
    u: &PositiveOperator,
    eta: &ConvexEta,
    f: &GridFunction,
    g: &GridFunction,
    tolerance: f64,
) -> Result<MarginReport> {
    match u.stochasticity() {
        Stochasticity::Stochastic => {}
        Stochasticity::Substochastic if eta.is_nonnegative_sampled() => {}
        Stochasticity::Substochastic => {
            return Err(Error::NotStochastic {
                required: "STOCHASTIC (or SUBSTOCHASTIC with a nonnegative eta)",
                found: "SUBSTOCHASTIC",
            })
        }
        Stochasticity::GeneralPositive => {
            return Err(Error::NotStochastic {
                required: "STOCHASTIC or SUBSTOCHASTIC",
                found: "GENERAL_POSITIVE",
            })
        }
    }
    let before = relative_entropy(eta, f, g, u.domain_measure())?;
    let uf = u.apply(f)?;
    let ug = u.apply(g)?;
    let after = relative_entropy(eta, &uf, &ug, u.codomain_measure())?;
    Ok(MarginReport::from_sides(vec![after], vec![before], |m, _, r| {
        r.is_infinite() || m >= -tolerance
    }))
}

/// Relative entropy along the discrete semigroup `k ↦ Uᵏ`.
///
/// Rows carry `H_η(Uᵏf₀ | Uᵏg₀)`, the mass `‖Uᵏf₀‖_μ` and the entropy drop
/// from the previous step.
pub fn power_iterate_gre(
    u: &PositiveOperator,
    eta: &ConvexEta,
    f0: &GridFunction,
    g0: &GridFunction,
    steps: usize,
) -> Result<EntropyTrace> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.ncols(), got: u.nrows() });
    }
    if u.stochasticity() != Stochasticity::Stochastic || u.domain_measure() != u.codomain_measure() {
        return Err(Error::NotStochastic {
            required: "STOCHASTIC on a single measure",
            found: u.stochasticity().label(),
        });
    }
    check_len(u.ncols(), f0.len())?;
    check_len(u.ncols(), g0.len())?;
    check_nonnegative(f0.values())?;
    check_nonnegative(g0.values())?;

    let mu = u.domain_measure();
    let mut f = f0.values().to_vec();
    let mut g = g0.values().to_vec();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut previous: Option<ExtendedReal> = None;
    for k in 0..=steps {
        if k > 0 {
            f = u.apply_raw(&f);
            g = u.apply_raw(&g);
        }
        let entropy = entropy_raw(eta, &f, &g, mu.weights())?;
        let mass = mu.weights().iter().zip(&f).map(|(w, x)| w * x).sum();
        let margin = previous.map(|p| p.margin_over(entropy).unwrap_or(f64::INFINITY));
        rows.push(TraceRow { step: k, time: k as f64, entropy, mass, reference_mass: None, margin });
        previous = Some(entropy);
    }
    Ok(EntropyTrace { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(v: &[f64]) -> GridFunction {
        GridFunction::new(v.to_vec()).unwrap()
    }

    fn op(rows: usize, cols: usize, data: &[f64]) -> PositiveOperator {
        PositiveOperator::with_unit_weights(DMatrix::from_row_slice(rows, cols, data)).unwrap()
    }

    #[test]
    fn apply_examples() {
        let f = gf(&[2.0, 4.0]);
        assert_eq!(op(2, 2, &[1.0, 0.0, 0.0, 1.0]).apply(&f).unwrap(), f);
        assert_eq!(op(2, 2, &[0.0; 4]).apply(&f).unwrap(), gf(&[0.0, 0.0]));
        assert_eq!(op(1, 2, &[0.5, 0.5]).apply(&f).unwrap(), gf(&[3.0]));
    }

    #[test]
    fn apply_errors() {
        let u = op(1, 2, &[0.5, 0.5]);
        assert!(matches!(u.apply(&gf(&[1.0])), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(u.apply(&gf(&[1.0, -1.0])), Err(Error::NegativeInput { index: 1, .. })));
        assert!(PositiveOperator::with_unit_weights(DMatrix::from_row_slice(1, 1, &[-0.1])).is_err());
        assert!(Measure::new(vec![1.0, 0.0]).is_err());
        assert!(Measure::new(vec![]).is_err());
    }

    #[test]
    fn classification_examples() {
        let m = [0.7, 0.2, 0.3, 0.8];
        assert_eq!(op(2, 2, &m).stochasticity(), Stochasticity::Stochastic);
        let scaled: Vec<f64> = m.iter().map(|x| 0.9 * x).collect();
        assert_eq!(op(2, 2, &scaled).stochasticity(), Stochasticity::Substochastic);
        assert_eq!(op(1, 1, &[2.0]).stochasticity(), Stochasticity::GeneralPositive);
    }

    #[test]
    fn weighted_classification() {
        // column j must carry mass mu1_j under mu2
        let mu1 = Measure::new(vec![2.0, 1.0]).unwrap();
        let mu2 = Measure::new(vec![1.0, 4.0]).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.25, 0.2]);
        let u = PositiveOperator::new(m, mu1.clone(), mu2.clone()).unwrap();
        assert_eq!(u.stochasticity(), Stochasticity::Stochastic);
        let f = gf(&[0.3, 1.7]);
        let mass_in = mu1.integrate(&f).unwrap();
        let mass_out = mu2.integrate(&u.apply(&f).unwrap()).unwrap();
        assert!((mass_in - mass_out).abs() <= 1e-12 * mass_in);
    }

    #[test]
    fn relative_entropy_examples() {
        let mu = Measure::uniform(2, 1.0).unwrap();
        let f = gf(&[0.4, 0.0]);
        assert_eq!(relative_entropy(&ConvexEta::quad(), &f, &f, &mu).unwrap(), ExtendedReal::ZERO);
        assert_eq!(
            relative_entropy(&ConvexEta::kl(), &gf(&[1.0, 0.0]), &gf(&[0.0, 1.0]), &mu).unwrap(),
            ExtendedReal::PosInf
        );
        assert_eq!(
            relative_entropy(&ConvexEta::tv(), &gf(&[2.0, 0.0]), &gf(&[1.0, 1.0]), &mu).unwrap(),
            ExtendedReal::Finite(2.0)
        );
    }

    #[test]
    fn lr_identity_is_tight() {
        let u = op(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = verify_lr(&u, &ConvexEta::kl(), &gf(&[0.2, 0.0, 1.0]), &gf(&[0.5, 0.3, 0.0]), 1e-9).unwrap();
        assert!(r.passed);
        assert_eq!(r.margins[0], 0.0);
        assert_eq!(r.margins[1], 0.0);
        // both sides +inf on the last row
        assert_eq!(r.lhs[2], ExtendedReal::PosInf);
        assert_eq!(r.margins[2], f64::INFINITY);
    }

    #[test]
    fn lr_averaging_row_is_jensen() {
        let n = 4;
        let u = op(1, n, &vec![1.0 / n as f64; n]);
        let f = gf(&[0.1, 0.9, 0.0, 0.4]);
        let g = gf(&[0.3, 0.2, 0.5, 0.4]);
        let r = verify_lr(&u, &ConvexEta::quad(), &f, &g, 1e-9).unwrap();
        // direct evaluation of both sides
        let phi: f64 = f.values().iter().zip(g.values()).map(|(a, b)| (a - b) * (a - b) / b).sum::<f64>() / 4.0;
        let (fa, ga) = (1.4 / 4.0, 1.4 / 4.0);
        let lhs = (fa - ga) * (fa - ga) / ga;
        assert!((r.margins[0] - (phi - lhs)).abs() < 1e-12);
        assert!(r.margins[0] >= 0.0 && r.passed);
    }

    #[test]
    fn lr_zero_column_with_infinite_phi() {
        // phi_1 = +inf but column 1 is zero: 0 * inf must not be formed.
        let u = op(2, 2, &[0.5, 0.0, 0.5, 0.0]);
        let r = verify_lr(&u, &ConvexEta::kl(), &gf(&[0.2, 1.0]), &gf(&[0.4, 0.0]), 1e-9).unwrap();
        assert!(r.rhs.iter().all(|x| x.is_finite()));
        assert!(r.passed);
    }

    #[test]
    fn lr_detects_infinite_left_side() {
        let report = MarginReport::from_sides(
            vec![ExtendedReal::PosInf],
            vec![ExtendedReal::Finite(1.0)],
            |m, _, _| m >= -1e-9,
        );
        assert!(!report.passed);
        assert_eq!(report.min_margin, f64::NEG_INFINITY);
    }

    #[test]
    fn csiszar_hand_example() {
        let a = 0.3;
        let u = op(2, 2, &[1.0 - a, a, a, 1.0 - a]);
        let r = verify_csiszar(&u, &ConvexEta::quad(), &gf(&[1.0, 0.0]), &gf(&[0.5, 0.5]), 1e-9).unwrap();
        assert!((r.rhs[0].to_f64() - 1.0).abs() < 1e-14);
        assert!((r.lhs[0].to_f64() - 0.16).abs() < 1e-14);
        assert!((r.margins[0] - 0.84).abs() < 1e-14);
        assert!(r.passed);
    }

    #[test]
    fn csiszar_equal_arguments_have_zero_margin() {
        let u = op(2, 2, &[0.6, 0.1, 0.4, 0.9]);
        let f = gf(&[0.25, 0.75]);
        for eta in [ConvexEta::quad(), ConvexEta::tv(), ConvexEta::kl()] {
            let r = verify_csiszar(&u, &eta, &f, &f, 1e-12).unwrap();
            assert!(r.margins[0].abs() < 1e-15, "{eta}");
        }
    }

    #[test]
    fn csiszar_preconditions() {
        let general = op(1, 1, &[2.0]);
        let f = gf(&[1.0]);
        assert!(matches!(
            verify_csiszar(&general, &ConvexEta::quad(), &f, &f, 1e-9),
            Err(Error::NotStochastic { .. })
        ));
        let sub = op(1, 1, &[0.5]);
        assert!(verify_csiszar(&sub, &ConvexEta::quad(), &f, &f, 1e-9).is_ok());
        assert!(matches!(
            verify_csiszar(&sub, &ConvexEta::kl(), &f, &f, 1e-9),
            Err(Error::NotStochastic { .. })
        ));
    }

    #[test]
    fn csiszar_infinite_before_passes_vacuously() {
        let u = op(1, 2, &[1.0, 1.0]);
        let r = verify_csiszar(&u, &ConvexEta::kl(), &gf(&[1.0, 1.0]), &gf(&[0.0, 1.0]), 0.0).unwrap();
        assert_eq!(r.rhs[0], ExtendedReal::PosInf);
        assert!(r.passed);
    }

    #[test]
    fn power_iteration_trivial_cases() {
        let u = op(2, 2, &[0.7, 0.2, 0.3, 0.8]);
        let f = gf(&[0.3, 0.6]);
        let trace = power_iterate_gre(&u, &ConvexEta::quad(), &f, &f, 10).unwrap();
        assert_eq!(trace.len(), 11);
        assert!(trace.entropies().all(|e| e == ExtendedReal::ZERO));

        let id = op(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let trace = power_iterate_gre(&id, &ConvexEta::kl(), &f, &gf(&[0.5, 0.1]), 5).unwrap();
        let first = trace.rows[0].entropy;
        assert!(trace.entropies().all(|e| e == first));

        let sub = op(1, 1, &[0.5]);
        assert!(power_iterate_gre(&sub, &ConvexEta::kl(), &gf(&[1.0]), &gf(&[1.0]), 3).is_err());
    }
}
