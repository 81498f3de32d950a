//! Convex entropy generators `η` on `[0, ∞)` and their perspective `φ_η`.
//!
//! The perspective is the positively 1-homogeneous extension of `η`:
//!
//! ```text
//! φ_η(u, v) = v · η(u / v)   v > 0, u ≥ 0
//!           = 0              v = 0, u = 0
//!           = u · η'(∞)      v = 0, u > 0
//! ```
//!
//! where `η'(∞) = lim η(x)/x` is the recession slope. Every builtin generator
//! evaluates the `v > 0` branch through an algebraically equivalent closed form
//! (`u ln(u/v)`, `(u − v)²/v`, `|u − v|`, `u^p v^(1−p)`) that does not overflow
//! for small `v`.
//!
//! Generators serialize to the config fragments `{"kind":"KL"}`,
//! `{"kind":"POWER","p":2.5}` and `{"kind":"PA","pieces":[[a1,b1],...]}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{ExtendedReal, PosInf};

/// The family a generator belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaKind {
    /// `x ln x`, with `η(0) = 0`.
    Kl,
    /// `(x − 1)²`.
    Quad,
    /// `|x − 1|`.
    Tv,
    /// `x^p`, `p > 1`.
    Power(f64),
    /// `max_i (a_i x + b_i)`, stored as `(a_i, b_i)`.
    PiecewiseAffine(Vec<(f64, f64)>),
}

/// A convex function on `[0, ∞)` together with its recession slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EtaSpec", into = "EtaSpec")]
pub struct ConvexEta {
    kind: EtaKind,
    recession_slope: ExtendedReal,
}

impl ConvexEta {
    pub fn kl() -> Self {
        ConvexEta { kind: EtaKind::Kl, recession_slope: PosInf }
    }

    pub fn quad() -> Self {
        ConvexEta { kind: EtaKind::Quad, recession_slope: PosInf }
    }

    pub fn tv() -> Self {
        ConvexEta { kind: EtaKind::Tv, recession_slope: ExtendedReal::Finite(1.0) }
    }

    /// `x ↦ x^p`; only the convex range `p > 1` is accepted.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidEta(format!("POWER requires finite p > 1, got {p}")));
        }
        Ok(ConvexEta { kind: EtaKind::Power(p), recession_slope: PosInf })
    }

    /// `x ↦ max_i (a_i x + b_i)` from `(slope, intercept)` pairs.
    pub fn piecewise_affine(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidEta("PIECEWISE_AFFINE needs at least one piece".into()));
        }
        if pieces.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidEta("PIECEWISE_AFFINE pieces must be finite".into()));
        }
        let slope = pieces.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        Ok(ConvexEta {
            kind: EtaKind::PiecewiseAffine(pieces),
            recession_slope: ExtendedReal::Finite(slope),
        })
    }

    pub fn kind(&self) -> &EtaKind {
        &self.kind
    }

    /// `η'(∞) = lim_{x→∞} η(x)/x`.
    pub fn recession_slope(&self) -> ExtendedReal {
        self.recession_slope
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, EtaKind::PiecewiseAffine(_))
    }

    /// `η(x)` for `x ≥ 0`.
    pub fn eval(&self, x: f64) -> Result<ExtendedReal> {
        check_arg(0, x)?;
        let value = match &self.kind {
            EtaKind::Kl => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            EtaKind::Quad => (x - 1.0) * (x - 1.0),
            EtaKind::Tv => (x - 1.0).abs(),
            EtaKind::Power(p) => x.powf(*p),
            EtaKind::PiecewiseAffine(pieces) => max_affine(pieces, x, 1.0),
        };
        Ok(ExtendedReal::from_f64(value))
    }

    /// The perspective `φ_η(u, v)`.
    pub fn phi(&self, u: f64, v: f64) -> Result<ExtendedReal> {
        check_arg(0, u)?;
        check_arg(1, v)?;
        if v == 0.0 {
            if u == 0.0 {
                return Ok(ExtendedReal::ZERO);
            }
            return self.recession_slope.scale_signed(u);
        }
        let value = match &self.kind {
            EtaKind::Kl => {
                if u == 0.0 {
                    0.0
                } else {
                    u * (u.ln() - v.ln())
                }
            }
            EtaKind::Quad => (u - v) * (u - v) / v,
            EtaKind::Tv => (u - v).abs(),
            EtaKind::Power(p) => {
                if u == 0.0 {
                    0.0
                } else {
                    (p * u.ln() + (1.0 - p) * v.ln()).exp()
                }
            }
            EtaKind::PiecewiseAffine(pieces) => v * max_affine(pieces, u / v, 1.0),
        };
        Ok(ExtendedReal::from_f64(value))
    }

    /// A subgradient of a builtin generator at `x > 0`. The TV kink at 1 uses 0.
    fn subgradient(&self, x: f64) -> Result<f64> {
        match &self.kind {
            EtaKind::Kl => Ok(x.ln() + 1.0),
            EtaKind::Quad => Ok(2.0 * (x - 1.0)),
            EtaKind::Tv => Ok(if x < 1.0 {
                -1.0
            } else if x > 1.0 {
                1.0
            } else {
                0.0
            }),
            EtaKind::Power(p) => Ok(p * x.powf(p - 1.0)),
            EtaKind::PiecewiseAffine(_) => Err(Error::InvalidEta(
                "tangent minorant requires a builtin generator".into(),
            )),
        }
    }

    /// Supremum of the tangent lines at `sample_points`.
    ///
    /// The result minorizes `self` on `[0, ∞)`; refining the sample set by
    /// inclusion can only raise it.
    pub fn tangent_minorant(&self, sample_points: &[f64]) -> Result<ConvexEta> {
        if sample_points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        if !self.is_builtin() {
            return Err(Error::InvalidEta(
                "tangent minorant requires a builtin generator".into(),
            ));
        }
        let mut prev = 0.0;
        let mut pieces = Vec::with_capacity(sample_points.len());
        for &s in sample_points {
            if !(s.is_finite() && s > prev) {
                return Err(Error::InvalidSamples(format!(
                    "sample points must be finite, positive and strictly increasing (got {s} after {prev})"
                )));
            }
            prev = s;
            let slope = self.subgradient(s)?;
            let value = self.eval(s)?.finite().ok_or_else(|| {
                Error::InvalidSamples(format!("eta overflows at sample point {s}"))
            })?;
            pieces.push((slope, value - slope * s));
        }
        ConvexEta::piecewise_affine(pieces)
    }

    /// Checks `η ≥ 0` on `[0, ∞)` by sampling: `η(0)`, a log-spaced grid on
    /// `[1e-8, 1e8]` (ten points per decade) and the sign of `η'(∞)`.
    pub fn is_nonnegative_sampled(&self) -> bool {
        let at_zero = matches!(self.eval(0.0), Ok(v) if v >= ExtendedReal::ZERO);
        let grid_ok = (-80..=80).all(|k| {
            let x = 10f64.powf(k as f64 / 10.0);
            matches!(self.eval(x), Ok(v) if v >= ExtendedReal::ZERO)
        });
        at_zero && grid_ok && self.recession_slope >= ExtendedReal::ZERO
    }

    /// Short label used in reports: `KL`, `QUAD`, `TV`, `POWER(p)`, `PA<n>`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConvexEta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EtaKind::Kl => write!(f, "KL"),
            EtaKind::Quad => write!(f, "QUAD"),
            EtaKind::Tv => write!(f, "TV"),
            EtaKind::Power(p) => write!(f, "POWER({p})"),
            EtaKind::PiecewiseAffine(pieces) => write!(f, "PA{}", pieces.len()),
        }
    }
}

impl ExtendedReal {
    /// `u · slope` for `u > 0` where the slope may be any finite real or `+∞`.
    fn scale_signed(self, u: f64) -> Result<ExtendedReal> {
        match self {
            ExtendedReal::Finite(s) => Ok(ExtendedReal::from_f64(u * s)),
            PosInf => PosInf.scale(u),
        }
    }
}

fn check_arg(index: usize, value: f64) -> Result<()> {
    if value.is_nan() || value == f64::INFINITY {
        return Err(Error::NonFinite { index, value });
    }
    if value < 0.0 {
        return Err(Error::NegativeInput { index, value });
    }
    Ok(())
}

fn max_affine(pieces: &[(f64, f64)], x: f64, weight: f64) -> f64 {
    pieces
        .iter()
        .map(|&(a, b)| a * x + b * weight)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Wire form of [`ConvexEta`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum EtaSpec {
    #[serde(rename = "KL")]
    Kl,
    #[serde(rename = "QUAD")]
    Quad,
    #[serde(rename = "TV")]
    Tv,
    #[serde(rename = "POWER")]
    Power { p: f64 },
    #[serde(rename = "PA", alias = "PIECEWISE_AFFINE")]
    PiecewiseAffine { pieces: Vec<[f64; 2]> },
}

impl TryFrom<EtaSpec> for ConvexEta {
    type Error = Error;

    fn try_from(spec: EtaSpec) -> Result<Self> {
        match spec {
            EtaSpec::Kl => Ok(ConvexEta::kl()),
            EtaSpec::Quad => Ok(ConvexEta::quad()),
            EtaSpec::Tv => Ok(ConvexEta::tv()),
            EtaSpec::Power { p } => ConvexEta::power(p),
            EtaSpec::PiecewiseAffine { pieces } => {
                ConvexEta::piecewise_affine(pieces.into_iter().map(|[a, b]| (a, b)).collect())
            }
        }
    }
}

impl From<ConvexEta> for EtaSpec {
    fn from(eta: ConvexEta) -> Self {
        match eta.kind {
            EtaKind::Kl => EtaSpec::Kl,
            EtaKind::Quad => EtaSpec::Quad,
            EtaKind::Tv => EtaSpec::Tv,
            EtaKind::Power(p) => EtaSpec::Power { p },
            EtaKind::PiecewiseAffine(pieces) => EtaSpec::PiecewiseAffine {
                pieces: pieces.into_iter().map(|(a, b)| [a, b]).collect(),
            },
        }
    }
}

impl std::str::FromStr for ConvexEta {
    type Err = Error;

    /// Accepts a JSON fragment or a bare builtin name (`KL`, `QUAD`, `TV`).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()));
        }
        match trimmed.to_ascii_uppercase().as_str() {
            "KL" => Ok(ConvexEta::kl()),
            "QUAD" => Ok(ConvexEta::quad()),
            "TV" => Ok(ConvexEta::tv()),
            other => Err(Error::Parse(format!("unknown generator `{other}`"))),
        }
    }
}
