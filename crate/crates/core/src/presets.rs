//! Named coefficient profiles and initial-data presets used by the model configs.
//!
//! Profiles are written as short strings in config files: `zero`, `const:c`,
//! `linear` (`x`), `linear:c` (`c·x`), `power:k` (`x^k`). The fragmentation
//! kernel is `none`, `binary` or `parabolic`. Initial data use a call syntax:
//! `uniform(c)`, `gaussian(x0,s)`, `spike(x0)` and, for the transport model,
//! `beam(x0,v_index)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar coefficient sampled at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    Zero,
    Const(f64),
    Linear(f64),
    Power(f64),
}

impl Profile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Const(c) => c,
            Profile::Linear(c) => c * x,
            Profile::Power(k) => x.powf(k),
        }
    }

    pub fn sample(self, centers: &[f64]) -> Vec<f64> {
        centers.iter().map(|&x| self.eval(x)).collect()
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(parse_number(a)?)),
            None => (s, None),
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("zero", None) => Ok(Profile::Zero),
            ("const", Some(c)) => Ok(Profile::Const(c)),
            ("linear" | "x", None) => Ok(Profile::Linear(1.0)),
            ("linear", Some(c)) => Ok(Profile::Linear(c)),
            ("power", Some(k)) => Ok(Profile::Power(k)),
            _ => Err(Error::Parse(format!("unknown profile `{s}`"))),
        }
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Const(c) => write!(f, "const:{c}"),
            Profile::Linear(c) if *c == 1.0 => write!(f, "linear"),
            Profile::Linear(c) => write!(f, "linear:{c}"),
            Profile::Power(k) => write!(f, "power:{k}"),
        }
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

/// Daughter distribution of the fragmentation operator, `b(y, x) = B(y) k(x/y) / y`
/// with `∫₀¹ s k(s) ds = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FragKernel {
    None,
    /// Two fragments, uniformly distributed: `k(s) = 2`.
    Binary,
    /// `k(s) = 12 s (1 − s)`.
    Parabolic,
}

impl FragKernel {
    /// `b(y, x)` for `0 < x < y`, given `B(y)`.
    pub fn eval(self, y: f64, x: f64, rate_at_y: f64) -> f64 {
        let s = x / y;
        let shape = match self {
            FragKernel::None => 0.0,
            FragKernel::Binary => 2.0,
            FragKernel::Parabolic => 12.0 * s * (1.0 - s),
        };
        rate_at_y * shape / y
    }
}

/// Initial data on a cell grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialData {
    Uniform(f64),
    Gaussian { x0: f64, s: f64 },
    /// Unit mass in the cell containing `x0` (clamped to the grid).
    Spike { x0: f64 },
    /// Unit mass in the cell containing `x0` on ordinate `v_index`.
    Beam { x0: f64, v_index: usize },
}

impl InitialData {
    /// Values on a 1-D grid of width `dx`; `Beam` needs a velocity grid.
    pub fn sample_1d(self, centers: &[f64], dx: f64) -> Result<Vec<f64>> {
        let n = centers.len();
        match self {
            InitialData::Uniform(c) => Ok(vec![c; n]),
            InitialData::Gaussian { x0, s } => Ok(centers.iter().map(|&x| gaussian(x, x0, s)).collect()),
            InitialData::Spike { x0 } => {
                let mut v = vec![0.0; n];
                v[cell_of(x0, dx, n)] = 1.0 / dx;
                Ok(v)
            }
            InitialData::Beam { .. } => Err(Error::Config("beam(..) needs a velocity grid".into())),
        }
    }

    /// Values on an `(ordinate, cell)` grid flattened as `k * n_x + i`.
    pub fn sample_phase(self, centers: &[f64], dx: f64, n_v: usize, dv: f64) -> Result<Vec<f64>> {
        let n_x = centers.len();
        match self {
            InitialData::Beam { x0, v_index } => {
                if v_index >= n_v {
                    return Err(Error::Config(format!("beam ordinate {v_index} out of range 0..{n_v}")));
                }
                let mut v = vec![0.0; n_x * n_v];
                v[v_index * n_x + cell_of(x0, dx, n_x)] = 1.0 / (dx * dv);
                Ok(v)
            }
            other => {
                let profile = other.sample_1d(centers, dx)?;
                Ok((0..n_v).flat_map(|_| profile.iter().copied()).collect())
            }
        }
    }
}

fn gaussian(x: f64, x0: f64, s: f64) -> f64 {
    (-(x - x0) * (x - x0) / (2.0 * s * s)).exp()
}

fn cell_of(x: f64, dx: f64, n: usize) -> usize {
    let idx = (x / dx).floor();
    if idx < 0.0 {
        0
    } else {
        (idx as usize).min(n - 1)
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{}` is not a number", s.trim())))
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("expected name(args), got `{s}`")))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("missing `)` in `{s}`")))?;
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("`{name}` takes {n} argument(s), got {}", args.len())))
            }
        };
        match name.trim() {
            "uniform" => {
                arity(1)?;
                Ok(InitialData::Uniform(parse_number(args[0])?))
            }
            "gaussian" => {
                arity(2)?;
                let s = parse_number(args[1])?;
                if s <= 0.0 {
                    return Err(Error::Parse("gaussian width must be positive".into()));
                }
                Ok(InitialData::Gaussian { x0: parse_number(args[0])?, s })
            }
            "spike" => {
                arity(1)?;
                Ok(InitialData::Spike { x0: parse_number(args[0])? })
            }
            "beam" => {
                arity(2)?;
                let v_index = args[1]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("`{}` is not an ordinate index", args[1])))?;
                Ok(InitialData::Beam { x0: parse_number(args[0])?, v_index })
            }
            other => Err(Error::Parse(format!("unknown initial data `{other}`"))),
        }
    }
}

impl TryFrom<String> for InitialData {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Uniform(c) => write!(f, "uniform({c})"),
            InitialData::Gaussian { x0, s } => write!(f, "gaussian({x0},{s})"),
            InitialData::Spike { x0 } => write!(f, "spike({x0})"),
            InitialData::Beam { x0, v_index } => write!(f, "beam({x0},{v_index})"),
        }
    }
}

impl From<InitialData> for String {
    fn from(d: InitialData) -> String {
        d.to_string()
    }
}
