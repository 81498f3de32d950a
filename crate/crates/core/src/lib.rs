//! Relative-entropy contraction for positive operators on finite grids.
//!
//! The crate evaluates perspective functions `φ_η(u, v) = v η(u/v)` of convex
//! generators, checks the pointwise inequality `φ_η(Uf, Ug) ≤ U φ_η(f, g)` and
//! its integrated (Csiszár) form for positive and stochastic matrices, and
//! runs two positivity-preserving schemes whose relative entropy is
//! nonincreasing by construction:
//!
//! - [`growth`]: growth-fragmentation with an exactly conserved dual weight,
//! - [`transport`]: discrete-ordinates transport in a slab with absorbing ends.
//!
//! [`reports`] drives the fuzzing and simulation commands of the `grekit` CLI.

#![forbid(unsafe_code)]

pub mod error;
pub mod eta;
pub mod extreal;
pub mod fuzz;
pub mod growth;
pub mod io;
pub mod presets;
pub mod reports;
pub mod trace;
pub mod transport;
pub mod weighted;

pub use error::{Error, Result};
pub use eta::{ConvexEta, EtaKind};
pub use extreal::ExtendedReal;
pub use trace::{EntropyTrace, TraceRow};
pub use weighted::{
    power_iterate_gre, relative_entropy, verify_csiszar, verify_lr, GridFunction, MarginReport,
    Measure, PositiveOperator, Stochasticity,
};
