//! Time series of relative entropy and mass along a positive dynamics.

use crate::extreal::ExtendedReal;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub entropy: ExtendedReal,
    /// Total (weighted) mass of the tracked solution.
    pub mass: f64,
    /// Mass of the reference solution, when the model tracks one separately.
    pub reference_mass: Option<f64>,
    /// Per-step certificate: entropy drop, Csiszár margin or LR min margin
    /// depending on the producer. `None` on the initial row.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntropyTrace {
    pub rows: Vec<TraceRow>,
}

impl EntropyTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn entropies(&self) -> impl Iterator<Item = ExtendedReal> + '_ {
        self.rows.iter().map(|r| r.entropy)
    }

    /// Largest normalized one-step increase `(E_{k+1} − E_k) / max(1, |E_k|)`
    /// over consecutive finite entries; `+∞` if a finite entry is followed by
    /// `+∞` (infinite values may only form a prefix). Zero for monotone traces.
    pub fn max_relative_increase(&self) -> f64 {
        let mut worst = 0.0f64;
        for pair in self.rows.windows(2) {
            match (pair[0].entropy, pair[1].entropy) {
                (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
                    worst = worst.max((b - a) / a.abs().max(1.0));
                }
                (ExtendedReal::Finite(_), ExtendedReal::PosInf) => return f64::INFINITY,
                _ => {}
            }
        }
        worst
    }

    /// `E_{k+1} ≤ E_k + slack · max(1, |E_k|)` for every step.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.max_relative_increase() <= slack
    }

    /// Smallest recorded per-step margin, ignoring rows without one.
    pub fn min_margin(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.margin)
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.min(m))))
    }
}
