//! Intrinsic rewards computed from occupancy representations.
//!
//! Every tabular reward reads the representation after it has been updated
//! with the same transition.

use std::fmt;
use std::str::FromStr;

use crate::envs::Transition;
use crate::repr::OccupancyMatrix;
use crate::{Error, Result};

/// Floor applied to norms that appear in a denominator.
pub const EPS_NORM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntrinsicKind {
    None,
    /// `1 / ||M[s, :]||_1`
    Sr,
    /// `||F[s, :]||_1`
    Fr,
    /// `M[s, s'] - ||M[:, s']||_1`
    Srr,
    /// Prospective term of `Srr` alone.
    SrrA,
    /// Retrospective term of `Srr` alone.
    SrrB,
    /// `M[s, s'] - ||N[:, s']||_1`
    SrPr,
    /// Successor-feature bonus `1 / ||psi(s, a)||_1` (linear agent only).
    Sf,
    /// Successor-predecessor feature bonus (linear agent only).
    SfPf,
}

impl IntrinsicKind {
    pub const ALL: [IntrinsicKind; 9] = [
        IntrinsicKind::None,
        IntrinsicKind::Sr,
        IntrinsicKind::Fr,
        IntrinsicKind::Srr,
        IntrinsicKind::SrrA,
        IntrinsicKind::SrrB,
        IntrinsicKind::SrPr,
        IntrinsicKind::Sf,
        IntrinsicKind::SfPf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntrinsicKind::None => "none",
            IntrinsicKind::Sr => "sr",
            IntrinsicKind::Fr => "fr",
            IntrinsicKind::Srr => "srr",
            IntrinsicKind::SrrA => "srr_a",
            IntrinsicKind::SrrB => "srr_b",
            IntrinsicKind::SrPr => "sr_pr",
            IntrinsicKind::Sf => "sf",
            IntrinsicKind::SfPf => "sf_pf",
        }
    }

    /// Agent label as used in result tables, e.g. `SARSA-SRR(a)`.
    pub fn agent_label(self) -> &'static str {
        match self {
            IntrinsicKind::None => "SARSA",
            IntrinsicKind::Sr => "SARSA-SR",
            IntrinsicKind::Fr => "SARSA-FR",
            IntrinsicKind::Srr => "SARSA-SRR",
            IntrinsicKind::SrrA => "SARSA-SRR(a)",
            IntrinsicKind::SrrB => "SARSA-SRR(b)",
            IntrinsicKind::SrPr => "SARSA-SR-PR",
            IntrinsicKind::Sf => "Q-SF",
            IntrinsicKind::SfPf => "Q-SF-PF",
        }
    }

    /// Kinds served by the tabular SARSA agent.
    pub fn is_tabular(self) -> bool {
        !matches!(self, IntrinsicKind::Sf | IntrinsicKind::SfPf)
    }
}

impl fmt::Display for IntrinsicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntrinsicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        IntrinsicKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown intrinsic kind `{s}`")))
    }
}

/// Which bonus to add and how strongly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicRewardSpec {
    pub kind: IntrinsicKind,
    pub beta: f64,
    /// Read a precomputed random-walk representation instead of learning one.
    pub frozen: bool,
}

impl IntrinsicRewardSpec {
    pub fn none() -> Self {
        IntrinsicRewardSpec {
            kind: IntrinsicKind::None,
            beta: 0.0,
            frozen: false,
        }
    }

    pub fn new(kind: IntrinsicKind, beta: f64) -> Self {
        IntrinsicRewardSpec {
            kind,
            beta,
            frozen: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.frozen && !self.kind.is_tabular() {
            return Err(Error::Config(format!(
                "a frozen representation is not available for `{}`",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Prospective term `M[s, s']`.
pub fn r_srr_a(m: &OccupancyMatrix, t: &Transition) -> f64 {
    m.get(t.s, t.s_next)
}

/// Retrospective term `-||M[:, s']||_1`.
pub fn r_srr_b(m: &OccupancyMatrix, t: &Transition) -> f64 {
    -column_sum(m, t.s_next)
}

/// `M[s, s'] - ||M[:, s']||_1`, never positive for a nonnegative `M`.
pub fn r_srr(m: &OccupancyMatrix, t: &Transition) -> f64 {
    r_srr_a(m, t) + r_srr_b(m, t)
}

/// `1 / max(||M[s, :]||_1, EPS_NORM)`
pub fn r_sr(m: &OccupancyMatrix, t: &Transition) -> f64 {
    1.0 / m.row_l1(t.s).max(EPS_NORM)
}

/// `||F[s, :]||_1`
pub fn r_fr(f: &OccupancyMatrix, t: &Transition) -> f64 {
    f.row_l1(t.s)
}

/// `M[s, s'] - ||N[:, s']||_1`
pub fn r_sr_pr(m: &OccupancyMatrix, n: &OccupancyMatrix, t: &Transition) -> f64 {
    m.get(t.s, t.s_next) - column_sum(n, t.s_next)
}

/// `r_ext + beta * r_int`
pub fn combine(r_ext: f64, r_int: f64, beta: f64) -> f64 {
    r_ext + beta * r_int
}

// Plain sum over the column: for nonnegative entries rounding is monotone, so
// the result is never below any single entry.
fn column_sum(m: &OccupancyMatrix, col: usize) -> f64 {
    m.values.column(col).iter().map(|v| v.abs()).sum()
}
