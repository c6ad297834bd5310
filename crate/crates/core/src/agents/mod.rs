//! Tabular SARSA agents with optional occupancy-based intrinsic rewards.

mod policy;
mod sarsa;

use nalgebra::DMatrix;

pub use policy::{choose_epsilon_greedy, epsilon_greedy};
pub use sarsa::{run_agent, sarsa_step, Representations, SarsaAgent};

use crate::intrinsic::{IntrinsicKind, IntrinsicRewardSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    /// Q learning rate.
    pub alpha: f64,
    /// SR/FR learning rate.
    pub eta: f64,
    /// PR learning rate (SR-PR agent only).
    pub eta_pr: f64,
    /// Value discount.
    pub gamma: f64,
    /// SR/FR discount.
    pub gamma_repr: f64,
    /// PR discount.
    pub gamma_pr: f64,
    pub epsilon: f64,
    pub q_init: f64,
    pub intrinsic: IntrinsicRewardSpec,
    pub seed: u64,
    /// Resample the executed action at every loop head, as in the printed
    /// pseudocode, instead of carrying `a'` over.
    pub strict_pseudocode: bool,
}

impl Default for AgentConfig {
    /// The grid-world tuple with no intrinsic reward.
    fn default() -> Self {
        AgentConfig {
            alpha: 0.1,
            eta: 0.1,
            eta_pr: 0.1,
            gamma: 0.95,
            gamma_repr: 0.95,
            gamma_pr: 0.95,
            epsilon: 0.1,
            q_init: 0.0,
            intrinsic: IntrinsicRewardSpec::none(),
            seed: 0,
            strict_pseudocode: false,
        }
    }
}

impl AgentConfig {
    pub fn kind(&self) -> IntrinsicKind {
        self.intrinsic.kind
    }

    pub fn with_intrinsic(mut self, kind: IntrinsicKind, beta: f64) -> Self {
        self.intrinsic.kind = kind;
        self.intrinsic.beta = beta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        let discount = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("eta", self.eta)?;
        unit("eta_pr", self.eta_pr)?;
        discount("gamma", self.gamma)?;
        discount("gamma_repr", self.gamma_repr)?;
        discount("gamma_pr", self.gamma_pr)?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !self.q_init.is_finite() {
            return Err(Error::Config("q_init must be finite".into()));
        }
        self.intrinsic.validate()
    }

    /// Stable text identifying every behavioural setting except the seed.
    pub fn fingerprint(&self) -> String {
        format!(
            "kind={};beta={};frozen={};alpha={};eta={};eta_pr={};gamma={};gamma_repr={};gamma_pr={};epsilon={};q_init={};strict={}",
            self.intrinsic.kind,
            self.intrinsic.beta,
            self.intrinsic.frozen,
            self.alpha,
            self.eta,
            self.eta_pr,
            self.gamma,
            self.gamma_repr,
            self.gamma_pr,
            self.epsilon,
            self.q_init,
            self.strict_pseudocode
        )
    }
}

/// Q initialisation for the optimistically augmented SR and FR agents:
/// `1 / (1 - gamma)`, and zero for every other kind.
pub fn optimistic_init(config: &AgentConfig, kind: IntrinsicKind) -> f64 {
    match kind {
        IntrinsicKind::Sr | IntrinsicKind::Fr => 1.0 / (1.0 - config.gamma),
        _ => 0.0,
    }
}

/// Dense state-action values.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub values: DMatrix<f64>,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, init: f64) -> Self {
        QTable {
            values: DMatrix::from_element(n_states, n_actions, init),
        }
    }

    pub fn n_actions(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[(s, a)]
    }

    pub fn row(&self, s: usize) -> Vec<f64> {
        self.values.row(s).iter().copied().collect()
    }
}

/// How long an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Total environment steps; terminal states trigger a reset.
    Steps(usize),
    /// Number of episodes, each truncated after `max_steps`.
    Episodes { count: usize, max_steps: usize },
}

impl Budget {
    pub fn check(&self) -> Result<()> {
        match *self {
            Budget::Steps(0) => Err(Error::EmptyBudget),
            Budget::Episodes { count, max_steps } if count == 0 || max_steps == 0 => Err(Error::EmptyBudget),
            _ => Ok(()),
        }
    }
}
