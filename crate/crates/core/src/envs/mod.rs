//! Benchmark environments.
//!
//! Tabular tasks are described by a [`DiscreteMdpSpec`] and stepped through
//! the [`DiscreteEnv`] trait; MountainCar is a continuous stepping process.

mod classic;
pub mod grid;
mod mdp;
pub mod mountaincar;
mod nmrdp;

use rand::Rng;

pub use classic::{riverswim_spec, sixarms_spec, RIVERSWIM_TABLE, SIXARMS_TABLE};
pub use grid::{bfs_distance, build_grid, Cell, GridMap, GridMode, GridSpec};
pub use mdp::DiscreteMdpSpec;
pub use mountaincar::{mountaincar_step, ContinuousState, MountainCar};
pub use nmrdp::{nmrdp_wrap, NmrdpEnv};

use crate::SimRng;

/// One observed transition `(s, a, r, s', a')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<S = usize> {
    pub s: S,
    pub a: usize,
    pub r_ext: f64,
    pub s_next: S,
    /// Next action; `None` once the episode has terminated.
    pub a_next: Option<usize>,
    pub done: bool,
}

impl Transition<usize> {
    /// Bare state-to-state transition, handy for representation updates.
    pub fn between(s: usize, s_next: usize, done: bool) -> Self {
        Transition {
            s,
            a: 0,
            r_ext: 0.0,
            s_next,
            a_next: None,
            done,
        }
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub next: usize,
    pub reward: f64,
    pub done: bool,
}

/// A stepping tabular environment.
pub trait DiscreteEnv {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Start a new episode and return its initial state.
    fn reset(&mut self, rng: &mut SimRng) -> usize;
    fn step(&mut self, action: usize, rng: &mut SimRng) -> EnvStep;
    /// MDP currently in force (the active goal for non-stationary tasks).
    fn mdp(&self) -> &DiscreteMdpSpec;
}

/// Steps a fixed [`DiscreteMdpSpec`]. Every reset and every step consumes
/// exactly one uniform draw.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    mdp: DiscreteMdpSpec,
    state: usize,
}

impl TabularEnv {
    pub fn new(mdp: DiscreteMdpSpec) -> Self {
        TabularEnv { mdp, state: 0 }
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl DiscreteEnv for TabularEnv {
    fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    fn reset(&mut self, rng: &mut SimRng) -> usize {
        self.state = mdp::sample_index(self.mdp.start_dist(), rng.random::<f64>());
        self.state
    }

    fn step(&mut self, action: usize, rng: &mut SimRng) -> EnvStep {
        let s = self.state;
        let next = mdp::sample_index(self.mdp.transition(s, action), rng.random::<f64>());
        let reward = self.mdp.reward(s, action, next);
        self.state = next;
        EnvStep {
            next,
            reward,
            done: self.mdp.is_terminal(next),
        }
    }

    fn mdp(&self) -> &DiscreteMdpSpec {
        &self.mdp
    }
}
