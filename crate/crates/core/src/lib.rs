//! Successor-predecessor intrinsic exploration.
//!
//! Occupancy representations (successor, first-occupancy and predecessor
//! matrices, plus their linear-feature generalisations) drive intrinsic
//! rewards for tabular SARSA and linear Q-learning agents. The crate ships
//! the benchmark environments and a seeded experiment harness that sweeps
//! agents over them and writes CSV results.

pub mod agents;
pub mod checks;
pub mod envs;
mod error;
pub mod harness;
pub mod intrinsic;
pub mod linfa;
pub mod repr;

pub use error::{Error, Result};

/// Random generator used for every simulated run.
///
/// ChaCha8 keeps streams identical across platforms and crate upgrades.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Build the generator for a run from its seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
