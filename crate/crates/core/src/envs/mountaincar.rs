//! MountainCar with a sparse reward: zero everywhere except the flag.

use rand::Rng;

use crate::SimRng;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const GOAL_REWARD: f64 = 1.0;
/// Actions are indexed 0, 1, 2 for push left, coast, push right.
pub const N_ACTIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousState {
    pub position: f64,
    pub velocity: f64,
}

impl ContinuousState {
    pub fn new(position: f64, velocity: f64) -> Self {
        ContinuousState { position, velocity }
    }

    /// Map onto the unit square using the physical bounds.
    pub fn normalized(&self) -> [f64; 2] {
        [
            (self.position - MIN_POSITION) / (MAX_POSITION - MIN_POSITION),
            (self.velocity + MAX_SPEED) / (2.0 * MAX_SPEED),
        ]
    }
}

/// Throttle for an action index.
pub fn throttle(action: usize) -> f64 {
    action as f64 - 1.0
}

/// One step of the dynamics. `throttle` is clamped to `[-1, 1]`.
///
/// Returns the next state, the extrinsic reward and whether the flag was
/// reached. Hitting the left wall stops the car.
pub fn mountaincar_step(state: ContinuousState, throttle: f64) -> (ContinuousState, f64, bool) {
    let push = throttle.clamp(-1.0, 1.0);
    let x = state.position.clamp(MIN_POSITION, MAX_POSITION);
    let mut v = (state.velocity + FORCE * push - GRAVITY * (3.0 * x).cos()).clamp(-MAX_SPEED, MAX_SPEED);
    let x = (x + v).clamp(MIN_POSITION, MAX_POSITION);
    if x <= MIN_POSITION && v < 0.0 {
        v = 0.0;
    }
    let done = x >= GOAL_POSITION;
    let reward = if done { GOAL_REWARD } else { 0.0 };
    (ContinuousState::new(x, v), reward, done)
}

/// Stateful wrapper with the standard start distribution.
#[derive(Debug, Clone)]
pub struct MountainCar {
    state: ContinuousState,
}

impl Default for MountainCar {
    fn default() -> Self {
        MountainCar {
            state: ContinuousState::new(-0.5, 0.0),
        }
    }
}

impl MountainCar {
    /// Start position uniform in `[-0.6, -0.4)`, at rest.
    pub fn reset(&mut self, rng: &mut SimRng) -> ContinuousState {
        self.state = ContinuousState::new(rng.random_range(-0.6..-0.4), 0.0);
        self.state
    }

    pub fn step(&mut self, action: usize) -> (ContinuousState, f64, bool) {
        let (next, reward, done) = mountaincar_step(self.state, throttle(action));
        self.state = next;
        (next, reward, done)
    }

    pub fn state(&self) -> ContinuousState {
        self.state
    }
}
