use rand::Rng;

use super::grid::{build_grid, Cell, GridMode, GridSpec};
use super::{mdp::sample_index, DiscreteEnv, DiscreteMdpSpec, EnvStep};
use crate::{Error, Result, SimRng};

/// Goal task whose active goal cycles through the grid's schedule on an
/// episode counter.
#[derive(Debug, Clone)]
pub struct NmrdpEnv {
    goals: Vec<(Cell, DiscreteMdpSpec, usize)>,
    cycle: usize,
    /// Episodes started so far.
    episodes: usize,
    active: usize,
    state: usize,
}

/// Wrap a grid with a goal schedule into a non-stationary goal task.
pub fn nmrdp_wrap(base: &GridSpec) -> Result<NmrdpEnv> {
    if base.goal_schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let mut goals = Vec::with_capacity(base.goal_schedule.len());
    for &(cell, len) in &base.goal_schedule {
        if len == 0 {
            return Err(Error::Config("goal activation length must be positive".into()));
        }
        goals.push((cell, build_grid(base, GridMode::Goal(cell))?, len));
    }
    let cycle = goals.iter().map(|g| g.2).sum();
    Ok(NmrdpEnv {
        goals,
        cycle,
        episodes: 0,
        active: 0,
        state: 0,
    })
}

impl NmrdpEnv {
    /// Index into the schedule of the goal active during episode `episode`
    /// (0-based).
    pub fn goal_index_for_episode(&self, episode: usize) -> usize {
        let mut pos = episode % self.cycle;
        for (i, g) in self.goals.iter().enumerate() {
            if pos < g.2 {
                return i;
            }
            pos -= g.2;
        }
        unreachable!("position is always inside one cycle")
    }

    pub fn active_goal(&self) -> Cell {
        self.goals[self.active].0
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    /// Episodes started so far.
    pub fn episodes_started(&self) -> usize {
        self.episodes
    }

    /// Episode indices at which the active goal changes, up to `horizon`.
    pub fn switch_points(&self, horizon: usize) -> Vec<usize> {
        (1..horizon)
            .filter(|&e| self.goal_index_for_episode(e) != self.goal_index_for_episode(e - 1))
            .collect()
    }

    pub fn goals(&self) -> impl Iterator<Item = Cell> + '_ {
        self.goals.iter().map(|g| g.0)
    }
}

impl DiscreteEnv for NmrdpEnv {
    fn n_states(&self) -> usize {
        self.goals[0].1.n_states()
    }

    fn n_actions(&self) -> usize {
        self.goals[0].1.n_actions()
    }

    fn reset(&mut self, rng: &mut SimRng) -> usize {
        self.active = self.goal_index_for_episode(self.episodes);
        self.episodes += 1;
        self.state = sample_index(self.mdp().start_dist(), rng.random::<f64>());
        self.state
    }

    fn step(&mut self, action: usize, rng: &mut SimRng) -> EnvStep {
        let mdp = &self.goals[self.active].1;
        let next = sample_index(mdp.transition(self.state, action), rng.random::<f64>());
        let reward = mdp.reward(self.state, action, next);
        self.state = next;
        EnvStep {
            next,
            reward,
            done: mdp.is_terminal(next),
        }
    }

    fn mdp(&self) -> &DiscreteMdpSpec {
        &self.goals[self.active].1
    }
}
