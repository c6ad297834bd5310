use crate::{Error, Result};

/// One environment step as logged by an agent run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRow {
    /// Global step counter, starting at 1.
    pub t: usize,
    pub s: usize,
    pub a: usize,
    pub r_ext: f64,
    /// Scaled bonus `beta * r_int` added to the extrinsic reward.
    pub r_int: f64,
    pub done: bool,
    /// Distinct states seen so far, including the start state.
    pub unique_states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRow {
    pub episode: usize,
    pub length: usize,
    /// Undiscounted extrinsic return.
    pub ret: f64,
    /// False when the episode was cut by a step cap or the run budget.
    pub completed: bool,
}

/// Everything an agent run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub fingerprint: String,
    pub n_states: usize,
    pub steps: Vec<StepRow>,
    pub episodes: Vec<EpisodeRow>,
}

impl RunRecord {
    pub fn new(seed: u64, fingerprint: String, n_states: usize) -> Self {
        RunRecord {
            seed,
            fingerprint,
            n_states,
            steps: Vec::new(),
            episodes: Vec::new(),
        }
    }

    pub fn total_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn total_extrinsic(&self) -> f64 {
        self.steps.iter().map(|r| r.r_ext).sum()
    }

    /// Coverage after `t` steps for `t = 0..=total_steps`; entry 0 is the
    /// start state alone.
    pub fn coverage_curve(&self) -> Vec<usize> {
        let mut curve = Vec::with_capacity(self.steps.len() + 1);
        curve.push(1);
        curve.extend(self.steps.iter().map(|r| r.unique_states));
        curve
    }

    pub fn milestones(&self) -> CoverageMilestones {
        CoverageMilestones::from_curve(&self.coverage_curve(), self.n_states)
    }

    pub fn episode_lengths(&self) -> Vec<usize> {
        self.episodes.iter().map(|e| e.length).collect()
    }

    pub fn episode_returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    /// Index of the first episode that reached a terminal state.
    pub fn first_success(&self) -> Option<usize> {
        self.episodes.iter().position(|e| e.completed)
    }

    /// Trajectory content only: the fingerprint is left out so runs from
    /// differently labelled but behaviourally equal configs compare equal.
    pub fn same_trajectory(&self, other: &RunRecord) -> bool {
        self.seed == other.seed && self.steps == other.steps && self.episodes == other.episodes
    }
}

/// Steps needed to see 50, 90 and 99 percent of the states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageMilestones {
    pub steps_to_50: Option<usize>,
    pub steps_to_90: Option<usize>,
    pub steps_to_99: Option<usize>,
}

impl CoverageMilestones {
    pub const PERCENTS: [usize; 3] = [50, 90, 99];

    /// `curve[t]` is the coverage after `t` steps.
    pub fn from_curve(curve: &[usize], n_states: usize) -> Self {
        let hit = |pct: usize| {
            let target = (pct * n_states).div_ceil(100);
            curve.iter().position(|&c| c >= target)
        };
        CoverageMilestones {
            steps_to_50: hit(50),
            steps_to_90: hit(90),
            steps_to_99: hit(99),
        }
    }

    pub fn get(&self, pct: usize) -> Option<usize> {
        match pct {
            50 => self.steps_to_50,
            90 => self.steps_to_90,
            99 => self.steps_to_99,
            _ => None,
        }
    }

    /// Replace "not reached" by the sentinel `budget + 1`.
    pub fn encoded(&self, budget: usize) -> [usize; 3] {
        Self::PERCENTS.map(|p| self.get(p).unwrap_or(budget + 1))
    }
}

/// Mean and standard error over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStat {
    pub mean: f64,
    pub std_error: f64,
    pub n_seeds: usize,
}

impl AggregateStat {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Config("cannot aggregate zero seeds".into()));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(AggregateStat {
            mean,
            std_error,
            n_seeds: n,
        })
    }
}
