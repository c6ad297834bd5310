//! The experiment protocols, each run across seeds in parallel.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use super::output::{AggregateRow, Artifact, CurveRow};
use super::record::{AggregateStat, CoverageMilestones, RunRecord};
use crate::agents::{run_agent, AgentConfig, Budget};
use crate::envs::{
    bfs_distance, build_grid, nmrdp_wrap, riverswim_spec, sixarms_spec, DiscreteMdpSpec, GridMap, GridMode, MountainCar,
    TabularEnv,
};
use crate::linfa::{linear_q_agent, LinearConfig};
use crate::{Error, Result};

/// Run seeds `base, base + 1, ..., base + count - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPlan {
    pub base: u64,
    pub count: usize,
}

impl SeedPlan {
    pub fn new(base: u64, count: usize) -> Self {
        SeedPlan { base, count }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.count as u64).map(|i| self.base + i).collect()
    }

    pub fn describe(&self) -> String {
        match self.count {
            0 => "seeds=none".into(),
            n => format!("seeds={}..={} (n={n})", self.base, self.base + n as u64 - 1),
        }
    }
}

/// An agent config with its display name.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledAgent {
    pub label: String,
    pub config: AgentConfig,
}

impl LabeledAgent {
    pub fn new(label: impl Into<String>, config: AgentConfig) -> Self {
        LabeledAgent {
            label: label.into(),
            config,
        }
    }
}

/// Runs every seed of `plan` on a fresh environment; results come back in
/// seed order whatever the thread count.
pub fn run_seeds<F>(make_env: F, config: &AgentConfig, budget: Budget, plan: SeedPlan) -> Result<Vec<RunRecord>>
where
    F: Fn() -> Result<TabularEnvKind> + Sync,
{
    if plan.count == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    plan.seeds()
        .into_par_iter()
        .map(|seed| {
            let mut env = make_env()?;
            run_agent(env.as_dyn(), &config.with_seed(seed), budget)
        })
        .collect()
}

/// The environments the tabular protocols step.
pub enum TabularEnvKind {
    Plain(TabularEnv),
    Nmrdp(crate::envs::NmrdpEnv),
}

impl TabularEnvKind {
    fn as_dyn(&mut self) -> &mut dyn crate::envs::DiscreteEnv {
        match self {
            TabularEnvKind::Plain(e) => e,
            TabularEnvKind::Nmrdp(e) => e,
        }
    }
}

fn mean_curve<T: Copy + Into<f64>>(series: &[Vec<T>]) -> Result<Vec<AggregateStat>> {
    let len = series.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let col: Vec<f64> = series.iter().map(|s| s[i].into()).collect();
            AggregateStat::from_values(&col)
        })
        .collect()
}

fn lengths_f64(r: &RunRecord) -> Vec<f64> {
    r.episodes.iter().map(|e| e.length as f64).collect()
}

// ---------------------------------------------------------------------------
// Pure-exploration coverage

#[derive(Debug, Clone)]
pub struct CoverageAgentResult {
    pub label: String,
    pub milestones: Vec<CoverageMilestones>,
    /// Aggregates of steps to 50, 90 and 99 percent, with unreached
    /// milestones counted as `budget + 1`.
    pub stats: [AggregateStat; 3],
    pub curve: Vec<AggregateStat>,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub grid: GridMap,
    pub n_states: usize,
    pub budget: usize,
    pub seeds: SeedPlan,
    pub agents: Vec<CoverageAgentResult>,
}

impl CoverageReport {
    pub fn agent(&self, label: &str) -> Option<&CoverageAgentResult> {
        self.agents.iter().find(|a| a.label == label)
    }

    pub fn to_artifact(&self) -> Artifact {
        let mut art = Artifact::new(format!("coverage_{}", self.grid.name().to_ascii_lowercase()));
        art.header.push(format!("experiment=coverage grid={} states={}", self.grid.name(), self.n_states));
        art.header.push(self.seeds.describe());
        art.header.push(format!(
            "budget={} steps; milestones not reached are written as {}",
            self.budget,
            self.budget + 1
        ));
        for a in &self.agents {
            for (pct, stat) in CoverageMilestones::PERCENTS.iter().zip(a.stats) {
                art.aggregates.push(AggregateRow::new(&a.label, format!("steps_to_{pct}"), stat));
            }
            let reached: Vec<f64> = a
                .milestones
                .iter()
                .map(|m| if m.steps_to_50.is_some() { 1.0 } else { 0.0 })
                .collect();
            if let Ok(stat) = AggregateStat::from_values(&reached) {
                art.aggregates.push(AggregateRow::new(&a.label, "reached_50", stat));
            }
            for (t, s) in a.curve.iter().enumerate() {
                art.curves.push(CurveRow::new("coverage", &a.label, t as f64, *s));
            }
            for r in &a.records {
                art.runs.push((a.label.clone(), r.clone()));
            }
        }
        art
    }
}

pub fn exploration_mdp(grid: GridMap) -> Result<DiscreteMdpSpec> {
    build_grid(&grid.spec(), GridMode::Exploration)
}

/// Continuing pure-exploration runs from the fixed start cell.
pub fn coverage_experiment(
    grid: GridMap,
    agents: &[LabeledAgent],
    budget: usize,
    seeds: SeedPlan,
) -> Result<CoverageReport> {
    let mdp = exploration_mdp(grid)?;
    let n_states = mdp.n_states();
    let mut out = Vec::with_capacity(agents.len());
    for agent in agents {
        let records = run_seeds(
            || Ok(TabularEnvKind::Plain(TabularEnv::new(mdp.clone()))),
            &agent.config,
            Budget::Steps(budget),
            seeds,
        )?;
        let milestones: Vec<CoverageMilestones> = records.iter().map(RunRecord::milestones).collect();
        let encoded: Vec<[usize; 3]> = milestones.iter().map(|m| m.encoded(budget)).collect();
        let stat = |i: usize| {
            let vals: Vec<f64> = encoded.iter().map(|e| e[i] as f64).collect();
            AggregateStat::from_values(&vals)
        };
        let curves: Vec<Vec<u32>> = records
            .iter()
            .map(|r| r.coverage_curve().into_iter().map(|c| c as u32).collect())
            .collect();
        out.push(CoverageAgentResult {
            label: agent.label.clone(),
            stats: [stat(0)?, stat(1)?, stat(2)?],
            curve: mean_curve(&curves)?,
            milestones,
            records,
        });
    }
    Ok(CoverageReport {
        grid,
        n_states,
        budget,
        seeds,
        agents: out,
    })
}

// ---------------------------------------------------------------------------
// Hard-exploration tasks

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardTask {
    RiverSwim,
    SixArms,
}

impl HardTask {
    pub fn name(self) -> &'static str {
        match self {
            HardTask::RiverSwim => "riverswim",
            HardTask::SixArms => "sixarms",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            HardTask::RiverSwim => "RiverSwim",
            HardTask::SixArms => "SixArms",
        }
    }

    pub fn mdp(self) -> DiscreteMdpSpec {
        match self {
            HardTask::RiverSwim => riverswim_spec(),
            HardTask::SixArms => sixarms_spec(),
        }
    }
}

impl FromStr for HardTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "riverswim" => Ok(HardTask::RiverSwim),
            "sixarms" => Ok(HardTask::SixArms),
            other => Err(Error::Config(format!("unknown hard-exploration task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HardExpAgentResult {
    pub label: String,
    pub totals: Vec<f64>,
    pub stat: AggregateStat,
}

#[derive(Debug, Clone)]
pub struct HardExpReport {
    pub task: HardTask,
    pub steps: usize,
    pub seeds: SeedPlan,
    pub agents: Vec<HardExpAgentResult>,
}

impl HardExpReport {
    pub fn agent(&self, label: &str) -> Option<&HardExpAgentResult> {
        self.agents.iter().find(|a| a.label == label)
    }

    /// Text table with one column per agent: mean on the first line and the
    /// standard error in parentheses below.
    pub fn table(&self) -> String {
        let width = self.agents.iter().map(|a| a.label.len()).max().unwrap_or(0).max(12) + 2;
        let mut s = String::new();
        let _ = write!(s, "{:<12}", "");
        for a in &self.agents {
            let _ = write!(s, "{:>width$}", a.label);
        }
        let _ = write!(s, "\n{:<12}", self.task.title());
        for a in &self.agents {
            let _ = write!(s, "{:>width$}", format!("{:.0}", a.stat.mean));
        }
        let _ = write!(s, "\n{:<12}", "");
        for a in &self.agents {
            let _ = write!(s, "{:>width$}", format!("({:.0})", a.stat.std_error));
        }
        s.push('\n');
        s
    }

    pub fn to_artifact(&self) -> Artifact {
        let mut art = Artifact::new(format!("hardexp_{}", self.task.name()));
        art.header.push(format!(
            "experiment=hardexp task={} steps={}",
            self.task.name(),
            self.steps
        ));
        art.header.push(self.seeds.describe());
        for a in &self.agents {
            art.aggregates.push(AggregateRow::new(&a.label, "cumulative_reward", a.stat));
        }
        art
    }
}

/// Summed extrinsic reward over `steps` steps of a continuing task.
pub fn hard_exploration_eval(
    task: HardTask,
    agents: &[LabeledAgent],
    steps: usize,
    seeds: SeedPlan,
) -> Result<HardExpReport> {
    let mdp = task.mdp();
    let mut out = Vec::with_capacity(agents.len());
    for agent in agents {
        let records = run_seeds(
            || Ok(TabularEnvKind::Plain(TabularEnv::new(mdp.clone()))),
            &agent.config,
            Budget::Steps(steps),
            seeds,
        )?;
        let totals: Vec<f64> = records.iter().map(RunRecord::total_extrinsic).collect();
        out.push(HardExpAgentResult {
            label: agent.label.clone(),
            stat: AggregateStat::from_values(&totals)?,
            totals,
        });
    }
    Ok(HardExpReport {
        task,
        steps,
        seeds,
        agents: out,
    })
}

// ---------------------------------------------------------------------------
// Goal-directed grids

#[derive(Debug, Clone)]
pub struct CurveAgentResult {
    pub label: String,
    /// Per-episode mean length across seeds.
    pub lengths: Vec<AggregateStat>,
    /// Per-episode mean extrinsic return across seeds.
    pub returns: Vec<AggregateStat>,
    pub records: Vec<RunRecord>,
}

impl CurveAgentResult {
    fn from_records(label: &str, records: Vec<RunRecord>) -> Result<Self> {
        let lengths: Vec<Vec<f64>> = records.iter().map(lengths_f64).collect();
        let returns: Vec<Vec<f64>> = records.iter().map(RunRecord::episode_returns).collect();
        Ok(CurveAgentResult {
            label: label.to_string(),
            lengths: mean_curve(&lengths)?,
            returns: mean_curve(&returns)?,
            records,
        })
    }

    fn push_curves(&self, art: &mut Artifact) {
        for (i, s) in self.lengths.iter().enumerate() {
            art.curves.push(CurveRow::new("episode_length", &self.label, i as f64, *s));
        }
        for (i, s) in self.returns.iter().enumerate() {
            art.curves.push(CurveRow::new("episode_return", &self.label, i as f64, *s));
        }
        for r in &self.records {
            art.runs.push((self.label.clone(), r.clone()));
        }
    }
}

#[derive(Debug, Clone)]
pub struct GoalReport {
    pub grid: GridMap,
    /// Shortest start-to-goal path length.
    pub bfs: usize,
    pub seeds: SeedPlan,
    pub agents: Vec<CurveAgentResult>,
}

impl GoalReport {
    pub fn to_artifact(&self) -> Artifact {
        let mut art = Artifact::new(format!("goal_{}", self.grid.name().to_ascii_lowercase()));
        art.header.push(format!("experiment=goal grid={} shortest_path={}", self.grid.name(), self.bfs));
        art.header.push(self.seeds.describe());
        for a in &self.agents {
            let n = a.lengths.len();
            art.curves.push(CurveRow::exact("shortest_path", &a.label, 0.0, self.bfs as f64));
            art.curves.push(CurveRow::exact("shortest_path", &a.label, n.saturating_sub(1) as f64, self.bfs as f64));
            let means: Vec<f64> = a.lengths.iter().map(|s| s.mean).collect();
            if let Ok(stat) = AggregateStat::from_values(&means) {
                art.aggregates.push(AggregateRow::new(&a.label, "mean_episode_length", stat));
            }
            a.push_curves(&mut art);
        }
        art
    }
}

/// Single-goal task on `grid` (goal `G`), `episodes` per seed.
pub fn goal_task_eval(
    grid: GridMap,
    agents: &[LabeledAgent],
    episodes: usize,
    max_steps: usize,
    seeds: SeedPlan,
) -> Result<GoalReport> {
    let spec = grid.spec();
    let goal = spec
        .goal_schedule
        .first()
        .map(|g| g.0)
        .ok_or(Error::EmptySchedule)?;
    let bfs = bfs_distance(&spec, spec.start, goal)?;
    let mdp = build_grid(&spec, GridMode::Goal(goal))?;
    let budget = Budget::Episodes {
        count: episodes,
        max_steps,
    };
    let mut out = Vec::with_capacity(agents.len());
    for agent in agents {
        let records = run_seeds(
            || Ok(TabularEnvKind::Plain(TabularEnv::new(mdp.clone()))),
            &agent.config,
            budget,
            seeds,
        )?;
        out.push(CurveAgentResult::from_records(&agent.label, records)?);
    }
    Ok(GoalReport {
        grid,
        bfs,
        seeds,
        agents: out,
    })
}

// ---------------------------------------------------------------------------
// Non-stationary goals

/// Episodes needed after each switch before an episode comes within
/// `factor` times the shortest path to the new goal. A phase that never
/// recovers counts its full length.
pub fn recovery_episodes(lengths: &[usize], switches: &[usize], shortest: impl Fn(usize) -> usize, factor: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &start) in switches.iter().enumerate() {
        if start >= lengths.len() {
            break;
        }
        let end = switches.get(i + 1).copied().unwrap_or(lengths.len()).min(lengths.len());
        let limit = factor * shortest(start) as f64;
        let k = (start..end)
            .position(|e| lengths[e] as f64 <= limit)
            .unwrap_or(end - start);
        out.push(k);
    }
    out
}

#[derive(Debug, Clone)]
pub struct NmrdpAgentResult {
    pub curves: CurveAgentResult,
    /// Per-seed mean recovery after a switch.
    pub recovery_per_seed: Vec<f64>,
    pub recovery: Option<AggregateStat>,
}

#[derive(Debug, Clone)]
pub struct NmrdpReport {
    pub grid: GridMap,
    pub switch_points: Vec<usize>,
    /// Shortest path to the goal active in each episode.
    pub shortest: Vec<usize>,
    pub seeds: SeedPlan,
    pub agents: Vec<NmrdpAgentResult>,
}

impl NmrdpReport {
    pub fn agent(&self, label: &str) -> Option<&NmrdpAgentResult> {
        self.agents.iter().find(|a| a.curves.label == label)
    }

    pub fn to_artifact(&self) -> Artifact {
        let mut art = Artifact::new(format!("nmrdp_{}", self.grid.name().to_ascii_lowercase()));
        art.header.push(format!("experiment=nmrdp grid={}", self.grid.name()));
        art.header.push(self.seeds.describe());
        let marks: Vec<String> = self.switch_points.iter().map(|e| e.to_string()).collect();
        art.header.push(format!("switches={}", marks.join(" ")));
        for a in &self.agents {
            if let Some(stat) = a.recovery {
                art.aggregates.push(AggregateRow::new(&a.curves.label, "recovery_episodes", stat));
            }
            for &e in &self.switch_points {
                art.curves.push(CurveRow::exact("switch", &a.curves.label, e as f64, 0.0));
            }
            for (e, d) in self.shortest.iter().enumerate() {
                art.curves.push(CurveRow::exact("shortest_path", &a.curves.label, e as f64, *d as f64));
            }
            a.curves.push_curves(&mut art);
        }
        art
    }
}

pub const RECOVERY_FACTOR: f64 = 1.5;

/// Goal task whose goal cycles through the grid's schedule.
pub fn nmrdp_eval(
    grid: GridMap,
    agents: &[LabeledAgent],
    episodes: usize,
    max_steps: usize,
    seeds: SeedPlan,
) -> Result<NmrdpReport> {
    let spec = grid.spec();
    let probe = nmrdp_wrap(&spec)?;
    let goals: Vec<_> = probe.goals().collect();
    let mut goal_bfs = Vec::with_capacity(goals.len());
    for g in &goals {
        goal_bfs.push(bfs_distance(&spec, spec.start, *g)?);
    }
    let shortest: Vec<usize> = (0..episodes)
        .map(|e| goal_bfs[probe.goal_index_for_episode(e)])
        .collect();
    let switch_points = probe.switch_points(episodes);
    let budget = Budget::Episodes {
        count: episodes,
        max_steps,
    };
    let mut out = Vec::with_capacity(agents.len());
    for agent in agents {
        let records = run_seeds(
            || Ok(TabularEnvKind::Nmrdp(nmrdp_wrap(&spec)?)),
            &agent.config,
            budget,
            seeds,
        )?;
        let recovery_per_seed: Vec<f64> = records
            .iter()
            .filter_map(|r| {
                let ks = recovery_episodes(&r.episode_lengths(), &switch_points, |e| shortest[e], RECOVERY_FACTOR);
                (!ks.is_empty()).then(|| ks.iter().sum::<usize>() as f64 / ks.len() as f64)
            })
            .collect();
        let recovery = AggregateStat::from_values(&recovery_per_seed).ok();
        out.push(NmrdpAgentResult {
            curves: CurveAgentResult::from_records(&agent.label, records)?,
            recovery_per_seed,
            recovery,
        });
    }
    Ok(NmrdpReport {
        grid,
        switch_points,
        shortest,
        seeds,
        agents: out,
    })
}

// ---------------------------------------------------------------------------
// MountainCar

#[derive(Debug, Clone)]
pub struct MountainCarAgentResult {
    pub label: String,
    /// Episode index of the first success per seed; `episodes` if never.
    pub first_success: Vec<f64>,
    pub first_success_stat: AggregateStat,
    /// Mean return over the final `min(100, episodes)` episodes per seed.
    pub final_return: Vec<f64>,
    pub final_return_stat: AggregateStat,
    pub returns: Vec<AggregateStat>,
    pub lengths: Vec<AggregateStat>,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct MountainCarReport {
    pub episodes: usize,
    pub seeds: SeedPlan,
    pub agents: Vec<MountainCarAgentResult>,
}

impl MountainCarReport {
    pub fn agent(&self, label: &str) -> Option<&MountainCarAgentResult> {
        self.agents.iter().find(|a| a.label == label)
    }

    pub fn to_artifact(&self) -> Artifact {
        let mut art = Artifact::new("mountaincar");
        art.header.push(format!(
            "experiment=mountaincar episodes={}; first_success of a run that never succeeds is written as {}",
            self.episodes, self.episodes
        ));
        art.header.push(self.seeds.describe());
        for a in &self.agents {
            art.aggregates.push(AggregateRow::new(&a.label, "first_success_episode", a.first_success_stat));
            art.aggregates.push(AggregateRow::new(&a.label, "final_100_return", a.final_return_stat));
            for (i, s) in a.returns.iter().enumerate() {
                art.curves.push(CurveRow::new("episode_return", &a.label, i as f64, *s));
            }
            for (i, s) in a.lengths.iter().enumerate() {
                art.curves.push(CurveRow::new("episode_length", &a.label, i as f64, *s));
            }
            for r in &a.records {
                art.runs.push((a.label.clone(), r.clone()));
            }
        }
        art
    }
}

pub fn mountaincar_eval(agents: &[(String, LinearConfig)], episodes: usize, seeds: SeedPlan) -> Result<MountainCarReport> {
    if seeds.count == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut out = Vec::with_capacity(agents.len());
    for (label, cfg) in agents {
        let records: Vec<RunRecord> = seeds
            .seeds()
            .into_par_iter()
            .map(|seed| {
                let c = LinearConfig { seed, ..*cfg };
                linear_q_agent(&mut MountainCar::default(), &c, episodes)
            })
            .collect::<Result<_>>()?;
        let tail = episodes.min(100);
        let first_success: Vec<f64> = records
            .iter()
            .map(|r| r.first_success().unwrap_or(episodes) as f64)
            .collect();
        let final_return: Vec<f64> = records
            .iter()
            .map(|r| {
                let rets = r.episode_returns();
                rets[rets.len() - tail..].iter().sum::<f64>() / tail as f64
            })
            .collect();
        let returns: Vec<Vec<f64>> = records.iter().map(RunRecord::episode_returns).collect();
        let lengths: Vec<Vec<f64>> = records.iter().map(lengths_f64).collect();
        out.push(MountainCarAgentResult {
            label: label.clone(),
            first_success_stat: AggregateStat::from_values(&first_success)?,
            final_return_stat: AggregateStat::from_values(&final_return)?,
            first_success,
            final_return,
            returns: mean_curve(&returns)?,
            lengths: mean_curve(&lengths)?,
            records,
        });
    }
    Ok(MountainCarReport {
        episodes,
        seeds,
        agents: out,
    })
}
