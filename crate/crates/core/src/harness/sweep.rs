//! Run a single config or a whole grid of configs and pick the best.

use super::config::{Experiment, ExperimentConfig};
use super::experiments::{
    coverage_experiment, goal_task_eval, hard_exploration_eval, mountaincar_eval, nmrdp_eval, HardTask, LabeledAgent,
    SeedPlan,
};
use super::output::{AggregateRow, Artifact};
use super::record::AggregateStat;
use crate::envs::GridMap;
use crate::{Error, Result};

/// Per-seed score of one config, oriented so that larger is better, plus
/// the experiment's artifact.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metric: &'static str,
    pub per_seed: Vec<f64>,
    pub artifact: Artifact,
}

/// Run the experiment a config describes.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Evaluation> {
    let seeds = SeedPlan::new(cfg.base_seed, cfg.seeds);
    let label = cfg.label();
    match cfg.experiment {
        Experiment::Mountaincar => {
            let lin = cfg.linear_config()?;
            let report = mountaincar_eval(&[(label, lin)], cfg.episodes(), seeds)?;
            let a = &report.agents[0];
            Ok(Evaluation {
                metric: "final_100_return",
                per_seed: a.final_return.clone(),
                artifact: report.to_artifact(),
            })
        }
        Experiment::Hardexp => {
            let task: HardTask = cfg.task.parse()?;
            let agent = LabeledAgent::new(label, cfg.agent_config()?);
            let report = hard_exploration_eval(task, &[agent], cfg.steps(), seeds)?;
            Ok(Evaluation {
                metric: "cumulative_reward",
                per_seed: report.agents[0].totals.clone(),
                artifact: report.to_artifact(),
            })
        }
        Experiment::Coverage => {
            let grid: GridMap = cfg.task.parse()?;
            let agent = LabeledAgent::new(label, cfg.agent_config()?);
            let budget = cfg.steps();
            let report = coverage_experiment(grid, &[agent], budget, seeds)?;
            let per_seed = report.agents[0]
                .milestones
                .iter()
                .map(|m| -(m.encoded(budget)[1] as f64))
                .collect();
            Ok(Evaluation {
                metric: "neg_steps_to_90",
                per_seed,
                artifact: report.to_artifact(),
            })
        }
        Experiment::Goal => {
            let grid: GridMap = cfg.task.parse()?;
            let agent = LabeledAgent::new(label, cfg.agent_config()?);
            let report = goal_task_eval(grid, &[agent], cfg.episodes(), cfg.max_episode_steps, seeds)?;
            let per_seed = report.agents[0]
                .records
                .iter()
                .map(|r| -(r.total_steps() as f64) / r.episodes.len() as f64)
                .collect();
            Ok(Evaluation {
                metric: "neg_mean_episode_length",
                per_seed,
                artifact: report.to_artifact(),
            })
        }
        Experiment::Nmrdp => {
            let grid: GridMap = cfg.task.parse()?;
            let agent = LabeledAgent::new(label, cfg.agent_config()?);
            let report = nmrdp_eval(grid, &[agent], cfg.episodes(), cfg.max_episode_steps, seeds)?;
            let a = &report.agents[0];
            let per_seed = if a.recovery_per_seed.is_empty() {
                a.curves
                    .records
                    .iter()
                    .map(|r| -(r.total_steps() as f64) / r.episodes.len() as f64)
                    .collect()
            } else {
                a.recovery_per_seed.iter().map(|v| -v).collect()
            };
            Ok(Evaluation {
                metric: "neg_recovery_episodes",
                per_seed,
                artifact: report.to_artifact(),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: ExperimentConfig,
    pub metric: &'static str,
    pub stat: AggregateStat,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the highest mean; the earliest wins ties.
    pub best: usize,
}

impl SweepReport {
    pub fn best_config(&self) -> &ExperimentConfig {
        &self.rows[self.best].config
    }

    pub fn to_artifact(&self, name: &str) -> Artifact {
        let mut art = Artifact::new(name);
        art.header.push(format!("sweep over {} configs; best={}", self.rows.len(), self.best));
        for (i, r) in self.rows.iter().enumerate() {
            let agent = format!("#{i} {}", r.config.summary());
            art.aggregates.push(AggregateRow::new(&agent, r.metric, r.stat));
        }
        art
    }
}

/// Evaluate every config and select the best by mean score.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<SweepReport> {
    if configs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let ev = evaluate(cfg)?;
        rows.push(SweepRow {
            config: cfg.clone(),
            metric: ev.metric,
            stat: AggregateStat::from_values(&ev.per_seed)?,
        });
    }
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.stat.mean > rows[best].stat.mean {
            best = i;
        }
    }
    Ok(SweepReport { rows, best })
}
