//! Seeded experiments, config sweeps and CSV output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod record;
pub mod sweep;

pub use config::{grid_preset, preset, tabular_preset, ConfigGrid, Experiment, ExperimentConfig, PRESETS};
pub use experiments::{
    coverage_experiment, goal_task_eval, hard_exploration_eval, mountaincar_eval, nmrdp_eval, recovery_episodes,
    CoverageReport, GoalReport, HardExpReport, HardTask, LabeledAgent, MountainCarReport, NmrdpReport, SeedPlan,
    RECOVERY_FACTOR,
};
pub use output::{emit_outputs, AggregateRow, Artifact, CurveRow};
pub use record::{AggregateStat, CoverageMilestones, EpisodeRow, RunRecord, StepRow};
pub use sweep::{evaluate, sweep, Evaluation, SweepReport, SweepRow};
