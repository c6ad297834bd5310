use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spie::checks::run_checks;
use spie::envs::GridMap;
use spie::harness::{
    coverage_experiment, emit_outputs, evaluate, goal_task_eval, grid_preset, hard_exploration_eval,
    mountaincar_eval, nmrdp_eval, preset, sweep, tabular_preset, Artifact, ConfigGrid, ExperimentConfig, HardTask,
    LabeledAgent, SeedPlan,
};
use spie::intrinsic::IntrinsicKind;

#[derive(Parser)]
#[command(name = "spie", version, about = "Successor-predecessor intrinsic exploration experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of seeds; run i uses base_seed + i.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    #[arg(long, global = true)]
    base_seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Use the fixed diffusion representation instead of learning it.
    #[arg(long, global = true)]
    frozen_repr: bool,
    /// Optimistic Q initialisation for the SR and FR agents.
    #[arg(long, global = true)]
    optimistic: bool,
    /// Re-draw the action at every loop head.
    #[arg(long, global = true)]
    strict_pseudocode: bool,
    /// Skip per-run step and episode logs.
    #[arg(long, global = true)]
    no_run_logs: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments from config files or named presets.
    Run {
        #[arg(long = "config", required_unless_present = "preset")]
        configs: Vec<PathBuf>,
        #[arg(long)]
        preset: Vec<String>,
    },
    /// Evaluate every combination of a config grid and report the best.
    Sweep {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
    },
    /// Pure-exploration state coverage on the grid worlds.
    Coverage {
        #[arg(long, value_delimiter = ',', default_value = "of-small,cluster-simple,cluster-hard,of-large")]
        grids: Vec<GridMap>,
        #[arg(long, value_delimiter = ',', default_value = "none,sr,fr,srr")]
        agents: Vec<IntrinsicKind>,
        #[arg(long, default_value_t = 8000)]
        steps: usize,
    },
    /// Cumulative reward on RiverSwim or SixArms.
    Hardexp {
        #[arg(long, value_delimiter = ',', default_value = "riverswim,sixarms")]
        tasks: Vec<HardTask>,
        #[arg(long, value_delimiter = ',', default_value = "none,sr,fr,srr,sr_pr,srr_a,srr_b")]
        agents: Vec<IntrinsicKind>,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
    },
    /// Single-goal grid tasks.
    Goal {
        #[arg(long, value_delimiter = ',', default_value = "of-small,cluster-hard")]
        grids: Vec<GridMap>,
        #[arg(long, value_delimiter = ',', default_value = "none,sr,srr")]
        agents: Vec<IntrinsicKind>,
        #[arg(long, default_value_t = 200)]
        episodes: usize,
        #[arg(long, default_value_t = 10_000)]
        max_episode_steps: usize,
    },
    /// Grid tasks whose goal moves every 30 episodes.
    Nmrdp {
        #[arg(long, value_delimiter = ',', default_value = "of-small,cluster-hard")]
        grids: Vec<GridMap>,
        #[arg(long, value_delimiter = ',', default_value = "none,sr,srr")]
        agents: Vec<IntrinsicKind>,
        #[arg(long, default_value_t = 300)]
        episodes: usize,
        #[arg(long, default_value_t = 10_000)]
        max_episode_steps: usize,
    },
    /// Linear Q-learning with SF or SF-PF bonuses on MountainCar.
    Mountaincar {
        #[arg(long, value_delimiter = ',', default_value = "sf,sf_pf")]
        agents: Vec<IntrinsicKind>,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long)]
        max_episode_steps: Option<usize>,
    },
    /// Invariant and oracle suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(n) = self.seeds {
            cfg.seeds = n;
        }
        if let Some(b) = self.base_seed {
            cfg.base_seed = b;
        }
        cfg.frozen |= self.frozen_repr;
        cfg.optimistic |= self.optimistic;
        cfg.strict_pseudocode |= self.strict_pseudocode;
    }

    fn plan(&self, default_seeds: usize) -> SeedPlan {
        SeedPlan::new(self.base_seed.unwrap_or(0), self.seeds.unwrap_or(default_seeds))
    }

    fn emit(&self, art: &Artifact) -> Result<()> {
        let paths = emit_outputs(&self.out, art, !self.no_run_logs)?;
        println!("wrote {} files under {}", paths.len(), self.out.display());
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn grid_agents(common: &Common, kinds: &[IntrinsicKind]) -> Result<Vec<LabeledAgent>> {
    kinds
        .iter()
        .map(|&k| {
            let mut cfg = grid_preset(k)?;
            common.apply(&mut cfg);
            Ok(LabeledAgent::new(cfg.label(), cfg.agent_config()?))
        })
        .collect()
}

fn print_aggregates(art: &Artifact) {
    for r in &art.aggregates {
        println!(
            "{:<28} {:<26} {:>14.3} (+/- {:.3}, n={})",
            r.agent, r.metric, r.stat.mean, r.stat.std_error, r.stat.n_seeds
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = cli.common;
    match cli.command {
        Command::Run { configs, preset: names } => {
            let mut loaded = Vec::new();
            for path in &configs {
                loaded.push(ExperimentConfig::from_toml(&read(path)?).with_context(|| path.display().to_string())?);
            }
            for name in &names {
                loaded.push(preset(name)?);
            }
            for mut cfg in loaded {
                common.apply(&mut cfg);
                let ev = evaluate(&cfg)?;
                print_aggregates(&ev.artifact);
                common.emit(&ev.artifact)?;
            }
        }
        Command::Sweep { configs } => {
            for path in &configs {
                let grid = ConfigGrid::parse(&read(path)?).with_context(|| path.display().to_string())?;
                let mut cfgs = grid.expand()?;
                for c in &mut cfgs {
                    common.apply(c);
                }
                println!("{}: {} combinations", path.display(), cfgs.len());
                let report = sweep(&cfgs)?;
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
                let art = report.to_artifact(&format!("sweep_{stem}"));
                print_aggregates(&art);
                println!("best: {}", report.best_config().summary());
                common.emit(&art)?;
            }
        }
        Command::Coverage { grids, agents, steps } => {
            let labeled = grid_agents(&common, &agents)?;
            for grid in grids {
                let report = coverage_experiment(grid, &labeled, steps, common.plan(10))?;
                let art = report.to_artifact();
                print_aggregates(&art);
                common.emit(&art)?;
            }
        }
        Command::Hardexp { tasks, agents, steps } => {
            for task in tasks {
                let mut labeled = Vec::new();
                for &k in &agents {
                    let mut cfg = tabular_preset(task.name(), k, common.frozen_repr && k != IntrinsicKind::None)?;
                    common.apply(&mut cfg);
                    labeled.push(LabeledAgent::new(cfg.label(), cfg.agent_config()?));
                }
                let report = hard_exploration_eval(task, &labeled, steps, common.plan(100))?;
                println!("{}", report.table());
                common.emit(&report.to_artifact())?;
            }
        }
        Command::Goal {
            grids,
            agents,
            episodes,
            max_episode_steps,
        } => {
            let labeled = grid_agents(&common, &agents)?;
            for grid in grids {
                let report = goal_task_eval(grid, &labeled, episodes, max_episode_steps, common.plan(10))?;
                println!("{}: shortest path {}", grid.name(), report.bfs);
                common.emit(&report.to_artifact())?;
            }
        }
        Command::Nmrdp {
            grids,
            agents,
            episodes,
            max_episode_steps,
        } => {
            let labeled = grid_agents(&common, &agents)?;
            for grid in grids {
                let report = nmrdp_eval(grid, &labeled, episodes, max_episode_steps, common.plan(10))?;
                let art = report.to_artifact();
                print_aggregates(&art);
                common.emit(&art)?;
            }
        }
        Command::Mountaincar {
            agents,
            episodes,
            max_episode_steps,
        } => {
            let mut labeled = Vec::new();
            for &k in &agents {
                let mut cfg = preset("mountaincar")?;
                cfg.agent = k.name().to_string();
                if let Some(m) = max_episode_steps {
                    cfg.max_episode_steps = m;
                }
                common.apply(&mut cfg);
                labeled.push((cfg.label(), cfg.linear_config()?));
            }
            let report = mountaincar_eval(&labeled, episodes, common.plan(10))?;
            let art = report.to_artifact();
            print_aggregates(&art);
            common.emit(&art)?;
        }
        Command::Check { seed } => {
            let mut failed = 0;
            for c in run_checks(seed) {
                println!("{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                bail!("{failed} check(s) failed");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
