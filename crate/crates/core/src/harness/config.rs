//! Flat TOML experiment configs, sweep grids and the shipped presets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;
use toml::{Table, Value};

use crate::agents::{optimistic_init, AgentConfig};
use crate::intrinsic::{IntrinsicKind, IntrinsicRewardSpec};
use crate::linfa::{LinearConfig, DEFAULT_RFF_DIM, DEFAULT_RFF_SIGMA};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Coverage,
    Hardexp,
    Goal,
    Nmrdp,
    Mountaincar,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Coverage => "coverage",
            Experiment::Hardexp => "hardexp",
            Experiment::Goal => "goal",
            Experiment::Nmrdp => "nmrdp",
            Experiment::Mountaincar => "mountaincar",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Value::String(s.trim().to_ascii_lowercase())
            .try_into()
            .map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// One experiment for one agent, as read from a config file.
///
/// Unset keys fall back to the grid-world tuple; `steps` and `episodes`
/// fall back to the protocol length of the chosen experiment.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// `riverswim`, `sixarms`, a grid map name, or `mountaincar`.
    pub task: String,
    /// Intrinsic kind name.
    pub agent: String,
    /// Display name; derived from the agent kind when absent.
    pub label: Option<String>,
    pub alpha: f64,
    pub eta: f64,
    pub eta_pr: f64,
    pub gamma: f64,
    pub gamma_repr: f64,
    pub gamma_pr: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub q_init: f64,
    pub frozen: bool,
    pub optimistic: bool,
    pub strict_pseudocode: bool,
    pub steps: Option<usize>,
    pub episodes: Option<usize>,
    pub max_episode_steps: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub eta_sf: f64,
    pub eta_pf: f64,
    pub gamma_sf: f64,
    pub gamma_pf: f64,
    pub rff_dim: usize,
    pub rff_sigma: f64,
    pub rff_seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let grid = AgentConfig::default();
        let linear = LinearConfig::default();
        ExperimentConfig {
            experiment: Experiment::Coverage,
            task: "of-small".into(),
            agent: "none".into(),
            label: None,
            alpha: grid.alpha,
            eta: grid.eta,
            eta_pr: grid.eta_pr,
            gamma: grid.gamma,
            gamma_repr: grid.gamma_repr,
            gamma_pr: grid.gamma_pr,
            beta: 1.0,
            epsilon: grid.epsilon,
            q_init: 0.0,
            frozen: false,
            optimistic: false,
            strict_pseudocode: false,
            steps: None,
            episodes: None,
            max_episode_steps: 10_000,
            seeds: 10,
            base_seed: 0,
            eta_sf: linear.eta_sf,
            eta_pf: linear.eta_pf,
            gamma_sf: linear.gamma_sf,
            gamma_pf: linear.gamma_pf,
            rff_dim: DEFAULT_RFF_DIM,
            rff_sigma: DEFAULT_RFF_SIGMA,
            rff_seed: None,
        }
    }
}

impl ExperimentConfig {
    /// Parse a config with scalar values only.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_array()) {
            return Err(Error::Config(format!(
                "`{key}` holds a list; use the sweep command for grids"
            )));
        }
        Self::from_table(table)
    }

    fn from_table(table: Table) -> Result<Self> {
        let cfg: ExperimentConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.kind()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> Result<IntrinsicKind> {
        self.agent.parse()
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let kind = self.kind().unwrap_or(IntrinsicKind::None);
        let mut l = kind.agent_label().to_string();
        if self.frozen {
            l.push_str(" (fixed)");
        }
        if self.optimistic && matches!(kind, IntrinsicKind::Sr | IntrinsicKind::Fr) {
            l.push_str(" (optimistic)");
        }
        l
    }

    /// Step budget, defaulting per protocol.
    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(match self.experiment {
            Experiment::Hardexp => 5000,
            _ => 8000,
        })
    }

    /// Episode budget, defaulting per protocol.
    pub fn episodes(&self) -> usize {
        self.episodes.unwrap_or(match self.experiment {
            Experiment::Mountaincar => 1000,
            Experiment::Nmrdp => 300,
            _ => 200,
        })
    }

    pub fn agent_config(&self) -> Result<AgentConfig> {
        let kind = self.kind()?;
        let mut cfg = AgentConfig {
            alpha: self.alpha,
            eta: self.eta,
            eta_pr: self.eta_pr,
            gamma: self.gamma,
            gamma_repr: self.gamma_repr,
            gamma_pr: self.gamma_pr,
            epsilon: self.epsilon,
            q_init: self.q_init,
            intrinsic: IntrinsicRewardSpec {
                kind,
                beta: self.beta,
                frozen: self.frozen,
            },
            seed: self.base_seed,
            strict_pseudocode: self.strict_pseudocode,
        };
        if self.optimistic {
            cfg.q_init = optimistic_init(&cfg, kind);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn linear_config(&self) -> Result<LinearConfig> {
        let cfg = LinearConfig {
            alpha: self.alpha,
            eta_sf: self.eta_sf,
            eta_pf: self.eta_pf,
            gamma: self.gamma,
            gamma_sf: self.gamma_sf,
            gamma_pf: self.gamma_pf,
            beta: self.beta,
            epsilon: self.epsilon,
            rff_dim: self.rff_dim,
            rff_sigma: self.rff_sigma,
            rff_seed: self.rff_seed,
            kind: self.kind()?,
            seed: self.base_seed,
            max_episode_steps: self.max_episode_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Short `key=value` summary of the swept-over settings.
    pub fn summary(&self) -> String {
        format!(
            "agent={} alpha={} eta={} gamma={} gamma_repr={} beta={} epsilon={}",
            self.agent, self.alpha, self.eta, self.gamma, self.gamma_repr, self.beta, self.epsilon
        )
    }
}

/// A config whose keys may hold lists; expands to the Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigGrid {
    fixed: Table,
    axes: BTreeMap<String, Vec<Value>>,
}

impl ConfigGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut fixed = Table::new();
        let mut axes = BTreeMap::new();
        for (k, v) in table {
            match v {
                Value::Array(values) => {
                    if values.is_empty() {
                        return Err(Error::EmptyGrid);
                    }
                    axes.insert(k, values);
                }
                other => {
                    fixed.insert(k, other);
                }
            }
        }
        Ok(ConfigGrid { fixed, axes })
    }

    pub fn axes(&self) -> impl Iterator<Item = (&str, usize)> {
        self.axes.iter().map(|(k, v)| (k.as_str(), v.len()))
    }

    pub fn len(&self) -> usize {
        self.axes.values().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All combinations, the last axis (in key order) varying fastest.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let keys: Vec<&String> = self.axes.keys().collect();
        let mut combos: Vec<Table> = vec![self.fixed.clone()];
        for key in keys {
            let values = &self.axes[key];
            combos = combos
                .into_iter()
                .flat_map(|base| {
                    values.iter().map(move |v| {
                        let mut t = base.clone();
                        t.insert(key.clone(), v.clone());
                        t
                    })
                })
                .collect();
        }
        combos.into_iter().map(ExperimentConfig::from_table).collect()
    }
}

/// Preset configs shipped with the crate, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("grid", include_str!("../../data/presets/grid.toml")),
    ("mountaincar", include_str!("../../data/presets/mountaincar.toml")),
    ("riverswim-sarsa", include_str!("../../data/presets/riverswim-sarsa.toml")),
    ("riverswim-sarsa-sr", include_str!("../../data/presets/riverswim-sarsa-sr.toml")),
    ("riverswim-sarsa-fr", include_str!("../../data/presets/riverswim-sarsa-fr.toml")),
    ("riverswim-sarsa-srr", include_str!("../../data/presets/riverswim-sarsa-srr.toml")),
    ("riverswim-sarsa-sr-pr", include_str!("../../data/presets/riverswim-sarsa-sr-pr.toml")),
    ("riverswim-sarsa-srr-a", include_str!("../../data/presets/riverswim-sarsa-srr-a.toml")),
    ("riverswim-sarsa-srr-b", include_str!("../../data/presets/riverswim-sarsa-srr-b.toml")),
    ("riverswim-sarsa-sr-fixed", include_str!("../../data/presets/riverswim-sarsa-sr-fixed.toml")),
    ("riverswim-sarsa-fr-fixed", include_str!("../../data/presets/riverswim-sarsa-fr-fixed.toml")),
    ("riverswim-sarsa-srr-fixed", include_str!("../../data/presets/riverswim-sarsa-srr-fixed.toml")),
    ("sixarms-sarsa", include_str!("../../data/presets/sixarms-sarsa.toml")),
    ("sixarms-sarsa-sr", include_str!("../../data/presets/sixarms-sarsa-sr.toml")),
    ("sixarms-sarsa-fr", include_str!("../../data/presets/sixarms-sarsa-fr.toml")),
    ("sixarms-sarsa-srr", include_str!("../../data/presets/sixarms-sarsa-srr.toml")),
    ("sixarms-sarsa-sr-pr", include_str!("../../data/presets/sixarms-sarsa-sr-pr.toml")),
    ("sixarms-sarsa-srr-a", include_str!("../../data/presets/sixarms-sarsa-srr-a.toml")),
    ("sixarms-sarsa-srr-b", include_str!("../../data/presets/sixarms-sarsa-srr-b.toml")),
    ("sixarms-sarsa-sr-fixed", include_str!("../../data/presets/sixarms-sarsa-sr-fixed.toml")),
    ("sixarms-sarsa-fr-fixed", include_str!("../../data/presets/sixarms-sarsa-fr-fixed.toml")),
    ("sixarms-sarsa-srr-fixed", include_str!("../../data/presets/sixarms-sarsa-srr-fixed.toml")),
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no preset named `{name}`")))
        .and_then(|(_, text)| ExperimentConfig::from_toml(text))
}

/// Tuned preset for `agent` on a hard-exploration task, e.g.
/// `tabular_preset("riverswim", "srr", false)`.
pub fn tabular_preset(task: &str, agent: IntrinsicKind, frozen: bool) -> Result<ExperimentConfig> {
    let suffix = match agent {
        IntrinsicKind::None => "",
        IntrinsicKind::Sr => "-sr",
        IntrinsicKind::Fr => "-fr",
        IntrinsicKind::Srr => "-srr",
        IntrinsicKind::SrPr => "-sr-pr",
        IntrinsicKind::SrrA => "-srr-a",
        IntrinsicKind::SrrB => "-srr-b",
        IntrinsicKind::Sf | IntrinsicKind::SfPf => {
            return Err(Error::Config(format!("no tabular preset for `{agent}`")));
        }
    };
    let fixed = if frozen { "-fixed" } else { "" };
    preset(&format!("{task}-sarsa{suffix}{fixed}"))
}

/// Grid-world config for `agent` using the shared grid tuple.
pub fn grid_preset(agent: IntrinsicKind) -> Result<ExperimentConfig> {
    let mut cfg = preset("grid")?;
    cfg.agent = agent.name().to_string();
    Ok(cfg)
}
