use super::{epsilon_greedy, AgentConfig, Budget, QTable};
use crate::envs::{DiscreteEnv, Transition};
use crate::harness::{EpisodeRow, RunRecord, StepRow};
use crate::intrinsic::{self, IntrinsicKind};
use crate::repr::{analytic_fr, analytic_pr, analytic_sr, OccupancyMatrix, ReprKind};
use crate::{rng_from_seed, Error, Result, SimRng};

/// `Q[s, a] += alpha * (r + gamma * (1 - done) * Q[s', a'] - Q[s, a])`
pub fn sarsa_step(q: &mut QTable, t: &Transition, r_total: f64, alpha: f64, gamma: f64) {
    debug_assert!(t.done || t.a_next.is_some(), "non-terminal transition needs a'");
    let boot = match (t.done, t.a_next) {
        (false, Some(a2)) => gamma * q.get(t.s_next, a2),
        _ => 0.0,
    };
    let cur = q.values[(t.s, t.a)];
    q.values[(t.s, t.a)] = cur + alpha * (r_total + boot - cur);
}

/// Occupancy matrices an agent reads its bonus from.
#[derive(Debug, Clone, PartialEq)]
pub struct Representations {
    /// SR for the SR-family kinds, FR for `Fr`.
    pub primary: Option<OccupancyMatrix>,
    /// PR, present for `SrPr` only.
    pub pr: Option<OccupancyMatrix>,
}

impl Representations {
    fn zeros(config: &AgentConfig, n: usize) -> Self {
        let kind = config.kind();
        let primary = primary_kind(kind).map(|k| OccupancyMatrix::zeros(k, n, config.gamma_repr));
        let pr = (kind == IntrinsicKind::SrPr).then(|| OccupancyMatrix::zeros(ReprKind::Pr, n, config.gamma_pr));
        Representations { primary, pr }
    }

    /// Closed-form matrices under the uniform random walk of `env`.
    fn diffusion(config: &AgentConfig, env: &dyn DiscreteEnv) -> Result<Self> {
        let p = env.mdp().random_walk_matrix();
        let kind = config.kind();
        let primary = match primary_kind(kind) {
            Some(ReprKind::Fr) => Some(analytic_fr(&p, config.gamma_repr)?),
            Some(_) => Some(analytic_sr(&p, config.gamma_repr)?),
            None => None,
        };
        let pr = if kind == IntrinsicKind::SrPr {
            Some(analytic_pr(&p, config.gamma_pr)?)
        } else {
            None
        };
        Ok(Representations { primary, pr })
    }
}

fn primary_kind(kind: IntrinsicKind) -> Option<ReprKind> {
    match kind {
        IntrinsicKind::Sr | IntrinsicKind::Srr | IntrinsicKind::SrrA | IntrinsicKind::SrrB | IntrinsicKind::SrPr => {
            Some(ReprKind::Sr)
        }
        IntrinsicKind::Fr => Some(ReprKind::Fr),
        IntrinsicKind::None | IntrinsicKind::Sf | IntrinsicKind::SfPf => None,
    }
}

/// Tabular SARSA with an optional intrinsic bonus.
#[derive(Debug, Clone)]
pub struct SarsaAgent {
    pub config: AgentConfig,
    pub q: QTable,
    pub reprs: Representations,
}

impl SarsaAgent {
    pub fn new(env: &dyn DiscreteEnv, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        if !config.kind().is_tabular() {
            return Err(Error::Config(format!(
                "intrinsic kind `{}` needs the linear agent",
                config.kind()
            )));
        }
        let n = env.n_states();
        let reprs = if config.intrinsic.frozen {
            Representations::diffusion(&config, env)?
        } else {
            Representations::zeros(&config, n)
        };
        Ok(SarsaAgent {
            q: QTable::new(n, env.n_actions(), config.q_init),
            reprs,
            config,
        })
    }

    fn act(&self, s: usize, rng: &mut SimRng) -> usize {
        epsilon_greedy(&self.q, s, self.config.epsilon, rng)
    }

    /// Update the representations with `t` (unless frozen) and return the
    /// unscaled intrinsic reward read from the updated matrices.
    pub fn observe(&mut self, t: &Transition) -> f64 {
        let c = self.config;
        if !c.intrinsic.frozen {
            if let Some(m) = self.reprs.primary.as_mut() {
                m.td_update(t.s, t.s_next, t.done, c.eta);
            }
            if let Some(n) = self.reprs.pr.as_mut() {
                n.td_update(t.s, t.s_next, t.done, c.eta_pr);
            }
        }
        let m = self.reprs.primary.as_ref();
        match c.kind() {
            IntrinsicKind::Sr => intrinsic::r_sr(m.expect("SR present"), t),
            IntrinsicKind::Fr => intrinsic::r_fr(m.expect("FR present"), t),
            IntrinsicKind::Srr => intrinsic::r_srr(m.expect("SR present"), t),
            IntrinsicKind::SrrA => intrinsic::r_srr_a(m.expect("SR present"), t),
            IntrinsicKind::SrrB => intrinsic::r_srr_b(m.expect("SR present"), t),
            IntrinsicKind::SrPr => {
                intrinsic::r_sr_pr(m.expect("SR present"), self.reprs.pr.as_ref().expect("PR present"), t)
            }
            IntrinsicKind::None | IntrinsicKind::Sf | IntrinsicKind::SfPf => 0.0,
        }
    }

    /// Run from a fresh reset of `env` until the budget is spent.
    pub fn run(&mut self, env: &mut dyn DiscreteEnv, budget: Budget) -> Result<RunRecord> {
        budget.check()?;
        if env.n_states() != self.q.values.nrows() || env.n_actions() != self.q.n_actions() {
            return Err(Error::Config("environment does not match the agent's tables".into()));
        }
        let c = self.config;
        let beta = c.intrinsic.beta;
        let mut rng = rng_from_seed(c.seed);
        let mut rec = RunRecord::new(c.seed, c.fingerprint(), env.n_states());
        let mut visited = vec![false; env.n_states()];
        let mut unique = 0usize;
        let mut visit = |s: usize, unique: &mut usize| {
            if !visited[s] {
                visited[s] = true;
                *unique += 1;
            }
        };
        let mut t = 0usize;
        let mut episode = 0usize;
        loop {
            let mut s = env.reset(&mut rng);
            visit(s, &mut unique);
            let mut a = if c.strict_pseudocode { 0 } else { self.act(s, &mut rng) };
            let mut length = 0usize;
            let mut ret = 0.0;
            let mut completed = false;
            loop {
                if c.strict_pseudocode {
                    a = self.act(s, &mut rng);
                }
                let step = env.step(a, &mut rng);
                t += 1;
                length += 1;
                visit(step.next, &mut unique);
                let mut tr = Transition {
                    s,
                    a,
                    r_ext: step.reward,
                    s_next: step.next,
                    a_next: None,
                    done: step.done,
                };
                let r_int = self.observe(&tr);
                let r_total = intrinsic::combine(step.reward, r_int, beta);
                if !step.done {
                    tr.a_next = Some(self.act(step.next, &mut rng));
                }
                sarsa_step(&mut self.q, &tr, r_total, c.alpha, c.gamma);
                ret += step.reward;
                let bonus = beta * r_int;
                rec.steps.push(StepRow {
                    t,
                    s,
                    a,
                    r_ext: step.reward,
                    // Canonical zero keeps logs identical when beta = 0.
                    r_int: if bonus == 0.0 { 0.0 } else { bonus },
                    done: step.done,
                    unique_states: unique,
                });
                if step.done {
                    completed = true;
                    break;
                }
                let out_of_budget = match budget {
                    Budget::Steps(n) => t >= n,
                    Budget::Episodes { max_steps, .. } => length >= max_steps,
                };
                if out_of_budget {
                    break;
                }
                s = step.next;
                a = tr.a_next.expect("set for non-terminal steps");
            }
            rec.episodes.push(EpisodeRow {
                episode,
                length,
                ret,
                completed,
            });
            episode += 1;
            let finished = match budget {
                Budget::Steps(n) => t >= n,
                Budget::Episodes { count, .. } => episode >= count,
            };
            if finished {
                return Ok(rec);
            }
        }
    }
}

/// Build a fresh agent for `env` and run it.
pub fn run_agent(env: &mut dyn DiscreteEnv, config: &AgentConfig, budget: Budget) -> Result<RunRecord> {
    SarsaAgent::new(env, *config)?.run(env, budget)
}
