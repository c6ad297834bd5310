use nalgebra::{DMatrix, DVector};

use super::{pf_apply, rff_features, sf_apply, sf_bonus, sf_pf_bonus, LinearPf, LinearSf, RffSpec};
use crate::agents::choose_epsilon_greedy;
use crate::envs::mountaincar::{MountainCar, N_ACTIONS};
use crate::harness::{EpisodeRow, RunRecord};
use crate::intrinsic::{combine, IntrinsicKind};
use crate::{rng_from_seed, Error, Result};

/// Hyperparameters of the linear Q-learning agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub alpha: f64,
    pub eta_sf: f64,
    pub eta_pf: f64,
    pub gamma: f64,
    pub gamma_sf: f64,
    pub gamma_pf: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub rff_dim: usize,
    pub rff_sigma: f64,
    /// Feature seed; the run seed is used when unset.
    pub rff_seed: Option<u64>,
    /// `None`, `Sf` or `SfPf`.
    pub kind: IntrinsicKind,
    pub seed: u64,
    /// Episodes are cut here and count as failures.
    pub max_episode_steps: usize,
}

impl Default for LinearConfig {
    /// The MountainCar tuple `(0.1, 0.2, 0.2, 0.99, 0.95, 0.95, 1000, 0.3)`.
    fn default() -> Self {
        LinearConfig {
            alpha: 0.1,
            eta_sf: 0.2,
            eta_pf: 0.2,
            gamma: 0.99,
            gamma_sf: 0.95,
            gamma_pf: 0.95,
            beta: 1000.0,
            epsilon: 0.3,
            rff_dim: super::DEFAULT_RFF_DIM,
            rff_sigma: super::DEFAULT_RFF_SIGMA,
            rff_seed: None,
            kind: IntrinsicKind::SfPf,
            seed: 0,
            max_episode_steps: 10_000,
        }
    }
}

impl LinearConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.kind, IntrinsicKind::None | IntrinsicKind::Sf | IntrinsicKind::SfPf) {
            return Err(Error::Config(format!(
                "linear agent supports none, sf and sf_pf, not `{}`",
                self.kind
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("eta_sf", self.eta_sf), ("eta_pf", self.eta_pf)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("gamma_sf", self.gamma_sf), ("gamma_pf", self.gamma_pf)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.max_episode_steps == 0 {
            return Err(Error::EmptyBudget);
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "kind={};beta={};alpha={};eta_sf={};eta_pf={};gamma={};gamma_sf={};gamma_pf={};epsilon={};rff_dim={};rff_sigma={};rff_seed={};cap={}",
            self.kind,
            self.beta,
            self.alpha,
            self.eta_sf,
            self.eta_pf,
            self.gamma,
            self.gamma_sf,
            self.gamma_pf,
            self.epsilon,
            self.rff_dim,
            self.rff_sigma,
            self.rff_seed.map_or("run".to_string(), |s| s.to_string()),
            self.max_episode_steps
        )
    }
}

/// Linear action values `Q(s, a) = theta_a . phi(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQ {
    /// `n_actions x dim`
    pub theta: DMatrix<f64>,
}

impl LinearQ {
    pub fn zeros(n_actions: usize, dim: usize) -> Self {
        LinearQ {
            theta: DMatrix::zeros(n_actions, dim),
        }
    }

    pub fn values(&self, phi: &DVector<f64>) -> Vec<f64> {
        (&self.theta * phi).iter().copied().collect()
    }

    /// `theta_a += alpha * delta * phi`
    pub fn update(&mut self, a: usize, phi: &DVector<f64>, delta: f64, alpha: f64) {
        let step = alpha * delta;
        for (w, x) in self.theta.row_mut(a).iter_mut().zip(phi.iter()) {
            *w += step * x;
        }
    }
}

/// Q-learning with an SF or SF-PF bonus on MountainCar for `episodes`
/// episodes. The record carries one row per episode; returns are 1 for a
/// reached flag and 0 for a truncated episode.
pub fn linear_q_agent(env: &mut MountainCar, config: &LinearConfig, episodes: usize) -> Result<RunRecord> {
    config.validate()?;
    if episodes == 0 {
        return Err(Error::EmptyBudget);
    }
    let c = *config;
    let features = RffSpec::new(c.rff_dim, c.rff_sigma, c.rff_seed.unwrap_or(c.seed))?;
    let mut rng = rng_from_seed(c.seed);
    let mut q = LinearQ::zeros(N_ACTIONS, c.rff_dim);
    let mut sf = LinearSf::zeros(c.rff_dim, N_ACTIONS, c.gamma_sf);
    let mut pf = LinearPf::zeros(c.rff_dim, c.gamma_pf);
    let mut rec = RunRecord::new(c.seed, c.fingerprint(), 0);

    let uses_sf = matches!(c.kind, IntrinsicKind::Sf | IntrinsicKind::SfPf);
    let uses_pf = c.kind == IntrinsicKind::SfPf;

    for episode in 0..episodes {
        let start = env.reset(&mut rng);
        let mut phi = rff_features(&features, &start);
        let mut q_here = q.values(&phi);
        let mut a = choose_epsilon_greedy(&q_here, c.epsilon, &mut rng);
        // psi(s_t, a_t) and xi(s_t) under the current weights. Each step
        // refreshes them from the previous step's predictions with the
        // rank-1 change instead of a fresh D x D product.
        let mut psi_here = if uses_sf { sf.psi(&phi, a) } else { DVector::zeros(0) };
        let mut xi_here = if uses_pf { pf.xi(&phi) } else { DVector::zeros(0) };
        let mut length = 0;
        let mut ret = 0.0;
        let mut completed = false;
        while length < c.max_episode_steps {
            let (next, r_ext, done) = env.step(a);
            length += 1;
            ret += r_ext;
            let phi_next = rff_features(&features, &next);
            let q_next = q.values(&phi_next);
            let a_next = choose_epsilon_greedy(&q_next, c.epsilon, &mut rng);

            let mut r_int = 0.0;
            if uses_sf {
                let psi_boot = sf.psi(&phi_next, a_next);
                let delta = sf_apply(&mut sf, &phi, a, &psi_here, (!done).then_some(&psi_boot), c.eta_sf);
                let psi_post = &psi_here + &delta * (c.eta_sf * phi.dot(&phi));
                r_int = sf_bonus(psi_post.lp_norm(1));
                psi_here = if a_next == a {
                    psi_boot + delta * (c.eta_sf * phi.dot(&phi_next))
                } else {
                    psi_boot
                };
                if uses_pf {
                    let xi_next = pf.xi(&phi_next);
                    let delta = pf_apply(&mut pf, &phi_next, &xi_next, (!done).then_some(&xi_here), c.eta_pf);
                    xi_here = xi_next + delta * (c.eta_pf * phi_next.dot(&phi_next));
                    r_int = sf_pf_bonus(xi_here.lp_norm(1), psi_post.lp_norm(1));
                }
            }
            let r_total = combine(r_ext, r_int, c.beta);
            let best_next = if done {
                0.0
            } else {
                q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let delta = r_total + c.gamma * best_next - q_here[a];
            q.update(a, &phi, delta, c.alpha);
            if done {
                completed = true;
                break;
            }
            phi = phi_next;
            // Values at s' were read before this step's update; refresh the
            // one row that changed.
            q_here = q.values(&phi);
            a = a_next;
        }
        rec.episodes.push(EpisodeRow {
            episode,
            length,
            ret,
            completed,
        });
    }
    Ok(rec)
}
