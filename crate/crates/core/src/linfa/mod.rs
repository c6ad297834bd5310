//! Linear function approximation over random Fourier features: successor
//! features, predecessor features and a linear Q-learning agent.

mod agent;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use agent::{linear_q_agent, LinearConfig, LinearQ};

use crate::envs::ContinuousState;
use crate::intrinsic::EPS_NORM;
use crate::{rng_from_seed, Error, Result};

pub const DEFAULT_RFF_DIM: usize = 128;
pub const DEFAULT_RFF_SIGMA: f64 = 0.5;

/// Random Fourier feature map `phi_i(x) = sqrt(2/D) cos(w_i . x + b_i)`
/// approximating a Gaussian kernel of bandwidth `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct RffSpec {
    pub dim: usize,
    /// `dim x 2`, rows drawn from `N(0, sigma^-2 I)`.
    pub frequencies: DMatrix<f64>,
    /// Drawn from `U[0, 2 pi)`.
    pub phases: DVector<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl RffSpec {
    pub fn new(dim: usize, sigma: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("rff_dim must be positive".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("rff_sigma must be positive, got {sigma}")));
        }
        let mut rng = rng_from_seed(seed);
        let frequencies = DMatrix::from_fn(dim, 2, |_, _| rng.sample::<f64, _>(StandardNormal) / sigma);
        let phases = DVector::from_fn(dim, |_, _| rng.random_range(0.0..std::f64::consts::TAU));
        Ok(RffSpec {
            dim,
            frequencies,
            phases,
            sigma,
            seed,
        })
    }

    /// Features of a point already mapped to the unit square.
    pub fn features_of(&self, x: [f64; 2]) -> DVector<f64> {
        let scale = (2.0 / self.dim as f64).sqrt();
        DVector::from_fn(self.dim, |i, _| {
            let arg = self.frequencies[(i, 0)] * x[0] + self.frequencies[(i, 1)] * x[1] + self.phases[i];
            scale * arg.cos()
        })
    }
}

pub fn rff_features(spec: &RffSpec, state: &ContinuousState) -> DVector<f64> {
    spec.features_of(state.normalized())
}

/// Per-action successor features `psi(s, a) = W_a phi(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSf {
    pub w: Vec<DMatrix<f64>>,
    pub gamma: f64,
}

impl LinearSf {
    pub fn zeros(dim: usize, n_actions: usize, gamma: f64) -> Self {
        LinearSf {
            w: vec![DMatrix::zeros(dim, dim); n_actions],
            gamma,
        }
    }

    pub fn psi(&self, phi: &DVector<f64>, a: usize) -> DVector<f64> {
        &self.w[a] * phi
    }
}

/// State predecessor features `xi(s) = V mu(s)`, with `mu = phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPf {
    pub v: DMatrix<f64>,
    pub gamma: f64,
}

impl LinearPf {
    pub fn zeros(dim: usize, gamma: f64) -> Self {
        LinearPf {
            v: DMatrix::zeros(dim, dim),
            gamma,
        }
    }

    pub fn xi(&self, phi: &DVector<f64>) -> DVector<f64> {
        &self.v * phi
    }
}

/// Semi-gradient step on `delta = phi_t + gamma psi(s', a') - psi(s, a)`,
/// touching only `W_{a_t}`. `a_next = None` marks a terminal `s'`.
///
/// Returns the updated `psi(s_t, a_t)`.
pub fn sf_td_step(
    sf: &mut LinearSf,
    phi_t: &DVector<f64>,
    a_t: usize,
    phi_next: &DVector<f64>,
    a_next: Option<usize>,
    eta: f64,
) -> DVector<f64> {
    let psi = sf.psi(phi_t, a_t);
    let boot = a_next.map(|a2| sf.psi(phi_next, a2));
    let delta = sf_apply(sf, phi_t, a_t, &psi, boot.as_ref(), eta);
    psi + delta * (eta * phi_t.dot(phi_t))
}

/// The update behind [`sf_td_step`], taking `psi(s_t, a_t)` and the
/// bootstrap `psi(s', a')` as already computed from the current weights.
/// Returns the TD error.
pub fn sf_apply(
    sf: &mut LinearSf,
    phi_t: &DVector<f64>,
    a_t: usize,
    psi_t: &DVector<f64>,
    psi_next: Option<&DVector<f64>>,
    eta: f64,
) -> DVector<f64> {
    let mut target = phi_t.clone();
    if let Some(p) = psi_next {
        target += p * sf.gamma;
    }
    let delta = target - psi_t;
    sf.w[a_t].ger(eta, &delta, phi_t, 1.0);
    delta
}

/// Semi-gradient step on `delta = mu(s') + gamma xi(s) - xi(s')`, updating
/// the prediction at `s'`. The bootstrap is dropped when `done`.
///
/// Returns the updated `xi(s_{t+1})`.
pub fn pf_td_step(
    pf: &mut LinearPf,
    phi_t: &DVector<f64>,
    phi_next: &DVector<f64>,
    done: bool,
    eta: f64,
) -> DVector<f64> {
    let xi_next = pf.xi(phi_next);
    let boot = (!done).then(|| pf.xi(phi_t));
    let delta = pf_apply(pf, phi_next, &xi_next, boot.as_ref(), eta);
    xi_next + delta * (eta * phi_next.dot(phi_next))
}

/// The update behind [`pf_td_step`] with `xi(s')` and the bootstrap
/// `xi(s)` precomputed. Returns the TD error.
pub fn pf_apply(
    pf: &mut LinearPf,
    phi_next: &DVector<f64>,
    xi_next: &DVector<f64>,
    xi_t: Option<&DVector<f64>>,
    eta: f64,
) -> DVector<f64> {
    let mut target = phi_next.clone();
    if let Some(x) = xi_t {
        target += x * pf.gamma;
    }
    let delta = target - xi_next;
    pf.v.ger(eta, &delta, phi_next, 1.0);
    delta
}

/// `1 / max(xi_norm, EPS_NORM) - 1 / max(psi_norm, EPS_NORM)`
pub fn sf_pf_bonus(xi_norm: f64, psi_norm: f64) -> f64 {
    1.0 / xi_norm.max(EPS_NORM) - 1.0 / psi_norm.max(EPS_NORM)
}

/// `1 / max(psi_norm, EPS_NORM)`
pub fn sf_bonus(psi_norm: f64) -> f64 {
    1.0 / psi_norm.max(EPS_NORM)
}

/// Successor-predecessor feature reward for `(s_t, a_t, s_{t+1})` given
/// their feature vectors.
pub fn r_sf_pf(sf: &LinearSf, pf: &LinearPf, phi_t: &DVector<f64>, a_t: usize, phi_next: &DVector<f64>) -> f64 {
    sf_pf_bonus(pf.xi(phi_next).lp_norm(1), sf.psi(phi_t, a_t).lp_norm(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{analytic_pr, analytic_sr, OccupancyMatrix, ReprKind};
    use proptest::prelude::*;
    use rand::Rng;

    fn one_hot(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn constant_feature_when_frequencies_vanish() {
        let mut spec = RffSpec::new(8, 0.5, 0).unwrap();
        spec.frequencies.fill(0.0);
        spec.phases.fill(0.0);
        let phi = spec.features_of([0.3, 0.9]);
        let c = (2.0f64 / 8.0).sqrt();
        assert!(phi.iter().all(|&v| v == c));
    }

    #[test]
    fn features_are_seeded_and_bounded() {
        let a = RffSpec::new(128, 0.5, 42).unwrap();
        let b = RffSpec::new(128, 0.5, 42).unwrap();
        assert_eq!(a, b);
        let s = ContinuousState::new(-0.3, 0.01);
        assert_eq!(rff_features(&a, &s), rff_features(&b, &s));
        let bound = (2.0f64 / 128.0).sqrt();
        assert!(rff_features(&a, &s).iter().all(|v| v.abs() <= bound));
        assert_ne!(RffSpec::new(128, 0.5, 43).unwrap(), a);
    }

    #[test]
    fn inner_product_approximates_gaussian_kernel() {
        let spec = RffSpec::new(10_000, 0.5, 1).unwrap();
        for (x, y) in [([0.2, 0.3], [0.4, 0.1]), ([0.5, 0.5], [0.5, 0.5]), ([0.0, 0.0], [0.6, 0.8])] {
            let k = spec.features_of(x).dot(&spec.features_of(y));
            let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            let oracle = (-d2 / (2.0 * 0.25)).exp();
            assert!((k - oracle).abs() < 0.05, "{k} vs {oracle}");
        }
    }

    #[test]
    fn first_updates_copy_features() {
        let phi = one_hot(4, 1);
        let phi2 = one_hot(4, 3);
        let mut sf = LinearSf::zeros(4, 2, 0.9);
        let psi = sf_td_step(&mut sf, &phi, 1, &phi2, Some(0), 1.0);
        assert_eq!(sf.psi(&phi, 1), phi);
        assert_eq!(psi, phi);
        assert_eq!(sf.w[0], DMatrix::zeros(4, 4));
        let mut pf = LinearPf::zeros(4, 0.9);
        let xi = pf_td_step(&mut pf, &phi, &phi2, false, 1.0);
        assert_eq!(pf.xi(&phi2), phi2);
        assert_eq!(xi, phi2);
    }

    #[test]
    fn zero_discount_recovers_features() {
        let spec = RffSpec::new(16, 0.5, 3).unwrap();
        let xs = [[0.1, 0.2], [0.7, 0.4], [0.3, 0.9]];
        let mut sf = LinearSf::zeros(16, 1, 0.0);
        let mut pf = LinearPf::zeros(16, 0.0);
        for k in 0..3000 {
            let x = spec.features_of(xs[k % 3]);
            let y = spec.features_of(xs[(k + 1) % 3]);
            sf_td_step(&mut sf, &x, 0, &y, Some(0), 0.1);
            pf_td_step(&mut pf, &x, &y, false, 0.1);
        }
        for x in xs {
            let phi = spec.features_of(x);
            assert!((sf.psi(&phi, 0) - &phi).norm() < 0.05);
            assert!((pf.xi(&phi) - &phi).norm() < 0.05);
        }
    }

    #[test]
    fn returned_predictions_match_recomputation() {
        let spec = RffSpec::new(32, 0.5, 8).unwrap();
        let x = spec.features_of([0.2, 0.6]);
        let y = spec.features_of([0.25, 0.55]);
        let mut sf = LinearSf::zeros(32, 3, 0.95);
        let mut pf = LinearPf::zeros(32, 0.95);
        for _ in 0..5 {
            let psi = sf_td_step(&mut sf, &x, 2, &y, Some(1), 0.2);
            let xi = pf_td_step(&mut pf, &x, &y, false, 0.2);
            assert!((psi - sf.psi(&x, 2)).amax() < 1e-12);
            assert!((xi - pf.xi(&y)).amax() < 1e-12);
        }
    }

    /// Deterministic-ish walk on a 5-state ring: +1 w.p. 0.7, -1 otherwise.
    fn ring_walk(steps: usize, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = rng_from_seed(seed);
        let mut s = 0;
        (0..steps)
            .map(|_| {
                let next = if rng.random::<f64>() < 0.7 { (s + 1) % 5 } else { (s + 4) % 5 };
                let pair = (s, next);
                s = next;
                pair
            })
            .collect()
    }

    #[test]
    fn one_hot_features_reproduce_tabular_learners_exactly() {
        let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 5, 0.9);
        let mut n = OccupancyMatrix::zeros(ReprKind::Pr, 5, 0.9);
        let mut sf = LinearSf::zeros(5, 1, 0.9);
        let mut pf = LinearPf::zeros(5, 0.9);
        for (s, s2) in ring_walk(5000, 2) {
            m.td_update(s, s2, false, 0.3);
            n.td_update(s, s2, false, 0.3);
            sf_td_step(&mut sf, &one_hot(5, s), 0, &one_hot(5, s2), Some(0), 0.3);
            pf_td_step(&mut pf, &one_hot(5, s), &one_hot(5, s2), false, 0.3);
        }
        // psi(s) = W e_s is column s of W, which mirrors row s of M.
        assert_eq!(sf.w[0].transpose(), m.values);
        assert_eq!(pf.v, n.values);
    }

    #[test]
    fn one_hot_features_converge_to_analytic() {
        let p = DMatrix::from_fn(5, 5, |i, j| {
            if j == (i + 1) % 5 {
                0.7
            } else if j == (i + 4) % 5 {
                0.3
            } else {
                0.0
            }
        });
        let exact_sr = analytic_sr(&p, 0.5).unwrap();
        let exact_pr = analytic_pr(&p, 0.5).unwrap();
        let mut sf = LinearSf::zeros(5, 1, 0.5);
        let mut pf = LinearPf::zeros(5, 0.5);
        for (t, (s, s2)) in ring_walk(200_000, 5).into_iter().enumerate() {
            let eta = 0.5 / (1.0 + t as f64 / 1e4);
            sf_td_step(&mut sf, &one_hot(5, s), 0, &one_hot(5, s2), Some(0), eta);
            pf_td_step(&mut pf, &one_hot(5, s), &one_hot(5, s2), false, eta);
        }
        for s in 0..5 {
            let psi = sf.psi(&one_hot(5, s), 0);
            let xi = pf.xi(&one_hot(5, s));
            for j in 0..5 {
                assert!((psi[j] - exact_sr.get(s, j)).abs() < 0.1);
                assert!((xi[j] - exact_pr.get(j, s)).abs() < 0.1);
            }
        }
    }

    #[test]
    fn bonus_examples() {
        assert_eq!(sf_pf_bonus(1.0, 1.0), 0.0);
        assert_eq!(sf_pf_bonus(0.0, 0.0), 0.0);
        assert_eq!(sf_pf_bonus(0.5, 2.0), 1.5);
        let sf = LinearSf::zeros(4, 2, 0.9);
        let pf = LinearPf::zeros(4, 0.9);
        assert_eq!(r_sf_pf(&sf, &pf, &one_hot(4, 0), 1, &one_hot(4, 2)), 0.0);
    }

    proptest! {
        #[test]
        fn bonus_is_antisymmetric(x in 0.0f64..100.0, y in 0.0f64..100.0) {
            prop_assert_eq!(sf_pf_bonus(x, y), -sf_pf_bonus(y, x));
        }
    }
}
