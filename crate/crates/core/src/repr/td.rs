//! One-step TD rules. Each bootstrap term is cut by `(1 - done)`.

use super::{OccupancyMatrix, ReprKind};
use crate::envs::Transition;

/// `M[s, :] += eta * (1(s) + gamma * M[s', :] - M[s, :])`
pub fn sr_td_update(m: &mut OccupancyMatrix, t: &Transition, eta: f64) {
    debug_assert_eq!(m.kind, ReprKind::Sr);
    let (s, s2) = (t.s, t.s_next);
    let boot = if t.done { 0.0 } else { m.gamma };
    let n = m.n_states();
    for j in 0..n {
        let indicator = if j == s { 1.0 } else { 0.0 };
        let cur = m.values[(s, j)];
        let target = indicator + boot * m.values[(s2, j)];
        m.values[(s, j)] = cur + eta * (target - cur);
    }
}

/// `F[s, :] += eta * (1(s) + gamma * (1 - 1(s)) .* F[s', :] - F[s, :])`
///
/// The diagonal gate stops bootstrapping once the target state is reached.
pub fn fr_td_update(f: &mut OccupancyMatrix, t: &Transition, eta: f64) {
    debug_assert_eq!(f.kind, ReprKind::Fr);
    let (s, s2) = (t.s, t.s_next);
    let boot = if t.done { 0.0 } else { f.gamma };
    let n = f.n_states();
    for j in 0..n {
        let cur = f.values[(s, j)];
        let target = if j == s {
            1.0
        } else {
            boot * f.values[(s2, j)]
        };
        f.values[(s, j)] = cur + eta * (target - cur);
    }
}

/// `N[:, s'] += eta * (1(s') + gamma * N[:, s] - N[:, s'])`
///
/// Column-wise mirror of the SR rule on the time-reversed chain.
pub fn pr_td_update(nmat: &mut OccupancyMatrix, t: &Transition, eta: f64) {
    debug_assert_eq!(nmat.kind, ReprKind::Pr);
    let (s, s2) = (t.s, t.s_next);
    let boot = if t.done { 0.0 } else { nmat.gamma };
    let n = nmat.n_states();
    for i in 0..n {
        let indicator = if i == s2 { 1.0 } else { 0.0 };
        let cur = nmat.values[(i, s2)];
        let target = indicator + boot * nmat.values[(i, s)];
        nmat.values[(i, s2)] = cur + eta * (target - cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{analytic_fr, analytic_pr, analytic_sr};
    use crate::rng_from_seed;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn step(s: usize, s2: usize) -> Transition {
        Transition::between(s, s2, false)
    }

    #[test]
    fn sr_first_update_from_zero() {
        let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 3, 0.9);
        sr_td_update(&mut m, &step(0, 2), 1.0);
        assert_eq!(m.values.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn sr_self_loop_fixed_point() {
        // Fixed-point iteration x <- 1 + 0.5 x converges to 2.
        let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 1, 0.5);
        let mut oracle = 0.0;
        for _ in 0..200 {
            sr_td_update(&mut m, &step(0, 0), 1.0);
            oracle = 1.0 + 0.5 * oracle;
        }
        assert_eq!(m.get(0, 0), oracle);
        assert!((m.get(0, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn terminal_cuts_bootstrap() {
        let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 2, 0.9);
        m.values[(1, 1)] = 5.0;
        sr_td_update(&mut m, &Transition::between(0, 1, true), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
        let mut p = OccupancyMatrix::zeros(ReprKind::Pr, 2, 0.9);
        p.values[(0, 0)] = 5.0;
        pr_td_update(&mut p, &Transition::between(0, 1, true), 1.0);
        assert_eq!(p.get(0, 1), 0.0);
        assert_eq!(p.get(1, 1), 1.0);
    }

    #[test]
    fn fr_first_update_and_diagonal_stays_one() {
        let mut f = OccupancyMatrix::zeros(ReprKind::Fr, 3, 0.9);
        fr_td_update(&mut f, &step(1, 2), 1.0);
        assert_eq!(f.get(1, 1), 1.0);
        f.values[(2, 1)] = 0.7;
        for eta in [0.1, 0.5, 1.0] {
            fr_td_update(&mut f, &step(1, 2), eta);
            assert_eq!(f.get(1, 1), 1.0);
        }
    }

    #[test]
    fn fr_three_chain_first_hit() {
        // a -> b -> c -> c, gamma 0.5: first hit of c from a after 2 steps.
        let mut f = OccupancyMatrix::zeros(ReprKind::Fr, 3, 0.5);
        for _ in 0..50 {
            fr_td_update(&mut f, &step(2, 2), 1.0);
            fr_td_update(&mut f, &step(1, 2), 1.0);
            fr_td_update(&mut f, &step(0, 1), 1.0);
        }
        assert!((f.get(0, 2) - 0.25).abs() < 1e-12);
        assert!((f.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((f.row_l1(0) - (1.0 + 0.5 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn pr_first_update_from_zero() {
        let mut nmat = OccupancyMatrix::zeros(ReprKind::Pr, 3, 0.9);
        pr_td_update(&mut nmat, &step(0, 2), 1.0);
        assert_eq!(nmat.get(2, 2), 1.0);
        assert_eq!(nmat.col_l1(2), 1.0);
    }

    #[test]
    fn pr_two_cycle_geometric_series() {
        // a <-> b with gamma 0.5: looking back from b, a sits at odd lags,
        // so N[a, b] = gamma / (1 - gamma^2) = 2/3.
        let mut nmat = OccupancyMatrix::zeros(ReprKind::Pr, 2, 0.5);
        let oracle: f64 = (0..60).map(|k| 0.5f64.powi(2 * k + 1)).sum();
        for _ in 0..200 {
            pr_td_update(&mut nmat, &step(0, 1), 1.0);
            pr_td_update(&mut nmat, &step(1, 0), 1.0);
        }
        assert!((nmat.get(0, 1) - oracle).abs() < 1e-12);
        assert!((oracle - 2.0 / 3.0).abs() < 1e-12);
    }

    /// 5-state ring with moves +1 and -1 under a uniform policy.
    fn ring5() -> DMatrix<f64> {
        DMatrix::from_fn(5, 5, |i, j| {
            if j == (i + 1) % 5 || j == (i + 4) % 5 {
                0.5
            } else {
                0.0
            }
        })
    }

    fn simulate(p: &DMatrix<f64>, steps: usize, seed: u64, mut f: impl FnMut(usize, usize, f64)) {
        let mut rng = rng_from_seed(seed);
        let n = p.nrows();
        let mut s = 0;
        for t in 0..steps {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = n - 1;
            for j in 0..n {
                acc += p[(s, j)];
                if u < acc {
                    next = j;
                    break;
                }
            }
            let eta = 0.5 / (1.0 + t as f64 / 1e4);
            f(s, next, eta);
            s = next;
        }
    }

    #[test]
    fn sr_td_tracks_analytic_on_ring() {
        let p = ring5();
        let exact = analytic_sr(&p, 0.5).unwrap();
        let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 5, 0.5);
        simulate(&p, 200_000, 7, |s, s2, eta| sr_td_update(&mut m, &step(s, s2), eta));
        let err = (&m.values - &exact.values).amax();
        assert!(err < 0.1, "L-inf error {err}");
    }

    #[test]
    fn pr_and_fr_td_track_analytic() {
        // Non-reversible: +1 with prob 0.6, -1 with 0.2, +2 with 0.2.
        let p = DMatrix::from_fn(5, 5, |i, j| match (j + 5 - i) % 5 {
            1 => 0.6,
            4 => 0.2,
            2 => 0.2,
            _ => 0.0,
        });
        let exact_pr = analytic_pr(&p, 0.5).unwrap();
        let exact_fr = analytic_fr(&p, 0.5).unwrap();
        let mut nmat = OccupancyMatrix::zeros(ReprKind::Pr, 5, 0.5);
        let mut f = OccupancyMatrix::zeros(ReprKind::Fr, 5, 0.5);
        simulate(&p, 200_000, 11, |s, s2, eta| {
            pr_td_update(&mut nmat, &step(s, s2), eta);
            fr_td_update(&mut f, &step(s, s2), eta);
        });
        let err = (&nmat.values - &exact_pr.values).amax();
        assert!(err < 0.1, "PR L-inf error {err}");
        let err = (&f.values - &exact_fr.values).amax();
        assert!(err < 0.1, "FR L-inf error {err}");
    }

    proptest! {
        #[test]
        fn entries_stay_nonnegative_and_bounded(
            seq in prop::collection::vec((0usize..4, 0usize..4, any::<bool>(), 0.01f64..=1.0), 1..200),
            gamma in 0.01f64..0.99,
        ) {
            let mut m = OccupancyMatrix::zeros(ReprKind::Sr, 4, gamma);
            let mut f = OccupancyMatrix::zeros(ReprKind::Fr, 4, gamma);
            let mut nmat = OccupancyMatrix::zeros(ReprKind::Pr, 4, gamma);
            for &(s, s2, done, eta) in &seq {
                let t = Transition::between(s, s2, done);
                sr_td_update(&mut m, &t, eta);
                fr_td_update(&mut f, &t, eta);
                pr_td_update(&mut nmat, &t, eta);
            }
            let cap = 1.0 / (1.0 - gamma) + 1e-9;
            prop_assert!(m.values.iter().all(|&v| v >= 0.0 && v <= cap));
            prop_assert!(nmat.values.iter().all(|&v| v >= 0.0 && v <= cap));
            prop_assert!(f.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            for s in 0..4 {
                prop_assert!(m.row_l1(s) <= cap);
            }
            // Shared sample stream and step sizes keep FR under SR entrywise.
            prop_assert!(f.values.iter().zip(m.values.iter()).all(|(a, b)| *a <= *b + 1e-12));
        }
    }
}
