//! Seeded invariant suites behind `spie check`.
//!
//! Each check returns a pass flag and a one-line detail; none of them
//! panics on a violated invariant.

use nalgebra::DMatrix;
use rand::Rng;

use crate::agents::{run_agent, AgentConfig, Budget};
use crate::envs::{build_grid, riverswim_spec, sixarms_spec, GridMap, GridMode, MountainCar, TabularEnv, Transition};
use crate::intrinsic::{r_srr, r_srr_a, r_srr_b, IntrinsicKind};
use crate::linfa::{linear_q_agent, LinearConfig};
use crate::repr::{analytic_fr, analytic_pr, analytic_sr, stationary_distribution, OccupancyMatrix, ReprKind};
use crate::{rng_from_seed, Result, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

/// Random row-stochastic matrix that is irreducible and aperiodic: a ring
/// `i -> i+1` with a self-loop keeps it ergodic, the other entries are
/// dropped with probability one half.
pub fn random_ergodic_chain(n: usize, rng: &mut SimRng) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let keep = j == (i + 1) % n || j == i || rng.random::<f64>() < 0.5;
            if keep {
                p[(i, j)] = rng.random_range(0.05..1.0);
            }
        }
        let total: f64 = p.row(i).sum();
        p.row_mut(i).scale_mut(1.0 / total);
    }
    p
}

/// `max |N diag(z) - diag(z) M|` for the chain `p`.
pub fn reciprocity_residual(p: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    let m = analytic_sr(p, gamma)?;
    let n = analytic_pr(p, gamma)?;
    let z = stationary_distribution(p)?.diag();
    Ok((&n.values * &z - &z * &m.values).amax())
}

pub fn check_reciprocity(chains: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for k in 0..chains {
        let n = rng.random_range(2..=20);
        let gamma = [0.5, 0.9, 0.95][k % 3];
        let p = random_ergodic_chain(n, &mut rng);
        worst = worst.max(reciprocity_residual(&p, gamma)?);
    }
    Ok((worst <= 1e-8, format!("{chains} chains, worst residual {worst:.3e} (tol 1e-8)")))
}

/// Learning rate used by the convergence check.
pub fn decayed_eta(t: usize) -> f64 {
    0.5 * 1000.0 / (1000.0 + t as f64)
}

/// Run online SR and PR learners for `steps` random-walk transitions on
/// `p` and return their L-infinity errors against the closed forms.
pub fn td_convergence_error(p: &DMatrix<f64>, gamma: f64, steps: usize, seed: u64) -> Result<(f64, f64)> {
    let n = p.nrows();
    let mut rng = rng_from_seed(seed);
    let mut m = OccupancyMatrix::zeros(ReprKind::Sr, n, gamma);
    let mut pr = OccupancyMatrix::zeros(ReprKind::Pr, n, gamma);
    let mut s = rng.random_range(0..n);
    for t in 0..steps {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut s2 = n - 1;
        for j in 0..n {
            acc += p[(s, j)];
            if u < acc {
                s2 = j;
                break;
            }
        }
        let eta = decayed_eta(t);
        m.td_update(s, s2, false, eta);
        pr.td_update(s, s2, false, eta);
        s = s2;
    }
    let sr_err = (&m.values - analytic_sr(p, gamma)?.values).amax();
    let pr_err = (&pr.values - analytic_pr(p, gamma)?.values).amax();
    Ok((sr_err, pr_err))
}

/// Lazy random walk on a 5-cycle with an extra shortcut, used by the
/// convergence check.
pub fn five_state_chain() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            0.2, 0.5, 0.0, 0.0, 0.3, //
            0.4, 0.2, 0.4, 0.0, 0.0, //
            0.0, 0.4, 0.2, 0.4, 0.0, //
            0.0, 0.0, 0.4, 0.2, 0.4, //
            0.3, 0.0, 0.0, 0.5, 0.2,
        ],
    )
}

pub fn check_td_convergence(seeds: u64, steps: usize) -> Result<(bool, String)> {
    let p = five_state_chain();
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let (a, b) = td_convergence_error(&p, 0.9, steps, seed)?;
        worst = worst.max(a).max(b);
    }
    Ok((worst <= 0.1, format!("{seeds} seeds x {steps} steps, worst L-inf {worst:.4} (tol 0.1)")))
}

pub fn check_fr_dominance(chains: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = rng_from_seed(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..chains {
        let n = rng.random_range(2..=15);
        let p = random_ergodic_chain(n, &mut rng);
        let f = analytic_fr(&p, 0.9)?;
        let m = analytic_sr(&p, 0.9)?;
        worst = worst.max((&f.values - &m.values).max());
    }
    Ok((worst <= 1e-6, format!("{chains} chains, max(F - M) = {worst:.3e}")))
}

pub fn check_srr_laws(samples: usize, seed: u64) -> (bool, String) {
    let mut rng = rng_from_seed(seed);
    let mut violations = 0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.random_range(1..=12);
        let scale = 10f64.powi(rng.random_range(-3..=3));
        let m = OccupancyMatrix {
            kind: ReprKind::Sr,
            values: DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * scale),
            gamma: 0.95,
        };
        let t = Transition::between(rng.random_range(0..n), rng.random_range(0..n), false);
        let r = r_srr(&m, &t);
        if r > 0.0 {
            violations += 1;
        }
        worst_gap = worst_gap.max((r - (r_srr_a(&m, &t) + r_srr_b(&m, &t))).abs());
    }
    (
        violations == 0 && worst_gap <= 1e-12,
        format!("{samples} samples, {violations} positive, worst |r - (a + b)| {worst_gap:.3e}"),
    )
}

/// beta = 0 must leave every agent's trajectory identical to plain SARSA
/// (or plain linear Q-learning).
pub fn check_reduction(seed: u64) -> Result<(bool, String)> {
    let tasks = [
        ("riverswim", riverswim_spec()),
        ("sixarms", sixarms_spec()),
        ("of-small", build_grid(&GridMap::OfSmall.spec(), GridMode::Exploration)?),
    ];
    let mut failures = Vec::new();
    for (name, mdp) in &tasks {
        let base = AgentConfig::default().with_seed(seed);
        let vanilla = run_agent(&mut TabularEnv::new(mdp.clone()), &base, Budget::Steps(1500))?;
        for kind in IntrinsicKind::ALL.into_iter().filter(|k| k.is_tabular()) {
            for frozen in [false, true] {
                let mut cfg = base.with_intrinsic(kind, 0.0);
                cfg.intrinsic.frozen = frozen;
                let rec = run_agent(&mut TabularEnv::new(mdp.clone()), &cfg, Budget::Steps(1500))?;
                if !rec.same_trajectory(&vanilla) {
                    failures.push(format!("{name}/{kind}{}", if frozen { "/frozen" } else { "" }));
                }
            }
        }
    }
    let lin = |kind| LinearConfig {
        kind,
        beta: 0.0,
        seed,
        max_episode_steps: 500,
        ..LinearConfig::default()
    };
    let vanilla = linear_q_agent(&mut MountainCar::default(), &lin(IntrinsicKind::None), 3)?;
    for kind in [IntrinsicKind::Sf, IntrinsicKind::SfPf] {
        let rec = linear_q_agent(&mut MountainCar::default(), &lin(kind), 3)?;
        if !rec.same_trajectory(&vanilla) {
            failures.push(format!("mountaincar/{kind}"));
        }
    }
    let passed = failures.is_empty();
    let detail = if passed {
        "every kind matches vanilla".to_string()
    } else {
        format!("diverged: {}", failures.join(", "))
    };
    Ok((passed, detail))
}

/// Every fast suite, in a fixed order.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("reciprocity", check_reciprocity(50, seed)),
        CheckOutcome::from_result("td-convergence", check_td_convergence(5, 200_000)),
        CheckOutcome::from_result("fr-dominance", check_fr_dominance(20, seed)),
        CheckOutcome::from_result("srr-sign-decomposition", Ok(check_srr_laws(100_000, seed))),
        CheckOutcome::from_result("beta-zero-reduction", check_reduction(seed)),
    ]
}
