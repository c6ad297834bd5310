//! Closed-form occupancy matrices for a fixed policy-induced chain.

use nalgebra::{DMatrix, DVector};

use super::{OccupancyMatrix, ReprKind};
use crate::{Error, Result};

/// Iteration cap for the stationary-distribution solver.
pub const POWER_ITERATION_CAP: usize = 1_000_000;
/// L1 change between successive iterates at which the solver stops.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Long-run state occupancy `z` of a chain, `z P = z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub z: DVector<f64>,
}

impl StationaryDistribution {
    /// `diag(z)`
    pub fn diag(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.z)
    }
}

fn check_square(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() || p.nrows() == 0 {
        return Err(Error::InvalidMdp("transition matrix must be square and non-empty".into()));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Config(format!("discount {gamma} must lie in [0, 1)")));
    }
    Ok(())
}

/// `M = (I - gamma P)^-1`
pub fn analytic_sr(p: &DMatrix<f64>, gamma: f64) -> Result<OccupancyMatrix> {
    check_square(p)?;
    check_gamma(gamma)?;
    Ok(OccupancyMatrix {
        kind: ReprKind::Sr,
        values: discounted_inverse(p, gamma)?,
        gamma,
    })
}

/// First-occupancy matrix `F[i, j] = E[gamma^T(i -> j)]`.
///
/// By the strong Markov property every visit count to `j` factors through
/// the first hit, so `M[i, j] = F[i, j] * M[j, j]`.
pub fn analytic_fr(p: &DMatrix<f64>, gamma: f64) -> Result<OccupancyMatrix> {
    let m = analytic_sr(p, gamma)?;
    let n = p.nrows();
    let values = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (m.values[(i, j)] / m.values[(j, j)]).clamp(0.0, 1.0)
        }
    });
    Ok(OccupancyMatrix {
        kind: ReprKind::Fr,
        values,
        gamma,
    })
}

/// Retrospective chain `P~[i, j] = P[i, j] z[i] / z[j]`, i.e.
/// `diag(z) P diag(z)^-1`. Columns of `P~` sum to one.
pub fn retrospective_transition(p: &DMatrix<f64>, z: &StationaryDistribution) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::from_fn(n, n, |i, j| p[(i, j)] * z.z[i] / z.z[j])
}

/// `N = (I - gamma P~)^-1`, which satisfies `N diag(z) = diag(z) M`.
pub fn analytic_pr(p: &DMatrix<f64>, gamma: f64) -> Result<OccupancyMatrix> {
    check_gamma(gamma)?;
    let z = stationary_distribution(p)?;
    let reversed = retrospective_transition(p, &z);
    Ok(OccupancyMatrix {
        kind: ReprKind::Pr,
        values: discounted_inverse(&reversed, gamma)?,
        gamma,
    })
}

fn discounted_inverse(p: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    let n = p.nrows();
    let system = DMatrix::identity(n, n) - p * gamma;
    system.try_inverse().ok_or(Error::Singular)
}

/// Every state reaches every other through positive-probability edges.
pub fn is_irreducible(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { p[(i, j)] } else { p[(j, i)] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|v| v)
    };
    reach(true) && reach(false)
}

/// Stationary distribution by power iteration on the lazy chain
/// `(I + P) / 2`, which shares `z` with `P` and is aperiodic whenever `P` is
/// irreducible.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<StationaryDistribution> {
    check_square(p)?;
    let n = p.nrows();
    if !is_irreducible(p) {
        return Err(Error::NotErgodic(
            "chain is reducible, so its stationary distribution is not unique".into(),
        ));
    }
    let pt = p.transpose();
    let mut z = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..POWER_ITERATION_CAP {
        let mut next = (&pt * &z + &z) * 0.5;
        let total = next.sum();
        next /= total;
        let change = (&next - &z).lp_norm(1);
        z = next;
        if change < STATIONARY_TOL {
            return Ok(StationaryDistribution { z });
        }
    }
    Err(Error::NotErgodic(format!(
        "power iteration did not converge within {POWER_ITERATION_CAP} iterations"
    )))
}
