use rand::Rng;

use super::QTable;
use crate::SimRng;

/// Epsilon-greedy over an arbitrary value vector.
///
/// Draws `theta ~ U(0, 1)` first; below `epsilon` a uniform action is drawn,
/// otherwise the greedy set is formed and a tie-break index is drawn only
/// when it holds more than one action.
pub fn choose_epsilon_greedy(values: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    let theta: f64 = rng.random();
    if theta < epsilon {
        return rng.random_range(0..values.len());
    }
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..values.len()).filter(|&a| values[a] == best).collect();
    match ties.len() {
        // All NaN: fall back to a uniform draw.
        0 => rng.random_range(0..values.len()),
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    }
}

pub fn epsilon_greedy(q: &QTable, s: usize, epsilon: f64, rng: &mut SimRng) -> usize {
    let row: Vec<f64> = q.values.row(s).iter().copied().collect();
    choose_epsilon_greedy(&row, epsilon, rng)
}
