use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::{Error, Result};

const PROB_TOL: f64 = 1e-12;

/// A finite MDP: dense transition and reward tensors, start distribution and
/// terminal set.
///
/// Tensors are stored flat in `[s][a][s']` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMdpSpec {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    start_dist: Vec<f64>,
    terminals: BTreeSet<usize>,
}

impl DiscreteMdpSpec {
    /// Assemble and validate an MDP.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        start_dist: Vec<f64>,
        terminals: BTreeSet<usize>,
    ) -> Result<Self> {
        let mdp = DiscreteMdpSpec {
            n_states,
            n_actions,
            transition,
            reward,
            start_dist,
            terminals,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = (self.n_states, self.n_actions);
        if n == 0 || m == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        if self.transition.len() != n * m * n || self.reward.len() != n * m * n {
            return Err(Error::InvalidMdp("tensor shape does not match n_states/n_actions".into()));
        }
        if self.start_dist.len() != n {
            return Err(Error::InvalidMdp("start distribution has the wrong length".into()));
        }
        for s in 0..n {
            for a in 0..m {
                check_prob_vector(self.transition(s, a))
                    .map_err(|e| Error::InvalidMdp(format!("P[{s}][{a}]: {e}")))?;
            }
        }
        check_prob_vector(&self.start_dist)
            .map_err(|e| Error::InvalidMdp(format!("start distribution: {e}")))?;
        if let Some(&t) = self.terminals.iter().find(|&&t| t >= n) {
            return Err(Error::InvalidMdp(format!("terminal state {t} out of range")));
        }
        if self.reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidMdp("non-finite reward".into()));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Next-state distribution `P[s][a]`.
    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.reward[(s * self.n_actions + a) * self.n_states + s_next]
    }

    pub fn start_dist(&self) -> &[f64] {
        &self.start_dist
    }

    pub fn terminals(&self) -> &BTreeSet<usize> {
        &self.terminals
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminals.contains(&s)
    }

    /// Copy of this MDP that always starts in `state`.
    pub fn with_start(&self, state: usize) -> Result<Self> {
        if state >= self.n_states {
            return Err(Error::InvalidMdp(format!("start state {state} out of range")));
        }
        let mut start = vec![0.0; self.n_states];
        start[state] = 1.0;
        Ok(DiscreteMdpSpec {
            start_dist: start,
            ..self.clone()
        })
    }

    /// Expected immediate reward `sum_s' P[s][a][s'] R[s][a][s']`.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        self.transition(s, a)
            .iter()
            .enumerate()
            .map(|(next, p)| p * self.reward(s, a, next))
            .sum()
    }

    /// State-to-state matrix induced by `policy[s][a]`. Terminal states are
    /// made absorbing.
    pub fn marginal_transition(&self, policy: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
        let n = self.n_states;
        let mut p = DMatrix::zeros(n, n);
        for s in 0..n {
            if self.is_terminal(s) {
                p[(s, s)] = 1.0;
                continue;
            }
            for a in 0..self.n_actions {
                let w = policy(s, a);
                if w == 0.0 {
                    continue;
                }
                for (next, prob) in self.transition(s, a).iter().enumerate() {
                    p[(s, next)] += w * prob;
                }
            }
        }
        p
    }

    /// Marginal transition matrix of the uniform random-walk policy.
    pub fn random_walk_matrix(&self) -> DMatrix<f64> {
        let w = 1.0 / self.n_actions as f64;
        self.marginal_transition(|_, _| w)
    }

    /// Parse the plain-text table format.
    ///
    /// ```text
    /// states 6
    /// actions 2
    /// start 1 0.5
    /// terminal 3
    /// # s a s' p r
    /// 0 0 0 1.0 5
    /// ```
    ///
    /// Unlisted `(s, a, s')` triples have probability and reward zero.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut n_states = None;
        let mut n_actions = None;
        let mut starts = Vec::new();
        let mut terminals = BTreeSet::new();
        let mut rows = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::MdpParse {
                line: line_no,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "states" | "actions" => {
                    let v: usize = fields
                        .get(1)
                        .and_then(|f| f.parse().ok())
                        .ok_or_else(|| err("expected a count"))?;
                    if fields[0] == "states" {
                        n_states = Some(v);
                    } else {
                        n_actions = Some(v);
                    }
                }
                "start" => {
                    if fields.len() != 3 {
                        return Err(err("expected `start <state> <probability>`"));
                    }
                    let s: usize = fields[1].parse().map_err(|_| err("bad state"))?;
                    let p: f64 = fields[2].parse().map_err(|_| err("bad probability"))?;
                    starts.push((s, p, line_no));
                }
                "terminal" => {
                    for f in &fields[1..] {
                        terminals.insert(f.parse().map_err(|_| err("bad terminal state"))?);
                    }
                }
                _ => {
                    if fields.len() != 5 {
                        return Err(err("expected `s a s' p r`"));
                    }
                    let s: usize = fields[0].parse().map_err(|_| err("bad state"))?;
                    let a: usize = fields[1].parse().map_err(|_| err("bad action"))?;
                    let s2: usize = fields[2].parse().map_err(|_| err("bad next state"))?;
                    let p: f64 = fields[3].parse().map_err(|_| err("bad probability"))?;
                    let r: f64 = fields[4].parse().map_err(|_| err("bad reward"))?;
                    rows.push((s, a, s2, p, r, line_no));
                }
            }
        }

        let n = n_states.ok_or(Error::MdpParse { line: 0, msg: "missing `states`".into() })?;
        let m = n_actions.ok_or(Error::MdpParse { line: 0, msg: "missing `actions`".into() })?;
        let mut transition = vec![0.0; n * m * n];
        let mut reward = vec![0.0; n * m * n];
        for (s, a, s2, p, r, line) in rows {
            if s >= n || a >= m || s2 >= n {
                return Err(Error::MdpParse { line, msg: "index out of range".into() });
            }
            let idx = (s * m + a) * n + s2;
            transition[idx] += p;
            reward[idx] = r;
        }
        let mut start_dist = vec![0.0; n];
        for (s, p, line) in starts {
            if s >= n {
                return Err(Error::MdpParse { line, msg: "start state out of range".into() });
            }
            start_dist[s] += p;
        }
        DiscreteMdpSpec::new(n, m, transition, reward, start_dist, terminals)
    }

    /// Render in the plain-text table format; only nonzero-probability rows
    /// are listed.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {}", self.n_states);
        let _ = writeln!(out, "actions {}", self.n_actions);
        for (s, &p) in self.start_dist.iter().enumerate() {
            if p > 0.0 {
                let _ = writeln!(out, "start {s} {p}");
            }
        }
        if !self.terminals.is_empty() {
            let list: Vec<String> = self.terminals.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(out, "terminal {}", list.join(" "));
        }
        out.push_str("# s a s' p r\n");
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                for (s2, &p) in self.transition(s, a).iter().enumerate() {
                    if p > 0.0 {
                        let _ = writeln!(out, "{s} {a} {s2} {p} {}", self.reward(s, a, s2));
                    }
                }
            }
        }
        out
    }
}

fn check_prob_vector(v: &[f64]) -> std::result::Result<(), String> {
    if let Some(p) = v.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(format!("entry {p} is not a probability"));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(format!("sums to {sum}, not 1"));
    }
    Ok(())
}

/// Sample an index from a probability vector with one uniform draw.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
