//! Occupancy representations: successor (SR), first-occupancy (FR) and
//! predecessor (PR) matrices, learned online or computed in closed form.

mod analytic;
mod td;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::DMatrix;

pub use analytic::{
    analytic_fr, analytic_pr, analytic_sr, is_irreducible, retrospective_transition,
    stationary_distribution, StationaryDistribution, POWER_ITERATION_CAP, STATIONARY_TOL,
};
pub use td::{fr_td_update, pr_td_update, sr_td_update};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprKind {
    Sr,
    Fr,
    Pr,
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReprKind::Sr => "SR",
            ReprKind::Fr => "FR",
            ReprKind::Pr => "PR",
        })
    }
}

impl FromStr for ReprKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SR" => Ok(ReprKind::Sr),
            "FR" => Ok(ReprKind::Fr),
            "PR" => Ok(ReprKind::Pr),
            other => Err(Error::Config(format!("unknown representation kind `{other}`"))),
        }
    }
}

/// Dense `n x n` occupancy matrix tagged with its kind and discount.
///
/// SR rows index the origin state, PR columns index the current state
/// (`N[s~, s']` is the discounted occupancy of `s~` looking back from `s'`).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMatrix {
    pub kind: ReprKind,
    pub values: DMatrix<f64>,
    pub gamma: f64,
}

impl OccupancyMatrix {
    pub fn zeros(kind: ReprKind, n_states: usize, gamma: f64) -> Self {
        OccupancyMatrix {
            kind,
            values: DMatrix::zeros(n_states, n_states),
            gamma,
        }
    }

    pub fn n_states(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[(from, to)]
    }

    /// `||X[s, :]||_1`
    pub fn row_l1(&self, s: usize) -> f64 {
        self.values.row(s).iter().map(|v| v.abs()).sum()
    }

    /// `||X[:, s]||_1`
    pub fn col_l1(&self, s: usize) -> f64 {
        self.values.column(s).iter().map(|v| v.abs()).sum()
    }

    /// Apply the TD rule matching this matrix's kind.
    pub fn td_update(&mut self, s: usize, s_next: usize, done: bool, eta: f64) {
        let t = crate::envs::Transition::between(s, s_next, done);
        match self.kind {
            ReprKind::Sr => sr_td_update(self, &t, eta),
            ReprKind::Fr => fr_td_update(self, &t, eta),
            ReprKind::Pr => pr_td_update(self, &t, eta),
        }
    }

    /// Row-major CSV preceded by a `kind,gamma` header record.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["kind", &self.kind.to_string(), "gamma", &self.gamma.to_string()])?;
        for row in self.values.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = r.records();
        let header = records
            .next()
            .ok_or_else(|| Error::Config("empty occupancy CSV".into()))??;
        if header.len() != 4 || &header[0] != "kind" || &header[2] != "gamma" {
            return Err(Error::Config("occupancy CSV header must be `kind,<K>,gamma,<g>`".into()));
        }
        let kind: ReprKind = header[1].parse()?;
        let gamma: f64 = header[3]
            .parse()
            .map_err(|_| Error::Config("bad gamma in occupancy CSV".into()))?;
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec?;
            let row: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse).collect();
            rows.push(row.map_err(|_| Error::Config("non-numeric occupancy entry".into()))?);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("occupancy CSV is not square".into()));
        }
        let values = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(OccupancyMatrix { kind, values, gamma })
    }
}
