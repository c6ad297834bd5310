use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("MDP table parse error at line {line}: {msg}")]
    MdpParse { line: usize, msg: String },

    #[error("grid cell (row {row}, col {col}): {msg}")]
    GridCell { row: usize, col: usize, msg: String },

    #[error("grid map: {0}")]
    GridMap(String),

    #[error("goal schedule is empty")]
    EmptySchedule,

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("linear system (I - gamma P) is singular")]
    Singular,

    #[error("budget must be positive")]
    EmptyBudget,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("goal cell is unreachable from the start cell")]
    UnreachableGoal,

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
