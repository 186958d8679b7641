//! Data-center topology workbench: topology model, generators, traffic
//! matrices, the concurrent-flow throughput engine and closed-form bounds.

pub mod bounds;
pub mod flow;
pub mod generators;
pub mod io;
pub mod rng;
pub mod topology;
pub mod traffic;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("infeasible degree sequence")]
    InfeasibleDegreeSequence,
    #[error("generation failed")]
    GenerationFailed,
    #[error("infeasible distribution")]
    InfeasibleDistribution,
    #[error("infeasible bias")]
    InfeasibleBias,
    #[error("infeasible overlay")]
    InfeasibleOverlay,
    #[error("invalid VL2 parameters")]
    InvalidVl2Parameters,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no valid permutation")]
    NoValidPermutation,
    #[error("no valid ToR permutation")]
    NoValidTorPermutation,
    #[error("infeasible commodity {src} -> {dst}")]
    InfeasibleCommodity { src: usize, dst: usize },
    #[error("no commodities")]
    NoCommodities,
    #[error("timeout (best throughput {best})")]
    Timeout { best: f64 },
    #[error("solver error: {0}")]
    Solver(String),
    #[error("degenerate decomposition")]
    DegenerateDecomposition,
    #[error("bracket error: load {0} fails")]
    BracketError(u64),
    #[error("invalid degree")]
    InvalidDegree,
    #[error("no flows")]
    NoFlows,
    #[error("missing cluster label for switch {0}")]
    MissingClusterLabel(usize),
    #[error("unreachable pair {0} - {1}")]
    UnreachablePair(usize, usize),
    #[error("unknown switch {0}")]
    UnknownSwitch(usize),
    #[error("unknown server {0}")]
    UnknownServer(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<dctopo_lp::LpError> for CoreError {
    fn from(e: dctopo_lp::LpError) -> Self {
        CoreError::Solver(e.to_string())
    }
}
