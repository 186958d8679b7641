//! A self-contained linear programming engine.
//!
//! Problems are built row by row through [`Problem`], solved by a sparse
//! bounded primal simplex ([`solve`]) and can be written out in the CPLEX
//! LP text format ([`write_lp`]) for cross-checking with other solvers.
//!
//! The solver keeps a Markowitz LU factorization of the basis with
//! product-form updates, prices with Devex reference weights and uses the
//! EXPAND ratio test so that degenerate vertices, which are the norm for
//! network flow models, cannot make it cycle.

mod lp_format;
mod lu;
mod problem;
mod simplex;
mod sparse;

pub use lp_format::write_lp;
pub use problem::{Problem, RowId, Sense, Var};
pub use simplex::{solve, Basis, SolveOptions, Solution, Status};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("invalid bounds on {what} {index}: [{lower}, {upper}]")]
    InvalidBounds {
        what: &'static str,
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("non-finite coefficient in row {row}")]
    NonFiniteCoefficient { row: usize },
    #[error("warm-start basis has {got} entries, expected {expected}")]
    BasisShape { got: usize, expected: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}
