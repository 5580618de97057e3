//! Self-testing of Bob's and Charlie's devices from the three CHSH values.
//!
//! [`fidelity_lower_bound`] minimizes the swap-circuit fidelity over a
//! moment relaxation of all quantum realizations compatible with the
//! observed CHSH values.

use alloc::string::String;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::model::ModelError;

pub mod poly;
pub mod relaxation;
pub mod sdp;
pub mod swap;

pub use poly::{Poly, Word};
pub use relaxation::{
    chsh_line_polys, fidelity_lower_bound, BasisSpec, ChshMode, FidelityBound, FidelityObjective,
    MomentRelaxation, SelftestOptions,
};
pub use sdp::{solve_lmi, LmiProblem, LmiSolution, SdpStatus, SolverOptions, SparseSym};
pub use swap::{
    fidelity_to_trace_distance, swap_fidelity, swap_objective, swap_rho_data, trace_distance_to_fidelity,
    Realization,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelftestError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("observable {0} is not dichotomic")]
    NotDichotomic(String),
    #[error("index {0} out of range")]
    Index(usize),
    #[error("fidelity or distance {0} out of range")]
    Fidelity(f64),
    #[error("a realization needs six Bob and three Charlie observables")]
    Settings,
    #[error("CHSH value {value} of line {line} exceeds 2*sqrt(2)")]
    ChshOutOfRange { line: usize, value: f64 },
    #[error("CHSH values are inconsistent with any quantum realization")]
    Infeasible,
    #[error("word {0} is not a moment of the relaxation")]
    MissingMoment(String),
    #[error("SDP solver stopped: {0:?}")]
    Solver(SdpStatus),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
