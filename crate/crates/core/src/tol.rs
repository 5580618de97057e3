//! Tolerance ladder shared by every module.
//!
//! Structural checks (hermiticity, normalization of kets, operator identities)
//! use [`STRUCTURAL`]; anything that goes through an eigensolver uses
//! [`SPECTRAL`]; quantities read back from the conic solver use [`SDP`].

/// Entrywise comparisons of exactly constructed operators.
pub const STRUCTURAL: f64 = 1e-12;
/// Eigenvalue-derived checks: PSD, trace, density predicates.
pub const SPECTRAL: f64 = 1e-10;
/// Residuals and feasibility checks on solver output.
pub const SDP: f64 = 1e-8;
/// Sum-to-one checks on behaviors.
pub const PROBABILITY: f64 = 1e-9;
