//! Device-independent verification of EPR steering.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. File formats and the command-line front end live in
//! `disteer-cli`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod behavior;
pub mod lhs;
pub mod linalg;
pub mod model;
pub mod protocol;
pub mod selftest;
pub mod tol;
pub mod witness;
