//! Steady-state photon blockade in a driven Kerr cavity with an optical
//! parametric amplifier.
//!
//! The crate solves the Lindblad master equation on a truncated Fock space,
//! evaluates the mean photon number and equal-time `g²(0)`, provides the
//! weak-drive two-photon amplitudes with the interference (optimal-G)
//! condition, and sweeps parameter grids, including a set of named presets.

// `!(x <= limit)` is used on purpose so that NaN lands on the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
pub use fock::{ComplexMatrix, FockSpace};
pub use model::SystemParams;
