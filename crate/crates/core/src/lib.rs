//! Realization theory for stationary finite-alphabet stochastic processes.
//!
//! A stationary process over a finite alphabet can be presented as a
//! *quasi-realization*: a vector `tau`, a covector `pi` and one matrix per
//! symbol, with word probabilities given by `pi D(u1) ... D(ul) tau`. Such a
//! presentation carries no positivity structure. This crate implements the
//! algebra around that presentation and the question of when an equivalent
//! *quantum* presentation exists, i.e. a quantum instrument together with a
//! stationary state reproducing the same word probabilities:
//!
//! * [`process`] — quasi-realizations, word probabilities, validity checks
//!   and bounded negativity scans.
//! * [`quotient`] — accessible/observable subspaces, the quotient (minimal)
//!   realization, process order and constructive equivalence testing.
//! * [`operators`] — finite-dimensional Hermitian operator algebra:
//!   superoperators over an orthonormal Hermitian basis, Choi matrices,
//!   complete-positivity tests, quantum instruments and their
//!   coordinatization as quasi-realizations.
//! * [`reduction`] — verification of instrument realizations and the
//!   spectral sieve that turns feasibility witnesses into a proper unital
//!   instrument with a stationary state.
//! * [`cones`] — semidefinite-representable cones, their duals and level-n
//!   extensions, mapping cones of structure-preserving completely positive
//!   maps, and the end-to-end certificate for quantum realizability.
//! * [`feasibility`] — the shared semidefinite feasibility engine
//!   (alternating projections with Dykstra correction).
//! * [`learning`] — Hankel-matrix spectral reconstruction and trajectory
//!   sampling from instrument realizations.
//! * [`catalog`] — built-in example processes and realizations used by the
//!   test suite and the command line tool.

pub mod catalog;
pub mod cones;
pub mod encode;
pub mod error;
pub mod feasibility;
pub mod learning;
pub mod linalg;
pub mod operators;
pub mod process;
pub mod quotient;
pub mod reduction;

pub use error::Error;

/// Default relative tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default singular-value threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
