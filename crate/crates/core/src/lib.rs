//! Numerical laboratory for a charged one-dimensional harmonic oscillator
//! driven by a classical electric field, solved independently in the
//! Schrödinger and Heisenberg pictures.
//!
//! * [`model`]: oscillator constants, drive models, time grids.
//! * [`classical`]: the c-number trajectory q_c(t).
//! * [`schrodinger`]: grid wavefunctions and split-step propagation.
//! * [`heisenberg`]: truncated-Fock operator evolution.
//! * [`lab`]: scenario runner, equivalence verdicts and the flawed
//!   "⟨x̂_H²⟩ = q_c²" diagnostic.
//! * [`config`], [`export`], [`sweep`]: run configuration, artifacts, sweeps.

pub mod classical;
pub mod config;
pub mod convergence;
pub mod error;
pub mod export;
pub mod heisenberg;
pub mod lab;
pub mod model;
pub mod schrodinger;
pub mod sweep;

pub use error::{Error, Result};
