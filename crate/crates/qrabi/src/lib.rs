//! Steady states and phonon-counting statistics of a trapped clock-transition
//! atom whose motion couples to its internal state through a
//! position-dependent drive — a generalized quantum Rabi model with three
//! Lindblad dissipation channels.
//!
//! The crate builds operators on a truncated `Fock ⊗ spin-1/2` space,
//! diagonalizes the coupled Hamiltonian, solves the master equation for its
//! steady state, and evaluates the generalized phonon correlation functions
//! `g_n^(k)` that certify single-phonon blockade and n-phonon bundle
//! emission.
//!
//! Entry points by task:
//! - [`fockspace`]: truncated-space operators and their algebra.
//! - [`model`]: the Hamiltonian in both frames and the lab-to-model mapping.
//! - [`spectrum`]: dressed-state energies, branch tracking, resonance finding.
//! - [`dynamics`]: Liouvillian assembly, steady state, propagation.
//! - [`observables`]: phonon statistics and correlation functions.
//! - [`sweeps`]: deterministic parameter-grid runs with CSV/JSON output.
//! - [`verify`]: the built-in invariant suite.
//!
//! The `examples/` directory holds one runnable program per capability; the
//! `qrabi` binary exposes the same functionality as subcommands.

pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use fockspace::{Axis, Operator, Spin, Truncation};
pub use model::{ModelParams, PhysicalParams};
