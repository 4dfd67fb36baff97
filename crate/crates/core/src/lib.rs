//! Mean-field toolkit for tunnel-coupled annular condensates.
//!
//! The crate covers four pieces that build on each other:
//!
//! * [`ring_model`]: dimensionless two-ring parameters and the uniform
//!   symmetric / antisymmetric stationary states.
//! * [`spectra`]: Bogoliubov frequencies around those states, both in closed
//!   form and from the explicit 4x4 linearization, plus stability scans.
//! * [`ring_dynamics`]: split-step propagation of the coupled ring equations
//!   with observables and growth-rate fitting.
//! * [`double_well`]: parity-resolved stationary states of the 1D quartic
//!   double well and the splitting `E_A - E_S` as a function of interaction.
//!
//! Data-parallel loops (stability maps, sweeps over independent curves) go
//! through [`parallel::Execution`]; with the `parallel` feature disabled every
//! path runs sequentially and produces identical output.

pub mod double_well;
pub mod error;
pub mod parallel;
pub mod ring_dynamics;
pub mod ring_model;
pub mod spectra;
pub mod tridiagonal;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use ring_model::{CouplingSign, Parity, RingParams, UniformState};
