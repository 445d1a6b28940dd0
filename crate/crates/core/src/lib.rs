//! Simulation and circuit compilation for hybrid resonator-qubit quantum simulators.
//!
//! Boson-coupled spin and fermion models are lowered to Trotterized circuits built
//! from Jaynes-Cummings gates, routed through swap networks on a qubit chain with one
//! resonator per qubit, and simulated exactly as pure states or under a Lindblad
//! noise model.
//!
//! Modules, bottom up:
//!
//! * [`hilbert`]: registers, operators, states, exact propagators.
//! * [`gateset`]: gate primitives, composite decompositions, circuits, simulation.
//! * [`models`]: system-boson model presets and frames.
//! * [`compiler`]: Trotter steps, swap networks, metrics, encoding costs.
//! * [`noise`]: Lindblad evolution, noisy gates, effective noise, spectral functions.
//! * [`analysis`]: Trotter-error operators, observables, manifold demonstrations.
//! * [`cli`]: configuration-driven experiment runner.

pub mod analysis;
pub mod cli;
pub mod compiler;
pub mod error;
pub mod gateset;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod noise;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, OpKind, OperatorSum, QuantumState, Register, SiteKind};
pub use linalg::{CMatrix, CVector, C64};
