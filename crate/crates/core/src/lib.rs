//! Collisional charging of quantum batteries by streams of qubits.
//!
//! A battery (truncated harmonic oscillator, large spin or uniform ladder)
//! exchanges single excitations with identically prepared qubits, one
//! collision at a time. The crate provides the exact collision and loss
//! channels, energy and ergotropy observables, the upper bounds that constrain
//! every incoherent protocol, and the coherent and classical charging
//! protocols that are compared against them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod bounds;
pub mod channels;
pub mod error;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod protocols;

pub use error::{Error, Result};
pub use model::{
    ladder_amplitude, qubit_density, validate_state, BatteryKind, BatteryModel, BatteryState, DensityMatrix,
    PopulationVector, QubitState, StateDiagnostics,
};
pub use observables::{RecordRow, SimulationRecord};
pub use protocols::{AdvantageOnset, GreedyObjective, Policy, RunOptions, Schedule, ScheduleStep};
