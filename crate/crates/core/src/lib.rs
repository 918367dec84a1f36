//! Simulation toolkit for linear mechanical quantum computing primitives.
//!
//! The crate models itinerant phonon wavepackets ([`temporal_mode`]), their
//! scattering on a beamsplitter ([`scatter`]), emission and capture by
//! tunable-coupler qubits ([`pulse_qubit`]), readout correction and
//! tomography ([`measure`]), independent brute-force checks ([`oracle`]) and a
//! scenario runner ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod measure;
pub mod oracle;
pub mod pulse_qubit;
pub mod scatter;
pub mod temporal_mode;

pub use error::{Error, Result};
