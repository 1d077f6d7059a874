//! Toolkit for superconducting qubit readout chains: coupled-resonator
//! bandpass (Purcell) filter synthesis, frequency-domain circuit
//! simulation, superconducting film modeling, coplanar-waveguide line
//! parameters, and Purcell-limited lifetime prediction.
//!
//! The pieces fit together like this:
//!
//! * [`netlist`] defines the circuit data model and a SPICE-flavored text
//!   format; it is the common currency between the other modules.
//! * [`network`] assembles the nodal admittance system for a netlist and
//!   produces S-parameters, port input admittance, and passband metrics.
//! * [`synthesis`] turns `(poles, center, bandwidth, ripple)` targets into
//!   coupling coefficients, external quality factors, and a realizable
//!   bandpass netlist.
//! * [`materials`] computes the BCS gap, Mattis-Bardeen complex
//!   conductivity, effective penetration depth, and sheet kinetic
//!   inductance of a superconducting film.
//! * [`cpw`] evaluates coplanar-waveguide line parameters by conformal
//!   mapping, with an optional kinetic-inductance correction.
//! * [`purcell`] builds readout-chain templates, evaluates
//!   admittance-based qubit lifetimes, and compares them against the
//!   dispersive-limit estimate.
//! * [`cli`] is the command-line front end used by the `purcellkit`
//!   binary.
//!
//! All solvers and analyses are pure functions of their inputs; nothing
//! here holds shared mutable state, so everything can be called
//! concurrently.

pub mod cli;
pub mod cpw;
pub mod error;
pub mod linalg;
pub mod materials;
pub mod netlist;
pub mod network;
pub mod numerics;
pub mod purcell;
pub mod si;
pub mod synthesis;
pub mod touchstone;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
