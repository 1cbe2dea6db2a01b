//! Qubit open-system dynamics in the Pauli transfer representation.
//!
//! The crate propagates qubit dynamical maps generated by time-local master
//! equations (general Lindblad, phase-covariant, and a spin-boson model with
//! mixed transversal/longitudinal coupling), represents them as 4x4 real
//! transfer matrices acting on the extended Bloch vector `(1, S)`, and
//! diagnoses Markovianity (CP-divisibility, trace-distance monotonicity),
//! phase covariance, and population/coherence monotonicity.
//!
//! # Conventions
//!
//! One global convention is fixed here and used everywhere:
//!
//! * `sigma_z` eigenbasis with `|1>` the **+z** eigenstate and `|0>` the
//!   −z eigenstate, so `population(rho) = <1|rho|1> = (1 + S_z)/2` and
//!   `coherence(rho) = <1|rho|0> = (S_x − i S_y)/2`.
//! * Free precession at `omega_0 > 0` rotates the Bloch x axis towards +y,
//!   as fixed by the conjugation `exp(−i phi sigma_z) sigma_x exp(i phi sigma_z)
//!   = cos(2 phi) sigma_x + sin(2 phi) sigma_y`.
//!
//! All quantities are dimensionless with `hbar = 1`.

pub mod diagnostics;
pub mod generators;
pub mod linalg;
pub mod mimicry;
pub mod propagation;
pub mod qubit;
pub mod scenario;
pub mod transfer;

pub use qubit::{
    coherence, population, trace_distance, BlochVector, DensityMatrix, Operator2, PureStateAngles,
};
pub use transfer::{AffineForm, ChoiMatrix, TransferMatrix};
