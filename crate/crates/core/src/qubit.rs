//! Qubit states, Pauli algebra and the basic observables.
//!
//! Convention (fixed crate-wide, see the crate docs): the computational basis
//! is ordered so that `|1>` is the +z eigenstate of `sigma_z` (matrix index 0)
//! and `|0>` the −z eigenstate (matrix index 1). Hence
//! `population = <1|rho|1> = (1 + S_z)/2` and
//! `coherence = <1|rho|0> = (S_x − i S_y)/2`.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::eigvals_hermitian2;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("Bloch vector has norm {0} > 1")]
    UnphysicalBloch(f64),
    #[error("matrix is not Hermitian (max asymmetry {0})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),
    #[error("angles out of range: theta={theta}, phi={phi}")]
    AnglesOutOfRange { theta: f64, phi: f64 },
}

/// A general 2x2 operator. Hermiticity is checkable, not enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2(pub Matrix2<C64>);

impl Operator2 {
    pub fn identity() -> Self {
        Operator2(Matrix2::identity())
    }

    pub fn sigma_x() -> Self {
        Operator2(Matrix2::new(ZERO, ONE, ONE, ZERO))
    }

    pub fn sigma_y() -> Self {
        Operator2(Matrix2::new(ZERO, -I, I, ZERO))
    }

    pub fn sigma_z() -> Self {
        Operator2(Matrix2::new(ONE, ZERO, ZERO, -ONE))
    }

    /// Pauli basis element by index 0..3 (identity, x, y, z).
    pub fn pauli(k: usize) -> Self {
        match k {
            0 => Self::identity(),
            1 => Self::sigma_x(),
            2 => Self::sigma_y(),
            3 => Self::sigma_z(),
            _ => panic!("pauli index {k} out of range"),
        }
    }

    /// Raising operator `|1><0|` (towards the +z eigenstate).
    pub fn sigma_plus() -> Self {
        Operator2(Matrix2::new(ZERO, ONE, ZERO, ZERO))
    }

    /// Lowering operator `|0><1|`.
    pub fn sigma_minus() -> Self {
        Operator2(Matrix2::new(ZERO, ZERO, ONE, ZERO))
    }

    /// Mixed-angle jump operator `cos(vartheta) sigma_x + sin(vartheta) sigma_z`.
    pub fn sigma_bar(vartheta: f64) -> Self {
        let (s, c) = vartheta.sin_cos();
        Operator2(Self::sigma_x().0 * C64::new(c, 0.0) + Self::sigma_z().0 * C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Operator2(self.0.adjoint())
    }

    /// Max absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Hilbert-Schmidt inner product `<a, b> = tr(a^dag b) / 2`.
///
/// Normalized so the Pauli basis is orthonormal.
pub fn hs_inner(a: &Operator2, b: &Operator2) -> C64 {
    (a.0.adjoint() * b.0).trace() * C64::new(0.5, 0.0)
}

/// A valid qubit density matrix (Hermitian, unit trace, positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix2<C64>);

impl DensityMatrix {
    const TOL: f64 = 1e-12;

    pub fn new(m: Matrix2<C64>) -> Result<Self, StateError> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > Self::TOL {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TOL || tr.im.abs() > Self::TOL {
            return Err(StateError::TraceNotOne(tr.re));
        }
        let [lo, _] = eigvals_hermitian2(&m);
        if lo < -Self::TOL {
            return Err(StateError::NegativeEigenvalue(lo));
        }
        Ok(DensityMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix2::identity() * C64::new(0.5, 0.0))
    }

    /// `|1><1|`, the +z pole.
    pub fn excited() -> Self {
        pure_state(&PureStateAngles::new(0.0, 0.0).unwrap())
    }

    /// `|0><0|`, the −z pole.
    pub fn ground() -> Self {
        pure_state(&PureStateAngles::new(std::f64::consts::PI, 0.0).unwrap())
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

/// Bloch vector `r` with `rho = (1 + r.sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub Vector3<f64>);

impl BlochVector {
    const TOL: f64 = 1e-12;

    pub fn new(r: Vector3<f64>) -> Result<Self, StateError> {
        let n = r.norm();
        if n > 1.0 + Self::TOL {
            return Err(StateError::UnphysicalBloch(n));
        }
        Ok(BlochVector(r))
    }
}

/// Spherical angles of a pure state: `theta` from the +z pole, `phi` the
/// azimuth of the transverse component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateAngles {
    pub theta: f64,
    pub phi: f64,
}

impl PureStateAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self, StateError> {
        if !(0.0..=std::f64::consts::PI).contains(&theta)
            || !(0.0..2.0 * std::f64::consts::PI).contains(&phi)
        {
            return Err(StateError::AnglesOutOfRange { theta, phi });
        }
        Ok(PureStateAngles { theta, phi })
    }

    /// Wraps `phi` into `[0, 2 pi)` and clamps `theta` into `[0, pi]`.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        let phi = phi.rem_euclid(tau);
        let theta = theta.clamp(0.0, std::f64::consts::PI);
        PureStateAngles { theta, phi }
    }
}

/// Pure state `rho = [1 + sin(theta)(cos(phi) sx + sin(phi) sy) + cos(theta) sz] / 2`.
pub fn pure_state(angles: &PureStateAngles) -> DensityMatrix {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    bloch_to_density(&BlochVector(Vector3::new(st * cp, st * sp, ct)))
        .expect("unit Bloch vector is always physical")
}

/// `rho = (1 + r.sigma) / 2`.
pub fn bloch_to_density(r: &BlochVector) -> Result<DensityMatrix, StateError> {
    let n = r.0.norm();
    if n > 1.0 + BlochVector::TOL {
        return Err(StateError::UnphysicalBloch(n));
    }
    let m = (Operator2::identity().0
        + Operator2::sigma_x().0 * C64::new(r.0.x, 0.0)
        + Operator2::sigma_y().0 * C64::new(r.0.y, 0.0)
        + Operator2::sigma_z().0 * C64::new(r.0.z, 0.0))
        * C64::new(0.5, 0.0);
    // the closed form is Hermitian and unit trace; eigenvalues (1 ± |r|)/2
    Ok(DensityMatrix(m))
}

/// `r_k = tr(sigma_k rho)`.
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    let comp = |k: usize| (Operator2::pauli(k).0 * rho.0).trace().re;
    BlochVector(Vector3::new(comp(1), comp(2), comp(3)))
}

/// Trace distance `d = ||rho1 − rho2||_1 / 2`, via the closed-form 2x2 spectrum.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    let delta = rho1.0 - rho2.0;
    let [lo, hi] = eigvals_hermitian2(&delta);
    0.5 * (lo.abs() + hi.abs())
}

/// Population `<1|rho|1> = (1 + S_z)/2` under the crate convention.
pub fn population(rho: &DensityMatrix) -> f64 {
    rho.0[(0, 0)].re
}

/// Coherence `<1|rho|0> = (S_x − i S_y)/2`.
pub fn coherence(rho: &DensityMatrix) -> C64 {
    rho.0[(0, 1)]
}
