//! Pauli transfer representation of qubit maps.
//!
//! A qubit map `Lambda` is stored as the 4x4 real matrix
//! `F_kl = <sigma_k, Lambda[sigma_l]>` in the normalized Pauli basis. Trace
//! and Hermiticity preservation force the first row to `(1, 0, 0, 0)`, so the
//! lower-right block together with the first column encodes the affine Bloch
//! action `S -> v + V S`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{eigvals_hermitian4, fibonacci_sphere, try_invert4};
use crate::qubit::{
    bloch_to_density, density_to_bloch, hs_inner, BlochVector, DensityMatrix, Operator2,
    StateError,
};

type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("first row deviates from (1,0,0,0) by {0}")]
    InvalidFirstRow(f64),
    #[error("map is numerically singular; interval propagator undefined")]
    SingularMap,
}

/// 4x4 real Pauli transfer matrix of a trace-preserving qubit map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(Matrix4<f64>);

/// Affine Bloch action `S -> v + V S` of a transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineForm {
    pub v: Vector3<f64>,
    pub big_v: Matrix3<f64>,
}

/// Trace-one Choi state of a qubit map, built on `|psi> = (|00> + |11>)/sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiMatrix(Matrix4<C64>);

impl TransferMatrix {
    const ROW_TOL: f64 = 1e-12;

    pub fn new(f: Matrix4<f64>) -> Result<Self, MapError> {
        let defect = (f[(0, 0)] - 1.0)
            .abs()
            .max(f[(0, 1)].abs())
            .max(f[(0, 2)].abs())
            .max(f[(0, 3)].abs());
        if defect > Self::ROW_TOL {
            return Err(MapError::InvalidFirstRow(defect));
        }
        Ok(TransferMatrix(f))
    }

    /// Builds from an arbitrary matrix by resetting the first row, used by
    /// integrators to re-project accumulated round-off.
    pub fn projected(mut f: Matrix4<f64>) -> Self {
        f[(0, 0)] = 1.0;
        f[(0, 1)] = 0.0;
        f[(0, 2)] = 0.0;
        f[(0, 3)] = 0.0;
        TransferMatrix(f)
    }

    pub fn identity() -> Self {
        TransferMatrix(Matrix4::identity())
    }

    /// Completely depolarizing map: everything to the maximally mixed state.
    pub fn depolarizing() -> Self {
        let mut f = Matrix4::zeros();
        f[(0, 0)] = 1.0;
        TransferMatrix(f)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

/// Splits a transfer matrix into its affine parts `v = F[1..,0]`, `V = F[1..,1..]`.
pub fn affine_parts(f: &TransferMatrix) -> AffineForm {
    let m = f.matrix();
    AffineForm {
        v: Vector3::new(m[(1, 0)], m[(2, 0)], m[(3, 0)]),
        big_v: m.fixed_view::<3, 3>(1, 1).into_owned(),
    }
}

/// Assembles a transfer matrix from affine parts.
pub fn from_affine(aff: &AffineForm) -> TransferMatrix {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 1.0;
    for i in 0..3 {
        m[(i + 1, 0)] = aff.v[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] = aff.big_v[(i, j)];
        }
    }
    TransferMatrix(m)
}

/// Affine action on a Bloch vector, `r -> v + V r`. No physicality check.
pub fn apply_bloch(f: &TransferMatrix, r: &Vector3<f64>) -> Vector3<f64> {
    let aff = affine_parts(f);
    aff.v + aff.big_v * r
}

/// Applies the map to a state. A non-positive map can push the Bloch vector
/// outside the sphere; that surfaces as an error rather than being clamped.
pub fn apply(f: &TransferMatrix, rho: &DensityMatrix) -> Result<DensityMatrix, StateError> {
    let r = density_to_bloch(rho);
    let out = apply_bloch(f, &r.0);
    bloch_to_density(&BlochVector::new(out)?)
}

/// Map composition `F2 . F1` (apply `F1` first).
pub fn compose(f2: &TransferMatrix, f1: &TransferMatrix) -> TransferMatrix {
    // product of two valid transfer matrices keeps the first row exact
    TransferMatrix::projected(f2.matrix() * f1.matrix())
}

const MAX_COND: f64 = 1e12;

/// Interval propagator `Phi = F(t2) . F(t1)^{-1}` connecting two map snapshots.
pub fn propagator(
    f_t2: &TransferMatrix,
    f_t1: &TransferMatrix,
) -> Result<TransferMatrix, MapError> {
    let inv = try_invert4(f_t1.matrix(), MAX_COND).ok_or(MapError::SingularMap)?;
    Ok(TransferMatrix::projected(f_t2.matrix() * inv))
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        eigvals_hermitian4(&self.0)
    }
}

/// Applies the transfer matrix to an arbitrary 2x2 operator via its Pauli
/// decomposition.
fn apply_operator(f: &TransferMatrix, op: &Matrix2<C64>) -> Matrix2<C64> {
    let coeffs: Vec<C64> = (0..4)
        .map(|l| hs_inner(&Operator2::pauli(l), &Operator2(*op)))
        .collect();
    let mut out = Matrix2::zeros();
    for k in 0..4 {
        let mut amp = C64::new(0.0, 0.0);
        for (l, coeff) in coeffs.iter().enumerate() {
            amp += C64::new(f.matrix()[(k, l)], 0.0) * coeff;
        }
        out += Operator2::pauli(k).0 * amp;
    }
    out
}

/// Choi state `(Lambda x I)[|psi><psi|]` with the normalized maximally
/// entangled `|psi>`; Hermitian with unit trace.
pub fn choi(f: &TransferMatrix) -> ChoiMatrix {
    let mut c = Matrix4::<C64>::zeros();
    for m in 0..2 {
        for n in 0..2 {
            // |psi><psi| = (1/2) sum_{m,n} E_mn (x) E_mn
            let mut e = Matrix2::<C64>::zeros();
            e[(m, n)] = C64::new(1.0, 0.0);
            let block = apply_operator(f, &e) * C64::new(0.5, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    c[(2 * i + m, 2 * j + n)] += block[(i, j)];
                }
            }
        }
    }
    ChoiMatrix(c)
}

pub fn min_choi_eigenvalue(f: &TransferMatrix) -> f64 {
    choi(f).eigenvalues()[0]
}

/// Default tolerance on the minimum Choi eigenvalue; ODE-integration error
/// dominates floating-point noise at this scale.
pub const CP_TOL: f64 = 1e-9;

pub fn is_cp(f: &TransferMatrix, tol: f64) -> bool {
    min_choi_eigenvalue(f) >= -tol
}

const POSITIVITY_GRID: usize = 1000;

/// Positivity check by deterministic Fibonacci-sphere sampling of the Bloch
/// sphere image: `|v + V r| <= 1 + tol` over 1000 surface points.
pub fn is_positive(f: &TransferMatrix, tol: f64) -> bool {
    fibonacci_sphere(POSITIVITY_GRID).iter().all(|p| {
        let r = Vector3::new(p[0], p[1], p[2]);
        apply_bloch(f, &r).norm() <= 1.0 + tol
    })
}

/// Unital maps fix the maximally mixed state: zero translation column.
pub fn is_unital(f: &TransferMatrix, tol: f64) -> bool {
    let aff = affine_parts(f);
    aff.v.norm() <= tol
}

/// Transfer matrix of the conjugation `rho -> exp(-i phi sigma_z) rho exp(i phi sigma_z)`:
/// a rotation of the Bloch x-y plane by `2 phi` (x towards +y), z untouched.
pub fn dephasing_rotation(phi: f64) -> TransferMatrix {
    let (s, c) = (2.0 * phi).sin_cos();
    let mut m = Matrix4::identity();
    m[(1, 1)] = c;
    m[(1, 2)] = -s;
    m[(2, 1)] = s;
    m[(2, 2)] = c;
    TransferMatrix(m)
}

/// Max commutator defect `max_phi || U_phi F − F U_phi ||_F` over a uniform
/// phase grid on `[0, pi)`. Zero exactly for phase-covariant maps; the
/// commutator is trigonometric in `2 phi` with low harmonics, so 16 points
/// cannot alias a nonzero residual to zero. The Frobenius norm makes the
/// residual invariant under pre/post-composition with any z rotation.
pub fn phase_covariance_residual(f: &TransferMatrix, n_phi: usize) -> f64 {
    assert!(n_phi >= 4, "need at least 4 phase samples");
    (0..n_phi)
        .map(|i| {
            let phi = std::f64::consts::PI * i as f64 / n_phi as f64;
            let u = dephasing_rotation(phi);
            let comm = compose(&u, f).matrix() - compose(f, &u).matrix();
            comm.norm()
        })
        .fold(0.0, f64::max)
}

/// Default phase-grid size for [`phase_covariance_residual`].
pub const PC_RESIDUAL_GRID: usize = 16;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{population, pure_state, PureStateAngles};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn diag_map(d: [f64; 4]) -> TransferMatrix {
        let mut m = Matrix4::zeros();
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        TransferMatrix::new(m).unwrap()
    }

    #[test]
    fn rejects_bad_first_row() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 1e-6;
        assert!(matches!(
            TransferMatrix::new(m),
            Err(MapError::InvalidFirstRow(_))
        ));
    }

    #[test]
    fn affine_parts_identity_and_depolarizing() {
        let aff = affine_parts(&TransferMatrix::identity());
        assert_eq!(aff.v, Vector3::zeros());
        assert_eq!(aff.big_v, Matrix3::identity());
        let aff = affine_parts(&TransferMatrix::depolarizing());
        assert_eq!(aff.v, Vector3::zeros());
        assert_eq!(aff.big_v, Matrix3::zeros());
    }

    #[test]
    fn apply_identity_and_depolarizing() {
        let rho = pure_state(&PureStateAngles::new(1.1, 0.3).unwrap());
        let out = apply(&TransferMatrix::identity(), &rho).unwrap();
        assert!(trace_close(&out, &rho));
        let out = apply(&TransferMatrix::depolarizing(), &rho).unwrap();
        assert_abs_diff_eq!(population(&out), 0.5, epsilon = 1e-15);
    }

    fn trace_close(a: &DensityMatrix, b: &DensityMatrix) -> bool {
        crate::qubit::trace_distance(a, b) < 1e-13
    }

    #[test]
    fn dephasing_rotation_orientation() {
        // 2x2 conjugation oracle: exp(-i phi sz) sx exp(i phi sz)
        //   = cos(2 phi) sx + sin(2 phi) sy, so phi = pi/4 sends x to +y.
        let u = dephasing_rotation(PI / 4.0);
        let out = apply_bloch(&u, &Vector3::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(out.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.y, 1.0, epsilon = 1e-15);
        // oracle computed directly from the 2x2 algebra
        let phi = PI / 4.0;
        let rot = Matrix2::new(
            C64::new((-phi).cos(), (-phi).sin()),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(phi.cos(), phi.sin()),
        );
        let conj = rot * Operator2::sigma_x().0 * rot.adjoint();
        let sy_coeff = hs_inner(&Operator2::sigma_y(), &Operator2(conj));
        assert_abs_diff_eq!(sy_coeff.re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn dephasing_rotation_period() {
        for phi in [0.0, PI] {
            let u = dephasing_rotation(phi);
            assert!((u.matrix() - Matrix4::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn compose_group_law() {
        let f = dephasing_rotation(0.3);
        let c = compose(&f, &TransferMatrix::identity());
        assert!((c.matrix() - f.matrix()).abs().max() < 1e-15);
        let combined = compose(&dephasing_rotation(0.4), &dephasing_rotation(0.25));
        let direct = dephasing_rotation(0.65);
        assert!((combined.matrix() - direct.matrix()).abs().max() < 1e-14);
    }

    #[test]
    fn propagator_inverts_composition() {
        let f = dephasing_rotation(0.7);
        let p = propagator(&f, &f).unwrap();
        assert!((p.matrix() - Matrix4::identity()).abs().max() < 1e-12);
        assert_eq!(
            propagator(&f, &TransferMatrix::depolarizing()),
            Err(MapError::SingularMap)
        );
    }

    #[test]
    fn choi_identity_and_depolarizing() {
        let c = choi(&TransferMatrix::identity());
        let eigs = c.eigenvalues();
        assert_abs_diff_eq!(eigs[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.matrix().trace().re, 1.0, epsilon = 1e-14);

        let c = choi(&TransferMatrix::depolarizing());
        for e in c.eigenvalues() {
            assert_abs_diff_eq!(e, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn transpose_like_map_is_positive_not_cp() {
        // canonical NPT witness: diag(1, 1, -1, 1)
        let f = diag_map([1.0, 1.0, -1.0, 1.0]);
        assert!(is_positive(&f, 1e-6));
        assert!(!is_cp(&f, CP_TOL));
        assert!(min_choi_eigenvalue(&f) < -0.4);
    }

    #[test]
    fn unitality_check() {
        assert!(is_unital(&TransferMatrix::identity(), 1e-12));
        let mut m = Matrix4::identity();
        m[(3, 0)] = 0.2;
        m[(3, 3)] = 0.5;
        assert!(!is_unital(&TransferMatrix::new(m).unwrap(), 1e-12));
    }

    #[test]
    fn pc_residual_zero_for_pc_block_form() {
        // PC form: rotation-contraction transverse block, kappa translation
        let (s, c) = 1.234f64.sin_cos();
        let g = 0.8f64;
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = g * c;
        m[(1, 2)] = -g * s;
        m[(2, 1)] = g * s;
        m[(2, 2)] = g * c;
        m[(3, 0)] = 0.1;
        m[(3, 3)] = 0.7;
        let f = TransferMatrix::new(m).unwrap();
        assert!(phase_covariance_residual(&f, PC_RESIDUAL_GRID) < 1e-12);
        assert!(phase_covariance_residual(&dephasing_rotation(0.9), PC_RESIDUAL_GRID) < 1e-12);
    }

    proptest! {
        #[test]
        fn choi_trace_one_for_any_transfer_matrix(
            ent in proptest::array::uniform12(-1.0f64..1.0),
        ) {
            let mut m = Matrix4::zeros();
            m[(0, 0)] = 1.0;
            for (idx, v) in ent.iter().enumerate() {
                m[(1 + idx / 4, idx % 4)] = *v;
            }
            let f = TransferMatrix::new(m).unwrap();
            let tr = choi(&f).matrix().trace();
            prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
        }

        #[test]
        fn propagator_recovers_factor(
            ent in proptest::array::uniform9(-0.4f64..0.4),
            phi in 0.0f64..3.0,
        ) {
            // invertible F1 close to a rotation, arbitrary contraction F2
            let f1 = dephasing_rotation(phi);
            let mut m = Matrix4::identity();
            for (idx, v) in ent.iter().enumerate() {
                m[(1 + idx / 3, 1 + idx % 3)] += 0.5 * *v;
            }
            let f2 = TransferMatrix::new(m).unwrap();
            let combined = compose(&f2, &f1);
            let back = propagator(&combined, &f1).unwrap();
            prop_assert!((back.matrix() - f2.matrix()).abs().max() < 1e-9);
        }

        #[test]
        fn pc_residual_invariant_under_rotations(phi in 0.0f64..3.0, psi in 0.0f64..3.0) {
            let mut m = Matrix4::identity();
            m[(1, 3)] = 0.3; // NPC coupling
            m[(1, 1)] = 0.8;
            let f = TransferMatrix::new(m).unwrap();
            let base = phase_covariance_residual(&f, PC_RESIDUAL_GRID);
            let wrapped = compose(
                &dephasing_rotation(phi),
                &compose(&f, &dephasing_rotation(psi)),
            );
            let rot = phase_covariance_residual(&wrapped, PC_RESIDUAL_GRID);
            prop_assert!((base - rot).abs() < 1e-12);
        }
    }
}
