//! Small dense linear-algebra helpers shared across the crate: closed-form
//! Hermitian 2x2 spectra, a 4x4 Hermitian eigensolver via the real symmetric
//! embedding, and a scaling-and-squaring matrix exponential.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;

/// Eigenvalues of a Hermitian 2x2 matrix in closed form (ascending order).
///
/// Uses the trace/determinant formula so the result is exact to machine
/// precision; the imaginary parts of the diagonal are ignored.
pub fn eigvals_hermitian2(m: &Matrix2<Complex64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mid - rad, mid + rad]
}

/// Eigenvalues of a Hermitian 4x4 matrix, ascending.
///
/// The complex matrix `H = X + iY` is embedded as the real symmetric
/// `[[X, -Y], [Y, X]]`, whose spectrum is that of `H` with every eigenvalue
/// doubled; the duplicates are dropped by taking every other entry.
pub fn eigvals_hermitian4(m: &Matrix4<Complex64>) -> [f64; 4] {
    let mut embed = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i + 4, j + 4)] = z.re;
            embed[(i, j + 4)] = -z.im;
            embed[(i + 4, j)] = z.im;
        }
    }
    let eig = embed.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [vals[0], vals[2], vals[4], vals[6]]
}

/// Matrix exponential of a real 4x4 matrix by scaling and squaring with a
/// Taylor evaluation of the scaled exponential.
///
/// The matrix is scaled so its infinity norm is below 1/2; 24 Taylor terms
/// then leave a truncation error far below 1e-15.
pub fn expm4(a: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s as i32);
    let mut term = Matrix4::identity();
    let mut sum = Matrix4::identity();
    for k in 1..=24 {
        term = (term * scaled) / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Inverse of a 4x4 real matrix, `None` if the condition-number guard trips.
///
/// The guard compares the infinity norms of the matrix and its inverse; maps
/// with `cond > max_cond` are reported as singular.
pub fn try_invert4(a: &Matrix4<f64>, max_cond: f64) -> Option<Matrix4<f64>> {
    let inv = a.try_inverse()?;
    let norm = |m: &Matrix4<f64>| {
        m.row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    if norm(a) * norm(&inv) > max_cond {
        return None;
    }
    Some(inv)
}

/// Deterministic Fibonacci lattice of `n` unit vectors covering the sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C;

    #[test]
    fn hermitian2_closed_form() {
        let m = Matrix2::new(
            C::new(1.0, 0.0),
            C::new(0.3, -0.4),
            C::new(0.3, 0.4),
            C::new(-1.0, 0.0),
        );
        let [lo, hi] = eigvals_hermitian2(&m);
        // trace and determinant recovered
        assert_abs_diff_eq!(lo + hi, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lo * hi, -1.0 - 0.25, epsilon = 1e-14);
    }

    #[test]
    fn hermitian4_diagonal() {
        let mut m = Matrix4::<C>::zeros();
        for (i, v) in [0.5, -0.25, 0.0, 0.75].iter().enumerate() {
            m[(i, i)] = C::new(*v, 0.0);
        }
        let vals = eigvals_hermitian4(&m);
        assert_abs_diff_eq!(vals[0], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[3], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn expm_rotation_block() {
        // generator of a rotation in the (x, y) plane
        let mut l = Matrix4::<f64>::zeros();
        let w = 2.0;
        l[(1, 2)] = -w;
        l[(2, 1)] = w;
        let t = 0.7;
        let e = expm4(&(l * t));
        assert_abs_diff_eq!(e[(1, 1)], (w * t).cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(2, 1)], (w * t).sin(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(3, 3)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_semigroup_property() {
        let l = Matrix4::new(
            0.0, 0.0, 0.0, 0.0, 0.1, -1.2, 3.0, 0.2, -0.4, 0.9, -0.3, 0.0, 0.2, 0.0, 0.1, -2.0,
        );
        let a = expm4(&(l * 0.4)) * expm4(&(l * 0.6));
        let b = expm4(&l);
        assert!((a - b).abs().max() < 1e-12);
    }

    #[test]
    fn invert_guard() {
        assert!(try_invert4(&Matrix4::identity(), 1e12).is_some());
        let mut sing = Matrix4::zeros();
        sing[(0, 0)] = 1.0;
        assert!(try_invert4(&sing, 1e12).is_none());
    }

    #[test]
    fn sphere_points_are_unit() {
        for p in fibonacci_sphere(100) {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
    }
}
