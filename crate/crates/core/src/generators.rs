//! Time-dependent generator matrices for the three master-equation families:
//! general time-local Lindblad form, phase-covariant, and the spin-boson
//! model with mixed transversal/longitudinal coupling, plus the
//! state-dependent rates of the mimicry construction.
//!
//! A generator is rendered as a 4x4 real matrix `L` acting on the extended
//! Bloch vector, `d/dt (1, S)^T = L (1, S)^T`, so affine (pumping) terms are
//! linear and the map equation `d/dt F = L(t) F` is a single linear ODE.

use std::sync::Arc;

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

use crate::qubit::{hs_inner, Operator2};

type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("Hamiltonian is not Hermitian (defect {0})")]
    NonHermitianHamiltonian(f64),
    #[error("cutoff frequency required for the finite-cutoff rate")]
    MissingCutoff,
}

/// A scalar function of time, optionally carrying its analytic integral
/// `(a, b) -> int_a^b f`. Evaluation is pure and reentrant.
#[derive(Clone)]
pub struct TimeFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    integral: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl TimeFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeFn {
            f: Arc::new(f),
            integral: None,
        }
    }

    pub fn with_integral(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        integral: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TimeFn {
            f: Arc::new(f),
            integral: Some(Arc::new(integral)),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_integral(move |_| c, move |a, b| c * (b - a))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// Analytic integral over `[a, b]` when available.
    pub fn analytic_integral(&self, a: f64, b: f64) -> Option<f64> {
        self.integral.as_ref().map(|g| g(a, b))
    }
}

impl std::fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeFn")
            .field("analytic_integral", &self.integral.is_some())
            .finish()
    }
}

/// 4x4 real generator acting on `(1, S)`; the first row is identically zero
/// (trace preservation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMatrix(Matrix4<f64>);

impl GeneratorMatrix {
    /// Zeroes the first row, discarding projection noise from the
    /// operator-space construction.
    pub fn projected(mut l: Matrix4<f64>) -> Self {
        for j in 0..4 {
            l[(0, j)] = 0.0;
        }
        GeneratorMatrix(l)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

/// Rates of a phase-covariant master equation. Negative rates are allowed
/// and meaningful: they signal non-Markovianity.
#[derive(Debug, Clone)]
pub struct PCRates {
    pub omega0: f64,
    pub lamb_shift: TimeFn,
    pub gamma_plus: TimeFn,
    pub gamma_minus: TimeFn,
    pub gamma_z: TimeFn,
}

impl PCRates {
    pub fn constant(omega0: f64, gamma_plus: f64, gamma_minus: f64, gamma_z: f64) -> Self {
        PCRates {
            omega0,
            lamb_shift: TimeFn::constant(0.0),
            gamma_plus: TimeFn::constant(gamma_plus),
            gamma_minus: TimeFn::constant(gamma_minus),
            gamma_z: TimeFn::constant(gamma_z),
        }
    }
}

/// Spin-boson model parameters; `omega_c = None` selects the infinite-cutoff
/// semigroup limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinBosonParams {
    pub omega0: f64,
    pub vartheta: f64,
    pub lambda: f64,
    pub beta: f64,
    pub omega_c: Option<f64>,
}

impl SpinBosonParams {
    /// Semigroup parameters with the noise strength given directly as the
    /// limiting rate `gamma = lambda pi / (2 beta)`.
    pub fn semigroup(omega0: f64, gamma: f64, vartheta: f64) -> Self {
        SpinBosonParams {
            omega0,
            vartheta,
            lambda: 2.0 * gamma / std::f64::consts::PI,
            beta: 1.0,
            omega_c: None,
        }
    }
}

/// One dissipator `gamma(t) (V . V^dag − {V^dag V, .}/2)`; `V` need not be
/// Hermitian.
#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub rate: TimeFn,
    pub jump: Operator2,
}

const HERM_TOL: f64 = 1e-12;

/// Builds the generator of the general time-local master equation at time `t`
/// by projecting the operator-space action onto the Pauli basis.
pub fn general_generator(
    hamiltonian: &dyn Fn(f64) -> Operator2,
    terms: &[LindbladTerm],
    t: f64,
) -> Result<GeneratorMatrix, GeneratorError> {
    let h = hamiltonian(t);
    let defect = h.hermiticity_defect();
    if defect > HERM_TOL {
        return Err(GeneratorError::NonHermitianHamiltonian(defect));
    }
    let i = C64::new(0.0, 1.0);
    let mut l = Matrix4::zeros();
    for col in 0..4 {
        let sigma = Operator2::pauli(col).0;
        let mut image = -(h.0 * sigma - sigma * h.0) * i;
        for term in terms {
            let v = term.jump.0;
            let vd = term.jump.adjoint().0;
            let anti = vd * v * sigma + sigma * (vd * v);
            image += (v * sigma * vd - anti * C64::new(0.5, 0.0)) * C64::new(term.rate.eval(t), 0.0);
        }
        for row in 0..4 {
            l[(row, col)] = hs_inner(&Operator2::pauli(row), &Operator2(image)).re;
        }
    }
    Ok(GeneratorMatrix::projected(l))
}

/// Generator of the phase-covariant master equation at time `t`.
///
/// Block structure: the transverse pair contracts at `(g+ + g- + 4 gz)/2`
/// while rotating at `omega0 + h(t)`; the longitudinal law is
/// `dS_z/dt = (g+ − g-) − (g+ + g-) S_z`.
pub fn pc_generator(rates: &PCRates, t: f64) -> GeneratorMatrix {
    let gp = rates.gamma_plus.eval(t);
    let gm = rates.gamma_minus.eval(t);
    let gz = rates.gamma_z.eval(t);
    let w = rates.omega0 + rates.lamb_shift.eval(t);
    let transverse = 0.5 * (gp + gm + 4.0 * gz);
    let mut l = Matrix4::zeros();
    l[(1, 1)] = -transverse;
    l[(1, 2)] = -w;
    l[(2, 1)] = w;
    l[(2, 2)] = -transverse;
    l[(3, 0)] = gp - gm;
    l[(3, 3)] = -(gp + gm);
    GeneratorMatrix(l)
}

/// Finite-cutoff Ohmic noise rate `gamma(t) = (lambda / beta) arctan(omega_c t)`.
pub fn ohmic_rate(p: &SpinBosonParams, t: f64) -> Result<f64, GeneratorError> {
    let omega_c = p.omega_c.ok_or(GeneratorError::MissingCutoff)?;
    Ok(p.lambda / p.beta * (omega_c * t).atan())
}

/// Infinite-cutoff limit of [`ohmic_rate`]: `gamma = lambda pi / (2 beta)`.
pub fn semigroup_rate(p: &SpinBosonParams) -> f64 {
    p.lambda * std::f64::consts::PI / (2.0 * p.beta)
}

/// Generator of the spin-boson master equation at time `t`: precession at
/// `omega0` about z plus the rank-deficient dissipator
/// `−2 gamma(t) (1 − n n^T)` with `n = (cos vartheta, 0, sin vartheta)`.
/// Unital for all parameters (high-temperature limit).
pub fn npc_generator(p: &SpinBosonParams, t: f64) -> Result<GeneratorMatrix, GeneratorError> {
    let gamma = match p.omega_c {
        Some(_) => ohmic_rate(p, t)?,
        None => semigroup_rate(p),
    };
    let (s, c) = p.vartheta.sin_cos();
    let mut l = Matrix4::zeros();
    l[(1, 2)] = -p.omega0;
    l[(2, 1)] = p.omega0;
    l[(1, 1)] += -2.0 * gamma * s * s;
    l[(1, 3)] += 2.0 * gamma * c * s;
    l[(3, 1)] += 2.0 * gamma * c * s;
    l[(2, 2)] += -2.0 * gamma;
    l[(3, 3)] += -2.0 * gamma * c * c;
    Ok(GeneratorMatrix(l))
}

/// State-dependent PC rates reproducing the transversal-noise semigroup to
/// first order in `gamma`:
/// `g+ = g- = gamma`, `gz(t) = −gamma cos(2 omega0 t + 2 phi)`,
/// `h(t) = −gamma sin(2 omega0 t + 2 phi)`. All carry analytic integrals.
pub fn mimic_pc_rates(gamma: f64, omega0: f64, phi: f64) -> PCRates {
    assert!(gamma >= 0.0, "mimic rates need gamma >= 0");
    let gz = TimeFn::with_integral(
        move |t| -gamma * (2.0 * omega0 * t + 2.0 * phi).cos(),
        move |a, b| {
            if omega0 == 0.0 {
                -gamma * (2.0 * phi).cos() * (b - a)
            } else {
                -gamma / (2.0 * omega0)
                    * ((2.0 * omega0 * b + 2.0 * phi).sin() - (2.0 * omega0 * a + 2.0 * phi).sin())
            }
        },
    );
    let h = TimeFn::with_integral(
        move |t| -gamma * (2.0 * omega0 * t + 2.0 * phi).sin(),
        move |a, b| {
            if omega0 == 0.0 {
                -gamma * (2.0 * phi).sin() * (b - a)
            } else {
                gamma / (2.0 * omega0)
                    * ((2.0 * omega0 * b + 2.0 * phi).cos() - (2.0 * omega0 * a + 2.0 * phi).cos())
            }
        },
    );
    PCRates {
        omega0,
        lamb_shift: h,
        gamma_plus: TimeFn::constant(gamma),
        gamma_minus: TimeFn::constant(gamma),
        gamma_z: gz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn pure_precession_block() {
        let w0 = 3.0;
        let ham = move |_: f64| {
            Operator2(Operator2::sigma_z().0 * C64::new(0.5 * w0, 0.0))
        };
        let l = general_generator(&ham, &[], 0.0).unwrap();
        let mut want = Matrix4::zeros();
        want[(1, 2)] = -w0;
        want[(2, 1)] = w0;
        assert!(max_abs_diff(l.matrix(), &want) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let ham = |_: f64| Operator2::sigma_plus();
        assert!(matches!(
            general_generator(&ham, &[], 0.0),
            Err(GeneratorError::NonHermitianHamiltonian(_))
        ));
    }

    #[test]
    fn decay_term_matches_operator_space_oracle() {
        // single (gamma, sigma_minus) dissipator: S_z relaxes towards -1 at
        // rate gamma, transverse decay gamma/2
        let gamma = 0.7;
        let terms = [LindbladTerm {
            rate: TimeFn::constant(gamma),
            jump: Operator2::sigma_minus(),
        }];
        let ham = |_: f64| Operator2(nalgebra::Matrix2::zeros());
        let l = general_generator(&ham, &terms, 0.0).unwrap();
        let m = l.matrix();
        assert_abs_diff_eq!(m[(3, 0)], -gamma, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(3, 3)], -gamma, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(1, 1)], -gamma / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(2, 2)], -gamma / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn general_matches_pc_generator() {
        let rates = PCRates::constant(2.0, 0.4, 0.9, 0.15);
        let w0 = rates.omega0;
        let ham = move |_: f64| Operator2(Operator2::sigma_z().0 * C64::new(0.5 * w0, 0.0));
        let terms = [
            LindbladTerm {
                rate: TimeFn::constant(0.4),
                jump: Operator2::sigma_plus(),
            },
            LindbladTerm {
                rate: TimeFn::constant(0.9),
                jump: Operator2::sigma_minus(),
            },
            LindbladTerm {
                rate: TimeFn::constant(0.15),
                jump: Operator2::sigma_z(),
            },
        ];
        let general = general_generator(&ham, &terms, 0.0).unwrap();
        let pc = pc_generator(&rates, 0.0);
        assert!(max_abs_diff(general.matrix(), pc.matrix()) < 1e-14);
    }

    #[test]
    fn general_matches_npc_generator() {
        let p = SpinBosonParams::semigroup(10.0, 1.0, PI / 3.0);
        let w0 = p.omega0;
        let vartheta = p.vartheta;
        let ham = move |_: f64| Operator2(Operator2::sigma_z().0 * C64::new(0.5 * w0, 0.0));
        let terms = [LindbladTerm {
            rate: TimeFn::constant(semigroup_rate(&p)),
            jump: Operator2::sigma_bar(vartheta),
        }];
        let general = general_generator(&ham, &terms, 0.0).unwrap();
        let npc = npc_generator(&p, 0.0).unwrap();
        assert!(max_abs_diff(general.matrix(), npc.matrix()) < 1e-14);
    }

    #[test]
    fn pc_generator_trivial_rates() {
        let rates = PCRates::constant(5.0, 0.3, 0.3, 0.0);
        let l = pc_generator(&rates, 0.0);
        let m = l.matrix();
        assert_abs_diff_eq!(m[(3, 3)], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(3, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 1)], 5.0, epsilon = 1e-15);
    }

    #[test]
    fn pc_generator_fixed_point() {
        let (gp, gm) = (0.8, 0.2);
        let rates = PCRates::constant(1.0, gp, gm, 0.0);
        let m = *pc_generator(&rates, 0.0).matrix();
        let sz_star = (gp - gm) / (gp + gm);
        // dS_z/dt = 0 at the fixed point
        assert_abs_diff_eq!(m[(3, 0)] + m[(3, 3)] * sz_star, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pc_block_structure_never_couples_transverse_to_z() {
        let rates = mimic_pc_rates(0.9, 7.0, 1.1);
        for t in [0.0, 0.3, 1.7, 4.0] {
            let m = *pc_generator(&rates, t).matrix();
            for row in [1, 2] {
                assert_eq!(m[(row, 0)], 0.0);
                assert_eq!(m[(row, 3)], 0.0);
            }
            assert_eq!(m[(3, 1)], 0.0);
            assert_eq!(m[(3, 2)], 0.0);
        }
    }

    #[test]
    fn ohmic_rate_values() {
        let p = SpinBosonParams {
            omega0: 1.0,
            vartheta: 0.0,
            lambda: 1.0,
            beta: 1.0,
            omega_c: Some(100.0),
        };
        assert_abs_diff_eq!(ohmic_rate(&p, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        let v = ohmic_rate(&p, 1.0).unwrap();
        assert_abs_diff_eq!(v, 100f64.atan(), epsilon = 1e-15);
        assert!(v < semigroup_rate(&p));
        // lambda = 2, beta = pi: the t -> infinity limit is 1
        let p2 = SpinBosonParams {
            lambda: 2.0,
            beta: PI,
            ..p
        };
        assert_abs_diff_eq!(ohmic_rate(&p2, 1e12).unwrap(), 1.0, epsilon = 1e-9);
        let no_cutoff = SpinBosonParams { omega_c: None, ..p };
        assert_eq!(ohmic_rate(&no_cutoff, 1.0), Err(GeneratorError::MissingCutoff));
    }

    #[test]
    fn semigroup_rate_closed_form() {
        let p = SpinBosonParams {
            omega0: 1.0,
            vartheta: 0.0,
            lambda: 1.0,
            beta: 1.0,
            omega_c: None,
        };
        assert_abs_diff_eq!(semigroup_rate(&p), PI / 2.0, epsilon = 1e-15);
        assert_eq!(semigroup_rate(&SpinBosonParams { lambda: 0.0, ..p }), 0.0);
        // the Fig-2-style normalization: lambda = 2/pi gives gamma = 1
        let norm = SpinBosonParams {
            lambda: 2.0 / PI,
            ..p
        };
        assert_abs_diff_eq!(semigroup_rate(&norm), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            semigroup_rate(&SpinBosonParams::semigroup(10.0, 1.0, 0.0)),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn npc_generator_special_angles() {
        // vartheta = pi/2: pure dephasing, S_z conserved
        let p = SpinBosonParams::semigroup(4.0, 0.5, PI / 2.0);
        let m = *npc_generator(&p, 0.0).unwrap().matrix();
        assert_abs_diff_eq!(m[(3, 3)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 2)], -1.0, epsilon = 1e-15);
        // vartheta = 0: purely transversal noise
        let p = SpinBosonParams::semigroup(4.0, 0.5, 0.0);
        let m = *npc_generator(&p, 0.0).unwrap().matrix();
        let mut want = Matrix4::zeros();
        want[(1, 2)] = -4.0;
        want[(2, 1)] = 4.0;
        want[(2, 2)] = -1.0;
        want[(3, 3)] = -1.0;
        assert!((m - want).abs().max() < 1e-15);
    }

    #[test]
    fn npc_generator_is_unital() {
        for vartheta in [0.0, 0.4, PI / 3.0, PI / 2.0, 2.9] {
            let p = SpinBosonParams::semigroup(10.0, 1.0, vartheta);
            let m = *npc_generator(&p, 0.0).unwrap().matrix();
            for row in 1..4 {
                assert_eq!(m[(row, 0)], 0.0);
            }
        }
    }

    #[test]
    fn mimic_rates_formulas() {
        let (gamma, w0) = (0.6, 10.0);
        // t = 0, phi = pi/2: gz = +gamma, h = 0
        let r = mimic_pc_rates(gamma, w0, PI / 2.0);
        assert_abs_diff_eq!(r.gamma_z.eval(0.0), gamma, epsilon = 1e-15);
        assert_abs_diff_eq!(r.lamb_shift.eval(0.0), 0.0, epsilon = 1e-14);
        // gz goes negative on recurring intervals for any phi
        for phi in [0.0, 0.7, 2.0] {
            let r = mimic_pc_rates(gamma, w0, phi);
            let negative = (0..200).any(|i| r.gamma_z.eval(0.02 * i as f64) < -0.5 * gamma);
            assert!(negative);
        }
        // h averages to zero over one period pi / w0
        let r = mimic_pc_rates(gamma, w0, 0.3);
        let avg = r.lamb_shift.analytic_integral(0.0, PI / w0).unwrap();
        assert_abs_diff_eq!(avg, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_integrals_match_quadrature() {
        let r = mimic_pc_rates(0.8, 6.0, 1.3);
        for f in [&r.gamma_z, &r.lamb_shift] {
            let (a, b) = (0.2, 1.9);
            let n = 20000;
            let h = (b - a) / n as f64;
            let mut sum = 0.5 * (f.eval(a) + f.eval(b));
            for i in 1..n {
                sum += f.eval(a + i as f64 * h);
            }
            sum *= h;
            assert_abs_diff_eq!(sum, f.analytic_integral(a, b).unwrap(), epsilon = 1e-8);
        }
    }
}
