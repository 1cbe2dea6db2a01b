//! Transfer-matrix trajectories: numerical integration of `d/dt F = L(t) F`,
//! matrix exponentials for semigroups, the closed-form phase-covariant map
//! from its four integrals, and the closed-form transversal-noise solution.

use nalgebra::{Matrix4, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::generators::{GeneratorMatrix, PCRates};
use crate::linalg::expm4;
use crate::qubit::{density_to_bloch, DensityMatrix};
use crate::transfer::{min_choi_eigenvalue, TransferMatrix};

type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("step controller cannot reach tolerance {tol} (best {best})")]
    StepSizeUnderflow { tol: f64, best: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

/// Strictly increasing list of sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `n_steps` intervals, `n_steps + 1` points.
    pub fn uniform(t0: f64, t_end: f64, n_steps: usize) -> Result<Self, PropagationError> {
        // `partial_cmp` so NaN endpoints also fail the check
        if t_end.partial_cmp(&t0) != Some(std::cmp::Ordering::Greater) || n_steps == 0 {
            return Err(PropagationError::InvalidGrid(format!(
                "need t_end > t0 and n_steps >= 1, got [{t0}, {t_end}] with {n_steps} steps"
            )));
        }
        let h = (t_end - t0) / n_steps as f64;
        let times = (0..=n_steps).map(|i| t0 + i as f64 * h).collect();
        Ok(TimeGrid { times })
    }

    pub fn explicit(times: Vec<f64>) -> Result<Self, PropagationError> {
        if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PropagationError::InvalidGrid(
                "times must be strictly increasing with at least two points".into(),
            ));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Step-doubling controls for the fixed-step RK4 kernel: each interval is
/// refined until two successive resolutions agree below `tol`.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationControls {
    pub tol: f64,
    pub max_refinements: u32,
}

impl Default for IntegrationControls {
    fn default() -> Self {
        IntegrationControls {
            tol: 1e-11,
            max_refinements: 18,
        }
    }
}

fn generator_norm(l: &Matrix4<f64>) -> f64 {
    l.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

/// Classical RK4 on `F' = L(t) F` from the identity over `[a, b]` with `n`
/// substeps; returns the interval propagator.
fn rk4_interval(l: &dyn Fn(f64) -> Matrix4<f64>, a: f64, b: f64, n: usize) -> Matrix4<f64> {
    let h = (b - a) / n as f64;
    let mut f = Matrix4::identity();
    for i in 0..n {
        let t = a + i as f64 * h;
        let k1 = l(t) * f;
        let k2 = l(t + 0.5 * h) * (f + k1 * (0.5 * h));
        let k3 = l(t + 0.5 * h) * (f + k2 * (0.5 * h));
        let k4 = l(t + h) * (f + k3 * h);
        f += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    f
}

/// Interval propagator with step doubling until the sup-norm change between
/// successive resolutions falls below `controls.tol`.
fn adaptive_interval(
    l: &dyn Fn(f64) -> Matrix4<f64>,
    a: f64,
    b: f64,
    controls: &IntegrationControls,
) -> Result<Matrix4<f64>, PropagationError> {
    // initial substep from the generator's own rate scale
    let scale = generator_norm(&l(a)).max(generator_norm(&l(b))).max(1e-12);
    let h0 = 1.0 / (20.0 * scale);
    let mut n = ((b - a) / h0).ceil().max(1.0) as usize;
    let mut coarse = rk4_interval(l, a, b, n);
    for _ in 0..controls.max_refinements {
        n *= 2;
        let fine = rk4_interval(l, a, b, n);
        let diff = (fine - coarse).abs().max();
        if diff < controls.tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    let fine = rk4_interval(l, a, b, n * 2);
    let best = (fine - coarse).abs().max();
    Err(PropagationError::StepSizeUnderflow {
        tol: controls.tol,
        best,
    })
}

/// Integrates the map ODE `d/dt F = L(t) F` from the identity along the grid.
/// The first-row invariant is re-projected at every grid point.
pub fn integrate_map(
    generator: &dyn Fn(f64) -> GeneratorMatrix,
    grid: &TimeGrid,
    controls: &IntegrationControls,
) -> Result<Vec<TransferMatrix>, PropagationError> {
    let l = |t: f64| *generator(t).matrix();
    let times = grid.times();
    let mut maps = Vec::with_capacity(times.len());
    maps.push(TransferMatrix::identity());
    let mut current = Matrix4::identity();
    for w in times.windows(2) {
        let step = adaptive_interval(&l, w[0], w[1], controls)?;
        current = step * current;
        let projected = TransferMatrix::projected(current);
        current = *projected.matrix();
        maps.push(projected);
    }
    Ok(maps)
}

/// Semigroup map `exp(L dt)` by scaling and squaring.
pub fn semigroup_map(l: &GeneratorMatrix, dt: f64) -> TransferMatrix {
    assert!(dt >= 0.0, "semigroup map needs dt >= 0");
    TransferMatrix::projected(expm4(&(l.matrix() * dt)))
}

/// The four accumulated integrals of a phase-covariant evolution over
/// `[t0, t]`: phase, transverse log-contraction, z translation, and
/// z log-contraction. All vanish at `t = t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PCIntegrals {
    pub phi: f64,
    pub big_gamma: f64,
    pub kappa: f64,
    pub delta: f64,
}

impl PCIntegrals {
    pub fn zero() -> Self {
        PCIntegrals {
            phi: 0.0,
            big_gamma: 0.0,
            kappa: 0.0,
            delta: 0.0,
        }
    }
}

/// Scalar RK4 with step doubling for the kappa ODE
/// `kappa' = (g+ − g-) − (g+ + g-) kappa`, which replaces the nested
/// quadrature of the closed form.
/// Advances the scalar `kappa` ODE `dk/dt = (g+ − g−) − (g+ + g−) k` from
/// `kappa0` at `a` to `b` with step-doubling RK4.
pub fn kappa_interval(
    rates: &PCRates,
    a: f64,
    b: f64,
    kappa0: f64,
    controls: &IntegrationControls,
) -> Result<f64, PropagationError> {
    let deriv = |t: f64, k: f64| {
        let gp = rates.gamma_plus.eval(t);
        let gm = rates.gamma_minus.eval(t);
        (gp - gm) - (gp + gm) * k
    };
    let run = |n: usize| {
        let h = (b - a) / n as f64;
        let mut k = kappa0;
        for i in 0..n {
            let t = a + i as f64 * h;
            let k1 = deriv(t, k);
            let k2 = deriv(t + 0.5 * h, k + 0.5 * h * k1);
            let k3 = deriv(t + 0.5 * h, k + 0.5 * h * k2);
            let k4 = deriv(t + h, k + h * k3);
            k += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        k
    };
    let scale = (rates.gamma_plus.eval(a).abs() + rates.gamma_minus.eval(a).abs()).max(1e-12);
    let mut n = ((b - a) * 20.0 * scale).ceil().max(4.0) as usize;
    let mut coarse = run(n);
    for _ in 0..controls.max_refinements {
        n *= 2;
        let fine = run(n);
        if (fine - coarse).abs() < controls.tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(PropagationError::StepSizeUnderflow {
        tol: controls.tol,
        best: (run(n * 2) - coarse).abs(),
    })
}

/// Trapezoid-free quadrature of a rate function over `[a, b]`: analytic when
/// the function carries its integral, otherwise composite Simpson with step
/// doubling.
fn rate_integral(
    f: &crate::generators::TimeFn,
    a: f64,
    b: f64,
    controls: &IntegrationControls,
) -> Result<f64, PropagationError> {
    if let Some(v) = f.analytic_integral(a, b) {
        return Ok(v);
    }
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut sum = f.eval(a) + f.eval(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            sum += w * f.eval(a + i as f64 * h);
        }
        sum * h / 3.0
    };
    let mut n = 16;
    let mut coarse = simpson(n);
    for _ in 0..controls.max_refinements {
        n *= 2;
        let fine = simpson(n);
        if (fine - coarse).abs() < controls.tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(PropagationError::StepSizeUnderflow {
        tol: controls.tol,
        best: (simpson(n * 2) - coarse).abs(),
    })
}

/// Accumulated PC integrals over `[t0, t]`.
pub fn pc_integrals(
    rates: &PCRates,
    t0: f64,
    t: f64,
    controls: &IntegrationControls,
) -> Result<PCIntegrals, PropagationError> {
    if t < t0 {
        return Err(PropagationError::InvalidGrid(format!(
            "pc_integrals needs t >= t0, got t0={t0}, t={t}"
        )));
    }
    if t == t0 {
        return Ok(PCIntegrals::zero());
    }
    let ih = rate_integral(&rates.lamb_shift, t0, t, controls)?;
    let ip = rate_integral(&rates.gamma_plus, t0, t, controls)?;
    let im = rate_integral(&rates.gamma_minus, t0, t, controls)?;
    let iz = rate_integral(&rates.gamma_z, t0, t, controls)?;
    let kappa = kappa_interval(rates, t0, t, 0.0, controls)?;
    Ok(PCIntegrals {
        phi: ih + rates.omega0 * (t - t0),
        big_gamma: -0.5 * (ip + im + 4.0 * iz),
        kappa,
        delta: -(ip + im),
    })
}

/// PC integrals at every grid point, accumulated incrementally so the kappa
/// ODE is solved once along the whole grid.
pub fn pc_integrals_series(
    rates: &PCRates,
    grid: &TimeGrid,
    controls: &IntegrationControls,
) -> Result<Vec<PCIntegrals>, PropagationError> {
    let times = grid.times();
    let mut out = Vec::with_capacity(times.len());
    out.push(PCIntegrals::zero());
    let mut acc = PCIntegrals::zero();
    for w in times.windows(2) {
        acc.phi += rate_integral(&rates.lamb_shift, w[0], w[1], controls)?
            + rates.omega0 * (w[1] - w[0]);
        let ip = rate_integral(&rates.gamma_plus, w[0], w[1], controls)?;
        let im = rate_integral(&rates.gamma_minus, w[0], w[1], controls)?;
        let iz = rate_integral(&rates.gamma_z, w[0], w[1], controls)?;
        acc.big_gamma += -0.5 * (ip + im + 4.0 * iz);
        acc.delta += -(ip + im);
        acc.kappa = kappa_interval(rates, w[0], w[1], acc.kappa, controls)?;
        out.push(acc);
    }
    Ok(out)
}

/// Assembles the PC transfer matrix from its four integrals: transverse
/// rotation-contraction block `e^Gamma R(phi)`, z row `(kappa, 0, 0, e^delta)`.
pub fn pc_map(ints: &PCIntegrals) -> TransferMatrix {
    let (s, c) = ints.phi.sin_cos();
    let g = ints.big_gamma.exp();
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 1.0;
    m[(1, 1)] = g * c;
    m[(1, 2)] = -g * s;
    m[(2, 1)] = g * s;
    m[(2, 2)] = g * c;
    m[(3, 0)] = ints.kappa;
    m[(3, 3)] = ints.delta.exp();
    TransferMatrix::projected(m)
}

/// `sinh(z)/z`, series-expanded near zero so the underdamped and critically
/// damped branches need no special-casing.
fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        C64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Closed-form observables of the transversal-noise (`vartheta = 0`)
/// semigroup: population decays exponentially, the coherence follows the
/// cosh/sinh law with the complex square root unifying the damping regimes.
pub fn npc_transversal_solution(
    theta: f64,
    phi: f64,
    gamma: f64,
    omega0: f64,
    t: f64,
) -> (f64, C64) {
    let p = 0.5 * (1.0 + theta.cos() * (-2.0 * gamma * t).exp());
    let root = C64::new(gamma * gamma - omega0 * omega0, 0.0).sqrt();
    let zt = root * t;
    let phase = C64::new(0.0, -phi).exp();
    let mix = C64::new(0.0, 2.0 * phi).exp() * gamma - C64::new(0.0, omega0);
    let c = phase
        * C64::new(0.5 * theta.sin() * (-gamma * t).exp(), 0.0)
        * (zt.cosh() + mix * sinhc(zt) * t);
    (p, c)
}

/// General PC observables in the unital case (`kappa = 0`):
/// `p = (1 + cos(theta) e^delta)/2`, `c = (sin(theta)/2) e^{Gamma − i(phi + phi0)}`.
pub fn pc_solution(theta: f64, phi0: f64, ints: &PCIntegrals) -> (f64, C64) {
    let p = 0.5 * (1.0 + theta.cos() * ints.delta.exp());
    let c = C64::new(0.0, -(ints.phi + phi0)).exp()
        * C64::new(0.5 * theta.sin() * ints.big_gamma.exp(), 0.0);
    (p, c)
}

/// Time-homogeneous PC law for the z component,
/// `S_z(dt) = S* (1 − e^{−(g+ + g-) dt}) + e^{−(g+ + g-) dt} S_z(0)` with the
/// fixed point `S* = (g+ − g-)/(g+ + g-)`. Both rates zero keeps `S_z`
/// constant.
pub fn sz_semigroup(gamma_plus: f64, gamma_minus: f64, sz0: f64, dt: f64) -> f64 {
    let total = gamma_plus + gamma_minus;
    if total == 0.0 {
        return sz0;
    }
    let sz_star = (gamma_plus - gamma_minus) / total;
    let decay = (-total * dt).exp();
    sz_star * (1.0 - decay) + decay * sz0
}

/// One sample of a propagated trajectory: the cumulative map from `t0`, the
/// evolved Bloch vector, and the observables read off it.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub map: TransferMatrix,
    pub bloch: Vector3<f64>,
    pub population: f64,
    pub coherence: C64,
    pub min_choi_eig: f64,
}

/// A map trajectory with the per-time state of one initial condition.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    /// Assembles records from precomputed maps; the first map must be the
    /// identity so the first record reproduces the initial state.
    pub fn from_maps(times: &[f64], maps: Vec<TransferMatrix>, initial: &DensityMatrix) -> Self {
        assert_eq!(times.len(), maps.len(), "grid/map length mismatch");
        let r0 = density_to_bloch(initial).0;
        let records = times
            .iter()
            .zip(maps)
            .map(|(&time, map)| {
                let bloch = crate::transfer::apply_bloch(&map, &r0);
                TrajectoryRecord {
                    time,
                    min_choi_eig: min_choi_eigenvalue(&map),
                    population: 0.5 * (1.0 + bloch.z),
                    coherence: C64::new(0.5 * bloch.x, -0.5 * bloch.y),
                    map,
                    bloch,
                }
            })
            .collect();
        Trajectory { records }
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn maps(&self) -> Vec<&TransferMatrix> {
        self.records.iter().map(|r| &r.map).collect()
    }
}
