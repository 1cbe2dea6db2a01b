//! The artificial phase-covariant construction: state-dependent PC rates
//! that mimic the transversal-noise semigroup to first order in the coupling,
//! a comparison harness for matched and mismatched initial phases, and the
//! CP region scan of the artificial map over initial phase and time.

use num_complex::Complex64;
use thiserror::Error;

use crate::generators::mimic_pc_rates;
use crate::propagation::{
    npc_transversal_solution, pc_integrals_series, pc_map, pc_solution, IntegrationControls,
    PropagationError, TimeGrid, Trajectory,
};
use crate::qubit::{pure_state, PureStateAngles};
use crate::transfer::min_choi_eigenvalue;

#[derive(Debug, Error)]
pub enum MimicryError {
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

/// Observable series of one artificial PC run.
#[derive(Debug, Clone)]
pub struct PCObservables {
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    pub coherence: Vec<Complex64>,
}

/// Builds the artificial PC map trajectory for phase `phi` and evaluates the
/// closed-form PC observables for the initial state `(theta, phi)`.
pub fn artificial_pc_trajectory(
    gamma: f64,
    omega0: f64,
    theta: f64,
    phi: f64,
    grid: &TimeGrid,
    controls: &IntegrationControls,
) -> Result<(Trajectory, PCObservables), MimicryError> {
    let rates = mimic_pc_rates(gamma, omega0, phi);
    let ints = pc_integrals_series(&rates, grid, controls)?;
    let maps = ints.iter().map(pc_map).collect();
    let initial = pure_state(&PureStateAngles::wrapped(theta, phi));
    let traj = Trajectory::from_maps(grid.times(), maps, &initial);
    let mut obs = PCObservables {
        times: grid.times().to_vec(),
        population: Vec::with_capacity(ints.len()),
        coherence: Vec::with_capacity(ints.len()),
    };
    for i in &ints {
        let (p, c) = pc_solution(theta, phi, i);
        obs.population.push(p);
        obs.coherence.push(c);
    }
    Ok((traj, obs))
}

/// Paired series and deviation maxima of the PC-vs-NPC comparison, including
/// the mismatched-phase demonstration.
#[derive(Debug, Clone)]
pub struct MimicryComparison {
    pub gamma: f64,
    pub omega0: f64,
    pub theta: f64,
    pub phi: f64,
    pub phi_mismatch: f64,
    pub times: Vec<f64>,
    pub p_npc: Vec<f64>,
    pub p_pc: Vec<f64>,
    pub abs_c_npc: Vec<f64>,
    pub abs_c_pc: Vec<f64>,
    /// NPC coherence magnitude for the evolution started at `phi_mismatch`.
    pub abs_c_npc_mismatch: Vec<f64>,
    /// Max-abs population deviation over the grid (matched phase).
    pub max_p_deviation: f64,
    /// Max-abs coherence-magnitude deviation over the grid (matched phase).
    pub max_c_deviation: f64,
    /// Max-abs deviation of the phi-built PC coherence from the NPC
    /// evolution started at `phi_mismatch`.
    pub max_mismatch_deviation: f64,
}

/// Compares the artificial PC evolution against the transversal-noise
/// semigroup at matched phase, and against an NPC evolution started at a
/// mismatched phase. The PC coherence magnitude is phase-independent, which
/// is exactly why the mismatch shows up.
pub fn compare_mimicry(
    gamma: f64,
    omega0: f64,
    theta: f64,
    phi: f64,
    phi_mismatch: f64,
    grid: &TimeGrid,
    controls: &IntegrationControls,
) -> Result<MimicryComparison, MimicryError> {
    let (_, pc) = artificial_pc_trajectory(gamma, omega0, theta, phi, grid, controls)?;
    let times = grid.times().to_vec();
    let mut cmp = MimicryComparison {
        gamma,
        omega0,
        theta,
        phi,
        phi_mismatch,
        times: times.clone(),
        p_npc: Vec::with_capacity(times.len()),
        p_pc: pc.population.clone(),
        abs_c_npc: Vec::with_capacity(times.len()),
        abs_c_pc: pc.coherence.iter().map(|c| c.norm()).collect(),
        abs_c_npc_mismatch: Vec::with_capacity(times.len()),
        max_p_deviation: 0.0,
        max_c_deviation: 0.0,
        max_mismatch_deviation: 0.0,
    };
    for (i, &t) in times.iter().enumerate() {
        let (p, c) = npc_transversal_solution(theta, phi, gamma, omega0, t);
        let (_, c_prime) = npc_transversal_solution(theta, phi_mismatch, gamma, omega0, t);
        cmp.p_npc.push(p);
        cmp.abs_c_npc.push(c.norm());
        cmp.abs_c_npc_mismatch.push(c_prime.norm());
        cmp.max_p_deviation = cmp.max_p_deviation.max((p - cmp.p_pc[i]).abs());
        cmp.max_c_deviation = cmp.max_c_deviation.max((c.norm() - cmp.abs_c_pc[i]).abs());
        cmp.max_mismatch_deviation = cmp
            .max_mismatch_deviation
            .max((c_prime.norm() - cmp.abs_c_pc[i]).abs());
    }
    Ok(cmp)
}

/// Min Choi eigenvalue of the cumulative artificial PC map on a
/// `phi x t` grid. The scanned object is the map from the initial time, not
/// the interval propagator.
#[derive(Debug, Clone)]
pub struct CPRegionMap {
    pub phis: Vec<f64>,
    pub times: Vec<f64>,
    /// Row-major: `min_eigs[i][j]` is the eigenvalue at `(phis[i], times[j])`.
    pub min_eigs: Vec<Vec<f64>>,
}

/// Default phase grid: 64 points on `[0, pi)` (the rates have period pi).
pub fn default_phi_grid() -> Vec<f64> {
    (0..64)
        .map(|i| std::f64::consts::PI * i as f64 / 64.0)
        .collect()
}

/// Scans the CP of the cumulative artificial PC map over initial phase and
/// time.
pub fn cp_region_scan(
    gamma: f64,
    omega0: f64,
    phi_grid: &[f64],
    t_grid: &TimeGrid,
    controls: &IntegrationControls,
) -> Result<CPRegionMap, MimicryError> {
    assert!(!phi_grid.is_empty(), "empty phase grid");
    let mut min_eigs = Vec::with_capacity(phi_grid.len());
    for &phi in phi_grid {
        let rates = mimic_pc_rates(gamma, omega0, phi);
        let ints = pc_integrals_series(&rates, t_grid, controls)?;
        min_eigs.push(
            ints.iter()
                .map(|i| min_choi_eigenvalue(&pc_map(i)))
                .collect(),
        );
    }
    Ok(CPRegionMap {
        phis: phi_grid.to_vec(),
        times: t_grid.times().to_vec(),
        min_eigs,
    })
}
