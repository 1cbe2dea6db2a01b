//! Markovianity and covariance verdicts over map trajectories:
//! CP-divisibility scans of adjacent-interval propagators, trace-distance
//! (information back-flow) witnesses, monotonicity profiling, and
//! phase-covariance scans.

use nalgebra::Vector3;

use crate::linalg::fibonacci_sphere;
use crate::propagation::Trajectory;
use crate::qubit::{bloch_to_density, density_to_bloch, BlochVector, DensityMatrix};
use crate::transfer::{
    apply_bloch, choi, phase_covariance_residual, propagator, MapError, PC_RESIDUAL_GRID,
};

/// CP verdict of one adjacent-interval propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalCp {
    /// Minimum Choi eigenvalue of the propagator.
    Defined(f64),
    /// The map at the interval start is numerically singular, so the
    /// propagator (and the verdict for this interval) is undefined.
    Undefined,
}

/// Per-interval CP-divisibility scan result.
#[derive(Debug, Clone)]
pub struct DivisibilityReport {
    /// One entry per adjacent grid interval `[t_i, t_{i+1}]`.
    pub intervals: Vec<IntervalCp>,
    /// Global minimum over the defined intervals.
    pub min_eigenvalue: f64,
    /// True iff every defined interval has min Choi eigenvalue >= −tol.
    pub cp_divisible: bool,
    /// Number of undefined intervals.
    pub undefined: usize,
}

/// Scans every adjacent-interval propagator of the trajectory for complete
/// positivity of its Choi state.
pub fn cp_divisibility_scan(traj: &Trajectory, tol: f64) -> DivisibilityReport {
    let mut intervals = Vec::with_capacity(traj.records.len().saturating_sub(1));
    let mut min_eigenvalue = f64::INFINITY;
    let mut undefined = 0;
    let mut cp_divisible = true;
    for pair in traj.records.windows(2) {
        match propagator(&pair[1].map, &pair[0].map) {
            Ok(phi) => {
                let eig = choi(&phi).eigenvalues()[0];
                min_eigenvalue = min_eigenvalue.min(eig);
                if eig < -tol {
                    cp_divisible = false;
                }
                intervals.push(IntervalCp::Defined(eig));
            }
            Err(MapError::SingularMap) | Err(_) => {
                undefined += 1;
                intervals.push(IntervalCp::Undefined);
            }
        }
    }
    if !min_eigenvalue.is_finite() {
        min_eigenvalue = 0.0;
    }
    DivisibilityReport {
        intervals,
        min_eigenvalue,
        cp_divisible,
        undefined,
    }
}

/// Trace-distance series of one initial-state pair.
#[derive(Debug, Clone)]
pub struct PairWitness {
    pub distances: Vec<f64>,
    /// Largest single-step increase of the series (0 for monotone pairs).
    pub max_increase: f64,
    /// Sum of all positive increments.
    pub total_backflow: f64,
}

/// Back-flow witness over a set of initial-state pairs.
#[derive(Debug, Clone)]
pub struct BLPReport {
    pub pairs: Vec<PairWitness>,
    pub max_increase: f64,
    pub total_backflow: f64,
}

/// Evolves each pair through the trajectory maps and profiles the trace
/// distance for increases (information back-flow).
pub fn blp_witness(traj: &Trajectory, pairs: &[(DensityMatrix, DensityMatrix)]) -> BLPReport {
    assert!(!pairs.is_empty(), "blp_witness needs at least one pair");
    let mut report = BLPReport {
        pairs: Vec::with_capacity(pairs.len()),
        max_increase: 0.0,
        total_backflow: 0.0,
    };
    for (a, b) in pairs {
        let ra = density_to_bloch(a).0;
        let rb = density_to_bloch(b).0;
        let distances: Vec<f64> = traj
            .records
            .iter()
            .map(|rec| {
                // trace distance equals half the Bloch distance for qubits
                0.5 * (apply_bloch(&rec.map, &ra) - apply_bloch(&rec.map, &rb)).norm()
            })
            .collect();
        let mut max_increase = 0.0_f64;
        let mut total_backflow = 0.0;
        for w in distances.windows(2) {
            let inc = w[1] - w[0];
            if inc > 0.0 {
                max_increase = max_increase.max(inc);
                total_backflow += inc;
            }
        }
        report.max_increase = report.max_increase.max(max_increase);
        report.total_backflow += total_backflow;
        report.pairs.push(PairWitness {
            distances,
            max_increase,
            total_backflow,
        });
    }
    report
}

/// Default witness pairs: antipodal pure states on a 20-point deterministic
/// sphere lattice plus the z and x axis pairs (22 pairs total).
pub fn default_blp_pairs() -> Vec<(DensityMatrix, DensityMatrix)> {
    let mut pairs = Vec::with_capacity(22);
    for p in fibonacci_sphere(20) {
        let r = Vector3::new(p[0], p[1], p[2]);
        let plus = bloch_to_density(&BlochVector::new(r).unwrap()).unwrap();
        let minus = bloch_to_density(&BlochVector::new(-r).unwrap()).unwrap();
        pairs.push((plus, minus));
    }
    let axis = |v: Vector3<f64>| bloch_to_density(&BlochVector::new(v).unwrap()).unwrap();
    pairs.push((axis(Vector3::z()), axis(-Vector3::z())));
    pairs.push((axis(Vector3::x()), axis(-Vector3::x())));
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Interior extrema of a sampled series; empty iff the series is monotone at
/// the smoothing tolerance.
#[derive(Debug, Clone)]
pub struct ExtremaProfile {
    pub label: String,
    pub extrema: Vec<Extremum>,
    pub is_monotone: bool,
}

/// Profiles a series for interior extrema: strict sign changes of the
/// discrete differences, with changes below `tol` treated as flat.
pub fn extrema_profile(label: &str, series: &[(f64, f64)], tol: f64) -> ExtremaProfile {
    assert!(series.len() >= 3, "need at least 3 points");
    let mut extrema = Vec::new();
    // direction of the last significant difference
    let mut last_dir = 0i8;
    for i in 1..series.len() {
        let diff = series[i].1 - series[i - 1].1;
        let dir = if diff > tol {
            1
        } else if diff < -tol {
            -1
        } else {
            0
        };
        if dir != 0 {
            if last_dir != 0 && dir != last_dir {
                let kind = if dir < 0 {
                    ExtremumKind::Maximum
                } else {
                    ExtremumKind::Minimum
                };
                let (t, v) = series[i - 1];
                extrema.push(Extremum {
                    time: t,
                    value: v,
                    kind,
                });
            }
            last_dir = dir;
        }
    }
    ExtremaProfile {
        label: label.to_string(),
        is_monotone: extrema.is_empty(),
        extrema,
    }
}

/// Default smoothing tolerance: a small fraction of the series range, so
/// integrator noise is suppressed without hiding genuine oscillations.
pub fn default_extrema_tol(series: &[(f64, f64)]) -> f64 {
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
        (lo.min(*v), hi.max(*v))
    });
    1e-9 * (hi - lo).max(f64::MIN_POSITIVE)
}

/// Phase-covariance residual of the cumulative map at every grid time.
pub fn pc_scan(traj: &Trajectory) -> Vec<f64> {
    traj.records
        .iter()
        .map(|rec| phase_covariance_residual(&rec.map, PC_RESIDUAL_GRID))
        .collect()
}
