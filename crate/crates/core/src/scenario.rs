//! Scenario runner and serialization: reproduces the headline figure data as
//! CSV, bundles the diagnostics into verdict reports, and exposes the
//! phase/time CP scan. Configuration is flat `key = value` text with
//! command-line overrides; every run is bit-reproducible.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::{
    blp_witness, cp_divisibility_scan, default_blp_pairs, default_extrema_tol, extrema_profile,
    pc_scan, IntervalCp,
};
use crate::generators::{
    mimic_pc_rates, npc_generator, pc_generator, GeneratorMatrix, PCRates, SpinBosonParams,
    TimeFn,
};
use crate::mimicry::{compare_mimicry, cp_region_scan, MimicryError};
use crate::propagation::{
    integrate_map, IntegrationControls, PropagationError, TimeGrid, Trajectory,
};
use crate::qubit::{bloch_to_density, pure_state, BlochVector, PureStateAngles};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl From<PropagationError> for ScenarioError {
    fn from(e: PropagationError) -> Self {
        match e {
            PropagationError::InvalidGrid(msg) => ScenarioError::Config(msg),
            other => ScenarioError::Numerical(other.to_string()),
        }
    }
}

impl From<MimicryError> for ScenarioError {
    fn from(e: MimicryError) -> Self {
        match e {
            MimicryError::Propagation(p) => p.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Fig2,
    Fig3,
    Fig4,
    Diagnose,
    ScanCp,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "fig2" => Some(ScenarioKind::Fig2),
            "fig3" => Some(ScenarioKind::Fig3),
            "fig4" => Some(ScenarioKind::Fig4),
            "diagnose" => Some(ScenarioKind::Diagnose),
            "scan-cp" => Some(ScenarioKind::ScanCp),
            _ => None,
        }
    }
}

/// Model selector for the `diagnose` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Spin-boson generator (semigroup or finite cutoff).
    Npc,
    /// Artificial PC model with the state-dependent mimic rates.
    Mimic,
    /// Constant-rate PC semigroup.
    PcConst,
    /// The built-in time-inhomogeneous PC schedule.
    Fig3Schedule,
}

/// Rate choice for the `fig3` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateChoice {
    Schedule,
    Constant,
}

/// All scenario parameters with their defaults. Unknown keys and non-finite
/// values are rejected before any computation.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub omega0: f64,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub omega_c: Option<f64>,
    pub vartheta: f64,
    pub theta: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub tol: f64,
    pub model: ModelKind,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
    pub rates: RateChoice,
    pub initial_sz: f64,
    pub gamma0: f64,
    pub phi_points: usize,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn defaults(kind: ScenarioKind) -> Self {
        use std::f64::consts::PI;
        let mut cfg = ScenarioConfig {
            kind,
            omega0: 10.0,
            gamma: 1.0,
            lambda: None,
            beta: None,
            omega_c: None,
            vartheta: PI / 3.0,
            theta: PI / 3.0,
            phi: 0.0,
            phi_prime: PI,
            t_end: 3.0,
            n_steps: 600,
            tol: 1e-9,
            model: ModelKind::Npc,
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: 1.0,
            rates: RateChoice::Schedule,
            initial_sz: 0.0,
            gamma0: 1.0,
            phi_points: 64,
            out: None,
        };
        match kind {
            ScenarioKind::Fig4 | ScenarioKind::ScanCp => {
                cfg.vartheta = 0.0;
                cfg.phi = PI / 2.0;
                cfg.n_steps = 200;
            }
            ScenarioKind::Fig3 => {
                cfg.n_steps = 400;
            }
            _ => {}
        }
        cfg
    }

    fn parse_f64(key: &str, value: &str) -> Result<f64, ScenarioError> {
        let v: f64 = value
            .parse()
            .map_err(|_| ScenarioError::Config(format!("key `{key}`: `{value}` is not a number")))?;
        if !v.is_finite() {
            return Err(ScenarioError::Config(format!(
                "key `{key}`: non-finite value `{value}`"
            )));
        }
        Ok(v)
    }

    /// Applies one `key = value` pair; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        match key {
            "omega0" => self.omega0 = Self::parse_f64(key, value)?,
            "gamma" => self.gamma = Self::parse_f64(key, value)?,
            "lambda" => self.lambda = Some(Self::parse_f64(key, value)?),
            "beta" => self.beta = Some(Self::parse_f64(key, value)?),
            "omega_c" => self.omega_c = Some(Self::parse_f64(key, value)?),
            "vartheta" => self.vartheta = Self::parse_f64(key, value)?,
            "theta" => self.theta = Self::parse_f64(key, value)?,
            "phi" => self.phi = Self::parse_f64(key, value)?,
            "phi_prime" => self.phi_prime = Self::parse_f64(key, value)?,
            "t_end" => self.t_end = Self::parse_f64(key, value)?,
            "gamma_plus" => self.gamma_plus = Self::parse_f64(key, value)?,
            "gamma_minus" => self.gamma_minus = Self::parse_f64(key, value)?,
            "gamma_z" => self.gamma_z = Self::parse_f64(key, value)?,
            "initial_sz" => self.initial_sz = Self::parse_f64(key, value)?,
            "gamma0" => self.gamma0 = Self::parse_f64(key, value)?,
            "tol" => self.tol = Self::parse_f64(key, value)?,
            "n_steps" => {
                self.n_steps = value.parse().map_err(|_| {
                    ScenarioError::Config(format!("key `n_steps`: `{value}` is not a count"))
                })?;
            }
            "phi_points" => {
                self.phi_points = value.parse().map_err(|_| {
                    ScenarioError::Config(format!("key `phi_points`: `{value}` is not a count"))
                })?;
            }
            "model" => {
                self.model = match value {
                    "npc" => ModelKind::Npc,
                    "mimic" => ModelKind::Mimic,
                    "pc-const" => ModelKind::PcConst,
                    "fig3-schedule" => ModelKind::Fig3Schedule,
                    other => {
                        return Err(ScenarioError::Config(format!(
                            "key `model`: unknown model `{other}`"
                        )))
                    }
                };
            }
            "rates" => {
                self.rates = match value {
                    "schedule" => RateChoice::Schedule,
                    "constant" => RateChoice::Constant,
                    other => {
                        return Err(ScenarioError::Config(format!(
                            "key `rates`: unknown choice `{other}`"
                        )))
                    }
                };
            }
            "out" => self.out = Some(PathBuf::from(value)),
            other => {
                return Err(ScenarioError::Config(format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` config (one pair per line, `#` comments).
    pub fn apply_file(&mut self, text: &str) -> Result<(), ScenarioError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ScenarioError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| ScenarioError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_steps < 2 {
            return Err(ScenarioError::Config(format!(
                "n_steps must be >= 2, got {}",
                self.n_steps
            )));
        }
        // `partial_cmp` so NaN also fails the check
        if self.t_end.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(ScenarioError::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.tol <= 0.0 {
            return Err(ScenarioError::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    fn spin_boson(&self) -> SpinBosonParams {
        match (self.lambda, self.beta) {
            (Some(lambda), Some(beta)) => SpinBosonParams {
                omega0: self.omega0,
                vartheta: self.vartheta,
                lambda,
                beta,
                omega_c: self.omega_c,
            },
            _ => SpinBosonParams::semigroup(self.omega0, self.gamma, self.vartheta),
        }
    }

    fn grid(&self) -> Result<TimeGrid, ScenarioError> {
        Ok(TimeGrid::uniform(0.0, self.t_end, self.n_steps)?)
    }

    fn controls(&self) -> IntegrationControls {
        IntegrationControls {
            tol: (self.tol * 1e-2).min(1e-11),
            ..Default::default()
        }
    }
}

/// A CSV table with a mandatory header; numbers serialize with 17 significant
/// digits so parsing an emitted file recovers the in-memory doubles.
#[derive(Debug, Clone)]
pub struct CsvEmission {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvEmission {
    pub fn new(header: &[&str]) -> Self {
        CsvEmission {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes via a temp file in the target directory plus rename.
    pub fn write_atomic(&self, path: &Path) -> io::Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let tmp = match dir {
            Some(d) => d.join(format!(
                ".{}.tmp",
                path.file_name().and_then(|n| n.to_str()).unwrap_or("csv")
            )),
            None => PathBuf::from(format!(
                ".{}.tmp",
                path.file_name().and_then(|n| n.to_str()).unwrap_or("csv")
            )),
        };
        std::fs::write(&tmp, self.render())?;
        std::fs::rename(&tmp, path)
    }
}

fn prop_eig_column(traj: &Trajectory, tol: f64) -> (Vec<f64>, bool, f64) {
    let report = cp_divisibility_scan(traj, tol);
    let mut col = Vec::with_capacity(traj.records.len());
    col.push(0.0);
    for interval in &report.intervals {
        col.push(match interval {
            IntervalCp::Defined(e) => *e,
            IntervalCp::Undefined => f64::NAN,
        });
    }
    (col, report.cp_divisible, report.min_eigenvalue)
}

/// Summary numbers of a `fig2` run, alongside the emitted table.
#[derive(Debug)]
pub struct Fig2Output {
    pub csv: CsvEmission,
    /// Interior extrema counts for (p, |c|) at phi = 0 and phi = pi/2.
    pub p_extrema: [usize; 2],
    pub c_extrema: [usize; 2],
    pub blp_max_increase: f64,
    pub max_abs_c_gap: f64,
    pub cp_divisible: bool,
    pub min_propagator_eig: f64,
    pub trace_distance_monotone: bool,
}

/// Non-monotonic population and coherence of the semigroup for two initial
/// phases, with the Markovianity evidence alongside.
pub fn run_fig2(cfg: &ScenarioConfig) -> Result<Fig2Output, ScenarioError> {
    cfg.validate()?;
    let params = cfg.spin_boson();
    let grid = cfg.grid()?;
    let controls = cfg.controls();
    let generator = |t: f64| -> GeneratorMatrix {
        npc_generator(&params, t).expect("cutoff presence checked by construction")
    };
    let maps = integrate_map(&generator, &grid, &controls)?;
    let phis = [0.0, std::f64::consts::PI / 2.0];
    let trajs: Vec<Trajectory> = phis
        .iter()
        .map(|&phi| {
            let initial = pure_state(&PureStateAngles::wrapped(cfg.theta, phi));
            Trajectory::from_maps(grid.times(), maps.clone(), &initial)
        })
        .collect();
    let (prop_col, cp_divisible, min_propagator_eig) = prop_eig_column(&trajs[0], cfg.tol);
    let blp = blp_witness(&trajs[0], &default_blp_pairs());

    let mut csv = CsvEmission::new(&[
        "t",
        "p_phi0",
        "absC_phi0",
        "p_phiHalfPi",
        "absC_phiHalfPi",
        "traceDistance",
        "minPropagatorChoiEig",
    ]);
    let mut max_abs_c_gap = 0.0_f64;
    let mut td_prev = f64::INFINITY;
    let mut trace_distance_monotone = true;
    for (i, t) in grid.times().iter().enumerate() {
        let a = &trajs[0].records[i];
        let b = &trajs[1].records[i];
        let td = 0.5 * (a.bloch - b.bloch).norm();
        if td > td_prev + 1e-9 {
            trace_distance_monotone = false;
        }
        td_prev = td;
        max_abs_c_gap = max_abs_c_gap.max((a.coherence.norm() - b.coherence.norm()).abs());
        csv.push(vec![
            *t,
            a.population,
            a.coherence.norm(),
            b.population,
            b.coherence.norm(),
            td,
            prop_col[i],
        ]);
    }

    let count = |traj: &Trajectory, f: &dyn Fn(&crate::propagation::TrajectoryRecord) -> f64| {
        let series: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.time, f(r))).collect();
        extrema_profile("series", &series, default_extrema_tol(&series))
            .extrema
            .len()
    };
    Ok(Fig2Output {
        p_extrema: [
            count(&trajs[0], &|r| r.population),
            count(&trajs[1], &|r| r.population),
        ],
        c_extrema: [
            count(&trajs[0], &|r| r.coherence.norm()),
            count(&trajs[1], &|r| r.coherence.norm()),
        ],
        blp_max_increase: blp.max_increase,
        max_abs_c_gap,
        cp_divisible,
        min_propagator_eig,
        trace_distance_monotone,
        csv,
    })
}

/// The built-in time-inhomogeneous PC schedule: nonnegative absorption and
/// emission rates whose dominance swaps at t = 1, driving the z component of
/// the maximally mixed state up and then down while every propagator stays
/// CP.
pub fn fig3_schedule(gamma0: f64) -> PCRates {
    PCRates {
        omega0: 0.0,
        lamb_shift: TimeFn::constant(0.0),
        gamma_plus: TimeFn::new(move |t| gamma0 * (1.0 + (5.0 * (1.0 - t)).tanh())),
        gamma_minus: TimeFn::new(move |t| gamma0 * (1.0 + (5.0 * (t - 1.0)).tanh())),
        gamma_z: TimeFn::constant(0.0),
    }
}

#[derive(Debug)]
pub struct Fig3Output {
    pub csv: CsvEmission,
    pub cp_divisible: bool,
    pub min_propagator_eig: f64,
    pub sz_extrema: usize,
    pub sz_monotone: bool,
}

/// CP-divisible PC dynamics with a non-monotonic population: the schedule
/// above evolved from the configured initial z component.
pub fn run_fig3_demo(cfg: &ScenarioConfig) -> Result<Fig3Output, ScenarioError> {
    cfg.validate()?;
    if cfg.initial_sz.abs() > 1.0 {
        return Err(ScenarioError::Config(format!(
            "initial_sz must lie in [-1, 1], got {}",
            cfg.initial_sz
        )));
    }
    let rates = match cfg.rates {
        RateChoice::Schedule => fig3_schedule(cfg.gamma0),
        RateChoice::Constant => PCRates::constant(0.0, cfg.gamma_plus, cfg.gamma_minus, 0.0),
    };
    let grid = cfg.grid()?;
    let controls = cfg.controls();
    let maps = integrate_map(&|t| pc_generator(&rates, t), &grid, &controls)?;
    let initial = bloch_to_density(
        &BlochVector::new(nalgebra::Vector3::new(0.0, 0.0, cfg.initial_sz))
            .expect("checked above"),
    )
    .expect("diagonal state is physical");
    let traj = Trajectory::from_maps(grid.times(), maps, &initial);
    let (prop_col, cp_divisible, min_propagator_eig) = prop_eig_column(&traj, cfg.tol);

    let mut csv = CsvEmission::new(&["t", "Sz", "minPropagatorChoiEig", "verdict"]);
    for (i, rec) in traj.records.iter().enumerate() {
        let ok = if i == 0 || prop_col[i] >= -cfg.tol {
            1.0
        } else {
            0.0
        };
        csv.push(vec![rec.time, rec.bloch.z, prop_col[i], ok]);
    }
    let series: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.time, r.bloch.z)).collect();
    let profile = extrema_profile("Sz", &series, default_extrema_tol(&series));
    Ok(Fig3Output {
        csv,
        cp_divisible,
        min_propagator_eig,
        sz_extrema: profile.extrema.len(),
        sz_monotone: profile.is_monotone,
    })
}

#[derive(Debug)]
pub struct Fig4Output {
    pub csv: CsvEmission,
    pub region_csv: CsvEmission,
    pub max_p_deviation: f64,
    pub max_c_deviation: f64,
    pub max_mismatch_deviation: f64,
}

/// Artificial PC evolution against the transversal-noise semigroup, plus the
/// companion phase/time CP region table.
pub fn run_fig4(cfg: &ScenarioConfig) -> Result<Fig4Output, ScenarioError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let controls = cfg.controls();
    let cmp = compare_mimicry(
        cfg.gamma,
        cfg.omega0,
        cfg.theta,
        cfg.phi,
        cfg.phi_prime,
        &grid,
        &controls,
    )?;
    let mut csv = CsvEmission::new(&[
        "t",
        "p_NPC",
        "p_PC",
        "absC_NPC",
        "absC_PC",
        "absC_NPC_mismatch",
    ]);
    for i in 0..cmp.times.len() {
        csv.push(vec![
            cmp.times[i],
            cmp.p_npc[i],
            cmp.p_pc[i],
            cmp.abs_c_npc[i],
            cmp.abs_c_pc[i],
            cmp.abs_c_npc_mismatch[i],
        ]);
    }
    let region_csv = scan_cp_table(cfg)?;
    Ok(Fig4Output {
        csv,
        region_csv,
        max_p_deviation: cmp.max_p_deviation,
        max_c_deviation: cmp.max_c_deviation,
        max_mismatch_deviation: cmp.max_mismatch_deviation,
    })
}

/// Long-form `phi, t, minChoiEig` table of the artificial-map CP scan.
pub fn scan_cp_table(cfg: &ScenarioConfig) -> Result<CsvEmission, ScenarioError> {
    cfg.validate()?;
    if cfg.phi_points == 0 {
        return Err(ScenarioError::Config("phi_points must be >= 1".into()));
    }
    let phi_grid: Vec<f64> = (0..cfg.phi_points)
        .map(|i| std::f64::consts::PI * i as f64 / cfg.phi_points as f64)
        .collect();
    let grid = cfg.grid()?;
    let region = cp_region_scan(cfg.gamma, cfg.omega0, &phi_grid, &grid, &cfg.controls())?;
    let mut csv = CsvEmission::new(&["phi", "t", "minChoiEig"]);
    for (i, &phi) in region.phis.iter().enumerate() {
        for (j, &t) in region.times.iter().enumerate() {
            csv.push(vec![phi, t, region.min_eigs[i][j]]);
        }
    }
    Ok(csv)
}

/// The five-entry verdict vector of a diagnostics run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictVector {
    pub cp_divisible: bool,
    pub blp_monotone: bool,
    pub phase_covariant: bool,
    pub p_monotone: bool,
    pub c_monotone: bool,
}

#[derive(Debug)]
pub struct DiagnoseOutput {
    pub csv: CsvEmission,
    pub verdicts: VerdictVector,
    pub min_propagator_eig: f64,
    pub blp_max_increase: f64,
    pub max_pc_residual: f64,
    pub p_extrema: usize,
    pub c_extrema: usize,
}

impl DiagnoseOutput {
    /// Machine-readable verdict block, one `key=value` per line.
    pub fn verdict_block(&self) -> String {
        let v = &self.verdicts;
        format!(
            "cp_divisible={}\nblp_monotone={}\nphase_covariant={}\np_monotone={}\nc_monotone={}\n\
             min_propagator_choi_eig={:.16e}\nblp_max_increase={:.16e}\nmax_pc_residual={:.16e}\n\
             p_extrema={}\nc_extrema={}\n",
            v.cp_divisible,
            v.blp_monotone,
            v.phase_covariant,
            v.p_monotone,
            v.c_monotone,
            self.min_propagator_eig,
            self.blp_max_increase,
            self.max_pc_residual,
            self.p_extrema,
            self.c_extrema
        )
    }
}

/// Threshold separating "phase covariant to round-off" from a genuine
/// residual; NPC dynamics here exceed 1e-2.
const PC_RESIDUAL_THRESHOLD: f64 = 1e-9;

/// Builds the configured model's trajectory and bundles every diagnostic
/// into one verdict record.
pub fn run_diagnose(cfg: &ScenarioConfig) -> Result<DiagnoseOutput, ScenarioError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let controls = cfg.controls();
    let maps = match cfg.model {
        ModelKind::Npc => {
            let params = cfg.spin_boson();
            integrate_map(
                &|t| npc_generator(&params, t).expect("cutoff checked"),
                &grid,
                &controls,
            )?
        }
        ModelKind::Mimic => {
            let rates = mimic_pc_rates(cfg.gamma, cfg.omega0, cfg.phi);
            integrate_map(&|t| pc_generator(&rates, t), &grid, &controls)?
        }
        ModelKind::PcConst => {
            let rates = PCRates::constant(cfg.omega0, cfg.gamma_plus, cfg.gamma_minus, cfg.gamma_z);
            integrate_map(&|t| pc_generator(&rates, t), &grid, &controls)?
        }
        ModelKind::Fig3Schedule => {
            let rates = fig3_schedule(cfg.gamma0);
            integrate_map(&|t| pc_generator(&rates, t), &grid, &controls)?
        }
    };
    let initial = pure_state(&PureStateAngles::wrapped(cfg.theta, cfg.phi));
    let traj = Trajectory::from_maps(grid.times(), maps, &initial);

    let div = cp_divisibility_scan(&traj, cfg.tol);
    let blp = blp_witness(&traj, &default_blp_pairs());
    let residuals = pc_scan(&traj);
    let max_pc_residual = residuals.iter().copied().fold(0.0, f64::max);
    let p_series: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.time, r.population)).collect();
    let c_series: Vec<(f64, f64)> = traj
        .records
        .iter()
        .map(|r| (r.time, r.coherence.norm()))
        .collect();
    let p_profile = extrema_profile("p", &p_series, default_extrema_tol(&p_series));
    let c_profile = extrema_profile("|c|", &c_series, default_extrema_tol(&c_series));

    let (prop_col, _, _) = prop_eig_column(&traj, cfg.tol);
    let mut csv = CsvEmission::new(&["t", "p", "absC", "pcResidual", "minPropagatorChoiEig"]);
    for (i, rec) in traj.records.iter().enumerate() {
        csv.push(vec![
            rec.time,
            rec.population,
            rec.coherence.norm(),
            residuals[i],
            prop_col[i],
        ]);
    }

    Ok(DiagnoseOutput {
        csv,
        verdicts: VerdictVector {
            cp_divisible: div.cp_divisible,
            blp_monotone: blp.max_increase <= 10.0 * cfg.tol,
            phase_covariant: max_pc_residual <= PC_RESIDUAL_THRESHOLD,
            p_monotone: p_profile.is_monotone,
            c_monotone: c_profile.is_monotone,
        },
        min_propagator_eig: div.min_eigenvalue,
        blp_max_increase: blp.max_increase,
        max_pc_residual,
        p_extrema: p_profile.extrema.len(),
        c_extrema: c_profile.extrema.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig2);
        assert!(cfg.set("omega0", "12.5").is_ok());
        assert!(matches!(
            cfg.set("omega", "1"),
            Err(ScenarioError::Config(_))
        ));
        assert!(matches!(
            cfg.set("gamma", "inf"),
            Err(ScenarioError::Config(_))
        ));
        assert!(matches!(
            cfg.set("gamma", "abc"),
            Err(ScenarioError::Config(_))
        ));
    }

    #[test]
    fn config_file_parsing_with_comments() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig2);
        cfg.apply_file("# header\nomega0 = 5 # inline\n\ntheta=1.0\n").unwrap();
        assert_eq!(cfg.omega0, 5.0);
        assert_eq!(cfg.theta, 1.0);
        let err = cfg.apply_file("bogus_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig2);
        cfg.n_steps = 1;
        assert!(cfg.validate().is_err());
        cfg.n_steps = 10;
        cfg.t_end = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_round_trips_doubles() {
        let mut csv = CsvEmission::new(&["a", "b"]);
        csv.push(vec![1.0 / 3.0, -2.718281828459045e-7]);
        let text = csv.render();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "a,b");
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row[0], 1.0 / 3.0);
        assert_eq!(row[1], -2.718281828459045e-7);
    }

    #[test]
    fn fig2_defaults_reproduce_the_headline() {
        let out = run_fig2(&ScenarioConfig::defaults(ScenarioKind::Fig2)).unwrap();
        assert!(out.p_extrema.iter().all(|&n| n >= 2), "{:?}", out.p_extrema);
        assert!(out.c_extrema.iter().all(|&n| n >= 2), "{:?}", out.c_extrema);
        assert!(out.max_abs_c_gap > 0.01);
        assert!(out.cp_divisible);
        assert!(out.trace_distance_monotone);
        assert!(out.blp_max_increase <= 1e-9);
    }

    #[test]
    fn fig2_gamma_zero_is_flat() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig2);
        cfg.gamma = 0.0;
        let out = run_fig2(&cfg).unwrap();
        assert_eq!(out.p_extrema, [0, 0]);
        assert_eq!(out.c_extrema, [0, 0]);
    }

    #[test]
    fn fig2_pure_dephasing_keeps_population_constant() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig2);
        cfg.vartheta = PI / 2.0;
        let out = run_fig2(&cfg).unwrap();
        let p0 = out.csv.rows[0][1];
        for row in &out.csv.rows {
            assert!((row[1] - p0).abs() < 1e-10);
        }
    }

    #[test]
    fn fig3_schedule_gives_divisible_non_monotone_sz() {
        let out = run_fig3_demo(&ScenarioConfig::defaults(ScenarioKind::Fig3)).unwrap();
        assert!(out.cp_divisible, "min eig {}", out.min_propagator_eig);
        assert!(out.sz_extrema >= 1);
        assert!(!out.sz_monotone);
    }

    #[test]
    fn fig3_constant_rates_are_monotone() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig3);
        cfg.rates = RateChoice::Constant;
        cfg.gamma_plus = 1.4;
        cfg.gamma_minus = 0.6;
        let out = run_fig3_demo(&cfg).unwrap();
        assert!(out.cp_divisible);
        assert!(out.sz_monotone);
    }

    #[test]
    fn fig3_pole_separation_contracts() {
        // CP-divisibility forces the distance between the two pole
        // trajectories to be non-increasing even though the attractor moves
        let run = |sz0: f64| {
            let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig3);
            cfg.initial_sz = sz0;
            run_fig3_demo(&cfg).unwrap()
        };
        let up = run(1.0);
        let down = run(-1.0);
        let mut prev = f64::INFINITY;
        for (a, b) in up.csv.rows.iter().zip(&down.csv.rows) {
            let gap = (a[1] - b[1]).abs();
            assert!(gap <= prev + 1e-9, "t={}", a[0]);
            prev = gap;
        }
    }

    #[test]
    fn fig4_defaults() {
        let out = run_fig4(&ScenarioConfig::defaults(ScenarioKind::Fig4)).unwrap();
        assert!(out.max_p_deviation <= 1e-12);
        assert!(out.max_c_deviation < 0.05);
        assert!(out.max_mismatch_deviation >= 2.5 * out.max_c_deviation);
        // region table spans the full grid
        assert_eq!(out.region_csv.rows.len(), 64 * 201);
        let has_negative = out.region_csv.rows.iter().any(|r| r[2] < -1e-6 && r[1] < 1.0);
        assert!(has_negative);
    }

    #[test]
    fn fig4_gamma_zero_series_coincide() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Fig4);
        cfg.gamma = 0.0;
        let out = run_fig4(&cfg).unwrap();
        assert!(out.max_p_deviation < 1e-14);
        assert!(out.max_c_deviation < 1e-12);
        assert!(out.max_mismatch_deviation < 1e-12);
    }

    #[test]
    fn diagnose_fig2_defaults_vector() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Diagnose);
        cfg.phi = 0.0;
        let out = run_diagnose(&cfg).unwrap();
        assert_eq!(
            out.verdicts,
            VerdictVector {
                cp_divisible: true,
                blp_monotone: true,
                phase_covariant: false,
                p_monotone: false,
                c_monotone: false,
            }
        );
    }

    #[test]
    fn diagnose_pc_semigroup_all_true() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Diagnose);
        cfg.model = ModelKind::PcConst;
        cfg.gamma_plus = 1.0;
        cfg.gamma_minus = 1.0;
        cfg.gamma_z = 1.0;
        let out = run_diagnose(&cfg).unwrap();
        assert_eq!(
            out.verdicts,
            VerdictVector {
                cp_divisible: true,
                blp_monotone: true,
                phase_covariant: true,
                p_monotone: true,
                c_monotone: true,
            }
        );
    }

    #[test]
    fn diagnose_mimic_vector() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::Diagnose);
        cfg.model = ModelKind::Mimic;
        cfg.phi = PI / 2.0;
        let out = run_diagnose(&cfg).unwrap();
        assert_eq!(
            out.verdicts,
            VerdictVector {
                cp_divisible: false,
                blp_monotone: false,
                phase_covariant: true,
                p_monotone: true,
                c_monotone: false,
            }
        );
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let a = run_fig2(&ScenarioConfig::defaults(ScenarioKind::Fig2)).unwrap();
        let b = run_fig2(&ScenarioConfig::defaults(ScenarioKind::Fig2)).unwrap();
        assert_eq!(a.csv.render(), b.csv.render());
    }
}
