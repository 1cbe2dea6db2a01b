//! Command-line front end: scenario subcommands, flat-file config with
//! per-key overrides, CSV emission to a file or stdout.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blochmap::scenario::{
    run_diagnose, run_fig2, run_fig3_demo, run_fig4, scan_cp_table, CsvEmission, ScenarioConfig,
    ScenarioError, ScenarioKind,
};

const USAGE: &str = "\
usage: blochmap <scenario> [options] [--<key> <value> ...]

scenarios:
  fig2       transversal-noise semigroup: population/coherence revivals
  fig3       CP-divisible rate schedule with non-monotonic Sz
  fig4       artificial phase-covariant mimicry vs the semigroup
  diagnose   verdict vector {cp_divisible, blp_monotone, phase_covariant,
             p_monotone, c_monotone} for a configured model
  scan-cp    min Choi eigenvalue of the artificial map over (phi, t)

options:
  --config PATH   read `key = value` lines (# comments) before overrides
  --out PATH      write the CSV there (default: stdout); fig4 also writes
                  a companion <stem>_region.csv next to it
  --tol X         CP/witness tolerance (config key `tol`, default 1e-9)
  --steps N       grid step count (config key `n_steps`)
  --<key> <value> override any config key, e.g. --omega0 10 --phi 1.5708

config keys: omega0 gamma lambda beta omega_c vartheta theta phi phi_prime
t_end n_steps tol model rates initial_sz gamma0 gamma_plus gamma_minus
gamma_z phi_points out
";

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("blochmap: {msg}");
    ExitCode::from(code)
}

fn exit_code(err: &ScenarioError) -> u8 {
    match err {
        ScenarioError::Config(_) => 2,
        ScenarioError::Numerical(_) | ScenarioError::Io(_) => 3,
    }
}

fn emit(csv: &CsvEmission, out: Option<&Path>) -> Result<(), ScenarioError> {
    match out {
        Some(path) => Ok(csv.write_atomic(path)?),
        None => {
            print!("{}", csv.render());
            Ok(())
        }
    }
}

fn region_path(main: &Path) -> PathBuf {
    let stem = main
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scan");
    let ext = main.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    main.with_file_name(format!("{stem}_region.{ext}"))
}

fn run() -> Result<(), ScenarioError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let first = args.first().map(String::as_str);
    if matches!(first, None | Some("--help") | Some("-h") | Some("help")) {
        print!("{USAGE}");
        return Ok(());
    }
    let kind = ScenarioKind::parse(args[0].as_str())
        .ok_or_else(|| ScenarioError::Config(format!("unknown scenario `{}`", args[0])))?;
    let mut cfg = ScenarioConfig::defaults(kind);

    // First pass: config file applies before any command-line override,
    // independent of flag order.
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<PathBuf> = None;
    let mut i = 1;
    while i < args.len() {
        let flag = args[i]
            .strip_prefix("--")
            .ok_or_else(|| ScenarioError::Config(format!("expected --key, got `{}`", args[i])))?;
        let value = args
            .get(i + 1)
            .ok_or_else(|| ScenarioError::Config(format!("flag `--{flag}` needs a value")))?;
        match flag {
            "config" => config_path = Some(PathBuf::from(value)),
            "steps" => overrides.push(("n_steps".into(), value.clone())),
            other => overrides.push((other.to_string(), value.clone())),
        }
        i += 2;
    }
    if let Some(path) = &config_path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ScenarioError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        cfg.apply_file(&text)?;
    }
    for (key, value) in &overrides {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    let out = cfg.out.clone();

    match kind {
        ScenarioKind::Fig2 => {
            let r = run_fig2(&cfg)?;
            emit(&r.csv, out.as_deref())?;
            eprintln!(
                "fig2: p extrema {:?}, |c| extrema {:?}, blp max increase {:.3e}, \
                 cp_divisible={}, min propagator eig {:.3e}",
                r.p_extrema, r.c_extrema, r.blp_max_increase, r.cp_divisible, r.min_propagator_eig
            );
        }
        ScenarioKind::Fig3 => {
            let r = run_fig3_demo(&cfg)?;
            emit(&r.csv, out.as_deref())?;
            eprintln!(
                "fig3: cp_divisible={}, min propagator eig {:.3e}, Sz extrema {}, monotone={}",
                r.cp_divisible, r.min_propagator_eig, r.sz_extrema, r.sz_monotone
            );
        }
        ScenarioKind::Fig4 => {
            let r = run_fig4(&cfg)?;
            emit(&r.csv, out.as_deref())?;
            match out.as_deref() {
                Some(path) => {
                    let rp = region_path(path);
                    r.region_csv.write_atomic(&rp)?;
                    eprintln!("fig4: region map written to {}", rp.display());
                }
                None => eprintln!("fig4: region map omitted (pass --out to write it)"),
            }
            eprintln!(
                "fig4: max deviations p {:.3e}, |c| {:.3e}, mismatched |c| {:.3e}",
                r.max_p_deviation, r.max_c_deviation, r.max_mismatch_deviation
            );
        }
        ScenarioKind::Diagnose => {
            let r = run_diagnose(&cfg)?;
            emit(&r.csv, out.as_deref())?;
            eprint!("{}", r.verdict_block());
        }
        ScenarioKind::ScanCp => {
            let csv = scan_cp_table(&cfg)?;
            emit(&csv, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(exit_code(&e), &e.to_string()),
    }
}
