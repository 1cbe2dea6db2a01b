//! C ABI for the blochmap engine: opaque configuration handles, scenario
//! runs that emit CSV files, and the diagnostics verdict as a flat struct.
//!
//! Conventions:
//! - every function returns a `BmStatus` code unless it hands out a pointer;
//! - `bm_config_free` is the only way to release a handle; passing the same
//!   handle twice is undefined behavior, passing NULL is a no-op;
//! - string arguments must be NUL-terminated UTF-8;
//! - `bm_last_error_message` returns a thread-local description of the most
//!   recent failure (valid until the next failing call on that thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use blochmap::scenario::{
    run_diagnose, run_fig2, run_fig3_demo, run_fig4, scan_cp_table, ScenarioConfig, ScenarioError,
    ScenarioKind,
};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmStatus {
    /// Success.
    BmOk = 0,
    /// Invalid configuration (unknown key, bad value, bad scenario).
    BmErrConfig = 2,
    /// Numerical failure during integration or map inversion.
    BmErrNumerical = 3,
    /// NULL pointer, non-UTF-8 string, or other argument misuse.
    BmErrArgument = 4,
    /// Filesystem error while writing results.
    BmErrIo = 5,
}

/// Opaque scenario configuration handle.
pub struct BmConfig {
    inner: ScenarioConfig,
}

/// Diagnostics verdicts and witness numbers; booleans are 0/1.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BmDiagnoseResult {
    pub cp_divisible: u8,
    pub blp_monotone: u8,
    pub phase_covariant: u8,
    pub p_monotone: u8,
    pub c_monotone: u8,
    pub min_propagator_choi_eig: f64,
    pub blp_max_increase: f64,
    pub max_pc_residual: f64,
    pub p_extrema: usize,
    pub c_extrema: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &ScenarioError) -> BmStatus {
    match err {
        ScenarioError::Config(_) => BmStatus::BmErrConfig,
        ScenarioError::Numerical(_) => BmStatus::BmErrNumerical,
        ScenarioError::Io(_) => BmStatus::BmErrIo,
    }
}

fn fail(err: &ScenarioError) -> BmStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// # Safety
/// `s` must be NULL or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, BmStatus> {
    if s.is_null() {
        set_error("NULL string argument");
        return Err(BmStatus::BmErrArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        BmStatus::BmErrArgument
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Thread-local message of the most recent failure on this thread. Never
/// NULL; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Allocates a configuration with the named scenario's defaults. Scenario
/// names match the CLI: "fig2", "fig3", "fig4", "diagnose", "scan-cp".
/// Returns NULL (with the error recorded) on an unknown name.
///
/// # Safety
/// `scenario` must be NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bm_config_new(scenario: *const c_char) -> *mut BmConfig {
    let name = match read_str(scenario) {
        Ok(s) => s,
        Err(_) => return ptr::null_mut(),
    };
    match ScenarioKind::parse(name) {
        Some(kind) => Box::into_raw(Box::new(BmConfig {
            inner: ScenarioConfig::defaults(kind),
        })),
        None => {
            set_error(&format!("unknown scenario `{name}`"));
            ptr::null_mut()
        }
    }
}

/// Sets one configuration key, with the same keys and validation as the
/// CLI and config files.
///
/// # Safety
/// `cfg` must be a live handle from `bm_config_new`; `key` and `value` must
/// be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bm_config_set(
    cfg: *mut BmConfig,
    key: *const c_char,
    value: *const c_char,
) -> BmStatus {
    let Some(cfg) = cfg.as_mut() else {
        set_error("NULL config handle");
        return BmStatus::BmErrArgument;
    };
    let (key, value) = match (read_str(key), read_str(value)) {
        (Ok(k), Ok(v)) => (k, v),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match cfg.inner.set(key, value) {
        Ok(()) => BmStatus::BmOk,
        Err(e) => fail(&e),
    }
}

/// Releases a configuration handle. NULL is a no-op.
///
/// # Safety
/// `cfg` must be NULL or a live handle; the handle is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn bm_config_free(cfg: *mut BmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured scenario and writes its CSV to `out_path` (for
/// "fig4" a companion `<stem>_region.<ext>` file is written next to it).
/// The "diagnose" scenario writes its per-time table; use `bm_diagnose`
/// for the verdicts.
///
/// # Safety
/// `cfg` must be a live handle; `out_path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bm_run_to_csv(
    cfg: *const BmConfig,
    out_path: *const c_char,
) -> BmStatus {
    let Some(cfg) = cfg.as_ref() else {
        set_error("NULL config handle");
        return BmStatus::BmErrArgument;
    };
    let path = match read_str(out_path) {
        Ok(p) => Path::new(p),
        Err(s) => return s,
    };
    let write = |csv: &blochmap::scenario::CsvEmission| -> Result<(), ScenarioError> {
        Ok(csv.write_atomic(path)?)
    };
    let result = match cfg.inner.kind {
        ScenarioKind::Fig2 => run_fig2(&cfg.inner).and_then(|r| write(&r.csv)),
        ScenarioKind::Fig3 => run_fig3_demo(&cfg.inner).and_then(|r| write(&r.csv)),
        ScenarioKind::Fig4 => run_fig4(&cfg.inner).and_then(|r| {
            write(&r.csv)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scan");
            let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
            let region = path.with_file_name(format!("{stem}_region.{ext}"));
            Ok(r.region_csv.write_atomic(&region)?)
        }),
        ScenarioKind::Diagnose => run_diagnose(&cfg.inner).and_then(|r| write(&r.csv)),
        ScenarioKind::ScanCp => scan_cp_table(&cfg.inner).and_then(|csv| write(&csv)),
    };
    match result {
        Ok(()) => BmStatus::BmOk,
        Err(e) => fail(&e),
    }
}

/// Runs the diagnostics pipeline on the configured model and fills `out`.
///
/// # Safety
/// `cfg` must be a live handle; `out` a valid, writable struct pointer.
#[no_mangle]
pub unsafe extern "C" fn bm_diagnose(
    cfg: *const BmConfig,
    out: *mut BmDiagnoseResult,
) -> BmStatus {
    let Some(cfg) = cfg.as_ref() else {
        set_error("NULL config handle");
        return BmStatus::BmErrArgument;
    };
    if out.is_null() {
        set_error("NULL result pointer");
        return BmStatus::BmErrArgument;
    }
    match run_diagnose(&cfg.inner) {
        Ok(r) => {
            out.write(BmDiagnoseResult {
                cp_divisible: r.verdicts.cp_divisible as u8,
                blp_monotone: r.verdicts.blp_monotone as u8,
                phase_covariant: r.verdicts.phase_covariant as u8,
                p_monotone: r.verdicts.p_monotone as u8,
                c_monotone: r.verdicts.c_monotone as u8,
                min_propagator_choi_eig: r.min_propagator_eig,
                blp_max_increase: r.blp_max_increase,
                max_pc_residual: r.max_pc_residual,
                p_extrema: r.p_extrema,
                c_extrema: r.c_extrema,
            });
            BmStatus::BmOk
        }
        Err(e) => fail(&e),
    }
}
