//! C ABI over the `dualprecode` library.
//!
//! Conventions:
//! - every fallible call returns a [`DpStatus`]; on failure the message is
//!   kept per thread and read with [`dp_last_error_message`];
//! - experiments and result sets are opaque heap handles released with their
//!   `*_free` function (passing NULL to a free function is a no-op);
//! - strings in are NUL-terminated UTF-8; strings out are copied into
//!   caller buffers.
//!
//! The generated header is `include/dualprecode.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dualprecode::cli::{self, AxisValue, CliError, CsvRow, ScenarioConfig, SchemeId};
use dualprecode::corrstats::mismatch_effective_stats;
use dualprecode::modeswitch::{tau_from_bits, FeedbackBudget};
use dualprecode::rmt::asymptotic;
use dualprecode::{ChiModel, CsitModel, Error, GroupScenario, ScenarioSpec, Scheme};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad configuration text, preset name or parameter combination.
    Config = 3,
    /// Solver or factorization failure.
    Numerical = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpScheme {
    Bd = 0,
    Bds = 1,
    Switch = 2,
    SwitchRaw = 3,
    AsymBd = 4,
    AsymBds = 5,
    ApproxBd = 6,
    ApproxBds = 7,
}

impl From<SchemeId> for DpScheme {
    fn from(s: SchemeId) -> Self {
        match s {
            SchemeId::Bd => DpScheme::Bd,
            SchemeId::Bds => DpScheme::Bds,
            SchemeId::Switch => DpScheme::Switch,
            SchemeId::SwitchRaw => DpScheme::SwitchRaw,
            SchemeId::AsymBd => DpScheme::AsymBd,
            SchemeId::AsymBds => DpScheme::AsymBds,
            SchemeId::ApproxBd => DpScheme::ApproxBd,
            SchemeId::ApproxBds => DpScheme::ApproxBds,
        }
    }
}

/// Parsed experiment (a config file or preset plus overrides).
pub struct DpExperiment {
    cfg: ScenarioConfig,
}

/// Rows produced by [`dp_experiment_run`].
pub struct DpResults {
    rows: Vec<CsvRow>,
}

/// One output row. Random axes are reported as [lo, hi]; fixed values have
/// lo == hi. Missing values are NaN (std_error of asymptotic rows) or −1
/// (n_bits outside bit-budget sweeps).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpRow {
    pub scheme: DpScheme,
    pub snr_db: f64,
    pub chi_lo: f64,
    pub chi_hi: f64,
    pub tau_sq_lo: f64,
    pub tau_sq_hi: f64,
    pub n_bits: i64,
    pub sum_rate: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub tau_clamped: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(DpStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match &e {
            CliError::Config(_) => DpStatus::Config,
            CliError::Numerical(_) => DpStatus::Numerical,
            CliError::Io(_) | CliError::Csv(_) => DpStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() { DpStatus::Numerical } else { DpStatus::InvalidArgument };
        Failure(status, e.to_string())
    }
}

fn fail(status: DpStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DpStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (DpStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (DpStatus::Panic, format!("panic: {m}"))
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(DpStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(DpStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(DpStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(DpStatus::NullPointer, format!("{what} is NULL")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// plus one, so a caller can size the buffer; 1 means no error.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

fn boxed(cfg: ScenarioConfig, out: &mut *mut DpExperiment) {
    *out = Box::into_raw(Box::new(DpExperiment { cfg }));
}

/// Creates an experiment from a built-in preset name ("fig4", ...).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_from_preset(name: *const c_char, out: *mut *mut DpExperiment) -> DpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = cli::preset(c_str(name, "name")?)?;
        boxed(cfg, out);
        Ok(())
    })
}

/// Creates an experiment from config text (`key = value` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_from_config(text: *const c_char, out: *mut *mut DpExperiment) -> DpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = ScenarioConfig::parse(c_str(text, "text")?)?;
        boxed(cfg, out);
        Ok(())
    })
}

/// # Safety
/// `exp` must be a live handle from one of the constructors.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_set_trials(exp: *mut DpExperiment, n_trials: usize) -> DpStatus {
    guard(|| {
        if n_trials == 0 {
            return Err(fail(DpStatus::InvalidArgument, "n_trials must be at least 1"));
        }
        out_ref(exp, "experiment")?.cfg.n_trials = n_trials;
        Ok(())
    })
}

/// # Safety
/// `exp` must be a live handle from one of the constructors.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_set_seed(exp: *mut DpExperiment, seed: u64) -> DpStatus {
    guard(|| {
        out_ref(exp, "experiment")?.cfg.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `exp` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_free(exp: *mut DpExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Runs the whole sweep and returns its rows.
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_run(exp: *const DpExperiment, out: *mut *mut DpResults) -> DpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let rows = cli::run_collect(&handle(exp, "experiment")?.cfg)?;
        *out = Box::into_raw(Box::new(DpResults { rows }));
        Ok(())
    })
}

/// Runs the sweep, appending CSV rows to `path` (the header is written if
/// the file is new; an existing file must carry the same header).
///
/// # Safety
/// `exp` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dp_experiment_run_csv(exp: *const DpExperiment, path: *const c_char) -> DpStatus {
    guard(|| {
        let cfg = &handle(exp, "experiment")?.cfg;
        cfg.validate()?;
        let mut sink = cli::file_sink(Path::new(c_str(path, "path")?))?;
        cli::run_to_sink(cfg, &mut sink)?;
        Ok(())
    })
}

/// Number of rows; 0 for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dp_results_len(res: *const DpResults) -> usize {
    res.as_ref().map_or(0, |r| r.rows.len())
}

fn axis(v: &AxisValue) -> (f64, f64) {
    match *v {
        AxisValue::Fixed(x) => (x, x),
        AxisValue::Uniform(a, b) => (a, b),
    }
}

/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_results_get(res: *const DpResults, index: usize, out: *mut DpRow) -> DpStatus {
    guard(|| {
        let res = handle(res, "results")?;
        let out = out_ref(out, "out")?;
        let r = res
            .rows
            .get(index)
            .ok_or_else(|| fail(DpStatus::InvalidArgument, format!("row {index} out of range ({})", res.rows.len())))?;
        let (chi_lo, chi_hi) = axis(&r.chi);
        let (tau_sq_lo, tau_sq_hi) = axis(&r.tau_sq);
        *out = DpRow {
            scheme: r.scheme.into(),
            snr_db: r.snr_db,
            chi_lo,
            chi_hi,
            tau_sq_lo,
            tau_sq_hi,
            n_bits: r.n_bits.map_or(-1, i64::from),
            sum_rate: r.sum_rate,
            std_error: r.stderr.unwrap_or(f64::NAN),
            n_trials: r.n_trials,
            seed: r.seed,
            tau_clamped: r.flags.contains(&"tau_clamped"),
        };
        Ok(())
    })
}

/// Copies the row's scenario label into `buf`; returns its length plus one
/// (0 if the handle or index is invalid).
///
/// # Safety
/// `res` must be NULL or a live handle; `buf` NULL or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dp_results_scenario_id(
    res: *const DpResults,
    index: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    let Some(row) = res.as_ref().and_then(|r| r.rows.get(index)) else { return 0 };
    let bytes = row.scenario_id.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
        *buf.add(n) = 0;
    }
    bytes.len() + 1
}

/// # Safety
/// `res` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dp_results_free(res: *mut DpResults) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

fn structure(s: DpScheme) -> Result<Scheme, Failure> {
    match s {
        DpScheme::Bd | DpScheme::AsymBd => Ok(Scheme::Bd),
        DpScheme::Bds | DpScheme::AsymBds => Ok(Scheme::Bds),
        o => Err(fail(DpStatus::InvalidArgument, format!("{o:?} is not a precoding structure"))),
    }
}

/// Quantization distortion τ² for `n_bits` per user with `r` dominant
/// eigenvectors per polarization. `scheme` selects BD or BDS.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_tau_from_bits(n_bits: u32, r: usize, scheme: DpScheme, out: *mut f64) -> DpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = tau_from_bits(&FeedbackBudget { n_bits, r }, structure(scheme)?)?;
        Ok(())
    })
}

/// Effective gain and inverse XPD under a uniform orientation mismatch.
///
/// # Safety
/// `c_eff` and `chi_eff` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_mismatch_stats(chi: f64, theta_max: f64, c_eff: *mut f64, chi_eff: *mut f64) -> DpStatus {
    guard(|| {
        let (c, x) = (out_ref(c_eff, "c_eff")?, out_ref(chi_eff, "chi_eff")?);
        let s = mismatch_effective_stats(chi, theta_max)?;
        (*c, *x) = (s.c_eff, s.chi_eff);
        Ok(())
    })
}

/// Large-system sum rate of a clustered cell (groups spaced π/6 apart from
/// −π/4, half-wavelength dual-polarized array, default B̄ and r). The CSIT
/// error τ² applies to the chosen structure as given.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_asymptotic_sum_rate(
    antennas: usize,
    groups: usize,
    users_per_group: usize,
    spread: f64,
    snr_db: f64,
    chi: f64,
    tau_sq: f64,
    scheme: DpScheme,
    out: *mut f64,
) -> DpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let scheme = structure(scheme)?;
        let mut spec = ScenarioSpec::clustered(antennas, groups, users_per_group, spread)?;
        spec.snr_db = snr_db;
        spec.chi = ChiModel::Fixed(chi);
        spec.csit = CsitModel::Equal { tau_sq };
        let sc = GroupScenario::build(spec)?;
        *out = asymptotic(&sc, scheme)?.sum_rate;
        Ok(())
    })
}
