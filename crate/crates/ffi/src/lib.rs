//! C ABI over `qbnf-core`.
//!
//! Every fallible call returns a [`QbnfStatus`]; on failure the message is
//! available from [`qbnf_last_error_message`] on the same thread. Objects are
//! opaque handles released with their matching `*_free` function, strings
//! returned to the caller are released with [`qbnf_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::{c_char, size_t};
use qbnf_core::approximation::gamma_sup;
use qbnf_core::gevrey::{beta_fn, gamma_fn};
use qbnf_core::pipeline::{PipelineOptions, RunReport};
use qbnf_core::{ApproximationFunction, ProblemConfig, QbnfError, TorusSymbol};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbnfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Input = 4,
    Configuration = 5,
    Shape = 6,
    Size = 7,
    Resonant = 8,
    SmallDivisor = 9,
    Validity = 10,
    Numeric = 11,
    Fit = 12,
    Sequencing = 13,
    Selection = 14,
    Io = 15,
    Panic = 16,
}

impl From<&QbnfError> for QbnfStatus {
    fn from(e: &QbnfError) -> Self {
        match e {
            QbnfError::Domain(_) => QbnfStatus::Domain,
            QbnfError::Input(_) => QbnfStatus::Input,
            QbnfError::Configuration(_) => QbnfStatus::Configuration,
            QbnfError::Shape(_) => QbnfStatus::Shape,
            QbnfError::Size(_) => QbnfStatus::Size,
            QbnfError::Resonant { .. } => QbnfStatus::Resonant,
            QbnfError::SmallDivisor { .. } => QbnfStatus::SmallDivisor,
            QbnfError::Validity(_) => QbnfStatus::Validity,
            QbnfError::Numeric(_) => QbnfStatus::Numeric,
            QbnfError::Fit(_) => QbnfStatus::Fit,
            QbnfError::Sequencing(_) => QbnfStatus::Sequencing,
            QbnfError::Selection(_) => QbnfStatus::Selection,
            QbnfError::Io(_) => QbnfStatus::Io,
        }
    }
}

/// Approximation function `Delta`.
pub struct QbnfDelta(ApproximationFunction);

/// Parsed problem configuration.
pub struct QbnfConfig(ProblemConfig);

/// Pipeline report.
pub struct QbnfReport(RunReport);

/// Truncated torus symbol.
pub struct QbnfSymbol(TorusSymbol);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: QbnfStatus, msg: impl Into<String>) -> QbnfStatus {
    set_last_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), QbnfStatus>) -> QbnfStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QbnfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(QbnfStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, QbnfStatus>;
}

impl<T> OrStatus<T> for qbnf_core::Result<T> {
    fn or_status(self) -> Result<T, QbnfStatus> {
        self.map_err(|e| fail(QbnfStatus::from(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, QbnfStatus> {
    if p.is_null() {
        return Err(fail(QbnfStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            QbnfStatus::InvalidUtf8,
            format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, QbnfStatus> {
    p.as_ref()
        .ok_or_else(|| fail(QbnfStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), QbnfStatus> {
    if out.is_null() {
        return Err(fail(QbnfStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qbnf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qbnf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qbnf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qbnf_gamma(x: f64, out: *mut f64) -> QbnfStatus {
    guard(|| write_out(out, gamma_fn(x).or_status()?, "out"))
}

/// # Safety
/// `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qbnf_beta(x: f64, y: f64, out: *mut f64) -> QbnfStatus {
    guard(|| write_out(out, beta_fn(x, y).or_status()?, "out"))
}

unsafe fn new_delta(
    made: qbnf_core::Result<ApproximationFunction>,
    out: *mut *mut QbnfDelta,
) -> QbnfStatus {
    guard(|| {
        let d = made.or_status()?;
        write_out(out, Box::into_raw(Box::new(QbnfDelta(d))), "out")
    })
}

/// `Delta(t) = (1+t)^exponent`.
///
/// # Safety
/// `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_polynomial(
    exponent: f64,
    sigma: f64,
    out: *mut *mut QbnfDelta,
) -> QbnfStatus {
    new_delta(ApproximationFunction::polynomial(exponent, sigma), out)
}

/// `Delta(t) = exp(t^a / a)`, requires `a < 1/sigma`.
///
/// # Safety
/// `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_sub_exponential(
    a: f64,
    sigma: f64,
    out: *mut *mut QbnfDelta,
) -> QbnfStatus {
    new_delta(ApproximationFunction::sub_exponential(a, sigma), out)
}

/// `Delta(t) = exp(t^(1/sigma) / (1 + log^gamma(1+t)))`.
///
/// # Safety
/// `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_log_tempered(
    gamma: f64,
    sigma: f64,
    out: *mut *mut QbnfDelta,
) -> QbnfStatus {
    new_delta(ApproximationFunction::log_tempered(gamma, sigma), out)
}

/// `(1+t)^power * Delta(t)` as a new handle.
///
/// # Safety
/// `delta` must be a live handle; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_with_power(
    delta: *const QbnfDelta,
    power: f64,
    out: *mut *mut QbnfDelta,
) -> QbnfStatus {
    match ref_arg(delta, "delta") {
        Ok(d) => new_delta(d.0.with_power(power), out),
        Err(s) => s,
    }
}

/// # Safety
/// `delta` must be a live handle; `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_eval(
    delta: *const QbnfDelta,
    t: f64,
    out: *mut f64,
) -> QbnfStatus {
    guard(|| {
        let d = ref_arg(delta, "delta")?;
        write_out(out, d.0.evaluate(t).or_status()?, "out")
    })
}

/// `Gamma_s(eta) = sup_t (1+t)^s Delta(t) exp(-eta t^(1/sigma))` and its argmax.
///
/// # Safety
/// `delta` must be a live handle; `out_value` and `out_argmax` must be writable (`out_argmax` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_gamma_sup(
    delta: *const QbnfDelta,
    s: f64,
    eta: f64,
    out_value: *mut f64,
    out_argmax: *mut f64,
) -> QbnfStatus {
    guard(|| {
        let d = ref_arg(delta, "delta")?;
        let sup = gamma_sup(&d.0, s, eta).or_status()?;
        write_out(out_value, sup.value, "out_value")?;
        if !out_argmax.is_null() {
            out_argmax.write(sup.argmax_t);
        }
        Ok(())
    })
}

/// # Safety
/// `delta` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qbnf_delta_free(delta: *mut QbnfDelta) {
    if !delta.is_null() {
        drop(Box::from_raw(delta));
    }
}

/// Scans `0 < |k|_1 <= k_radius` and reports `kappa_max = min |<k,omega>| Delta(|k|)`
/// and the minimizing mode (written to `out_worst_k`, `n` entries).
///
/// # Safety
/// `omega` must point to `n` doubles, `out_worst_k` to `n` writable `int64_t`
/// (or be NULL), `out_kappa_max` to one writable `double`.
#[no_mangle]
pub unsafe extern "C" fn qbnf_scan_divisors(
    omega: *const f64,
    n: size_t,
    delta: *const QbnfDelta,
    k_radius: u64,
    kappa: f64,
    out_kappa_max: *mut f64,
    out_worst_k: *mut i64,
) -> QbnfStatus {
    guard(|| {
        if omega.is_null() || n == 0 {
            return Err(fail(QbnfStatus::NullPointer, "omega is null or empty"));
        }
        let omega = std::slice::from_raw_parts(omega, n);
        let d = ref_arg(delta, "delta")?;
        let rep = qbnf_core::scan_divisors(omega, &d.0, k_radius, kappa).or_status()?;
        write_out(out_kappa_max, rep.kappa_max, "out_kappa_max")?;
        if !out_worst_k.is_null() {
            ptr::copy_nonoverlapping(rep.worst_k.entries().as_ptr(), out_worst_k, n);
        }
        Ok(())
    })
}

/// Parses a TOML configuration from a string.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_config_parse(
    text: *const c_char,
    out: *mut *mut QbnfConfig,
) -> QbnfStatus {
    guard(|| {
        let cfg = qbnf_core::parse_config_str(str_arg(text, "text")?).or_status()?;
        write_out(out, Box::into_raw(Box::new(QbnfConfig(cfg))), "out")
    })
}

/// Parses a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_config_parse_file(
    path: *const c_char,
    out: *mut *mut QbnfConfig,
) -> QbnfStatus {
    guard(|| {
        let cfg = qbnf_core::parse_config(Path::new(str_arg(path, "path")?)).or_status()?;
        write_out(out, Box::into_raw(Box::new(QbnfConfig(cfg))), "out")
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qbnf_config_free(config: *mut QbnfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the pipeline. A report is produced even when a stage fails; check
/// [`qbnf_report_success`].
///
/// # Safety
/// `config` must be a live handle; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_run(
    config: *const QbnfConfig,
    tolerance: f64,
    check_only: bool,
    out: *mut *mut QbnfReport,
) -> QbnfStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        let options = PipelineOptions {
            check_only,
            tolerance,
            ..Default::default()
        };
        let rep = qbnf_core::run_pipeline(&cfg.0, options).or_status()?;
        write_out(out, Box::into_raw(Box::new(QbnfReport(rep))), "out")
    })
}

/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qbnf_report_success(report: *const QbnfReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.success)
}

/// Serializes the report; free the string with [`qbnf_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_report_to_json(
    report: *const QbnfReport,
    out: *mut *mut c_char,
) -> QbnfStatus {
    guard(|| {
        let r = ref_arg(report, "report")?;
        write_out(out, into_c_string(r.0.to_json().or_status()?), "out")
    })
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qbnf_report_free(report: *mut QbnfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_symbol_from_json(
    json: *const c_char,
    out: *mut *mut QbnfSymbol,
) -> QbnfStatus {
    guard(|| {
        let s = TorusSymbol::from_json(str_arg(json, "json")?).or_status()?;
        write_out(out, Box::into_raw(Box::new(QbnfSymbol(s))), "out")
    })
}

/// # Safety
/// `symbol` must be a live handle; `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_symbol_to_json(
    symbol: *const QbnfSymbol,
    out: *mut *mut c_char,
) -> QbnfStatus {
    guard(|| {
        let s = ref_arg(symbol, "symbol")?;
        write_out(out, into_c_string(s.0.to_json()), "out")
    })
}

/// `a # b` truncated to the union of both shapes. `out_clipped` (nullable)
/// receives the discarded l1 mass.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must point to writable memory for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qbnf_symbol_compose(
    a: *const QbnfSymbol,
    b: *const QbnfSymbol,
    out: *mut *mut QbnfSymbol,
    out_clipped: *mut f64,
) -> QbnfStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        let (c, clip) = a.0.compose(&b.0).or_status()?;
        if !out_clipped.is_null() {
            out_clipped.write(clip.total());
        }
        write_out(out, Box::into_raw(Box::new(QbnfSymbol(c))), "out")
    })
}

/// # Safety
/// `symbol` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qbnf_symbol_free(symbol: *mut QbnfSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}
