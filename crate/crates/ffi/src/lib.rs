//! C ABI over `hadamard`.
//!
//! Every fallible entry point returns an [`HdStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and read
//! with [`hd_last_error`]. Handles are opaque and owned by the caller until
//! passed to their `_free` function; strings returned by the library are
//! released with [`hd_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hadamard::bounds::{evaluate_bound, BoundParams, BoundReport, TheoremId};
use hadamard::funcspec::{FunctionSpec, Interval};
use hadamard::harness::{any_asserted_failure, findings, run_all, TrialConfig};
use hadamard::means::{log_mean_pow, MeanOrder};
use hadamard::quad::{deviation_d1, deviation_d2, lemma11_identity, SignConvention};
use hadamard::report::{to_json, ReportDocument};
use hadamard::special::{beta, gamma};
use hadamard::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Domain = 5,
    Numerical = 6,
    Config = 7,
    Panic = 8,
}

/// `sign` argument of the second-order calls.
pub const HD_SIGN_PLUS: c_int = 0;
pub const HD_SIGN_MINUS: c_int = 1;

/// Opaque function handle.
pub struct HdFunction(FunctionSpec);

/// Opaque bound evaluation.
pub struct HdBoundReport(BoundReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(HdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => HdStatus::Parse,
            Error::Domain(_) | Error::PositivityRequired(_) | Error::UnsupportedOrder(_) => {
                HdStatus::Domain
            }
            Error::NonFiniteValue { .. } | Error::ToleranceNotReached { .. } => HdStatus::Numerical,
            Error::Config(_) => HdStatus::Config,
            _ => HdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            HdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            HdStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(HdStatus::NullPointer, "null pointer argument".into())
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(HdStatus::InvalidUtf8, e.to_string()))
}

unsafe fn function<'a>(f: *const HdFunction) -> Result<&'a FunctionSpec, Failure> {
    f.as_ref().map(|h| &h.0).ok_or_else(null)
}

fn sign(s: c_int) -> Result<SignConvention, Failure> {
    match s {
        HD_SIGN_PLUS => Ok(SignConvention::PlusDerived),
        HD_SIGN_MINUS => Ok(SignConvention::MinusAsPrinted),
        _ => Err(Failure(
            HdStatus::InvalidArgument,
            format!("unknown sign {s}"),
        )),
    }
}

fn present(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(HdStatus::InvalidArgument, e.to_string()))
}

/// Message of the last failed call on this thread, or `""`. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `pow:N`, `exp:C` or `poly:C0,C1,...`.
///
/// # Safety
/// `spec` is a NUL-terminated string, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_function_parse(
    spec: *const c_char,
    out_fn: *mut *mut HdFunction,
) -> HdStatus {
    guard(|| {
        let slot = out(out_fn)?;
        *slot = ptr::null_mut();
        let f: FunctionSpec = str_arg(spec)?.parse()?;
        *slot = Box::into_raw(Box::new(HdFunction(f)));
        Ok(())
    })
}

/// # Safety
/// `f` is null or a handle from [`hd_function_parse`].
#[no_mangle]
pub unsafe extern "C" fn hd_function_free(f: *mut HdFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// The `order`-th derivative (0 to 3) at `x`.
///
/// # Safety
/// `f` is a live handle, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_function_eval(
    f: *const HdFunction,
    x: f64,
    order: u32,
    out_value: *mut f64,
) -> HdStatus {
    guard(|| {
        *out(out_value)? = function(f)?.eval(x, order)?;
        Ok(())
    })
}

/// Canonical spec string; free with [`hd_string_free`].
///
/// # Safety
/// `f` is a live handle, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_function_to_string(
    f: *const HdFunction,
    out_str: *mut *mut c_char,
) -> HdStatus {
    guard(|| {
        let slot = out(out_str)?;
        *slot = c_string(function(f)?.to_string())?;
        Ok(())
    })
}

/// Evaluates one bound. `p`, `q` and `m` are NaN when absent; `theorem` is an
/// id such as `"thm2.4"`.
///
/// # Safety
/// `theorem` is a NUL-terminated string, `f` a live handle, the out-pointer valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hd_bound_evaluate(
    theorem: *const c_char,
    f: *const HdFunction,
    a: f64,
    b: f64,
    p: f64,
    q: f64,
    m: f64,
    sign_convention: c_int,
    out_report: *mut *mut HdBoundReport,
) -> HdStatus {
    guard(|| {
        let slot = out(out_report)?;
        *slot = ptr::null_mut();
        let theorem: TheoremId = str_arg(theorem)?.parse()?;
        let params = BoundParams::for_theorem(theorem, present(p), present(q), present(m))?;
        let iv = Interval::new(a, b)?;
        let r = evaluate_bound(theorem, function(f)?, &iv, &params, sign(sign_convention)?)?;
        *slot = Box::into_raw(Box::new(HdBoundReport(r)));
        Ok(())
    })
}

/// # Safety
/// `r` is null or a handle from [`hd_bound_evaluate`].
#[no_mangle]
pub unsafe extern "C" fn hd_bound_free(r: *mut HdBoundReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

unsafe fn report<'a>(r: *const HdBoundReport) -> Option<&'a BoundReport> {
    r.as_ref().map(|h| &h.0)
}

/// `|lhs|`, or NaN for a null handle.
///
/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_lhs(r: *const HdBoundReport) -> f64 {
    report(r).map_or(f64::NAN, |r| r.lhs_abs)
}

/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_rhs(r: *const HdBoundReport) -> f64 {
    report(r).map_or(f64::NAN, |r| r.rhs)
}

/// `rhs - |lhs|`.
///
/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_margin(r: *const HdBoundReport) -> f64 {
    report(r).map_or(f64::NAN, |r| r.margin)
}

/// 1 if every hypothesis passed, 0 if not, -1 for a null handle.
///
/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_hypotheses_ok(r: *const HdBoundReport) -> c_int {
    report(r).map_or(-1, |r| c_int::from(r.hypotheses.overall))
}

/// The full report as JSON; free with [`hd_string_free`].
///
/// # Safety
/// `r` is a live handle, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_to_json(
    r: *const HdBoundReport,
    out_json: *mut *mut c_char,
) -> HdStatus {
    guard(|| {
        let slot = out(out_json)?;
        *slot = c_string(to_json(report(r).ok_or_else(null)?)?)?;
        Ok(())
    })
}

/// # Safety
/// The out-pointer is valid.
#[no_mangle]
pub unsafe extern "C" fn hd_gamma(x: f64, out_value: *mut f64) -> HdStatus {
    guard(|| {
        *out(out_value)? = gamma(x)?;
        Ok(())
    })
}

/// # Safety
/// The out-pointer is valid.
#[no_mangle]
pub unsafe extern "C" fn hd_beta(x: f64, y: f64, out_value: *mut f64) -> HdStatus {
    guard(|| {
        *out(out_value)? = beta(x, y)?;
        Ok(())
    })
}

/// `L_n^n(a, b) = (b^{n+1} - a^{n+1}) / ((n+1)(b-a))`.
///
/// # Safety
/// The out-pointer is valid.
#[no_mangle]
pub unsafe extern "C" fn hd_log_mean_pow(a: f64, b: f64, n: u32, out_value: *mut f64) -> HdStatus {
    guard(|| {
        *out(out_value)? = log_mean_pow(a, b, MeanOrder::new(n)?)?;
        Ok(())
    })
}

/// Both sides of the trapezoid-error identity for `f` on `[a, b]`.
///
/// # Safety
/// `f` is a live handle, `lhs` and `rhs` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hd_lemma11(
    f: *const HdFunction,
    a: f64,
    b: f64,
    lhs: *mut f64,
    rhs: *mut f64,
) -> HdStatus {
    guard(|| {
        let (l, r) = (out(lhs)?, out(rhs)?);
        (*l, *r) = lemma11_identity(function(f)?, &Interval::new(a, b)?)?;
        Ok(())
    })
}

/// `D1 = avg f - (b f(b) - a f(a)) / (b - a)`.
///
/// # Safety
/// `f` is a live handle, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_deviation_d1(
    f: *const HdFunction,
    a: f64,
    b: f64,
    out_value: *mut f64,
) -> HdStatus {
    guard(|| {
        *out(out_value)? = deviation_d1(function(f)?, &Interval::new(a, b)?)?;
        Ok(())
    })
}

/// `D2 = D1 ± (b f'(b) + a f'(a)) / 2`, plus for [`HD_SIGN_PLUS`].
///
/// # Safety
/// `f` is a live handle, the out-pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hd_deviation_d2(
    f: *const HdFunction,
    a: f64,
    b: f64,
    sign_convention: c_int,
    out_value: *mut f64,
) -> HdStatus {
    guard(|| {
        *out(out_value)? =
            deviation_d2(function(f)?, &Interval::new(a, b)?, sign(sign_convention)?)?;
        Ok(())
    })
}

/// Runs the property suites described by `config_json` (the `verify` config
/// file format; `"{}"` for defaults) and returns the JSON report.
/// `exit_code` receives what `hadamard verify` would exit with: 0 or 1.
///
/// # Safety
/// `config_json` is a NUL-terminated string, the out-pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn hd_verify_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
    exit_code: *mut c_int,
) -> HdStatus {
    guard(|| {
        let (slot, code) = (out(out_json)?, out(exit_code)?);
        *slot = ptr::null_mut();
        let config: TrialConfig = serde_json::from_str(str_arg(config_json)?)
            .map_err(|e| Failure(HdStatus::Config, format!("config: {e}")))?;
        config.validate()?;
        let batches = run_all(&config)?;
        let f = findings(&config, &batches);
        let json = ReportDocument::new(&config, &batches, &f, false, None).to_json()?;
        *code = c_int::from(any_asserted_failure(&batches));
        *slot = c_string(json)?;
        Ok(())
    })
}
