//! C ABI over `pbt_recycle`.
//!
//! Every function returns a [`PbtStatus`] and writes its result through an
//! out-pointer. On failure a message is kept per thread and can be read with
//! [`pbt_last_error_message`]. Coefficient sets cross the boundary as opaque
//! [`PbtCoefficients`] handles; strings handed out by the library must be
//! released with [`pbt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pbt_recycle::closed_form;
use pbt_recycle::error::Error;
use pbt_recycle::optimal::{self, VCoefficients};
use pbt_recycle::oracle::{self, Oracle};

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionCap = 3,
    InvalidCoefficients = 4,
    Numerical = 5,
    Io = 6,
    Utf8 = 7,
    Panic = 8,
}

/// Opaque coefficient set `{v_μ}` for one `(N, d)`.
pub struct PbtCoefficients(VCoefficients);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes stripped");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PbtStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidPartition { .. }
        | Error::NoBoxToRemove
        | Error::FrameExceedsDimension { .. }
        | Error::NotOneBox { .. } => PbtStatus::InvalidArgument,
        Error::DimensionCap { .. } => PbtStatus::DimensionCap,
        Error::Coefficients(_) => PbtStatus::InvalidCoefficients,
        Error::Io(_) => PbtStatus::Io,
        _ => PbtStatus::Numerical,
    }
}

enum Failure {
    Status(PbtStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F>(body: F) -> PbtStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PbtStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Status(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            PbtStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(PbtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a>(p: *const PbtCoefficients, what: &str) -> Result<&'a VCoefficients, Failure> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn input_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure::Status(PbtStatus::Utf8, format!("{what}: {e}")))
}

fn output_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure::Status(PbtStatus::Utf8, e.to_string()))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pbt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pbt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pbt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Recycling fidelity of the non-optimal protocol.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_frec(ports: u32, d: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, closed_form::frec(ports, d)?.value, "out"))
}

/// Qubit closed form of [`pbt_frec`].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_frec_qubit(ports: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, closed_form::frec_qubit(ports)?.value, "out"))
}

/// `tr(√Π_N V′)` for the square-root measurement.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_trace_sqrt_povm_signal(ports: u32, d: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, closed_form::trace_sqrt_povm_signal(ports, d)?, "out"))
}

/// `1 - 2k(1 - f1)`; negative values are returned as is.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_kround_lower_bound(f1: f64, rounds: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, closed_form::kround_lower_bound(f1, rounds)?, "out"))
}

/// Recycling fidelity of the optimal protocol for arbitrary coefficients.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_frec_optimal(
    ports: u32,
    d: u32,
    v_n: *const PbtCoefficients,
    v_nm1: *const PbtCoefficients,
    out: *mut f64,
) -> PbtStatus {
    guard(|| {
        let f = optimal::frec_optimal(ports, d, handle(v_n, "v_n")?, handle(v_nm1, "v_nm1")?)?;
        write(out, f.value, "out")
    })
}

/// Optimal-protocol recycling fidelity at `d = 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_frec_optimal_qubit(ports: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, optimal::frec_optimal_qubit(ports)?.value, "out"))
}

/// Overlap between the optimal and non-optimal resource states.
///
/// # Safety
/// `v` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_resource_fidelity(
    ports: u32,
    d: u32,
    v: *const PbtCoefficients,
    out: *mut f64,
) -> PbtStatus {
    guard(|| {
        let f = optimal::resource_state_fidelity(ports, d, handle(v, "v")?)?;
        write(out, f.value, "out")
    })
}

/// Qubit resource-state overlap in the angular-momentum parametrization.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_resource_fidelity_qubit_angular(ports: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, optimal::resource_state_fidelity_qubit_angular(ports)?, "out"))
}

/// Non-optimal recycling fidelity from explicit matrices (small sizes only).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_frec_oracle(ports: u32, d: u32, out: *mut f64) -> PbtStatus {
    guard(|| write(out, oracle::frec_oracle(ports, d)?.value, "out"))
}

/// Run the oracle verification suite. `passed` receives the verdict and
/// `report_json` a string to release with [`pbt_string_free`].
///
/// # Safety
/// Out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_oracle_verify(
    ports: u32,
    d: u32,
    tolerance: f64,
    passed: *mut bool,
    report_json: *mut *mut c_char,
) -> PbtStatus {
    guard(|| {
        if passed.is_null() || report_json.is_null() {
            return Err(null("output pointer"));
        }
        let report = oracle::verify_suite(&Oracle::default(), ports, d, tolerance)?;
        let text = serde_json::to_string(&report).map_err(|e| Failure::Status(PbtStatus::Numerical, e.to_string()))?;
        let s = output_string(text)?;
        passed.write(report.passed);
        report_json.write(s);
        Ok(())
    })
}

/// Qubit optimal coefficients in closed form.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_coefficients_qubit(ports: u32, out: *mut *mut PbtCoefficients) -> PbtStatus {
    guard(|| {
        let v = optimal::v_qubit_analytic(ports)?;
        write(out, Box::into_raw(Box::new(PbtCoefficients(v))), "out")
    })
}

/// Parse and validate a coefficient document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_coefficients_from_json(json: *const c_char, out: *mut *mut PbtCoefficients) -> PbtStatus {
    guard(|| {
        let v = optimal::load_v_coefficients(input_str(json, "json")?)?;
        write(out, Box::into_raw(Box::new(PbtCoefficients(v))), "out")
    })
}

/// Serialize a coefficient set; release the result with [`pbt_string_free`].
///
/// # Safety
/// `v` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_coefficients_to_json(v: *const PbtCoefficients, out: *mut *mut c_char) -> PbtStatus {
    guard(|| {
        let text = handle(v, "v")?.to_json();
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(output_string(text)?);
        Ok(())
    })
}

/// Number of frames in a coefficient set.
///
/// # Safety
/// `v` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pbt_coefficients_len(v: *const PbtCoefficients, out: *mut usize) -> PbtStatus {
    guard(|| write(out, handle(v, "v")?.len(), "out"))
}

/// Release a coefficient handle. Null is ignored.
///
/// # Safety
/// `v` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pbt_coefficients_free(v: *mut PbtCoefficients) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}
