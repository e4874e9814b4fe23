//! C ABI over the lanetrack simulator, metrics and lane fitting.
//!
//! Every fallible function returns an [`LtStatus`]; on failure a message is
//! available from [`lt_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lanetrack::lanefit::{boundary_cubic, fit_cubic, resample};
use lanetrack::metrics::compute_metrics_with;
use lanetrack::sim::{run, Scenario, SimLog, Termination};
use lanetrack::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, unknown override key or a value outside its domain.
    InvalidInput = 3,
    /// Degenerate geometry or numerics, e.g. too few points for a fit.
    Numerical = 4,
    Io = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtTermination {
    LapComplete = 0,
    Finished = 1,
    Timeout = 2,
    Unrecorded = 3,
}

/// One simulation step. Target and error fields are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LtRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
    pub v_app: f64,
    pub omega_app: f64,
    pub x_t: f64,
    pub y_t: f64,
    pub phi_t: f64,
    pub phi_t_dot: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v1: f64,
    pub v2: f64,
    pub flags: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LtMetrics {
    pub completion_time: f64,
    pub avg_linear_speed: f64,
    pub avg_angular_speed: f64,
    pub mae_lateral: f64,
    pub mae_orientation: f64,
    pub rmse_linear_speed: f64,
    pub linear_speed_deviation_pct: f64,
    pub accumulated_orientation: f64,
}

/// `y = c0 + c1 x + c2 x^2 + c3 x^3`, valid on `[x_lo, x_hi]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LtCubic {
    pub coeffs: [f64; 4],
    pub x_lo: f64,
    pub x_hi: f64,
    pub degree: u32,
    pub residual_norm: f64,
}

/// Opaque scenario handle.
pub struct LtScenario(Scenario);

/// Opaque simulation log handle.
pub struct LtLog(SimLog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify(e: &Error) -> LtStatus {
    match e {
        Error::Io(_) => LtStatus::Io,
        Error::InvalidParams(_)
        | Error::InvalidScenario(_)
        | Error::UnknownOverride(_)
        | Error::Malformed(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::PixelOutOfBounds { .. }
        | Error::NonPositiveDt(_)
        | Error::NonPositiveSpacing(_)
        | Error::NonPositiveDuration(_) => LtStatus::InvalidInput,
        _ => LtStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status and message.
fn guard(f: impl FnOnce() -> Result<(), (LtStatus, String)>) -> LtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LtStatus::Panic
        }
    }
}

fn lib<T>(r: lanetrack::Result<T>) -> Result<T, (LtStatus, String)> {
    r.map_err(|e| (classify(&e), e.to_string()))
}

fn null(name: &str) -> (LtStatus, String) {
    (LtStatus::NullArgument, format!("`{name}` is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, name: &str) -> Result<&'a str, (LtStatus, String)> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (LtStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

/// # Safety
/// `p` must be null or point to a live value of `T`.
unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, (LtStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len` bytes) and returns the full message length excluding
/// the terminator; 0 when there is no message.
///
/// # Safety
/// `buf` must be null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a scenario from JSON. Missing fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_scenario_from_json(json: *const c_char, out: *mut *mut LtScenario) -> LtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sc = lib(Scenario::from_json(text(json, "json")?))?;
        *out = Box::into_raw(Box::new(LtScenario(sc)));
        Ok(())
    })
}

/// Applies a `dotted.key=value` override in place.
///
/// # Safety
/// `sc` must be a live scenario handle; `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lt_scenario_set(sc: *mut LtScenario, assignment: *const c_char) -> LtStatus {
    guard(|| {
        let sc = sc.as_mut().ok_or_else(|| null("scenario"))?;
        let updated = lib(sc.0.with_overrides(&[text(assignment, "assignment")?]))?;
        sc.0 = updated;
        Ok(())
    })
}

/// Serialises the scenario as JSON into a newly allocated string, released
/// with [`lt_string_free`].
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_scenario_to_json(sc: *const LtScenario, out: *mut *mut c_char) -> LtStatus {
    guard(|| {
        let sc = get(sc, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(sc.0.to_json()).expect("JSON has no NUL bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `sc` must be null or a live scenario handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lt_scenario_free(sc: *mut LtScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Runs the scenario to termination.
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_run(sc: *const LtScenario, out: *mut *mut LtLog) -> LtStatus {
    guard(|| {
        let sc = get(sc, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let log = lib(run(&sc.0))?;
        *out = Box::into_raw(Box::new(LtLog(log)));
        Ok(())
    })
}

/// Number of records; 0 for a null handle.
///
/// # Safety
/// `log` must be null or a live log handle.
#[no_mangle]
pub unsafe extern "C" fn lt_log_len(log: *const LtLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.records.len())
}

/// # Safety
/// `log` must be a live log handle.
#[no_mangle]
pub unsafe extern "C" fn lt_log_termination(log: *const LtLog) -> LtTermination {
    match log.as_ref().map(|l| l.0.termination) {
        Some(Termination::LapComplete) => LtTermination::LapComplete,
        Some(Termination::Finished) => LtTermination::Finished,
        Some(Termination::Timeout) => LtTermination::Timeout,
        _ => LtTermination::Unrecorded,
    }
}

/// Copies record `index` into `out`.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_log_record(log: *const LtLog, index: usize, out: *mut LtRecord) -> LtStatus {
    guard(|| {
        let log = get(log, "log")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n = log.0.records.len();
        let r = log.0.records.get(index).ok_or((LtStatus::OutOfRange, format!("record {index} of {n}")))?;
        let nan = f64::NAN;
        let [x_t, y_t, phi_t, phi_t_dot] = r.target.map_or([nan; 4], |t| [t.x, t.y, t.phi, t.phi_dot]);
        let [rho, alpha, beta, v1, v2] = r.error.map_or([nan; 5], |e| [e.rho, e.alpha, e.beta, e.v1, e.v2]);
        *out = LtRecord {
            t: r.t,
            x: r.pose.x,
            y: r.pose.y,
            phi: r.pose.phi,
            v_cmd: r.commanded.v,
            omega_cmd: r.commanded.omega,
            v_app: r.applied.v,
            omega_app: r.applied.omega,
            x_t,
            y_t,
            phi_t,
            phi_t_dot,
            rho,
            alpha,
            beta,
            v1,
            v2,
            flags: r.flags,
        };
        Ok(())
    })
}

/// Writes the log as CSV to `path`.
///
/// # Safety
/// `log` must be a live log handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lt_log_write_csv(log: *const LtLog, path: *const c_char) -> LtStatus {
    guard(|| {
        let log = get(log, "log")?;
        let file = lib(std::fs::File::create(text(path, "path")?).map_err(Error::from))?;
        lib(log.0.write_csv(std::io::BufWriter::new(file)))
    })
}

/// # Safety
/// `log` must be null or a live log handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lt_log_free(log: *mut LtLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Path-tracking metrics of `log` against the scenario's track and speed.
///
/// # Safety
/// `log` and `sc` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_metrics(log: *const LtLog, sc: *const LtScenario, out: *mut LtMetrics) -> LtStatus {
    guard(|| {
        let (log, sc) = (get(log, "log")?, get(sc, "scenario")?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let track = lib(sc.0.track.build())?;
        let m = lib(compute_metrics_with(&log.0, &track.reference_path, sc.0.v_t, &sc.0.metrics))?;
        *out = LtMetrics {
            completion_time: m.completion_time,
            avg_linear_speed: m.avg_linear_speed,
            avg_angular_speed: m.avg_angular_speed,
            mae_lateral: m.mae_lateral,
            mae_orientation: m.mae_orientation,
            rmse_linear_speed: m.rmse_linear_speed,
            linear_speed_deviation_pct: m.linear_speed_deviation_pct,
            accumulated_orientation: m.accumulated_orientation,
        };
        Ok(())
    })
}

/// Least-squares cubic through `n` samples.
///
/// # Safety
/// `xs` and `ys` must be readable for `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_fit_cubic(xs: *const f64, ys: *const f64, n: usize, out: *mut LtCubic) -> LtStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(null("xs/ys"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (xs, ys) = (std::slice::from_raw_parts(xs, n), std::slice::from_raw_parts(ys, n));
        let fit = lib(fit_cubic(xs, ys))?;
        *out = LtCubic {
            coeffs: fit.poly.coeffs,
            x_lo: fit.poly.x_range[0],
            x_hi: fit.poly.x_range[1],
            degree: fit.degree as u32,
            residual_norm: fit.residual_norm,
        };
        Ok(())
    })
}

/// Cubic `theta(t)` with `theta(0) = theta0`, `theta(t0) = theta_t` and end
/// rates `rate0`, `rate_t`; coefficients in ascending powers.
///
/// # Safety
/// `out` must be writable for four values.
#[no_mangle]
pub unsafe extern "C" fn lt_boundary_cubic(
    theta0: f64,
    theta_t: f64,
    rate0: f64,
    rate_t: f64,
    t0: f64,
    out: *mut f64,
) -> LtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = lib(boundary_cubic(theta0, theta_t, rate0, rate_t, t0))?;
        ptr::copy_nonoverlapping(c.as_ptr(), out, 4);
        Ok(())
    })
}

/// Resamples `n` interleaved `x, y` points at arc-length spacing `delta_s`.
/// The required point count is stored in `out_len`; when it exceeds `cap`
/// nothing is written and `BufferTooSmall` is returned.
///
/// # Safety
/// `pts` must be readable for `2 n` values, `out` writable for `2 cap`
/// values (may be null when `cap` is 0), and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_resample(
    pts: *const f64,
    n: usize,
    delta_s: f64,
    out: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> LtStatus {
    guard(|| {
        if pts.is_null() || out_len.is_null() {
            return Err(null("pts/out_len"));
        }
        let raw = std::slice::from_raw_parts(pts, 2 * n);
        let points: Vec<[f64; 2]> = raw.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let res = lib(resample(&points, delta_s))?;
        *out_len = res.len();
        if res.len() > cap || out.is_null() {
            return Err((LtStatus::BufferTooSmall, format!("{} points needed, capacity {cap}", res.len())));
        }
        ptr::copy_nonoverlapping(res.as_ptr().cast::<f64>(), out, 2 * res.len());
        Ok(())
    })
}
