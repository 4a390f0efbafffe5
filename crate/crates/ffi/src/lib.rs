//! C ABI for the adhyp solver.
//!
//! Every fallible function returns an [`AdhypStatus`]. On failure the
//! message is kept per thread and can be read with
//! [`adhyp_last_error_message`]. Solvers are opaque handles created by
//! [`adhyp_solver_new`] and released with [`adhyp_solver_free`]. Panics never
//! cross the boundary; they are reported as [`AdhypStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adhyp::indicator::{tau_new, tau_old};
use adhyp::{
    phi_sbm, problem, Dimension, Error, Initialization, LimiterParams, SchemeConfig, Solver,
    Strategy,
};

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdhypStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    /// A state with non-positive density or pressure was met.
    InvalidState = 4,
    SolverAborted = 5,
    /// The destination buffer holds fewer values than the mesh has cells.
    BufferTooSmall = 6,
    IoError = 7,
    /// A panic was caught at the boundary. The handle involved should be
    /// freed and not used further.
    Panic = 8,
}

/// Opaque solver handle.
pub struct AdhypSolver {
    solver: Solver,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    // Interior NULs would truncate the C string; replace them.
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> AdhypStatus {
    match e {
        Error::InvalidState { .. } | Error::Decomposition { .. } => AdhypStatus::InvalidState,
        Error::InvalidParameter { .. } | Error::IncompatibleMesh(_) => AdhypStatus::InvalidArgument,
        Error::UnknownProblem(_) => AdhypStatus::UnknownProblem,
        Error::Aborted { .. } => AdhypStatus::SolverAborted,
        Error::Parse { .. } | Error::Io(_) => AdhypStatus::IoError,
    }
}

struct Failure(AdhypStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any error message and converts panics to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdhypStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AdhypStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {what}"));
            AdhypStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(AdhypStatus::NullPointer, format!("`{name}` is NULL"))
}

/// # Safety
/// `s` must be NULL or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s).to_str().map(Some).map_err(|_| {
        Failure(
            AdhypStatus::InvalidArgument,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

/// # Safety
/// `handle` must be NULL or a pointer returned by [`adhyp_solver_new`] that
/// has not been freed.
unsafe fn solver_ref<'a>(handle: *const AdhypSolver) -> Result<&'a Solver, Failure> {
    handle
        .as_ref()
        .map(|h| &h.solver)
        .ok_or_else(|| null("solver"))
}

/// # Safety
/// As [`solver_ref`], and no other reference to the handle may be live.
unsafe fn solver_mut<'a>(handle: *mut AdhypSolver) -> Result<&'a mut Solver, Failure> {
    handle
        .as_mut()
        .map(|h| &mut h.solver)
        .ok_or_else(|| null("solver"))
}

/// Creates a solver for a catalog problem at `t = 0`.
///
/// `scheme` is `"new"`, `"old"` or `"fixed:<tau>"`; NULL means `"new"`.
/// A non-positive or NaN `c` selects the problem's default adaption constant.
/// `nx` or `ny` equal to zero selects the default mesh size in that
/// direction; `ny` is ignored for 1-D problems.
///
/// # Safety
/// `problem_id` must be a valid NUL-terminated string, `scheme` NULL or a
/// valid NUL-terminated string, and `out` a valid pointer to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_new(
    problem_id: *const c_char,
    scheme: *const c_char,
    c: f64,
    nx: usize,
    ny: usize,
    out: *mut *mut AdhypSolver,
) -> AdhypStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let id = str_arg(problem_id, "problem")?.ok_or_else(|| null("problem"))?;
        let spec = problem(id)?;
        let strategy: Strategy = str_arg(scheme, "scheme")?.unwrap_or("new").parse()?;
        let c = if c > 0.0 { c } else { spec.default_c(strategy) };
        let config = SchemeConfig::new(strategy, c, spec.gas())?;
        let (dnx, dny) = spec.mesh;
        let nx = if nx == 0 { dnx } else { nx };
        let ny = match spec.dim {
            Dimension::One => 1,
            Dimension::Two if ny == 0 => dny,
            Dimension::Two => ny,
        };
        let solver = spec.solver(Some((nx, ny)), config, Initialization::Midpoint)?;
        *out = Box::into_raw(Box::new(AdhypSolver { solver }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or a pointer returned by [`adhyp_solver_new`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_free(handle: *mut AdhypSolver) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Advances one step of the CFL-limited size. The step taken is written
/// to `dt_out` unless it is NULL.
///
/// # Safety
/// `handle` must be a live handle; `dt_out` NULL or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_step(
    handle: *mut AdhypSolver,
    dt_out: *mut f64,
) -> AdhypStatus {
    guard(|| {
        let solver = solver_mut(handle)?;
        let dt = solver.stable_dt()?;
        solver.step(dt)?;
        if let Some(slot) = dt_out.as_mut() {
            *slot = dt;
        }
        Ok(())
    })
}

/// Marches to `t_target`, landing on it exactly.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_advance_to(
    handle: *mut AdhypSolver,
    t_target: f64,
) -> AdhypStatus {
    guard(|| {
        let solver = solver_mut(handle)?;
        if t_target < solver.time() || t_target.is_nan() {
            return Err(Failure(
                AdhypStatus::InvalidArgument,
                format!("target time {t_target} lies before t={}", solver.time()),
            ));
        }
        if t_target > solver.time() {
            solver.advance_to(t_target, |_| {})?;
        }
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_time(
    handle: *const AdhypSolver,
    out: *mut f64,
) -> AdhypStatus {
    guard(|| {
        let solver = solver_ref(handle)?;
        *out.as_mut().ok_or_else(|| null("out"))? = solver.time();
        Ok(())
    })
}

/// Number of steps taken and positivity fallbacks used so far.
///
/// # Safety
/// `handle` must be a live handle; `steps` and `fallbacks` NULL or valid
/// for one write each.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_counters(
    handle: *const AdhypSolver,
    steps: *mut u64,
    fallbacks: *mut u64,
) -> AdhypStatus {
    guard(|| {
        let solver = solver_ref(handle)?;
        if let Some(s) = steps.as_mut() {
            *s = solver.steps();
        }
        if let Some(f) = fallbacks.as_mut() {
            *f = solver.total_fallbacks();
        }
        Ok(())
    })
}

/// Interior mesh size; `ny` is 1 for 1-D problems.
///
/// # Safety
/// `handle` must be a live handle; `nx` and `ny` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_shape(
    handle: *const AdhypSolver,
    nx: *mut usize,
    ny: *mut usize,
) -> AdhypStatus {
    guard(|| {
        let grid = *solver_ref(handle)?.field().grid();
        *nx.as_mut().ok_or_else(|| null("nx"))? = grid.nx();
        *ny.as_mut().ok_or_else(|| null("ny"))? = grid.ny();
        Ok(())
    })
}

fn copy_out(
    values: impl ExactSizeIterator<Item = f64>,
    buf: *mut f64,
    len: usize,
) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    let n = values.len();
    if len < n {
        return Err(Failure(
            AdhypStatus::BufferTooSmall,
            format!("buffer holds {len} values, {n} needed"),
        ));
    }
    // SAFETY: the caller guarantees `buf` is valid for `len >= n` writes.
    let dst = unsafe { std::slice::from_raw_parts_mut(buf, n) };
    for (d, v) in dst.iter_mut().zip(values) {
        *d = v;
    }
    Ok(())
}

/// Cell-average densities, x fastest, into `buf` of `len` values.
///
/// # Safety
/// `handle` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_copy_density(
    handle: *const AdhypSolver,
    buf: *mut f64,
    len: usize,
) -> AdhypStatus {
    guard(|| {
        let field = solver_ref(handle)?.field();
        let n = field.grid().interior_cells();
        let rho: Vec<f64> = field.interior().map(|(_, _, u)| u.rho).collect();
        debug_assert_eq!(rho.len(), n);
        copy_out(rho.into_iter(), buf, len)
    })
}

/// Per-cell limiter parameter `tau` of the current state, x fastest.
///
/// # Safety
/// `handle` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn adhyp_solver_copy_tau(
    handle: *const AdhypSolver,
    buf: *mut f64,
    len: usize,
) -> AdhypStatus {
    guard(|| {
        let tau: Vec<f64> = solver_ref(handle)?
            .tau_field()
            .interior()
            .map(|(_, _, _, _, t)| t)
            .collect();
        copy_out(tau.into_iter(), buf, len)
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns the full message length
/// without the terminator. Returns 0 when there is no message.
///
/// # Safety
/// `buf` must be NULL or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn adhyp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(message) = slot.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Limiter function `phi(r)`. NaN when `theta` or `tau` is out of range.
#[no_mangle]
pub extern "C" fn adhyp_phi_sbm(r: f64, theta: f64, tau: f64) -> f64 {
    LimiterParams::new(theta, tau).map_or(f64::NAN, |p| phi_sbm(r, &p))
}

/// Continuous map from the averaged indicator to `tau`.
#[no_mangle]
pub extern "C" fn adhyp_tau_new(e_bar: f64, c: f64) -> f64 {
    tau_new(e_bar, c)
}

/// Two-valued switch from the averaged indicator to `tau`.
#[no_mangle]
pub extern "C" fn adhyp_tau_old(e_bar: f64, c: f64) -> f64 {
    tau_old(e_bar, c)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn adhyp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
