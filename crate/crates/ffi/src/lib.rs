//! C ABI over the `sharpfront` crate.
//!
//! Conventions:
//!
//! * every fallible call returns an [`SfStatus`]; `SF_OK` is zero
//! * on failure a message is kept per thread and can be read with
//!   [`sf_last_error`] until the next failing call on that thread
//! * models and states are opaque handles created by `sf_*_new*` and released
//!   with the matching `sf_*_free`; passing NULL to a free function is allowed
//! * fields are exchanged as `n1 * n2` doubles in row-major order, x1 slow
//!
//! The header `include/sharpfront.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sharpfront::error::Error;
use sharpfront::fronts::{extract_front_pair, FrontSpec, SeedPath};
use sharpfront::integrator::{stable_dt, step_rk4, StepControl};
use sharpfront::models::{builtin_initial_data, HyperdissipationParams, Model, ModelKind, ModelState};
use sharpfront::runner::{self, RunError};
use sharpfront::spectral::{GridSpec, RealField};

/// Result codes of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    SfOk = 0,
    SfNullPointer = 1,
    SfInvalidArgument = 2,
    SfInvalidUtf8 = 3,
    SfConfig = 4,
    SfIo = 5,
    SfSnapshot = 6,
    SfGauge = 7,
    SfBlowUp = 8,
    SfFrontCollapse = 9,
    SfFrontBreakdown = 10,
    SfBufferSize = 11,
    SfPanic = 12,
}

/// A configured model: kind, grid and hyperdissipation.
pub struct SfModel {
    inner: Model,
}

/// Prognostic fields at one time.
pub struct SfState {
    inner: ModelState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SfStatus, String);

type FfiResult<T = ()> = Result<T, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Gauge { .. } => SfStatus::SfGauge,
            Error::BlowUp { .. } => SfStatus::SfBlowUp,
            Error::FrontCollapse { .. } => SfStatus::SfFrontCollapse,
            Error::FrontLost { .. } | Error::FrontBreakdown { .. } | Error::ParticleNonFinite { .. } => {
                SfStatus::SfFrontBreakdown
            }
            _ => SfStatus::SfInvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Core(inner) => inner.into(),
            RunError::Config(_) => Failure(SfStatus::SfConfig, e.to_string()),
            RunError::Io { .. } => Failure(SfStatus::SfIo, e.to_string()),
            RunError::Snapshot(_) => Failure(SfStatus::SfSnapshot, e.to_string()),
        }
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> FfiResult) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SfStatus::SfOk,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SfStatus::SfPanic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SfStatus::SfNullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(SfStatus::SfInvalidUtf8, format!("{what}: {e}")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn field_arg(p: *const f64, grid: GridSpec) -> FfiResult<Option<RealField>> {
    if p.is_null() {
        return Ok(None);
    }
    let values = std::slice::from_raw_parts(p, grid.len()).to_vec();
    Ok(Some(RealField::new(grid, values)?))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or NULL when none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a model.
///
/// `kind` is one of `passive`, `euler`, `qg`, `boussinesq`, `mhd`.
/// `stream_function` is an expression in `x1`, `x2`, `t` for `passive` and
/// must be NULL otherwise. `nu = 0` disables hyperdissipation.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_model_new(
    kind: *const c_char,
    stream_function: *const c_char,
    n1: usize,
    n2: usize,
    nu: f64,
    p: u32,
    out: *mut *mut SfModel,
) -> SfStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let kind = ModelKind::from_name(str_arg(kind, "kind")?, opt_str_arg(stream_function, "stream_function")?)?;
        let grid = GridSpec::new(n1, n2)?;
        let model = Model::new(kind, grid, HyperdissipationParams::new(nu, p)?)?;
        *out = Box::into_raw(Box::new(SfModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`sf_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_model_free(model: *mut SfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Grid sizes of a model.
///
/// # Safety
/// `model` must be a live handle; `n1` and `n2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_model_grid(model: *const SfModel, n1: *mut usize, n2: *mut usize) -> SfStatus {
    guard(|| {
        let g = handle(model, "model")?.inner.grid();
        *out_slot(n1, "n1")? = g.n1();
        *out_slot(n2, "n2")? = g.n2();
        Ok(())
    })
}

/// Builds a state from named built-in initial data (see `sharpfront scenarios`).
///
/// # Safety
/// `model` must be a live handle, `name` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_state_new_scenario(
    model: *const SfModel,
    name: *const c_char,
    out: *mut *mut SfState,
) -> SfStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let m = &handle(model, "model")?.inner;
        let state = builtin_initial_data(str_arg(name, "name")?, m.kind(), m.grid())?;
        *out = Box::into_raw(Box::new(SfState { inner: state }));
        Ok(())
    })
}

/// Builds a state from caller-owned arrays of `n1 * n2` doubles. Pass NULL
/// for a field the model does not carry.
///
/// # Safety
/// Non-NULL `theta` and `omega` must point to `n1 * n2` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_state_new_fields(
    model: *const SfModel,
    theta: *const f64,
    omega: *const f64,
    t: f64,
    out: *mut *mut SfState,
) -> SfStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let m = &handle(model, "model")?.inner;
        let theta = field_arg(theta, m.grid())?;
        let omega = field_arg(omega, m.grid())?;
        let state = ModelState::new(m.kind().clone(), theta, omega, t)?;
        *out = Box::into_raw(Box::new(SfState { inner: state }));
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn sf_state_free(state: *mut SfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `t` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_state_time(state: *const SfState, t: *mut f64) -> SfStatus {
    guard(|| {
        *out_slot(t, "t")? = handle(state, "state")?.inner.t;
        Ok(())
    })
}

/// Copies the field `name` (`theta` or `omega`) into `buf`, which must hold
/// exactly `len == n1 * n2` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_state_copy_field(
    state: *const SfState,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
) -> SfStatus {
    guard(|| {
        let s = &handle(state, "state")?.inner;
        let field = match str_arg(name, "name")? {
            "theta" => s.theta.as_ref(),
            "omega" => s.omega.as_ref(),
            other => return Err(Failure(SfStatus::SfInvalidArgument, format!("unknown field `{other}`"))),
        }
        .ok_or_else(|| Failure(SfStatus::SfInvalidArgument, format!("model `{}` lacks this field", s.kind.name())))?;
        if len != field.values().len() {
            return Err(Failure(
                SfStatus::SfBufferSize,
                format!("buffer holds {len} values, field has {}", field.values().len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(field.values());
        Ok(())
    })
}

/// Largest stable step for `state` under the given CFL factor and cap.
///
/// # Safety
/// Handles must be live; `dt` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_stable_dt(
    model: *const SfModel,
    state: *const SfState,
    cfl: f64,
    dt_max: f64,
    dt: *mut f64,
) -> SfStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let s = &handle(state, "state")?.inner;
        let ctl = StepControl::new(cfl, dt_max, s.t + dt_max, dt_max, dt_max)?;
        let speed = m.flow_of_state(s)?.velocity.max_speed();
        *out_slot(dt, "dt")? = stable_dt(m, speed, &ctl);
        Ok(())
    })
}

/// Advances `state` in place by one RK4 step of size `dt`. On failure the
/// state is left unchanged.
///
/// # Safety
/// Handles must be live and `state` not aliased elsewhere during the call.
#[no_mangle]
pub unsafe extern "C" fn sf_step(model: *const SfModel, state: *mut SfState, dt: f64) -> SfStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let s = state.as_mut().ok_or_else(|| null("state"))?;
        s.inner = step_rk4(m, &s.inner, dt)?;
        Ok(())
    })
}

/// Extracts the two front graphs of `theta` over `[a, b]` at `samples`
/// equally spaced columns. Each output array must hold `samples` doubles.
///
/// # Safety
/// `x1`, `f_plus`, `f_minus` must each point to `samples` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_extract_front(
    state: *const SfState,
    level_plus: f64,
    level_minus: f64,
    a: f64,
    b: f64,
    seed_plus: f64,
    seed_minus: f64,
    samples: usize,
    x1: *mut f64,
    f_plus: *mut f64,
    f_minus: *mut f64,
) -> SfStatus {
    guard(|| {
        let s = &handle(state, "state")?.inner;
        let theta = s
            .theta
            .as_ref()
            .ok_or_else(|| Failure(SfStatus::SfInvalidArgument, "state has no theta".into()))?;
        if x1.is_null() || f_plus.is_null() || f_minus.is_null() {
            return Err(null("output array"));
        }
        let spec = FrontSpec::new(
            level_plus,
            level_minus,
            (a, b),
            SeedPath::Constant(seed_plus),
            SeedPath::Constant(seed_minus),
            samples,
        )?;
        let pair = extract_front_pair(theta, &spec, s.t, None)?;
        std::slice::from_raw_parts_mut(x1, samples).copy_from_slice(&pair.x1);
        std::slice::from_raw_parts_mut(f_plus, samples).copy_from_slice(&pair.f_plus);
        std::slice::from_raw_parts_mut(f_minus, samples).copy_from_slice(&pair.f_minus);
        Ok(())
    })
}

/// Runs `sharpfront simulate` on TOML text. `out_dir` may be NULL to use the
/// directory from the config. `exit_code` receives the command-line exit
/// status (0 clean, 2 blow-up, 3 collapse, 4 breakdown); a run that ends in
/// one of those events still returns `SF_OK`.
///
/// # Safety
/// Strings must be NUL-terminated; `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_simulate(config: *const c_char, out_dir: *const c_char, exit_code: *mut i32) -> SfStatus {
    guard(|| {
        let exit_code = out_slot(exit_code, "exit_code")?;
        let cfg = runner::parse_config(str_arg(config, "config")?)?;
        let dir = opt_str_arg(out_dir, "out_dir")?;
        let report = runner::simulate(&cfg, dir.map(Path::new))?;
        *exit_code = report.exit.code();
        Ok(())
    })
}

/// Runs `sharpfront diagnose` over the snapshots in `run_dir` with the
/// front specification given as TOML text. `out_dir` may be NULL.
///
/// # Safety
/// Strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sf_diagnose(
    run_dir: *const c_char,
    frontspec: *const c_char,
    out_dir: *const c_char,
) -> SfStatus {
    guard(|| {
        let dcfg = runner::parse_diagnose_config(str_arg(frontspec, "frontspec")?)?;
        let dir = opt_str_arg(out_dir, "out_dir")?;
        runner::diagnose(Path::new(str_arg(run_dir, "run_dir")?), &dcfg, dir.map(Path::new))?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(sf_last_error()).to_string_lossy().into_owned() }
    }

    #[test]
    fn null_out_pointer_is_reported() {
        let st = unsafe { sf_model_new(c"qg".as_ptr(), ptr::null(), 16, 16, 0.0, 4, ptr::null_mut()) };
        assert_eq!(st, SfStatus::SfNullPointer);
        assert!(last_error().contains("out"));
    }

    #[test]
    fn bad_grid_is_invalid_argument() {
        let mut m = ptr::null_mut();
        let st = unsafe { sf_model_new(c"qg".as_ptr(), ptr::null(), 7, 16, 0.0, 4, &mut m) };
        assert_eq!(st, SfStatus::SfInvalidArgument);
        assert!(m.is_null());
        assert!(last_error().contains("grid"));
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(sf_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
