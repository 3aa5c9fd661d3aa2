//! C ABI over `husimi-phase`.
//!
//! States are opaque `HpState` handles created by the `hp_state_*`
//! constructors and released with [`hp_state_free`]. Every call returns an
//! [`HpStatus`]; on failure [`hp_last_error`] copies the message for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use husimi_phase::damping::{apply_loss, DampingParams};
use husimi_phase::husimi::{q_repr, QFormRepr};
use husimi_phase::phasedist::{self, SinglePhase, TwoPhase};
use husimi_phase::states::{NgOp, Preset, StateSpec};
use husimi_phase::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad parameter values or an unknown preset.
    InvalidArgument = 2,
    /// Parameters outside the region where the formulas converge.
    Domain = 3,
    /// Internal numerical failure.
    Computation = 4,
    /// The output buffer is shorter than required.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Q-function representation of a heralded squeezed state.
pub struct HpState {
    repr: QFormRepr,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> HpStatus {
    match err {
        Error::Invalid { .. } | Error::Usage(_) | Error::Dimension { .. } | Error::Index { .. } => HpStatus::InvalidArgument,
        Error::Domain(_) | Error::HeraldFailure { .. } => HpStatus::Domain,
        _ => HpStatus::Computation,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (HpStatus, String)>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside husimi-phase");
            HpStatus::Panic
        }
    }
}

fn lib<T>(r: husimi_phase::Result<T>) -> Result<T, (HpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HpStatus, String) {
    (HpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn state_ref<'a>(state: *const HpState) -> Result<&'a HpState, (HpStatus, String)> {
    state.as_ref().ok_or_else(|| null("state"))
}

fn emit(out: *mut *mut HpState, repr: QFormRepr) {
    let handle = Box::into_raw(Box::new(HpState { repr }));
    // SAFETY: callers check `out` for null before building the state.
    unsafe { *out = handle };
}

fn build(out: *mut *mut HpState, spec: impl FnOnce() -> husimi_phase::Result<StateSpec>) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = lib(spec())?;
        emit(out, lib(q_repr(&spec))?);
        Ok(())
    })
}

/// Single-mode squeezed vacuum with `k` photons injected and `l` detected at
/// a beam splitter of transmissivity `tau`.
#[no_mangle]
pub extern "C" fn hp_state_single(lambda: f64, k: u32, l: u32, tau: f64, out: *mut *mut HpState) -> HpStatus {
    build(out, || StateSpec::single(lambda, NgOp::new(k, l, tau)?))
}

/// Two-mode squeezed vacuum with an independent operation on each mode.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn hp_state_two(
    lambda: f64,
    k1: u32,
    l1: u32,
    tau1: f64,
    k2: u32,
    l2: u32,
    tau2: f64,
    out: *mut *mut HpState,
) -> HpStatus {
    build(out, || StateSpec::two(lambda, NgOp::new(k1, l1, tau1)?, NgOp::new(k2, l2, tau2)?))
}

/// Named preset such as `"sym-ps:2"`; `tau` applies to every operated mode.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hp_state_preset(name: *const c_char, lambda: f64, tau: f64, out: *mut *mut HpState) -> HpStatus {
    if name.is_null() {
        set_error("name is null");
        return HpStatus::NullPointer;
    }
    let name = CStr::from_ptr(name).to_string_lossy().into_owned();
    build(out, || name.parse::<Preset>()?.spec(lambda, tau, tau))
}

/// New state after amplitude damping at per-mode rates for time `t`
/// (`gamma2` is ignored for single-mode states).
///
/// # Safety
/// `state` must come from an `hp_state_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn hp_state_damp(
    state: *const HpState,
    gamma1: f64,
    gamma2: f64,
    t: f64,
    out: *mut *mut HpState,
) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let gammas = if s.repr.modes() == 1 { vec![gamma1] } else { vec![gamma1, gamma2] };
        let d = lib(DampingParams::new(gammas, t))?;
        emit(out, lib(apply_loss(&s.repr, &d.etas()))?);
        Ok(())
    })
}

/// Releases a state. Null is accepted.
///
/// # Safety
/// `state` must come from an `hp_state_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hp_state_free(state: *mut HpState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of modes (1 or 2), or 0 for a null handle.
///
/// # Safety
/// `state` must be null or come from an `hp_state_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn hp_state_modes(state: *const HpState) -> u32 {
    state.as_ref().map_or(0, |s| s.repr.modes() as u32)
}

/// Q at a phase-space point of length `2 × modes`.
///
/// # Safety
/// `xi` must point to `len` doubles and `out` to one double.
#[no_mangle]
pub unsafe extern "C" fn hp_q(state: *const HpState, xi: *const f64, len: usize, out: *mut f64) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if xi.is_null() || out.is_null() {
            return Err(null("xi or out"));
        }
        let point = std::slice::from_raw_parts(xi, len);
        *out = lib(s.repr.eval(point))?;
        Ok(())
    })
}

/// Single-mode phase distribution at `theta`.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn hp_phase(state: *const HpState, theta: f64, out: *mut f64) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(SinglePhase::new(&s.repr).and_then(|k| k.at(theta)))?;
        Ok(())
    })
}

/// Two-mode phase distribution at `(theta1, theta2)`.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn hp_phase_two(state: *const HpState, theta1: f64, theta2: f64, out: *mut f64) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(TwoPhase::new(&s.repr).and_then(|k| k.at(theta1, theta2)))?;
        Ok(())
    })
}

/// Phase distribution on the closed grid `θᵢ = −π + 2πi/(points−1)`
/// (two-mode states: over `θ₊` with `θ₁ = θ₂ = θ₊/2`). Writes `points` values
/// and, when `summary` is non-null, `[peak θ, width, normalization residual]`.
///
/// # Safety
/// `values` must hold `capacity` doubles; `summary` is null or holds 3.
#[no_mangle]
pub unsafe extern "C" fn hp_phase_grid(
    state: *const HpState,
    points: usize,
    values: *mut f64,
    capacity: usize,
    summary: *mut f64,
) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if values.is_null() {
            return Err(null("values"));
        }
        if capacity < points {
            return Err((HpStatus::BufferTooSmall, format!("{points} values need a buffer of {points}, got {capacity}")));
        }
        let dist = lib(if s.repr.modes() == 1 {
            phasedist::phase_single_grid(&s.repr, points)
        } else {
            phasedist::phase_two_sweep(&s.repr, points)
        })?;
        std::slice::from_raw_parts_mut(values, points).copy_from_slice(&dist.values);
        if !summary.is_null() {
            std::slice::from_raw_parts_mut(summary, 3).copy_from_slice(&[dist.peak_theta, dist.width, dist.norm_residual]);
        }
        Ok(())
    })
}

/// Windowed second-moment width of a single-mode distribution about
/// `center`.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn hp_width(state: *const HpState, center: f64, out: *mut f64) -> HpStatus {
    guard(|| {
        let s = state_ref(state)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kernel = lib(SinglePhase::new(&s.repr))?;
        *out = lib(phasedist::width_about(|t| kernel.at(t), center))?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
