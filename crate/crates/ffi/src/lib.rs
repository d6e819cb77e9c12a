//! C ABI over `helidec`.
//!
//! Every fallible call returns an [`HdStatus`]; `HD_STATUS_OK` is zero. On
//! failure a message is kept per thread and can be read with
//! [`hd_last_error_message`]. Handles are opaque and owned by the caller,
//! who releases them with the matching `*_free` function. Panics never cross
//! the boundary: they surface as `HD_STATUS_PANIC`.
//!
//! Amplitudes are exchanged as separate real and imaginary arrays of length
//! [`hd_state_mode_count`], in the stored half-lattice order reported by
//! [`hd_state_wavevectors`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use helidec::checkpoint::CheckpointError;
use helidec::diagnostics::{energy_budget_residual, helicity_budget_residual};
use helidec::{random_state, Dynamics, Error, Grid, SpectralState, Stepper};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidGrid = 3,
    EmptyBand = 4,
    ZeroWaveVector = 5,
    DegenerateAxis = 6,
    ForcingOutsideTruncation = 7,
    NonFinite = 8,
    Config = 9,
    BadMagic = 10,
    VersionMismatch = 11,
    TruncatedFile = 12,
    InconsistentGrid = 13,
    Io = 14,
    Panic = 15,
}

/// Opaque spectral state.
pub struct HdState(SpectralState);

/// Opaque dynamics: viscosity, forcing and the transform plans for one mode set.
pub struct HdDynamics(Dynamics);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HdStatus {
    match e {
        Error::InvalidParameter(_) | Error::InvalidAxis | Error::InvalidTriad(_) | Error::ViscosityZero => {
            HdStatus::InvalidParameter
        }
        Error::InvalidGrid(_) | Error::GridTooLarge { .. } => HdStatus::InvalidGrid,
        Error::EmptyBand { .. } => HdStatus::EmptyBand,
        Error::ZeroWaveVector => HdStatus::ZeroWaveVector,
        Error::DegenerateAxis(_) => HdStatus::DegenerateAxis,
        Error::ForcingOutsideTruncation(_) => HdStatus::ForcingOutsideTruncation,
        Error::NonFinite { .. } => HdStatus::NonFinite,
        Error::Config(_) => HdStatus::Config,
        Error::Checkpoint(c) => match c {
            CheckpointError::BadMagic => HdStatus::BadMagic,
            CheckpointError::VersionMismatch(_) => HdStatus::VersionMismatch,
            CheckpointError::TruncatedFile => HdStatus::TruncatedFile,
            CheckpointError::InconsistentGrid(_) => HdStatus::InconsistentGrid,
        },
        Error::Io { .. } => HdStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HdStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            HdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Core(Error::InvalidParameter("path is not valid UTF-8".into())))?;
    Ok(PathBuf::from(s))
}

fn put<T>(out: *mut *mut T, value: T) {
    // callers check `out` before doing any work
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Random state on cutoff `n` (`|k_i| <= n`) with amplitudes `|k|^exponent`
/// inside `band_lo <= |k| <= band_hi`, rescaled to energy 0.5.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hd_state_random(
    n: usize,
    exponent: f64,
    band_lo: f64,
    band_hi: f64,
    seed: u64,
    out: *mut *mut HdState,
) -> HdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let s = random_state(Grid::new(n)?, exponent, [band_lo, band_hi], seed)?;
        put(out, HdState(s));
        Ok(())
    })
}

/// Deep copy of a state.
///
/// # Safety
/// `state` must be a live handle or NULL; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hd_state_clone(state: *const HdState, out: *mut *mut HdState) -> HdStatus {
    guard(|| {
        let s = deref(state, "state")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        put(out, HdState(s.0.clone()));
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_state_free(state: *mut HdState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of stored half-lattice modes, or 0 for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_mode_count(state: *const HdState) -> usize {
    state.as_ref().map_or(0, |s| s.0.modes().len())
}

/// Cutoff `N` of the state's grid, or 0 for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_cutoff(state: *const HdState) -> usize {
    state.as_ref().map_or(0, |s| s.0.grid().n())
}

/// Simulation time carried by the state; NaN for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_time(state: *const HdState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.time)
}

/// `Σ|u+|²` over the full lattice; NaN for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_energy(state: *const HdState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.energy())
}

/// `Σ|k||u+|²` over the full lattice; NaN for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_helicity(state: *const HdState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.helicity())
}

/// `Σ|k|³|u+|²` over the full lattice; NaN for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_dissipation(state: *const HdState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.dissipation_sum())
}

/// Sobolev norm `(Σ|k|^{2s}|u+|²)^{1/2}`; NaN for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hd_state_norm_hs(state: *const HdState, s: f64) -> f64 {
    state.as_ref().map_or(f64::NAN, |st| st.0.norm_hs(s))
}

/// Writes the stored wavevectors as `len` triples `(kx, ky, kz)` into `k`.
///
/// # Safety
/// `k` must point to `3 * len` writable `int32_t`.
#[no_mangle]
pub unsafe extern "C" fn hd_state_wavevectors(state: *const HdState, k: *mut i32, len: usize) -> HdStatus {
    guard(|| {
        let s = deref(state, "state")?;
        check_len(s, len)?;
        if k.is_null() {
            return Err(Fail::Null("k"));
        }
        let dst = slice::from_raw_parts_mut(k, 3 * len);
        for (d, w) in dst.chunks_exact_mut(3).zip(s.0.modes().modes()) {
            d.copy_from_slice(&[w.kx, w.ky, w.kz]);
        }
        Ok(())
    })
}

fn check_len(s: &HdState, len: usize) -> Result<(), Fail> {
    let want = s.0.modes().len();
    if len != want {
        return Err(Fail::Core(Error::InvalidParameter(format!("buffer length {len}, state has {want} modes"))));
    }
    Ok(())
}

/// Copies the amplitudes into `re` and `im`, each of length `len`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hd_state_get_amplitudes(
    state: *const HdState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HdStatus {
    guard(|| {
        let s = deref(state, "state")?;
        check_len(s, len)?;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        let (re, im) = (slice::from_raw_parts_mut(re, len), slice::from_raw_parts_mut(im, len));
        for (i, a) in s.0.amplitudes().iter().enumerate() {
            re[i] = a.re;
            im[i] = a.im;
        }
        Ok(())
    })
}

/// Overwrites the amplitudes from `re` and `im`, each of length `len`.
///
/// # Safety
/// `re` and `im` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn hd_state_set_amplitudes(
    state: *mut HdState,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> HdStatus {
    guard(|| {
        let s = deref_mut(state, "state")?;
        check_len(s, len)?;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        let (re, im) = (slice::from_raw_parts(re, len), slice::from_raw_parts(im, len));
        for (i, a) in s.0.amplitudes_mut().iter_mut().enumerate() {
            *a = Complex64::new(re[i], im[i]);
        }
        Ok(())
    })
}

/// Reads a checkpoint; the stored viscosity goes to `nu` when non-NULL.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable; `nu` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hd_checkpoint_read(path: *const c_char, out: *mut *mut HdState, nu: *mut f64) -> HdStatus {
    guard(|| {
        let p = path_arg(path)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let ck = helidec::read_checkpoint(p)?;
        if !nu.is_null() {
            *nu = ck.nu;
        }
        put(out, HdState(ck.state));
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hd_checkpoint_write(state: *const HdState, nu: f64, path: *const c_char) -> HdStatus {
    guard(|| {
        let s = deref(state, "state")?;
        helidec::write_checkpoint(&s.0, nu, path_arg(path)?)?;
        Ok(())
    })
}

/// Dynamics on the mode set of `like`. `force_amp = 0` means unforced;
/// otherwise forcing fills `force_lo <= |k| <= force_hi` with total
/// `Σ|f+|² = force_amp²` and random phases drawn from `seed`.
///
/// # Safety
/// `like` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_dynamics_new(
    like: *const HdState,
    nu: f64,
    force_lo: f64,
    force_hi: f64,
    force_amp: f64,
    seed: u64,
    out: *mut *mut HdDynamics,
) -> HdStatus {
    guard(|| {
        let s = deref(like, "like")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let modes = s.0.modes().clone();
        let dynamics = if force_amp > 0.0 {
            let f = helidec::integrator::make_forcing_on(modes.clone(), [force_lo, force_hi], force_amp, seed)?;
            Dynamics::new(modes, nu, f)?
        } else {
            Dynamics::unforced(modes, nu)?
        };
        put(out, HdDynamics(dynamics));
        Ok(())
    })
}

/// # Safety
/// `dynamics` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_dynamics_free(dynamics: *mut HdDynamics) {
    if !dynamics.is_null() {
        drop(Box::from_raw(dynamics));
    }
}

/// Advances `state` in place by `steps` integrating-factor RK4 steps of `dt`.
/// On `HD_STATUS_NON_FINITE` the state holds the last finite step.
///
/// # Safety
/// Both handles must be live; `state` must share the dynamics' mode set.
#[no_mangle]
pub unsafe extern "C" fn hd_dynamics_step(
    dynamics: *const HdDynamics,
    state: *mut HdState,
    dt: f64,
    steps: u64,
) -> HdStatus {
    guard(|| {
        let d = deref(dynamics, "dynamics")?;
        let s = deref_mut(state, "state")?;
        let stepper = Stepper::new(&d.0, dt)?;
        for i in 0..steps {
            let next = stepper.step(&s.0)?;
            if !next.is_finite() {
                return Err(Fail::Core(Error::NonFinite {
                    step: i + 1,
                    time: next.time,
                    last_finite: Box::new(s.0.clone()),
                }));
            }
            s.0 = next;
        }
        Ok(())
    })
}

/// Time derivative `du+/dt` (nonlinear, viscous and forcing terms) into a new
/// handle.
///
/// # Safety
/// Both input handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_dynamics_rhs(
    dynamics: *const HdDynamics,
    state: *const HdState,
    out: *mut *mut HdState,
) -> HdStatus {
    guard(|| {
        let d = deref(dynamics, "dynamics")?;
        let s = deref(state, "state")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        put(out, HdState(d.0.full_rhs(&s.0)?.total()));
        Ok(())
    })
}

/// Normalized residuals of the energy and helicity budgets at `state`.
///
/// # Safety
/// Both handles must be live; `energy` and `helicity` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_dynamics_budget_residuals(
    dynamics: *const HdDynamics,
    state: *const HdState,
    energy: *mut f64,
    helicity: *mut f64,
) -> HdStatus {
    guard(|| {
        let d = deref(dynamics, "dynamics")?;
        let s = deref(state, "state")?;
        let e = deref_mut(energy, "energy")?;
        let h = deref_mut(helicity, "helicity")?;
        *e = energy_budget_residual(&d.0, &s.0)?;
        *h = helicity_budget_residual(&d.0, &s.0)?;
        Ok(())
    })
}
