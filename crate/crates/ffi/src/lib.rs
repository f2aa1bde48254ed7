//! C ABI for the tachyon-bound toolkit.
//!
//! Conventions:
//! - Every fallible function returns a [`TbStatus`] and writes results
//!   through out-pointers, which are left untouched on failure.
//! - On failure, [`tb_last_error_message`] describes the error. The string
//!   belongs to the library and stays valid until the next call on the same
//!   thread.
//! - Handles ([`TbPreset`], [`TbSimulation`]) are opaque. Create them with the
//!   `_new`/`_from_json` functions and release them with the matching
//!   `_free`. Passing NULL to a `_free` function is a no-op.
//! - Angles are radians, lengths meters, durations seconds.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tachyon_bound::bound::{
    eval_bound, eval_bound_fast_limit, regime_threshold_dt, sample_curve, BoundInputs, PreferredFrame,
};
use tachyon_bound::budget::coherence_length;
use tachyon_bound::config::{SimulationFile, SimulationRun, SimulationSetup};
use tachyon_bound::kinematics::inaccessible_fraction;
use tachyon_bound::scan::{cmb_report, preset, ExperimentPreset};
use tachyon_bound::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    /// A physics precondition failed (β ≥ 1, ρ outside (0, 1), ...).
    Domain = 1,
    /// Malformed input: unknown preset, bad unit, invalid JSON config.
    Config = 2,
    /// The measurement schedule is invalid.
    Schedule = 3,
    /// Too few events to form an estimate.
    InsufficientStatistics = 4,
    /// The simulated campaign saw a drop, so no bound exists.
    DropDetected = 5,
    /// A required pointer was NULL.
    NullPointer = 6,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 7,
    /// The simulation has not been run yet.
    NotRun = 8,
    /// Internal error; the library caught a panic.
    Panic = 9,
}

/// A named experiment preset.
pub struct TbPreset {
    inner: ExperimentPreset,
}

/// A configured simulation and, once run, its results.
pub struct TbSimulation {
    setup: SimulationSetup,
    run: Option<SimulationRun>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> TbStatus {
    match e {
        Error::Domain(_) | Error::UndefinedPair => TbStatus::Domain,
        Error::Schedule(_) => TbStatus::Schedule,
        Error::InsufficientStatistics(_) => TbStatus::InsufficientStatistics,
        Error::DropDetected { .. } => TbStatus::DropDetected,
        Error::UnknownPreset { .. } | Error::Unit { .. } | Error::Config(_) => TbStatus::Config,
    }
}

fn fail(status: TbStatus, msg: impl Into<String>) -> TbStatus {
    set_last_error(msg);
    status
}

impl From<Error> for TbStatus {
    fn from(e: Error) -> Self {
        fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), TbStatus>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(TbStatus::Panic, "internal panic"),
    }
}

fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, TbStatus> {
    // SAFETY: callers pass either NULL or a pointer valid for writes of T.
    unsafe { p.as_mut() }.ok_or_else(|| fail(TbStatus::NullPointer, format!("`{name}` is NULL")))
}

fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, TbStatus> {
    if p.is_null() {
        return Err(fail(TbStatus::NullPointer, format!("`{name}` is NULL")));
    }
    // SAFETY: non-null and, per the API contract, NUL-terminated.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(TbStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

/// Message for the last failed call on this thread, or NULL if none.
#[no_mangle]
pub extern "C" fn tb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lower bound β_t,max for path-mismatch ratio `rho`, measurement duration
/// `delta_t`, rotation rate `omega` and a frame moving at `beta` with
/// orientation angle `chi`. Writes `INFINITY` when the result overflows.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn tb_eval_bound(
    rho: f64,
    delta_t: f64,
    omega: f64,
    beta: f64,
    chi: f64,
    out: *mut f64,
) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inputs = BoundInputs::new(rho, delta_t)?.with_omega(omega)?;
        *out = eval_bound(&inputs, &PreferredFrame::new(beta, chi)?)?;
        Ok(())
    })
}

/// The δt → 0 limit √(1 − β²)/ρ.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn tb_fast_limit(rho: f64, beta: f64, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = eval_bound_fast_limit(rho, beta)?;
        Ok(())
    })
}

/// Measurement duration 2ρ/ω below which the bound is flat in β.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn tb_regime_threshold_dt(rho: f64, omega: f64, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = regime_threshold_dt(rho, omega)?;
        Ok(())
    })
}

/// Coherence length 2 ln2 λ²/(π Δλ) in meters.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn tb_coherence_length(lambda: f64, dlambda: f64, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = coherence_length(lambda, dlambda)?;
        Ok(())
    })
}

/// Fraction of frame directions a baseline at polar angle `alpha` can never
/// test, 1 − sin α.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn tb_inaccessible_fraction(alpha: f64, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = inaccessible_fraction(alpha)?;
        Ok(())
    })
}

/// Looks up a named preset (`ego_red`, `ego_green`, `tabletop_blue`).
///
/// # Safety
/// `name` must be NULL or a NUL-terminated string; `out` must be NULL or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_new(name: *const c_char, out: *mut *mut TbPreset) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inner = preset(str_arg(name, "name")?)?;
        *out = Box::into_raw(Box::new(TbPreset { inner }));
        Ok(())
    })
}

/// Releases a preset.
///
/// # Safety
/// `preset` must be NULL or a handle from [`tb_preset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_free(preset: *mut TbPreset) {
    if !preset.is_null() {
        drop(Box::from_raw(preset));
    }
}

fn preset_ref<'a>(p: *const TbPreset) -> Result<&'a ExperimentPreset, TbStatus> {
    // SAFETY: callers pass NULL or a live handle.
    unsafe { p.as_ref() }
        .map(|p| &p.inner)
        .ok_or_else(|| fail(TbStatus::NullPointer, "`preset` is NULL"))
}

/// Path-mismatch ratio ρ of a preset.
///
/// # Safety
/// `preset` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_rho(preset: *const TbPreset, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = preset_ref(preset)?.rho;
        Ok(())
    })
}

/// Effective measurement duration δt of a preset, seconds.
///
/// # Safety
/// `preset` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_delta_t(preset: *const TbPreset, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = preset_ref(preset)?.inputs()?.delta_t;
        Ok(())
    })
}

/// Bound of a preset at the CMB frame.
///
/// # Safety
/// `preset` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_cmb_bound(preset: *const TbPreset, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = cmb_report(preset_ref(preset)?)?.beta_t_max;
        Ok(())
    })
}

/// Samples a preset's bound curve at `n` strictly increasing β values.
/// Samples that cannot be evaluated are written as NaN.
///
/// # Safety
/// `betas` must point to `n` readable doubles and `out` to `n` writable
/// doubles; `preset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_preset_curve(
    preset: *const TbPreset,
    betas: *const f64,
    n: usize,
    out: *mut f64,
) -> TbStatus {
    guard(|| {
        let p = preset_ref(preset)?;
        if betas.is_null() || out.is_null() {
            return Err(fail(TbStatus::NullPointer, "`betas` or `out` is NULL"));
        }
        // SAFETY: the caller guarantees `n` elements behind both pointers.
        let grid = std::slice::from_raw_parts(betas, n);
        let curve = sample_curve(&p.inputs()?, p.chi_policy, grid)?;
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, v) in out.iter_mut().zip(&curve.values) {
            *o = v.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Builds a simulation from a JSON config (same format as the CLI's
/// `simulate --config`). `seed` overrides any seed in the config.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_from_json(
    json: *const c_char,
    seed: u64,
    out: *mut *mut TbSimulation,
) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let setup = SimulationFile::from_json(str_arg(json, "json")?)?.resolve(seed)?;
        *out = Box::into_raw(Box::new(TbSimulation { setup, run: None }));
        Ok(())
    })
}

/// Releases a simulation.
///
/// # Safety
/// `sim` must be NULL or a handle from [`tb_simulation_from_json`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_free(sim: *mut TbSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

fn sim_mut<'a>(p: *mut TbSimulation) -> Result<&'a mut TbSimulation, TbStatus> {
    // SAFETY: callers pass NULL or a live handle.
    unsafe { p.as_mut() }.ok_or_else(|| fail(TbStatus::NullPointer, "`sim` is NULL"))
}

fn run_ref(sim: &TbSimulation) -> Result<&SimulationRun, TbStatus> {
    sim.run
        .as_ref()
        .ok_or_else(|| fail(TbStatus::NotRun, "call tb_simulation_run first"))
}

/// Runs the simulation. Results are deterministic for a given seed.
///
/// # Safety
/// `sim` must be NULL or a live handle, not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_run(sim: *mut TbSimulation) -> TbStatus {
    guard(|| {
        let sim = sim_mut(sim)?;
        sim.run = Some(sim.setup.run()?);
        Ok(())
    })
}

/// Bell parameter S pooled over all bins and its standard error.
///
/// # Safety
/// `sim` must be NULL or a live handle; out-pointers NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_s(sim: *mut TbSimulation, s: *mut f64, stderr: *mut f64) -> TbStatus {
    guard(|| {
        let (s, stderr) = (out_ref(s, "s")?, out_ref(stderr, "stderr")?);
        let est = run_ref(sim_mut(sim)?)?
            .aggregate
            .as_ref()
            .ok_or_else(|| fail(TbStatus::InsufficientStatistics, "no complete CHSH estimate"))?;
        *s = est.s;
        *stderr = est.stderr;
        Ok(())
    })
}

/// Number of bins flagged as drops.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_drop_count(sim: *mut TbSimulation, out: *mut usize) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = run_ref(sim_mut(sim)?)?.drops.bins.len();
        Ok(())
    })
}

/// Bound established by the simulated campaign. Returns
/// `TB_STATUS_DROP_DETECTED` if any bin dropped.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_simulation_bound(sim: *mut TbSimulation, out: *mut f64) -> TbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let run = run_ref(sim_mut(sim)?)?;
        let bound = run.bound.ok_or_else(|| {
            TbStatus::from(Error::DropDetected {
                bins: run.drops.bins.len(),
            })
        })?;
        *out = bound.bound;
        Ok(())
    })
}
