//! C ABI over `ddlab`.
//!
//! Every function returns a `DdlabStatus`; results go through out-pointers.
//! On failure a message is kept per thread and can be copied out with
//! `ddlab_last_error_message`. Handles are opaque and must be released with
//! their matching `_free` function.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ddlab::profile::{
    selfsim_h2_norm, shoot, solve_profile, Classification, ProfileError, ProfileNorms, ProfileRun,
    ScalingQuery, ShotParams,
};
use ddlab::spectral::{richardson, RunConfig, Simulation, SpectralError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoConvergence = 3,
    BracketInvalid = 4,
    NotCritical = 5,
    SupportOverflow = 6,
    BufferTooSmall = 7,
    Panic = 8,
    Failure = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdlabClassification {
    ReachesZero = 0,
    NegativeMax = 1,
    Undetermined = 2,
}

/// Outcome of one shot; absent event times are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdlabShot {
    pub classification: DdlabClassification,
    pub tau1: f64,
    pub tau2: f64,
    pub terminal_a: f64,
    pub terminal_ap: f64,
    pub step_underflow: bool,
}

/// Settings for `ddlab_sim_new`; a NaN `delta` selects `.1λ⁴`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdlabSimConfig {
    pub lambda: f64,
    pub delta: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub solver_tol: f64,
    pub max_iters: usize,
    pub dealias: bool,
    pub rescaled: bool,
    pub allow_delta_zero: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DdlabNorms {
    pub l2: f64,
    pub h1dot: f64,
    pub h2dot: f64,
    pub mass: f64,
}

/// Critical profile and its bisection record.
pub struct DdlabProfile {
    run: ProfileRun,
}

/// Time stepper for the regularized equation.
pub struct DdlabSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn profile_status(e: &ProfileError) -> DdlabStatus {
    match e {
        ProfileError::BracketInvalid { .. } => DdlabStatus::BracketInvalid,
        ProfileError::NotCritical { .. } => DdlabStatus::NotCritical,
        ProfileError::InvalidParams(_) => DdlabStatus::InvalidArgument,
        _ => DdlabStatus::Failure,
    }
}

fn spectral_status(e: &SpectralError) -> DdlabStatus {
    match e {
        SpectralError::NoConvergence { .. } => DdlabStatus::NoConvergence,
        SpectralError::SupportOverflow { .. } => DdlabStatus::SupportOverflow,
        SpectralError::InvalidConfig(_)
        | SpectralError::InvalidGrid(_)
        | SpectralError::LengthMismatch { .. } => DdlabStatus::InvalidArgument,
        SpectralError::Csv { .. } => DdlabStatus::Failure,
    }
}

/// Runs `f`, converting errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), (DdlabStatus, String)>) -> DdlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DdlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DdlabStatus::Panic
        }
    }
}

fn null(what: &str) -> (DdlabStatus, String) {
    (DdlabStatus::NullPointer, format!("{what} is null"))
}

fn from_profile(e: ProfileError) -> (DdlabStatus, String) {
    (profile_status(&e), e.to_string())
}

fn from_spectral(e: SpectralError) -> (DdlabStatus, String) {
    (spectral_status(&e), e.to_string())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in bytes
/// excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ddlab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Integrates the profile equation from `A″(0) = mu` with default settings.
///
/// # Safety
/// `out` must be null or point to writable memory for one `DdlabShot`.
#[no_mangle]
pub unsafe extern "C" fn ddlab_shoot(mu: f64, out: *mut DdlabShot) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let shot = shoot(&ShotParams::with_mu(mu)).map_err(from_profile)?;
        let t = shot.terminal_state;
        *out = DdlabShot {
            classification: match shot.classification {
                Classification::ReachesZero => DdlabClassification::ReachesZero,
                Classification::NegativeMax => DdlabClassification::NegativeMax,
                Classification::Undetermined => DdlabClassification::Undetermined,
            },
            tau1: shot.tau1.unwrap_or(f64::NAN),
            tau2: shot.tau2.unwrap_or(f64::NAN),
            terminal_a: t.a,
            terminal_ap: t.ap,
            step_underflow: shot.step_underflow,
        };
        Ok(())
    })
}

/// Bisects for `μ*` on `[lo, hi]` to width `tol` and assembles the critical
/// profile. Release the handle with `ddlab_profile_free`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_solve(
    lo: f64,
    hi: f64,
    tol: f64,
    out: *mut *mut DdlabProfile,
) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = std::ptr::null_mut();
        let run = solve_profile(lo, hi, tol, &ShotParams::default()).map_err(from_profile)?;
        *out = Box::into_raw(Box::new(DdlabProfile { run }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from `ddlab_profile_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_free(p: *mut DdlabProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Bisection midpoint, final bracket, and support endpoint `τ*`.
///
/// # Safety
/// `p` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_summary(
    p: *const DdlabProfile,
    mu_star: *mut f64,
    bracket_lo: *mut f64,
    bracket_hi: *mut f64,
    tau_star: *mut f64,
) -> DdlabStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        let est = &p.run.estimate;
        for (ptr, v) in [
            (mu_star, est.mu_star),
            (bracket_lo, est.bracket.0),
            (bracket_hi, est.bracket.1),
            (tau_star, p.run.solution.tau_star),
        ] {
            if let Some(r) = ptr.as_mut() {
                *r = v;
            }
        }
        Ok(())
    })
}

/// `L²` norms of the odd-extended profile and its first two derivatives.
///
/// # Safety
/// `p` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_norms(
    p: *const DdlabProfile,
    norm_a: *mut f64,
    norm_ap: *mut f64,
    norm_app: *mut f64,
) -> DdlabStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        let n = p.run.solution.norms();
        for (ptr, v) in [(norm_a, n.a), (norm_ap, n.ap), (norm_app, n.app)] {
            if let Some(r) = ptr.as_mut() {
                *r = v;
            }
        }
        Ok(())
    })
}

/// Number of samples on `[−τ*, τ*]`.
///
/// # Safety
/// `p` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_len(p: *const DdlabProfile, len: *mut usize) -> DdlabStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        *len.as_mut().ok_or_else(|| null("len"))? = p.run.solution.grid.len();
        Ok(())
    })
}

/// Copies the sample abscissae and profile values.
///
/// # Safety
/// `tau` and `a` must be valid for `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_samples(
    p: *const DdlabProfile,
    tau: *mut f64,
    a: *mut f64,
    len: usize,
) -> DdlabStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        if tau.is_null() || a.is_null() {
            return Err(null("output buffer"));
        }
        let sol = &p.run.solution;
        let n = sol.grid.len();
        if len < n {
            return Err((DdlabStatus::BufferTooSmall, format!("need {n} samples, buffer holds {len}")));
        }
        std::slice::from_raw_parts_mut(tau, n).copy_from_slice(&sol.grid);
        std::slice::from_raw_parts_mut(a, n).copy_from_slice(&sol.a_values);
        Ok(())
    })
}

/// Profile value at `tau` by linear interpolation, zero off the support.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_profile_eval(p: *const DdlabProfile, tau: f64, out: *mut f64) -> DdlabStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = p.run.solution.eval(tau);
        Ok(())
    })
}

/// Fills `out` with the defaults for `lambda`: `δ = .1λ⁴`, 8192 modes,
/// `dt = 1e-3`, tolerance `1e-8`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_config_default(lambda: f64, out: *mut DdlabSimConfig) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = RunConfig::new(lambda);
        *out = DdlabSimConfig {
            lambda,
            delta: c.delta,
            n_modes: c.n_modes,
            dt: c.dt,
            solver_tol: c.solver_tol,
            max_iters: c.max_iters,
            dealias: c.dealias,
            rescaled: c.rescaled_mode,
            allow_delta_zero: false,
        };
        Ok(())
    })
}

/// Creates a simulation at `t = 0` from Gaussian data. Release with
/// `ddlab_sim_free`.
///
/// # Safety
/// `cfg` must be null or readable; `out` null or valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_new(
    cfg: *const DdlabSimConfig,
    out: *mut *mut DdlabSimulation,
) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = std::ptr::null_mut();
        let c = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let mut rc = RunConfig::new(c.lambda);
        if !c.delta.is_nan() {
            rc.delta = c.delta;
        }
        rc.n_modes = c.n_modes;
        rc.dt = c.dt;
        // stepping is driven by the caller; one step keeps the schedule valid
        rc.t_end = c.dt;
        rc.output_every = c.dt;
        rc.solver_tol = c.solver_tol;
        rc.max_iters = c.max_iters;
        rc.dealias = c.dealias;
        rc.rescaled_mode = c.rescaled;
        rc.allow_delta_zero = c.allow_delta_zero;
        let sim = Simulation::new(rc).map_err(from_spectral)?;
        *out = Box::into_raw(Box::new(DdlabSimulation { sim }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from `ddlab_sim_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_free(s: *mut DdlabSimulation) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Advances `n_steps` Crank–Nicolson steps. On failure the state is left at
/// the last successful step.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_step(s: *mut DdlabSimulation, n_steps: usize) -> DdlabStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("simulation"))?;
        for _ in 0..n_steps {
            s.sim.advance().map_err(from_spectral)?;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be a live handle and `t` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_time(s: *const DdlabSimulation, t: *mut f64) -> DdlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        *t.as_mut().ok_or_else(|| null("t"))? = s.sim.time();
        Ok(())
    })
}

/// Norms and mass of the current state in physical variables.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_norms(s: *const DdlabSimulation, out: *mut DdlabNorms) -> DdlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let row = s.sim.measure();
        *out = DdlabNorms {
            l2: row.l2,
            h1dot: row.h1dot,
            h2dot: row.h2dot,
            mass: row.mass,
        };
        Ok(())
    })
}

/// `∫u dx` of the current state.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_mass(s: *const DdlabSimulation, out: *mut f64) -> DdlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.sim.measure().mass;
        Ok(())
    })
}

/// Number of grid points.
///
/// # Safety
/// `s` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_len(s: *const DdlabSimulation, len: *mut usize) -> DdlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        *len.as_mut().ok_or_else(|| null("len"))? = s.sim.ops().grid.n_modes;
        Ok(())
    })
}

/// Copies grid points and field values `u(x, t)`.
///
/// # Safety
/// `x` and `u` must be valid for `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn ddlab_sim_values(
    s: *const DdlabSimulation,
    x: *mut f64,
    u: *mut f64,
    len: usize,
) -> DdlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        if x.is_null() || u.is_null() {
            return Err(null("output buffer"));
        }
        let snap = s.sim.snapshot();
        let n = snap.x.len();
        if len < n {
            return Err((DdlabStatus::BufferTooSmall, format!("need {n} values, buffer holds {len}")));
        }
        std::slice::from_raw_parts_mut(x, n).copy_from_slice(&snap.x);
        std::slice::from_raw_parts_mut(u, n).copy_from_slice(&snap.u);
        Ok(())
    })
}

/// `fine + (fine − coarse)/(ratio^order − 1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_richardson(
    coarse: f64,
    fine: f64,
    order: u32,
    ratio: f64,
    out: *mut f64,
) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = richardson(coarse, fine, order, ratio).map_err(from_spectral)?;
        Ok(())
    })
}

/// `H²` norm of the scaled self-similar solution at time `t < big_t`,
/// given the profile norms.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddlab_selfsim_h2_norm(
    lambda: f64,
    big_t: f64,
    t: f64,
    norm_a: f64,
    norm_ap: f64,
    norm_app: f64,
    out: *mut f64,
) -> DdlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let norms = ProfileNorms {
            a: norm_a,
            ap: norm_ap,
            app: norm_app,
        };
        *out = selfsim_h2_norm(&ScalingQuery::new(lambda, big_t, t), &norms).map_err(from_profile)?;
        Ok(())
    })
}
