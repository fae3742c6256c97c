//! Self-similar blow-up profile of the degenerate Airy equation `uₜ = 2uuₓₓₓ`.
//!
//! Substituting `u = A(x/(1−t)^{1/3})` gives `6AA‴ = τA′`. The profile is
//! found by shooting on `μ = A″(0)` from `A(0) = 0, A′(0) = −1` and bisecting
//! on how each shot ends.

pub mod assemble;
pub mod bisect;
pub mod fit;
pub mod integrator;
pub mod ode;
pub mod pipeline;
pub mod quadrature;
pub mod scaling;
pub mod shoot;


pub use assemble::{assemble_profile, ProfileNorms, ProfileSolution, CRITICAL_TOL};
pub use fit::{fit_log_blowup, FitWindow, LogFit};
pub use scaling::{ill_posedness_table, selfsim_h2_norm, BlowupTime, IllPosednessRow, ScalingQuery};
pub use bisect::{bisect_mu_star, MuStarEstimate};
pub use pipeline::{solve_profile, ProfileRun, REFINE_TOL};

pub use integrator::StepControl;
pub use ode::{ode_rhs, taylor_start, EventTolerances, ProfileState, ShotParams};

pub use shoot::{shoot, Classification, ShotOutcome};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate vector field at tau={tau}: |A|={a} below floor")]
    Degenerate { tau: f64, a: f64 },
    #[error(
        "invalid bracket: mu={lo} is {} and mu={hi} is {} (need negative_max below reaches_zero)",
        lo_class.as_str(),
        hi_class.as_str()
    )]
    BracketInvalid {
        lo: f64,
        lo_class: Classification,
        hi: f64,
        hi_class: Classification,
    },
    #[error("undetermined shot at mu={mu} inside bracket {bracket:?} (stopped at tau={tau}, step underflow: {step_underflow})")]
    BisectionUndetermined {
        mu: f64,
        bracket: (f64, f64),
        tau: f64,
        step_underflow: bool,
    },
    #[error("shot is not critical: terminal A={a}, A'={ap} (tolerance {tol})")]
    NotCritical { a: f64, ap: f64, tol: f64 },
    #[error("fit window holds {found} samples, need at least {needed}")]
    InsufficientSamples { found: usize, needed: usize },
}
