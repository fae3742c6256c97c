//! Pseudospectral Crank–Nicolson solver for the regularized K(2,2) equation
//! `(I + δ∂ₓ⁴)uₜ = ∂ₓ(u²) + ∂ₓ³(u²)` on a periodic interval.
//!
//! Fields are Fourier coefficients normalized so that `u(x) = Σ ûⱼ e^{ikⱼx}`.
//! With domain length `L` this gives `∫u = L·û₀` and `‖u‖² = L·Σ|ûⱼ|²`.

pub mod field;
pub mod grid;
pub mod init;
pub mod measure;
pub mod run;
pub mod solver;

pub use field::{FourierOps, SpectralField};
pub use grid::Grid;
pub use init::{compacton_field, compacton_profile, compacton_translate, init_scaled_gaussian};
pub use measure::{mass, norms, Norms};
pub use run::{
    observed_order, richardson, run_simulation, InitialData, NormRow, NormSeries, RunConfig,
    SimulationResult, Simulation, Snapshot,
};
pub use solver::{cn_step, nonlinear_rhs, StepConfig, StepReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("expected {expected} grid values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("nonlinear solve failed at step {step} after {iters} iterations (residual {residual:e})")]
    NoConvergence {
        step: usize,
        iters: usize,
        residual: f64,
    },
    #[error("compacton support [{lo}, {hi}] does not fit the domain [{domain_lo}, {domain_hi})")]
    SupportOverflow {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}
