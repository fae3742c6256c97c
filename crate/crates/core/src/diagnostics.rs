//! Trajectory checks built from the energy bounds, the first integral and
//! the autonomous comparison model `B‴ = B′/B`.
//!
//! Everything here reports; nothing here decides. The strict inequalities of
//! the bounds are checked with a margin of `1e-12` so roundoff at the
//! interval endpoints is not reported as a violation.

use std::fmt::Write as _;

use crate::profile::integrator::OdeSystem;
use crate::profile::quadrature::running_integral;
use crate::profile::{ProfileState, ShotOutcome};

/// Slack applied to strict inequalities at sample level.
pub const ENDPOINT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("energy functions need a < 0, got {0}")]
    Domain(f64),
    #[error("invalid energy context: {0}")]
    Context(&'static str),
    #[error("model energy is undefined at b = 0")]
    ModelDomain,
}

/// Data at the first minimum `τ₁` that parametrizes the energy bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyContext {
    pub tau1: f64,
    pub a_tau1: f64,
    pub app_tau1: f64,
    /// `6·A″(τ₁)`
    pub tau_bar: f64,
}

impl EnergyContext {
    pub fn new(tau1: f64, a_tau1: f64, app_tau1: f64) -> Result<Self, DiagnosticsError> {
        if !(a_tau1 < 0.0) {
            return Err(DiagnosticsError::Context("A(tau1) must be negative"));
        }
        if !(app_tau1 > 0.0) {
            return Err(DiagnosticsError::Context("A''(tau1) must be positive"));
        }
        if !(tau1 > 0.0 && tau1.is_finite()) {
            return Err(DiagnosticsError::Context("tau1 must be positive"));
        }
        Ok(Self {
            tau1,
            a_tau1,
            app_tau1,
            tau_bar: 6.0 * app_tau1,
        })
    }

    /// `V₁(0⁻) = A(τ₁)(τ₁/6 − A″(τ₁))`.
    pub fn v1_at_zero(&self) -> f64 {
        self.a_tau1 * (self.tau1 / 6.0 - self.app_tau1)
    }
}

fn a_log_ratio(a: f64, ctx: &EnergyContext) -> Result<f64, DiagnosticsError> {
    if !(a < 0.0) {
        return Err(DiagnosticsError::Domain(a));
    }
    Ok(a * (a / ctx.a_tau1).ln())
}

/// Upper energy `V₁(a) = (τ₁/6)·a·ln(a/A(τ₁)) + (A″(τ₁) − τ₁/6)(a − A(τ₁))`.
pub fn v1(a: f64, ctx: &EnergyContext) -> Result<f64, DiagnosticsError> {
    let t = ctx.tau1 / 6.0;
    Ok(t * a_log_ratio(a, ctx)? + (ctx.app_tau1 - t) * (a - ctx.a_tau1))
}

/// Lower energy `V₂(a) = (τ̄/6)·a·ln(a/A(τ₁))`.
pub fn v2(a: f64, ctx: &EnergyContext) -> Result<f64, DiagnosticsError> {
    Ok(ctx.tau_bar / 6.0 * a_log_ratio(a, ctx)?)
}

/// Per-sample result of the energy sandwich.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichSample {
    pub tau: f64,
    /// `V₁(A) − ½A′²`, should be positive.
    pub upper_margin: f64,
    /// `½A′² − V₂(A)`, present only when the lower bound applies.
    pub lower_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub samples: Vec<SandwichSample>,
    pub upper_violations: usize,
    pub lower_violations: usize,
    /// `τ̄ ≥ τ₂`, i.e. the lower bound was checked.
    pub lower_applicable: bool,
}

/// Checks `V₂(A) < ½A′² < V₁(A)` on the samples in `(τ₁, τ₂]`.
///
/// The lower bound is only checked when `τ̄ ≥ τ₂`. Samples with `A ≥ 0`
/// (possible only at a polished endpoint) are skipped.
pub fn energy_sandwich_check(shot: &ShotOutcome, ctx: &EnergyContext) -> SandwichReport {
    let tau2 = shot.tau2.unwrap_or(shot.terminal_state.tau);
    let lower_applicable = ctx.tau_bar >= tau2;
    let mut report = SandwichReport {
        samples: Vec::new(),
        upper_violations: 0,
        lower_violations: 0,
        lower_applicable,
    };
    for s in shot
        .samples
        .iter()
        .filter(|s| s.tau > ctx.tau1 && s.tau <= tau2)
    {
        let (Ok(up), Ok(lo)) = (v1(s.a, ctx), v2(s.a, ctx)) else {
            continue;
        };
        let kinetic = 0.5 * s.ap * s.ap;
        let upper_margin = up - kinetic;
        if upper_margin < -ENDPOINT_MARGIN {
            report.upper_violations += 1;
        }
        let lower_margin = lower_applicable.then_some(kinetic - lo);
        if let Some(m) = lower_margin {
            if m < -ENDPOINT_MARGIN {
                report.lower_violations += 1;
            }
        }
        report.samples.push(SandwichSample {
            tau: s.tau,
            upper_margin,
            lower_margin,
        });
    }
    report
}

/// Max over samples of `|A·A″ − ½A′² + ½ − (τA/6 − ∫₀^τ A/6)|`.
///
/// The running integral uses the same end-corrected trapezoid rule as the
/// profile norms.
pub fn first_integral_residual(shot: &ShotOutcome) -> f64 {
    first_integral_residuals(&shot.samples)
        .into_iter()
        .fold(0.0, f64::max)
}

pub fn first_integral_residuals(samples: &[ProfileState]) -> Vec<f64> {
    let taus: Vec<f64> = samples.iter().map(|s| s.tau).collect();
    let vals: Vec<f64> = samples.iter().map(|s| s.a).collect();
    let ders: Vec<f64> = samples.iter().map(|s| s.ap).collect();
    let integral = running_integral(&taus, &vals, Some(&ders));
    samples
        .iter()
        .zip(integral)
        .map(|(s, int_a)| {
            let lhs = s.a * s.app - 0.5 * s.ap * s.ap + 0.5;
            let rhs = s.tau * s.a / 6.0 - int_a / 6.0;
            (lhs - rhs).abs()
        })
        .collect()
}

/// Phase point of the comparison model `B‴ = (ln|B|)′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelState {
    pub tau: f64,
    pub b: f64,
    pub bp: f64,
    pub bpp: f64,
}

/// `½B′² − ((B″(0) − 1)B + B·ln|B|)`, conserved when `|B(0)| = 1`.
pub fn model_energy(state: &ModelState, bpp0: f64) -> Result<f64, DiagnosticsError> {
    if state.b == 0.0 || !state.b.is_finite() {
        return Err(DiagnosticsError::ModelDomain);
    }
    let potential = (bpp0 - 1.0) * state.b + state.b * state.b.abs().ln();
    Ok(0.5 * state.bp * state.bp - potential)
}

/// The comparison model as a first-order system.
#[derive(Debug, Clone, Copy, Default)]
pub struct HamiltonianModel;

impl OdeSystem<3> for HamiltonianModel {
    fn rhs(&self, _tau: f64, y: &[f64; 3]) -> Option<[f64; 3]> {
        if y[0] == 0.0 {
            return None;
        }
        Some([y[1], y[2], y[1] / y[0]])
    }
}

/// Key-value report consumed by the `diagnose` command.
pub fn render_report(shot: &ShotOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mu: {:.17e}", shot.mu);
    let _ = writeln!(out, "classification: {}", shot.classification.as_str());
    let _ = writeln!(out, "step_underflow: {}", shot.step_underflow);
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.17e}"));
    let _ = writeln!(out, "tau1: {}", opt(shot.tau1));
    let _ = writeln!(out, "tau2: {}", opt(shot.tau2));
    let t = shot.terminal_state;
    let _ = writeln!(out, "terminal_a: {:.17e}", t.a);
    let _ = writeln!(out, "terminal_ap: {:.17e}", t.ap);
    let _ = writeln!(out, "first_integral_residual: {:.6e}", first_integral_residual(shot));
    match shot.energy_context() {
        Some(ctx) => {
            let rep = energy_sandwich_check(shot, &ctx);
            let _ = writeln!(out, "tau_bar: {:.17e}", ctx.tau_bar);
            let _ = writeln!(out, "v1_at_zero: {:.17e}", ctx.v1_at_zero());
            let _ = writeln!(out, "sandwich_samples: {}", rep.samples.len());
            let _ = writeln!(out, "upper_violations: {}", rep.upper_violations);
            if rep.lower_applicable {
                let _ = writeln!(out, "lower_violations: {}", rep.lower_violations);
            } else {
                let _ = writeln!(out, "lower_violations: inapplicable");
            }
        }
        None => {
            let _ = writeln!(out, "sandwich: no first minimum");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::integrator::{integrate, StepControl};

    fn ctx() -> EnergyContext {
        EnergyContext::new(1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn v1_examples() {
        let c = ctx();
        assert_eq!(v1(-1.0, &c).unwrap(), 0.0);
        let expected = (1.0 / 6.0) * -0.5 * 0.5f64.ln() + (5.0 / 6.0) * 0.5;
        let got = v1(-0.5, &c).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.474_42).abs() < 1e-5);
        let near_zero = v1(-1e-300, &c).unwrap();
        assert!((near_zero - c.v1_at_zero()).abs() < 1e-12);
        assert!((c.v1_at_zero() - -(1.0 / 6.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn v2_examples() {
        let c = EnergyContext::new(0.3, -0.2, 0.7).unwrap();
        assert_eq!(v2(-0.2, &c).unwrap(), 0.0);
        assert!(v2(-1e-300, &c).unwrap().abs() < 1e-290);
        for a in [-0.19, -0.1, -0.01, -1e-6] {
            assert!(v2(a, &c).unwrap() > 0.0);
        }
    }

    #[test]
    fn energies_reject_nonnegative() {
        assert_eq!(v1(0.0, &ctx()), Err(DiagnosticsError::Domain(0.0)));
        assert!(v2(0.1, &ctx()).is_err());
        assert!(EnergyContext::new(1.0, 0.5, 1.0).is_err());
        assert!(EnergyContext::new(1.0, -0.5, 0.0).is_err());
    }

    #[test]
    fn energy_derivative_matches_finite_difference() {
        let c = EnergyContext::new(0.8, -0.6, 0.9).unwrap();
        for a in [-0.55, -0.3, -0.1, -0.02] {
            let exact = c.tau1 / 6.0 * ((a / c.a_tau1).ln() + 1.0) + c.app_tau1 - c.tau1 / 6.0;
            let h = 1e-6 * a.abs();
            let fd = (v1(a + h, &c).unwrap() - v1(a - h, &c).unwrap()) / (2.0 * h);
            assert!(((fd - exact) / exact).abs() < 1e-6, "a={a} fd={fd} exact={exact}");
        }
    }

    #[test]
    fn model_energy_examples() {
        let mu = 0.7;
        let s = ModelState {
            tau: 0.0,
            b: -1.0,
            bp: -1.0,
            bpp: mu,
        };
        assert!((model_energy(&s, mu).unwrap() - (0.5 + (mu - 1.0))).abs() < 1e-15);
        let still = ModelState {
            tau: 0.0,
            b: -1.0,
            bp: 0.0,
            bpp: 1.0,
        };
        assert_eq!(model_energy(&still, 1.0).unwrap(), 0.0);
        assert_eq!(
            model_energy(&ModelState { b: 0.0, ..still }, 1.0),
            Err(DiagnosticsError::ModelDomain)
        );
    }

    #[test]
    fn model_energy_conserved_along_trajectory() {
        let mu = 0.4;
        let ctrl = StepControl {
            h_max: 0.05,
            ..StepControl::default()
        };
        let traj = integrate(&HamiltonianModel, 0.0, [-1.0, -1.0, mu], 1.0, &ctrl).unwrap();
        let e0 = model_energy(
            &ModelState {
                tau: 0.0,
                b: -1.0,
                bp: -1.0,
                bpp: mu,
            },
            mu,
        )
        .unwrap();
        for (t, y) in traj {
            let s = ModelState {
                tau: t,
                b: y[0],
                bp: y[1],
                bpp: y[2],
            };
            assert!((model_energy(&s, mu).unwrap() - e0).abs() <= 1e-8);
        }
    }
}
