use super::integrator::{dp_step, step_factor, StepControl};
use super::ode::{taylor_start, ProfileOde, ProfileState, ShotParams};
use super::ProfileError;
use crate::diagnostics::{v1, EnergyContext};

/// How a shot ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// `A(τ₂) = 0` with `A′(τ₂) > 0`.
    ReachesZero,
    /// `A(τ₂) < 0` with `A′(τ₂) = 0`.
    NegativeMax,
    /// Neither event before the horizon, or an unresolved step underflow.
    Undetermined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ReachesZero => "reaches_zero",
            Classification::NegativeMax => "negative_max",
            Classification::Undetermined => "undetermined",
        }
    }
}

/// Record of one integration of the profile IVP.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotOutcome {
    pub mu: f64,
    /// Accepted states, starting with the exact initial point at `τ = 0`.
    pub samples: Vec<ProfileState>,
    /// First zero of `A′`.
    pub tau1: Option<f64>,
    /// Terminal event time.
    pub tau2: Option<f64>,
    pub classification: Classification,
    pub terminal_state: ProfileState,
    /// The step floor was hit before an event tolerance was met; the
    /// classification then comes from the underflow tie-break.
    pub step_underflow: bool,
}

impl ShotOutcome {
    /// State at `τ₁`, if the first minimum was reached.
    pub fn first_min_state(&self) -> Option<ProfileState> {
        let t1 = self.tau1?;
        self.samples.iter().copied().find(|s| s.tau == t1)
    }

    pub fn energy_context(&self) -> Option<EnergyContext> {
        let s = self.first_min_state()?;
        EnergyContext::new(s.tau, s.a, s.app).ok()
    }
}

enum Phase {
    Descending,
    Ascending,
}

/// Finds `s ∈ (0, h]` with `A′(step(y, s)) = 0` by Illinois false position.
fn polish_slope_root(
    sys: &ProfileOde,
    from: &ProfileState,
    h: f64,
    end: &ProfileState,
    tol: f64,
    ctrl: &StepControl,
) -> ProfileState {
    let eval = |s: f64| -> Option<ProfileState> {
        dp_step(sys, from.tau, &from.as_vector(), s, ctrl)
            .map(|st| ProfileState::from_vector(from.tau + s, st.y))
    };
    let (mut lo, mut f_lo) = (0.0, from.ap);
    let (mut hi, mut f_hi) = (h, end.ap);
    let mut best = *end;
    let mut side = 0i8;
    for _ in 0..100 {
        let mut s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let Some(state) = eval(s) else {
            hi = s;
            continue;
        };
        best = state;
        if state.ap.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * from.tau.abs().max(1.0) {
            break;
        }
        if (state.ap < 0.0) == (f_lo < 0.0) {
            lo = s;
            f_lo = state.ap;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            f_hi = state.ap;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// Tie-break when the step floor is hit on the rising branch after `τ₁`.
///
/// If `V₁(0) < 0` the upper energy bound keeps `A` away from zero, so the
/// orbit must turn over. Otherwise the local quadratic model decides which of
/// `A` and `A′` vanishes first.
fn underflow_tiebreak(state: &ProfileState, ctx: Option<&EnergyContext>) -> Classification {
    if state.ap <= 0.0 {
        return Classification::NegativeMax;
    }
    if let Some(ctx) = ctx {
        if ctx.v1_at_zero() < 0.0 {
            return Classification::NegativeMax;
        }
        if let Ok(bound) = v1(state.a, ctx) {
            if 0.5 * state.ap * state.ap > bound + 1e-12 {
                // energy bound violated: the state is not trustworthy
                return Classification::Undetermined;
            }
        }
    }
    if state.app >= 0.0 {
        return Classification::ReachesZero;
    }
    // A + A′s + A″s²/2 at the turning point s = A′/|A″|
    let a_at_turn = state.a + state.ap * state.ap / (2.0 * state.app.abs());
    if a_at_turn >= 0.0 {
        Classification::ReachesZero
    } else {
        Classification::NegativeMax
    }
}

/// Integrates the profile IVP from the Taylor start until one of the
/// terminal events occurs.
pub fn shoot(params: &ShotParams) -> Result<ShotOutcome, ProfileError> {
    params.validate()?;
    let sys = ProfileOde {
        floor: params.degenerate_floor,
    };
    let ctrl = params.step;
    let ev = params.events;

    let origin = ProfileState {
        tau: 0.0,
        a: 0.0,
        ap: -1.0,
        app: params.mu,
    };
    let mut samples = vec![origin];
    let mut current = taylor_start(params)?;
    samples.push(current);

    let mut phase = Phase::Descending;
    let mut tau1 = None;
    let mut ctx: Option<EnergyContext> = None;
    let mut h = ctrl.h_init.min(ctrl.h_max);

    let finish = |samples: Vec<ProfileState>,
                  tau1: Option<f64>,
                  class: Classification,
                  terminal: ProfileState,
                  underflow: bool| {
        let tau2 = match class {
            Classification::Undetermined => None,
            _ => Some(terminal.tau),
        };
        ShotOutcome {
            mu: params.mu,
            samples,
            tau1,
            tau2,
            classification: class,
            terminal_state: terminal,
            step_underflow: underflow,
        }
    };

    loop {
        if current.tau > params.max_tau {
            return Ok(finish(
                samples,
                tau1,
                Classification::Undetermined,
                current,
                false,
            ));
        }
        if h < ctrl.h_min || current.tau + h == current.tau {
            let class = match phase {
                Phase::Descending => Classification::Undetermined,
                Phase::Ascending => underflow_tiebreak(&current, ctx.as_ref()),
            };
            return Ok(finish(samples, tau1, class, current, true));
        }
        let h_try = h.min(ctrl.h_max);
        let trial = match dp_step(&sys, current.tau, &current.as_vector(), h_try, &ctrl) {
            None => {
                h = 0.5 * h_try;
                continue;
            }
            Some(t) if t.error > 1.0 => {
                h = h_try * step_factor(t.error);
                continue;
            }
            Some(t) => t,
        };
        let next = ProfileState::from_vector(current.tau + h_try, trial.y);
        h = (h_try * step_factor(trial.error)).min(ctrl.h_max);

        match phase {
            Phase::Descending => {
                if next.ap >= 0.0 {
                    let root = polish_slope_root(&sys, &current, h_try, &next, ev.slope_tol, &ctrl);
                    samples.push(root);
                    tau1 = Some(root.tau);
                    ctx = EnergyContext::new(root.tau, root.a, root.app).ok();
                    current = root;
                    phase = Phase::Ascending;
                } else {
                    samples.push(next);
                    current = next;
                }
            }
            Phase::Ascending => {
                if next.ap <= 0.0 {
                    let root = polish_slope_root(&sys, &current, h_try, &next, ev.slope_tol, &ctrl);
                    samples.push(root);
                    return Ok(finish(
                        samples,
                        tau1,
                        Classification::NegativeMax,
                        root,
                        false,
                    ));
                }
                samples.push(next);
                current = next;
                if next.a >= -ev.zero_tol {
                    return Ok(finish(
                        samples,
                        tau1,
                        Classification::ReachesZero,
                        next,
                        false,
                    ));
                }
            }
        }
    }
}
