use super::integrator::{OdeSystem, StepControl};
use super::ProfileError;

/// Phase point `(τ, A, A′, A″)` of the profile equation `6AA‴ = τA′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub tau: f64,
    pub a: f64,
    pub ap: f64,
    pub app: f64,
}

impl ProfileState {
    pub fn as_vector(&self) -> [f64; 3] {
        [self.a, self.ap, self.app]
    }

    pub fn from_vector(tau: f64, y: [f64; 3]) -> Self {
        Self {
            tau,
            a: y[0],
            ap: y[1],
            app: y[2],
        }
    }
}

/// Event tolerances used to classify the end of a shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventTolerances {
    /// `|A| <= zero_tol` declares that the profile reached zero.
    pub zero_tol: f64,
    /// `|A′| <= slope_tol` declares a turning point. Every turning point on
    /// the rising branch is a negative maximum, however close `A` is to zero,
    /// so bisection always gets a side.
    pub slope_tol: f64,
}

impl Default for EventTolerances {
    fn default() -> Self {
        Self {
            zero_tol: 1e-9,
            slope_tol: 1e-9,
        }
    }
}

/// Inputs of a single shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotParams {
    /// Initial curvature `A″(0)`.
    pub mu: f64,
    /// Offset at which the Taylor series hands over to the integrator.
    pub taylor_eps: f64,
    pub step: StepControl,
    pub max_tau: f64,
    pub events: EventTolerances,
    /// `|A|` below this value makes the vector field degenerate.
    pub degenerate_floor: f64,
}

impl Default for ShotParams {
    fn default() -> Self {
        Self {
            mu: 0.0,
            taylor_eps: 1e-4,
            step: StepControl::default(),
            max_tau: 50.0,
            events: EventTolerances::default(),
            degenerate_floor: 1e-30,
        }
    }
}

impl ShotParams {
    pub fn with_mu(mu: f64) -> Self {
        Self {
            mu,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |what: &str| Err(ProfileError::InvalidParams(what.to_string()));
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad("mu must be finite and >= 0");
        }
        if !(self.taylor_eps > 0.0 && self.taylor_eps <= 1e-3) {
            return bad("taylor_eps must lie in (0, 1e-3]");
        }
        if !self.step.is_valid() {
            return bad("step control needs positive finite sizes and tolerances");
        }
        if !(self.max_tau.is_finite() && self.max_tau > self.taylor_eps) {
            return bad("max_tau must be finite and exceed taylor_eps");
        }
        let ev = &self.events;
        if !(ev.zero_tol > 0.0 && ev.slope_tol > 0.0) {
            return bad("event tolerances must be positive");
        }
        if !(self.degenerate_floor >= 0.0) {
            return bad("degenerate_floor must be >= 0");
        }
        Ok(())
    }
}

/// Starting state at `τ = taylor_eps` from the cubic series
/// `A ≈ −τ + (μ/2)τ² + τ³/36`, which uses `A‴(0) = 1/6`.
pub fn taylor_start(params: &ShotParams) -> Result<ProfileState, ProfileError> {
    let eps = params.taylor_eps;
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(ProfileError::InvalidParams(
            "taylor_eps must lie in (0, 1e-3]".into(),
        ));
    }
    let mu = params.mu;
    Ok(ProfileState {
        tau: eps,
        a: -eps + 0.5 * mu * eps * eps + eps * eps * eps / 36.0,
        ap: -1.0 + mu * eps + eps * eps / 12.0,
        app: mu + eps / 6.0,
    })
}

/// Third derivative `A‴ = τA′ / (6A)`.
pub fn ode_rhs(state: &ProfileState, floor: f64) -> Result<f64, ProfileError> {
    if !(state.a.abs() >= floor) || state.a == 0.0 {
        return Err(ProfileError::Degenerate {
            tau: state.tau,
            a: state.a,
        });
    }
    Ok(state.tau * state.ap / (6.0 * state.a))
}

/// `A‴` along a trajectory, using the limit `1/6` at the origin.
pub(crate) fn third_derivative(state: &ProfileState) -> f64 {
    if state.tau == 0.0 {
        1.0 / 6.0
    } else {
        state.tau * state.ap / (6.0 * state.a)
    }
}

/// The profile equation as a first-order system on the open half-line `A < 0`.
///
/// Points with `A >= 0` are outside the domain and reported as undefined so
/// the stepper never jumps across the singular set.
#[derive(Debug, Clone, Copy)]
pub struct ProfileOde {
    pub floor: f64,
}

impl OdeSystem<3> for ProfileOde {
    fn rhs(&self, tau: f64, y: &[f64; 3]) -> Option<[f64; 3]> {
        if !(y[0] < 0.0) || y[0].abs() < self.floor {
            return None;
        }
        Some([y[1], y[2], tau * y[1] / (6.0 * y[0])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(tau: f64, a: f64, ap: f64) -> ProfileState {
        ProfileState {
            tau,
            a,
            ap,
            app: 0.0,
        }
    }

    #[test]
    fn taylor_start_mu_zero() {
        let p = ShotParams {
            taylor_eps: 1e-4,
            ..ShotParams::with_mu(0.0)
        };
        let s = taylor_start(&p).unwrap();
        let expected = -1e-4 + 1e-12 / 36.0;
        assert!((s.a - expected).abs() < 1e-19);
        assert!((s.a - (-9.9999999997e-5)).abs() < 5e-14);
        assert_eq!(s.tau, 1e-4);
    }

    #[test]
    fn taylor_start_slope() {
        let p = ShotParams {
            taylor_eps: 1e-4,
            ..ShotParams::with_mu(0.3)
        };
        let s = taylor_start(&p).unwrap();
        let expected = -1.0 + 3e-5 + 1e-8 / 12.0;
        assert!((s.ap - expected).abs() < 1e-16);
        assert!((s.app - (0.3 + 1e-4 / 6.0)).abs() < 1e-16);
    }

    #[test]
    fn taylor_start_small_offset_limit() {
        for mu in [0.0, 0.35, 7.0] {
            let p = ShotParams {
                taylor_eps: 1e-12,
                ..ShotParams::with_mu(mu)
            };
            let s = taylor_start(&p).unwrap();
            assert!(s.a.abs() < 1e-11);
            assert!((s.ap + 1.0).abs() < 1e-10);
            assert!((s.app - mu).abs() < 1e-11);
        }
    }

    #[test]
    fn taylor_start_rejects_bad_offset() {
        for eps in [0.0, -1e-5, 2e-3] {
            let p = ShotParams {
                taylor_eps: eps,
                ..ShotParams::default()
            };
            assert!(matches!(
                taylor_start(&p),
                Err(ProfileError::InvalidParams(_))
            ));
        }
    }

    #[test]
    fn rhs_examples() {
        assert!((ode_rhs(&state(1.0, -0.5, -0.5), 1e-30).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(ode_rhs(&state(2.0, -1.0, 0.0), 1e-30).unwrap(), 0.0);
        let v = ode_rhs(&state(0.5, -0.25, -0.8), 1e-30).unwrap();
        assert!((v - 0.5 * -0.8 / (6.0 * -0.25)).abs() < 1e-15);
        assert!((v - 0.266_666_666_666_666_7).abs() < 1e-15);
    }

    #[test]
    fn rhs_degenerate_below_floor() {
        assert!(matches!(
            ode_rhs(&state(1.0, 1e-31, 1.0), 1e-30),
            Err(ProfileError::Degenerate { .. })
        ));
        assert!(matches!(
            ode_rhs(&state(1.0, 0.0, 1.0), 0.0),
            Err(ProfileError::Degenerate { .. })
        ));
    }

    #[test]
    fn system_refuses_nonnegative_profile() {
        let sys = ProfileOde { floor: 1e-30 };
        assert!(sys.rhs(1.0, &[1e-3, 1.0, 0.0]).is_none());
        assert!(sys.rhs(1.0, &[-1e-3, 1.0, 0.0]).is_some());
    }

    #[test]
    fn param_validation() {
        assert!(ShotParams::with_mu(0.2).validate().is_ok());
        assert!(ShotParams::with_mu(-0.1).validate().is_err());
        let mut p = ShotParams::default();
        p.step.atol = 0.0;
        assert!(p.validate().is_err());
    }
}
