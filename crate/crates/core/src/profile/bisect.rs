use super::ode::ShotParams;
use super::shoot::{shoot, Classification, ShotOutcome};
use super::ProfileError;

/// Result of bisecting on the shot classification.
#[derive(Debug, Clone, PartialEq)]
pub struct MuStarEstimate {
    /// Midpoint of the final bracket.
    pub mu_star: f64,
    /// Final `(NegativeMax, ReachesZero)` bracket.
    pub bracket: (f64, f64),
    pub shots: usize,
    /// Shot at the upper end of the final bracket.
    pub upper_shot: ShotOutcome,
    /// Shot at the lower end of the final bracket.
    pub lower_shot: ShotOutcome,
}

impl MuStarEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Bisection for `μ* = inf{μ̄ : every μ ≥ μ̄ reaches zero}`.
///
/// `template` supplies everything except `mu`. An undetermined shot aborts
/// the search instead of being assigned a side.
pub fn bisect_mu_star(
    lo: f64,
    hi: f64,
    tol: f64,
    template: &ShotParams,
) -> Result<MuStarEstimate, ProfileError> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(ProfileError::InvalidParams(format!(
            "bisection needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    let run = |mu: f64| shoot(&ShotParams { mu, ..*template });
    let mut lower_shot = run(lo)?;
    let mut upper_shot = run(hi)?;
    if lower_shot.classification != Classification::NegativeMax
        || upper_shot.classification != Classification::ReachesZero
    {
        return Err(ProfileError::BracketInvalid {
            lo,
            lo_class: lower_shot.classification,
            hi,
            hi_class: upper_shot.classification,
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut shots = 2;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let out = run(mid)?;
        shots += 1;
        match out.classification {
            Classification::NegativeMax => {
                lo = mid;
                lower_shot = out;
            }
            Classification::ReachesZero => {
                hi = mid;
                upper_shot = out;
            }
            Classification::Undetermined => {
                return Err(ProfileError::BisectionUndetermined {
                    mu: mid,
                    bracket: (lo, hi),
                    tau: out.terminal_state.tau,
                    step_underflow: out.step_underflow,
                })
            }
        }
    }
    Ok(MuStarEstimate {
        mu_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        shots,
        upper_shot,
        lower_shot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narrow_bracket_contains_reference() {
        let est = bisect_mu_star(0.354, 0.356, 1e-3, &ShotParams::default()).unwrap();
        assert!(est.width() <= 1e-3);
        assert!(est.bracket.0 <= 0.354875 && 0.354875 <= est.bracket.1);
    }

    #[test]
    fn bracket_reaches_requested_width() {
        let est = bisect_mu_star(0.3, 0.4, 1e-8, &ShotParams::default()).unwrap();
        assert!(est.width() <= 1e-8);
        assert_eq!(est.lower_shot.classification, Classification::NegativeMax);
        assert_eq!(est.upper_shot.classification, Classification::ReachesZero);
    }

    #[test]
    fn misordered_bracket_rejected() {
        let err = bisect_mu_star(1.0, 5.0, 1e-3, &ShotParams::default()).unwrap_err();
        assert!(matches!(err, ProfileError::BracketInvalid { .. }));
        assert!(bisect_mu_star(1.0, 0.5, 1e-3, &ShotParams::default()).is_err());
    }
}
