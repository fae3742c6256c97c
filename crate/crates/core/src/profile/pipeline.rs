use super::assemble::{assemble_profile, ProfileSolution, CRITICAL_TOL};
use super::bisect::{bisect_mu_star, MuStarEstimate};
use super::ode::ShotParams;
use super::shoot::ShotOutcome;
use super::ProfileError;

/// Bracket width used when refining `μ*` for the profile itself.
///
/// A bracket of width `1e-6` leaves the terminal slope far from zero; the
/// critical orbit needs `μ*` close to machine resolution.
pub const REFINE_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRun {
    /// Bisection at the requested width.
    pub estimate: MuStarEstimate,
    /// Continuation of the same bisection to `REFINE_TOL`.
    pub refined: MuStarEstimate,
    /// Shot the profile was assembled from.
    pub shot: ShotOutcome,
    pub solution: ProfileSolution,
}

/// Bisects for `μ*` over `[lo, hi]` and assembles the critical profile.
pub fn solve_profile(
    lo: f64,
    hi: f64,
    tol: f64,
    template: &ShotParams,
) -> Result<ProfileRun, ProfileError> {
    let estimate = bisect_mu_star(lo, hi, tol, template)?;
    let refined = if tol > REFINE_TOL {
        bisect_mu_star(estimate.bracket.0, estimate.bracket.1, REFINE_TOL, template)?
    } else {
        estimate.clone()
    };
    // the end of the bracket whose terminal state is closer to critical
    let gap = |s: &ShotOutcome| s.terminal_state.a.abs().max(s.terminal_state.ap.abs());
    let shot = if gap(&refined.lower_shot) <= gap(&refined.upper_shot) {
        refined.lower_shot.clone()
    } else {
        refined.upper_shot.clone()
    };
    let solution = assemble_profile(refined.mu_star, &shot, CRITICAL_TOL)?;
    Ok(ProfileRun {
        estimate,
        refined,
        shot,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_critical_and_odd() {
        let run = solve_profile(0.0, 5.0, 1e-6, &ShotParams::default()).unwrap();
        assert!((run.estimate.mu_star - 0.354875).abs() < 2e-3);
        assert!(run.refined.width() <= 1e-14);
        let sol = &run.solution;
        assert!(sol.is_odd_symmetric());
        assert_eq!(sol.interior_minima(), 1);
        assert!(sol.tau_star > 4.0 && sol.tau_star < 5.0);
    }
}
