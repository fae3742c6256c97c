use ddlab::diagnostics::{energy_sandwich_check, first_integral_residual, v1, v2, EnergyContext};
use ddlab::profile::integrator::{integrate, integrate_fixed};
use ddlab::profile::ode::ProfileOde;
use ddlab::profile::{
    ode_rhs, shoot, solve_profile, taylor_start, Classification, ProfileState, ShotOutcome, ShotParams,
    StepControl,
};

const MUS: [f64; 4] = [0.0, 0.1, 1.0, 5.0];

fn shot(mu: f64) -> ShotOutcome {
    shoot(&ShotParams::with_mu(mu)).unwrap()
}

fn rhs(tau: f64, y: [f64; 3]) -> [f64; 3] {
    [y[1], y[2], tau * y[1] / (6.0 * y[0])]
}

/// Classic fourth-order Runge–Kutta in equal steps of at most `h`.
fn rk4(tau0: f64, y0: [f64; 3], tau1: f64, h: f64) -> [f64; 3] {
    let n = ((tau1 - tau0) / h).ceil() as usize;
    let h = (tau1 - tau0) / n as f64;
    let mut y = y0;
    let axpy = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    for i in 0..n {
        let t = tau0 + i as f64 * h;
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, axpy(y, k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, axpy(y, k2, h / 2.0));
        let k4 = rhs(t + h, axpy(y, k3, h));
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

#[test]
fn adaptive_shot_matches_fixed_step_oracle() {
    for mu in MUS {
        let params = ShotParams::with_mu(mu);
        let start = taylor_start(&params).unwrap();
        let s = shot(mu);
        // a sample well inside the trajectory, away from the terminal event
        let target = s.samples[s.samples.len() * 2 / 3];
        let y = rk4(start.tau, start.as_vector(), target.tau, 1e-5);
        let err = (0..3)
            .map(|j| (y[j] - target.as_vector()[j]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "mu={mu}: tau={} err={err:e}", target.tau);
    }
}

#[test]
fn large_mu_reaches_zero_and_zero_mu_turns_back() {
    assert_eq!(shot(5.0).classification, Classification::ReachesZero);
    assert_eq!(shot(0.0).classification, Classification::NegativeMax);
    let s = shot(5.0);
    assert!(s.terminal_state.ap > 0.0 && s.terminal_state.a.abs() <= 1e-9);
}

#[test]
fn integrator_reaches_nominal_order() {
    let start = taylor_start(&ShotParams::with_mu(0.3)).unwrap();
    let sys = ProfileOde { floor: 1e-12 };
    // begin away from A = 0, where the field's y-derivatives blow up and the
    // first coarse step would dominate the error
    let (tau0, tau_end) = (1.0, 3.4);
    let y0 = integrate_fixed(&sys, start.tau, start.as_vector(), tau0, 200_000).unwrap();
    let exact = integrate_fixed(&sys, tau0, y0, tau_end, 200_000).unwrap();
    // tolerances loose enough that h_max alone controls the step
    let loose = StepControl {
        atol: 1.0,
        rtol: 1.0,
        h_init: 1.0,
        ..StepControl::default()
    };
    let hs = [0.8, 0.4, 0.2, 0.1, 0.05];
    let logs: Vec<(f64, f64)> = hs
        .iter()
        .map(|&h_max| {
            let ctrl = StepControl { h_max, ..loose };
            let traj = integrate(&sys, tau0, y0, tau_end, &ctrl).unwrap();
            let y = traj.last().unwrap().1;
            let err = (0..3).map(|j| (y[j] - exact[j]).abs()).fold(0.0, f64::max);
            (h_max.ln(), err.ln())
        })
        .collect();
    // single halvings are noisy; use the least-squares slope
    let n = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let order = sxy / sxx;
    assert!((order - 5.0).abs() <= 0.5, "observed order {order}");
}

#[test]
fn third_derivative_is_bracketed_before_first_minimum() {
    let run = solve_profile(0.0, 5.0, 1e-6, &ShotParams::default()).unwrap();
    let mut shots: Vec<ShotOutcome> = MUS.iter().map(|&m| shot(m)).collect();
    shots.push(run.shot);
    for s in &shots {
        let tau1 = s.tau1.expect("first minimum");
        let pre: Vec<&ProfileState> = s.samples.iter().filter(|p| p.tau > 0.0 && p.tau < tau1).collect();
        assert!(pre.len() > 10);
        for p in &pre {
            let appp = ode_rhs(p, 1e-300).unwrap();
            assert!(appp > 0.0 && appp < 1.0 / 6.0, "mu={} tau={} A'''={appp}", s.mu, p.tau);
        }
        assert!(pre.windows(2).all(|w| w[1].app > w[0].app), "A'' not increasing for mu={}", s.mu);
    }
}

#[test]
fn early_trajectory_lies_between_parabolas() {
    let k = 0.1;
    for mu in MUS {
        let s = shot(mu);
        let tau0 = 0.1;
        let early: Vec<_> = s.samples.iter().filter(|p| p.tau > 0.0 && p.tau <= tau0).collect();
        assert!(!early.is_empty());
        for p in early {
            let lo = -p.tau + 0.5 * (mu - k) * p.tau * p.tau;
            let hi = -p.tau + 0.5 * (mu + k) * p.tau * p.tau;
            assert!(lo < p.a && p.a < hi && hi < 0.0, "mu={mu} tau={}", p.tau);
        }
    }
}

#[test]
fn classification_is_monotone_around_the_bracket() {
    let run = solve_profile(0.0, 5.0, 1e-6, &ShotParams::default()).unwrap();
    let (lo, hi) = run.estimate.bracket;
    for i in 0..=50 {
        let mu = 5.0 * i as f64 / 50.0;
        let c = shot(mu).classification;
        if mu > hi {
            assert_eq!(c, Classification::ReachesZero, "mu={mu}");
        } else if mu < lo {
            assert_eq!(c, Classification::NegativeMax, "mu={mu}");
        }
    }
}

#[test]
fn profile_is_odd_and_compactly_supported() {
    let run = solve_profile(0.0, 5.0, 1e-6, &ShotParams::default()).unwrap();
    let sol = &run.solution;
    let n = sol.grid.len();
    for i in 0..n {
        assert_eq!(sol.grid[i], -sol.grid[n - 1 - i]);
        assert_eq!(sol.a_values[i], -sol.a_values[n - 1 - i]);
    }
    assert_eq!(sol.eval(sol.tau_star * 1.01), 0.0);
    assert_eq!(sol.eval(-sol.tau_star * 1.01), 0.0);
    assert_eq!(sol.eval(0.0), 0.0);
    assert_eq!(sol.interior_minima(), 1);
}

#[test]
fn energy_derivative_matches_closed_form() {
    let ctx = EnergyContext::new(1.3, -0.8, 0.7).unwrap();
    let t = ctx.tau1 / 6.0;
    for a in [-0.75f64, -0.5, -0.2, -0.05] {
        let h = 1e-6 * a.abs();
        let fd = (v1(a + h, &ctx).unwrap() - v1(a - h, &ctx).unwrap()) / (2.0 * h);
        let exact = t * ((a / ctx.a_tau1).ln() + 1.0) + ctx.app_tau1 - t;
        assert!(((fd - exact) / exact).abs() <= 1e-6, "a={a}: {fd} vs {exact}");
    }
}

#[test]
fn sandwich_is_tight_at_first_minimum() {
    for mu in [1.0, 5.0] {
        let s = shot(mu);
        let ctx = s.energy_context().unwrap();
        let rep = energy_sandwich_check(&s, &ctx);
        assert_eq!(rep.upper_violations, 0);
        let first = rep.samples.first().unwrap();
        let last = rep.samples.last().unwrap();
        assert!(first.upper_margin.abs() < last.upper_margin.abs().max(1e-12));
        // both potentials vanish where a = A(τ₁)
        assert!(v1(ctx.a_tau1, &ctx).unwrap().abs() < 1e-15);
        assert!(v2(ctx.a_tau1, &ctx).unwrap().abs() < 1e-15);
    }
}

#[test]
fn first_integral_improves_with_tolerance() {
    let loose = ShotParams {
        step: StepControl {
            atol: 1e-8,
            rtol: 1e-6,
            ..StepControl::default()
        },
        ..ShotParams::with_mu(1.0)
    };
    let tight = ShotParams::with_mu(1.0);
    let r_loose = first_integral_residual(&shoot(&loose).unwrap());
    let r_tight = first_integral_residual(&shoot(&tight).unwrap());
    assert!(r_tight < r_loose, "{r_tight:e} vs {r_loose:e}");
    assert!(r_tight <= 1e-8);
}
