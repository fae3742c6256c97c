use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{Command, ExperimentSpec, Params};
use super::LabError;
use crate::diagnostics::{energy_sandwich_check, first_integral_residual, render_report};
use crate::profile::{
    fit_log_blowup, ill_posedness_table, scaling::render_table, shoot, solve_profile, EventTolerances,
    ProfileRun, ShotOutcome, ShotParams, StepControl,
};
use crate::spectral::{
    compacton_translate, observed_order, richardson, InitialData, RunConfig, Simulation,
    SimulationResult, SpectralError,
};

/// First-integral residual bound used by `diagnose`.
pub const RESIDUAL_BOUND: f64 = 1e-8;

/// Files and text produced by one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<(String, String)>,
    pub summary: String,
    /// One entry per failed run or failed check.
    pub failures: Vec<String>,
}

impl CommandOutput {
    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

/// Runs `spec` with at most `jobs` concurrent runs.
pub fn run_command(spec: &ExperimentSpec, jobs: usize) -> Result<CommandOutput, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Runtime(e.to_string()))?;
    pool.install(|| match spec.command {
        Command::Shoot => cmd_shoot(spec),
        Command::MuStar => cmd_mu_star(spec),
        Command::Profile => cmd_profile(spec),
        Command::ScalingTable => cmd_scaling_table(spec),
        Command::Sweep => cmd_sweep(spec),
        Command::Converge => cmd_converge(spec),
        Command::CompactonCheck => cmd_compacton_check(spec),
        Command::Diagnose => cmd_diagnose(spec),
    })
}

pub fn shot_template(p: &Params) -> ShotParams {
    ShotParams {
        mu: 0.0,
        taylor_eps: p.taylor_eps,
        step: StepControl {
            atol: p.atol,
            rtol: p.rtol,
            ..StepControl::default()
        },
        max_tau: p.max_tau,
        events: EventTolerances::default(),
        ..ShotParams::default()
    }
}

/// Tag safe for file names: `0.05` becomes `0.05`, `1e-8` stays readable.
fn tag(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or("none".into(), |x| format!("{x:.17e}"))
}

fn shot_csv(shot: &ShotOutcome) -> String {
    let mut out = format!("# mu={:.17e} classification={}\ntau,a,ap,app\n", shot.mu, shot.classification.as_str());
    for s in &shot.samples {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", s.tau, s.a, s.ap, s.app);
    }
    out
}

fn cmd_shoot(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let p = &spec.params;
    let template = shot_template(p);
    let shots: Vec<_> = p
        .mu
        .par_iter()
        .map(|&mu| (mu, shoot(&ShotParams { mu, ..template })))
        .collect();
    let mut out = CommandOutput::default();
    let mut table = String::from("mu,classification,tau1,tau2,terminal_a,terminal_ap,step_underflow\n");
    for (mu, res) in shots {
        match res {
            Ok(shot) => {
                let t = shot.terminal_state;
                let _ = writeln!(
                    table,
                    "{:.17e},{},{},{},{:.17e},{:.17e},{}",
                    mu,
                    shot.classification.as_str(),
                    opt(shot.tau1),
                    opt(shot.tau2),
                    t.a,
                    t.ap,
                    shot.step_underflow
                );
                out.line(format!("mu={mu}: {}", shot.classification.as_str()));
                out.file(format!("shot_mu_{}.csv", tag(mu)), shot_csv(&shot));
            }
            Err(e) => out.failures.push(format!("mu={mu}: {e}")),
        }
    }
    out.file("shots.csv", table);
    Ok(out)
}

fn profile_run(p: &Params) -> Result<ProfileRun, LabError> {
    Ok(solve_profile(p.bracket_lo, p.bracket_hi, p.bisect_tol, &shot_template(p))?)
}

fn profile_report(run: &ProfileRun) -> (String, Vec<String>) {
    let sol = &run.solution;
    let est = &run.estimate;
    let mut r = String::new();
    let mut failures = Vec::new();
    let _ = writeln!(r, "mu_star: {:.17e}", est.mu_star);
    let _ = writeln!(r, "bracket_lo: {:.17e}", est.bracket.0);
    let _ = writeln!(r, "bracket_hi: {:.17e}", est.bracket.1);
    let _ = writeln!(r, "bracket_width: {:.6e}", est.width());
    let _ = writeln!(r, "shots: {}", est.shots);
    let _ = writeln!(r, "refined_mu_star: {:.17e}", run.refined.mu_star);
    let _ = writeln!(r, "refined_width: {:.6e}", run.refined.width());
    let _ = writeln!(r, "tau_star: {:.17e}", sol.tau_star);
    let _ = writeln!(r, "terminal_a: {:.6e}", run.shot.terminal_state.a);
    let _ = writeln!(r, "terminal_ap: {:.6e}", run.shot.terminal_state.ap);
    let _ = writeln!(r, "norm_a: {:.17e}", sol.norm_a);
    let _ = writeln!(r, "norm_ap: {:.17e}", sol.norm_ap);
    let _ = writeln!(r, "norm_app: {:.17e}", sol.norm_app);
    let odd = sol.is_odd_symmetric();
    let _ = writeln!(r, "odd_symmetry: {}", if odd { "pass" } else { "fail" });
    if !odd {
        failures.push("profile is not odd-symmetric".into());
    }
    let minima = sol.interior_minima();
    let _ = writeln!(r, "interior_minima: {minima}");
    if minima != 1 {
        failures.push(format!("expected one interior minimum, found {minima}"));
    }
    match fit_log_blowup(sol) {
        Ok(fit) => {
            let _ = writeln!(r, "log_fit_slope: {:.10e}", fit.slope);
            let _ = writeln!(r, "log_fit_intercept: {:.10e}", fit.intercept);
            let _ = writeln!(r, "log_fit_r_squared: {:.10}", fit.r_squared);
            let _ = writeln!(r, "log_fit_samples: {}", fit.samples);
            let _ = writeln!(r, "log_fit_ratio_range: [{:.6}, {:.6}]", fit.ratio_min, fit.ratio_max);
        }
        Err(e) => {
            let _ = writeln!(r, "log_fit: {e}");
            failures.push(format!("log fit: {e}"));
        }
    }
    (r, failures)
}

fn cmd_mu_star(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let run = profile_run(&spec.params)?;
    let (report, failures) = profile_report(&run);
    let mut out = CommandOutput {
        failures,
        ..Default::default()
    };
    out.line(format!("mu_star = {:.10}", run.estimate.mu_star));
    out.file("mu_star_report.txt", report);
    out.file("profile.csv", run.solution.to_csv());
    Ok(out)
}

fn cmd_profile(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let run = profile_run(&spec.params)?;
    let sol = &run.solution;
    let (_, failures) = profile_report(&run);
    let mut out = CommandOutput {
        failures,
        ..Default::default()
    };
    out.line(format!("tau_star = {:.10}, {} samples", sol.tau_star, sol.grid.len()));
    out.file(
        "profile_norms.csv",
        format!(
            "mu_star,tau_star,norm_a,norm_ap,norm_app\n{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            sol.mu_star, sol.tau_star, sol.norm_a, sol.norm_ap, sol.norm_app
        ),
    );
    out.file("profile.csv", sol.to_csv());
    Ok(out)
}

fn cmd_scaling_table(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let run = profile_run(&spec.params)?;
    let rows = ill_posedness_table(&spec.params.eps, &run.solution.norms())?;
    let mut out = CommandOutput::default();
    for r in &rows {
        out.line(format!(
            "eps={}: H2(t=0)={:.6e} H2(t=1)={:.6e} ratio={:.6e}",
            r.eps, r.norm_t0, r.norm_t1, r.ratio
        ));
    }
    out.file("scaling_table.csv", render_table(&rows));
    Ok(out)
}

/// Simulation settings for one `(λ, N, dt)` triple.
pub fn run_config(p: &Params, lambda: f64, n_modes: usize, dt: f64, allow_delta_zero: bool) -> RunConfig {
    RunConfig {
        lambda,
        delta: p.delta.unwrap_or_else(|| RunConfig::default_delta(lambda)),
        n_modes,
        dt,
        t_end: p.t_end,
        output_every: p.output_every,
        solver_tol: p.solver_tol,
        max_iters: p.max_iters,
        dealias: p.dealias,
        rescaled_mode: p.rescaled,
        half_length: p.half_length,
        initial: InitialData::ScaledGaussian,
        allow_delta_zero,
    }
}

fn simulate(cfg: &RunConfig) -> Result<SimulationResult, SpectralError> {
    crate::spectral::run_simulation(cfg)
}

fn cmd_sweep(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let p = &spec.params;
    let (n, dt) = (p.n_modes[0], p.dt[0]);
    let cfgs: Vec<RunConfig> = p
        .lambda
        .iter()
        .map(|&l| run_config(p, l, n, dt, spec.allow_delta_zero))
        .collect();
    let results: Vec<_> = cfgs.par_iter().map(simulate).collect();

    let mut out = CommandOutput::default();
    let times: Vec<f64> = (0..)
        .map(|i| i as f64 * p.output_every)
        .take_while(|t| *t <= p.t_end * (1.0 + 1e-12))
        .collect();
    let mut mass = String::from("t");
    for l in &p.lambda {
        let _ = write!(mass, ",lambda={l}");
    }
    mass.push('\n');
    for (i, t) in times.iter().enumerate() {
        let _ = write!(mass, "{t:.2}");
        for r in &results {
            match r {
                Ok(r) => {
                    let _ = write!(mass, ",{:.15e}", r.series.rows[i].mass);
                }
                Err(_) => mass.push_str(",nan"),
            }
        }
        mass.push('\n');
    }
    let mut growth =
        String::from("lambda,h2dot_t0,h2dot_end,h2dot_sq_end,h1dot_end,mass_rel_drift,newton_steps\n");
    for (cfg, r) in cfgs.iter().zip(&results) {
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                out.failures.push(format!("lambda={}: {e}", cfg.lambda));
                continue;
            }
        };
        let first = r.series.rows[0];
        let last = *r.series.last().expect("series has t=0");
        let drift = r
            .series
            .rows
            .iter()
            .map(|row| ((row.mass - first.mass) / first.mass).abs())
            .fold(0.0, f64::max);
        let _ = writeln!(
            growth,
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e},{}",
            cfg.lambda,
            first.h2dot,
            last.h2dot,
            last.h2dot * last.h2dot,
            last.h1dot,
            drift,
            r.newton_steps
        );
        out.line(format!(
            "lambda={}: H2dot^2(t_end)={:.10e} mass drift {:.2e}",
            cfg.lambda,
            last.h2dot * last.h2dot,
            drift
        ));
        out.file(format!("norms_lambda_{}.csv", tag(cfg.lambda)), r.series.to_csv());
        if p.snapshots {
            for s in &r.snapshots {
                out.file(
                    format!("snapshot_lambda_{}_t_{:.3}.csv", tag(cfg.lambda), s.t),
                    s.to_csv(cfg),
                );
            }
        }
    }
    out.file("mass_table.csv", mass);
    out.file("growth.csv", growth);
    Ok(out)
}

fn cmd_converge(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let p = &spec.params;
    let mut dts = p.dt.clone();
    dts.sort_by(|a, b| b.total_cmp(a));
    dts.dedup();
    let jobs: Vec<(f64, usize, f64)> = p
        .lambda
        .iter()
        .flat_map(|&l| {
            let dts = &dts;
            p.n_modes.iter().flat_map(move |&n| dts.iter().map(move |&dt| (l, n, dt)))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(l, n, dt)| {
            let mut cfg = run_config(p, l, n, dt, spec.allow_delta_zero);
            cfg.output_every = cfg.t_end;
            simulate(&cfg).map(|r| {
                let h = r.series.last().expect("final row").h2dot;
                h * h
            })
        })
        .collect();

    let mut out = CommandOutput::default();
    for &lambda in &p.lambda {
        let mut csv = String::from("n_modes");
        for dt in &dts {
            let _ = write!(csv, ",dt={dt}");
        }
        for w in dts.windows(2) {
            let _ = write!(csv, ",richardson({}|{})", w[0], w[1]);
        }
        if dts.len() >= 3 {
            csv.push_str(",observed_order");
        }
        csv.push('\n');
        for &n in &p.n_modes {
            let vals: Vec<Option<f64>> = dts
                .iter()
                .map(|&dt| {
                    let i = jobs.iter().position(|j| *j == (lambda, n, dt)).expect("job exists");
                    match &results[i] {
                        Ok(v) => Some(*v),
                        Err(e) => {
                            out.failures.push(format!("lambda={lambda} N={n} dt={dt}: {e}"));
                            None
                        }
                    }
                })
                .collect();
            let cell = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.12e}"));
            let _ = write!(csv, "{n}");
            for v in &vals {
                let _ = write!(csv, ",{}", cell(*v));
            }
            for (w, d) in vals.windows(2).zip(dts.windows(2)) {
                let est = match (w[0], w[1]) {
                    (Some(a), Some(b)) => richardson(a, b, 2, d[0] / d[1]).ok(),
                    _ => None,
                };
                let _ = write!(csv, ",{}", cell(est));
            }
            if dts.len() >= 3 {
                let k = vals.len();
                let order = match (vals[k - 3], vals[k - 2], vals[k - 1]) {
                    (Some(a), Some(b), Some(c)) => observed_order(a, b, c, dts[k - 3] / dts[k - 2]),
                    _ => None,
                };
                let _ = write!(csv, ",{}", order.map_or("nan".into(), |o| format!("{o:.6}")));
            }
            csv.push('\n');
            out.line(format!(
                "lambda={lambda} N={n}: {}",
                vals.iter().map(|v| cell(*v)).collect::<Vec<_>>().join(" ")
            ));
        }
        out.file(format!("converge_lambda_{}.csv", tag(lambda)), csv);
    }
    Ok(out)
}

/// Relative `L²` deviation of grid values from a reference.
pub fn relative_l2(values: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = values.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Evolves `Q_λ` and measures the deviation from its exact translate at
/// every output time.
pub fn compacton_deviations(cfg: &RunConfig, center: f64) -> Result<Vec<(f64, f64)>, SpectralError> {
    let (steps, stride) = cfg.schedule()?;
    let mut sim = Simulation::new(RunConfig {
        initial: InitialData::Compacton { center },
        ..cfg.clone()
    })?;
    let measure = |sim: &Simulation| {
        let exact = compacton_translate(cfg.lambda, center, sim.time(), sim.ops());
        (sim.time(), relative_l2(&sim.ops().backward(sim.field()), &exact))
    };
    let mut rows = vec![measure(&sim)];
    for n in 1..=steps {
        sim.advance()?;
        if n % stride == 0 {
            rows.push(measure(&sim));
        }
    }
    Ok(rows)
}

fn cmd_compacton_check(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let p = &spec.params;
    let cfgs: Vec<RunConfig> = p
        .lambda
        .iter()
        .map(|&l| run_config(p, l, p.n_modes[0], p.dt[0], spec.allow_delta_zero))
        .collect();
    let results: Vec<_> = cfgs.par_iter().map(|c| compacton_deviations(c, p.center)).collect();
    let mut out = CommandOutput::default();
    for (cfg, r) in cfgs.iter().zip(results) {
        match r {
            Ok(rows) => {
                let mut csv = String::from("t,deviation\n");
                for (t, d) in &rows {
                    let _ = writeln!(csv, "{t:.6e},{d:.12e}");
                }
                let (t, d) = rows.last().copied().expect("t=0 row");
                out.line(format!("lambda={} delta={}: deviation {d:.3e} at t={t}", cfg.lambda, cfg.delta));
                out.file(format!("compacton_lambda_{}.csv", tag(cfg.lambda)), csv);
            }
            Err(e) => out.failures.push(format!("lambda={}: {e}", cfg.lambda)),
        }
    }
    Ok(out)
}

fn cmd_diagnose(spec: &ExperimentSpec) -> Result<CommandOutput, LabError> {
    let p = &spec.params;
    let template = shot_template(p);
    let mut shots: Vec<(String, Result<ShotOutcome, LabError>)> = p
        .mu
        .par_iter()
        .map(|&mu| (tag(mu), shoot(&ShotParams { mu, ..template }).map_err(LabError::from)))
        .collect();
    if p.include_mu_star {
        shots.push(("star".into(), profile_run(p).map(|r| r.shot)));
    }
    let mut out = CommandOutput::default();
    let mut table = String::from("mu,classification,first_integral_residual,upper_violations,lower_violations\n");
    for (name, res) in shots {
        let shot = match res {
            Ok(s) => s,
            Err(e) => {
                out.failures.push(format!("mu={name}: {e}"));
                continue;
            }
        };
        let resid = first_integral_residual(&shot);
        let (upper, lower) = match shot.energy_context() {
            Some(ctx) => {
                let rep = energy_sandwich_check(&shot, &ctx);
                let lower = if rep.lower_applicable {
                    rep.lower_violations.to_string()
                } else {
                    "inapplicable".into()
                };
                (rep.upper_violations.to_string(), lower)
            }
            None => ("none".into(), "none".into()),
        };
        let _ = writeln!(
            table,
            "{:.17e},{},{:.6e},{},{}",
            shot.mu,
            shot.classification.as_str(),
            resid,
            upper,
            lower
        );
        if !(resid <= RESIDUAL_BOUND) {
            out.failures.push(format!("mu={name}: first-integral residual {resid:.3e}"));
        }
        for (kind, v) in [("upper", &upper), ("lower", &lower)] {
            if v.parse::<usize>().is_ok_and(|n| n > 0) {
                out.failures.push(format!("mu={name}: {v} {kind} energy violations"));
            }
        }
        out.line(format!("mu={name}: residual {resid:.2e}, violations {upper}/{lower}"));
        out.file(format!("diagnose_mu_{name}.txt"), render_report(&shot));
    }
    out.file("diagnose.csv", table);
    Ok(out)
}
