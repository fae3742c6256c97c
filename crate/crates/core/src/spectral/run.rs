use std::fmt::Write as _;
use std::str::FromStr;

use super::field::{FourierOps, SpectralField};
use super::grid::Grid;
use super::init::{compacton_field, init_scaled_gaussian};
use super::measure::{mass, norms};
use super::solver::{cn_step, StepConfig};
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `λ·exp(−4(x/λ^{1/3})²)`.
    ScaledGaussian,
    /// `Q_λ` centered at the given point.
    Compacton { center: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: f64,
    pub delta: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: f64,
    pub solver_tol: f64,
    pub max_iters: usize,
    pub dealias: bool,
    /// Solve for `v(y) = u(λ^{1/3}y)/λ` instead of `u`; reported norms and
    /// mass are mapped back to `u`.
    pub rescaled_mode: bool,
    pub half_length: f64,
    pub initial: InitialData,
    /// Permits `δ = 0`, where the continuous problem is ill-posed and runs
    /// may blow up at the grid scale.
    pub allow_delta_zero: bool,
}

impl RunConfig {
    pub fn default_delta(lambda: f64) -> f64 {
        0.1 * lambda.powi(4)
    }

    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            delta: Self::default_delta(lambda),
            n_modes: 8192,
            dt: 1e-3,
            t_end: 0.1,
            output_every: 0.02,
            solver_tol: 1e-8,
            max_iters: 100,
            dealias: true,
            rescaled_mode: false,
            half_length: 2.0 * std::f64::consts::PI,
            initial: InitialData::ScaledGaussian,
            allow_delta_zero: false,
        }
    }

    /// Number of steps and the output stride in steps.
    pub fn schedule(&self) -> Result<(usize, usize), SpectralError> {
        let steps = multiple_of(self.t_end, self.dt, "t_end")?;
        let stride = multiple_of(self.output_every, self.dt, "output_every")?;
        if stride == 0 {
            return Err(SpectralError::InvalidConfig("output_every must be positive".into()));
        }
        Ok((steps, stride))
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |m: String| Err(SpectralError::InvalidConfig(m));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if self.delta == 0.0 && !self.allow_delta_zero {
            return bad("delta = 0 requires the explicit allow_delta_zero override".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.solver_tol > 0.0) {
            return bad(format!("solver_tol must be positive, got {}", self.solver_tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if self.rescaled_mode && self.initial != InitialData::ScaledGaussian {
            return bad("rescaled mode only supports Gaussian initial data".into());
        }
        self.grid()?;
        self.schedule()?;
        Ok(())
    }

    /// Grid of the solved variable (stretched by `λ^{-1/3}` in rescaled mode).
    pub fn grid(&self) -> Result<Grid, SpectralError> {
        let half = if self.rescaled_mode {
            self.half_length / self.lambda.cbrt()
        } else {
            self.half_length
        };
        Grid::new(self.n_modes, half)
    }

    pub fn step_config(&self) -> StepConfig {
        let (delta, weight) = if self.rescaled_mode {
            // δλ^{-4/3} in y; with the default δ this is .1λ^{8/3}
            (self.delta / self.lambda.powf(4.0 / 3.0), self.lambda.powf(2.0 / 3.0))
        } else {
            (self.delta, 1.0)
        };
        StepConfig {
            dt: self.dt,
            delta,
            weight,
            tol: self.solver_tol,
            max_iters: self.max_iters,
            dealias: self.dealias,
        }
    }
}

fn multiple_of(total: f64, dt: f64, key: &str) -> Result<usize, SpectralError> {
    if !(total >= 0.0 && total.is_finite()) {
        return Err(SpectralError::InvalidConfig(format!("{key} must be >= 0")));
    }
    let n = (total / dt).round();
    if (n * dt - total).abs() > 1e-9 * total.max(dt) {
        return Err(SpectralError::InvalidConfig(format!(
            "{key} = {total} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub t: f64,
    pub l2: f64,
    pub h1dot: f64,
    pub h2dot: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormSeries {
    pub rows: Vec<NormRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Physical coordinates `x`.
    pub x: Vec<f64>,
    /// `u(x, t)`.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub series: NormSeries,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub total_iters: usize,
    pub newton_steps: usize,
    pub max_residual: f64,
}

/// Time stepper owning its state; `run_simulation` drives one to `t_end`.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: RunConfig,
    ops: FourierOps,
    step_cfg: StepConfig,
    u: SpectralField,
    step: usize,
    pub total_iters: usize,
    pub newton_steps: usize,
    pub max_residual: f64,
}

impl Simulation {
    pub fn new(cfg: RunConfig) -> Result<Self, SpectralError> {
        cfg.validate()?;
        let ops = FourierOps::new(cfg.grid()?);
        let u = match cfg.initial {
            InitialData::ScaledGaussian if cfg.rescaled_mode => init_scaled_gaussian(1.0, &ops)?,
            InitialData::ScaledGaussian => init_scaled_gaussian(cfg.lambda, &ops)?,
            InitialData::Compacton { center } => compacton_field(cfg.lambda, center, &ops)?,
        };
        let step_cfg = cfg.step_config();
        Ok(Self {
            cfg,
            ops,
            step_cfg,
            u,
            step: 0,
            total_iters: 0,
            newton_steps: 0,
            max_residual: 0.0,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn ops(&self) -> &FourierOps {
        &self.ops
    }

    pub fn field(&self) -> &SpectralField {
        &self.u
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn advance(&mut self) -> Result<(), SpectralError> {
        let rep = cn_step(&self.ops, &self.u, &self.step_cfg, self.step + 1)?;
        self.u = rep.field;
        self.step += 1;
        self.total_iters += rep.iters;
        self.newton_steps += rep.newton as usize;
        self.max_residual = self.max_residual.max(rep.residual);
        Ok(())
    }

    /// Norms and mass of `u` in physical variables.
    pub fn measure(&self) -> NormRow {
        let n = norms(&self.u);
        let m = mass(&self.u);
        let t = self.time();
        if !self.cfg.rescaled_mode {
            return NormRow {
                t,
                l2: n.l2,
                h1dot: n.h1dot,
                h2dot: n.h2dot,
                mass: m,
            };
        }
        // u(x) = λv(x/s), s = λ^{1/3}: ‖∂ˢu‖ = λ s^{1/2 − s'} ‖∂ˢ'v‖
        let lam = self.cfg.lambda;
        let s = lam.cbrt();
        NormRow {
            t,
            l2: lam * s.sqrt() * n.l2,
            h1dot: lam * s.sqrt() / s * n.h1dot,
            h2dot: lam * s.sqrt() / (s * s) * n.h2dot,
            mass: lam * s * m,
        }
    }

    /// Grid values of `u` at physical points.
    pub fn snapshot(&self) -> Snapshot {
        let mut x = self.ops.grid.points();
        let mut u = self.ops.backward(&self.u);
        if self.cfg.rescaled_mode {
            let s = self.cfg.lambda.cbrt();
            x.iter_mut().for_each(|v| *v *= s);
            u.iter_mut().for_each(|v| *v *= self.cfg.lambda);
        }
        Snapshot { t: self.time(), x, u }
    }
}

/// Steps to `t_end`, recording norms and a snapshot every `output_every`.
pub fn run_simulation(cfg: &RunConfig) -> Result<SimulationResult, SpectralError> {
    let (steps, stride) = cfg.schedule()?;
    let mut sim = Simulation::new(cfg.clone())?;
    let mut series = NormSeries::default();
    let mut snapshots = Vec::new();
    series.rows.push(sim.measure());
    snapshots.push(sim.snapshot());
    for n in 1..=steps {
        sim.advance()?;
        if n % stride == 0 {
            series.rows.push(sim.measure());
            snapshots.push(sim.snapshot());
        }
    }
    Ok(SimulationResult {
        series,
        snapshots,
        steps,
        total_iters: sim.total_iters,
        newton_steps: sim.newton_steps,
        max_residual: sim.max_residual,
    })
}

/// `v_fine + (v_fine − v_coarse)/(ratio^order − 1)`.
pub fn richardson(v_coarse: f64, v_fine: f64, order: u32, ratio: f64) -> Result<f64, SpectralError> {
    if !(ratio > 1.0) || order == 0 {
        return Err(SpectralError::InvalidConfig(format!(
            "richardson needs ratio > 1 and order >= 1, got ratio={ratio} order={order}"
        )));
    }
    Ok(v_fine + (v_fine - v_coarse) / (ratio.powi(order as i32) - 1.0))
}

/// Observed order from three values at steps `h, h/ratio, h/ratio²`.
pub fn observed_order(v1: f64, v2: f64, v3: f64, ratio: f64) -> Option<f64> {
    let (a, b) = ((v1 - v2).abs(), (v2 - v3).abs());
    if a == 0.0 || b == 0.0 || !(ratio > 1.0) {
        return None;
    }
    Some((a / b).ln() / ratio.ln())
}

fn csv_err(line: usize, msg: impl Into<String>) -> SpectralError {
    SpectralError::Csv {
        line,
        msg: msg.into(),
    }
}

fn parse_num(s: &str, line: usize) -> Result<f64, SpectralError> {
    s.trim()
        .parse()
        .map_err(|_| csv_err(line, format!("bad number '{s}'")))
}

impl NormSeries {
    pub const HEADER: &'static str = "t,l2,h1dot,h2dot,mass";

    pub fn last(&self) -> Option<&NormRow> {
        self.rows.last()
    }

    /// Row whose time is closest to `t`.
    pub fn at(&self, t: f64) -> Option<&NormRow> {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Times strictly increasing and all values finite.
    pub fn is_valid(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].t < w[1].t)
            && self.rows.iter().all(|r| {
                [r.t, r.l2, r.h1dot, r.h2dot, r.mass]
                    .iter()
                    .all(|v| v.is_finite())
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.l2, r.h1dot, r.h2dot, r.mass
            );
        }
        out
    }
}

impl FromStr for NormSeries {
    type Err = SpectralError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l.trim() == Self::HEADER => {}
            _ => return Err(csv_err(1, format!("expected header {}", Self::HEADER))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let v: Vec<&str> = line.split(',').collect();
            if v.len() != 5 {
                return Err(csv_err(i + 1, "expected 5 columns"));
            }
            rows.push(NormRow {
                t: parse_num(v[0], i + 1)?,
                l2: parse_num(v[1], i + 1)?,
                h1dot: parse_num(v[2], i + 1)?,
                h2dot: parse_num(v[3], i + 1)?,
                mass: parse_num(v[4], i + 1)?,
            });
        }
        let series = NormSeries { rows };
        if !series.is_valid() {
            return Err(csv_err(0, "times must increase and values must be finite"));
        }
        Ok(series)
    }
}

/// Metadata written in a snapshot header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub lambda: f64,
    pub delta: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t: f64,
}

impl Snapshot {
    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# lambda={:.17e} delta={:.17e} n_modes={} dt={:.17e} t={:.17e}",
            cfg.lambda, cfg.delta, cfg.n_modes, cfg.dt, self.t
        );
        out.push_str("x,u\n");
        for (x, u) in self.x.iter().zip(&self.u) {
            let _ = writeln!(out, "{x:.17e},{u:.17e}");
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<(SnapshotMeta, Snapshot), SpectralError> {
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix('#'))
            .ok_or_else(|| csv_err(1, "missing '#' metadata header"))?;
        let mut meta = SnapshotMeta {
            lambda: f64::NAN,
            delta: f64::NAN,
            n_modes: 0,
            dt: f64::NAN,
            t: f64::NAN,
        };
        for pair in header.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| csv_err(1, "expected key=value"))?;
            match k {
                "lambda" => meta.lambda = parse_num(v, 1)?,
                "delta" => meta.delta = parse_num(v, 1)?,
                "dt" => meta.dt = parse_num(v, 1)?,
                "t" => meta.t = parse_num(v, 1)?,
                "n_modes" => {
                    meta.n_modes = v.parse().map_err(|_| csv_err(1, "bad n_modes"))?
                }
                other => return Err(csv_err(1, format!("unknown key {other}"))),
            }
        }
        if [meta.lambda, meta.delta, meta.dt, meta.t].iter().any(|v| v.is_nan()) || meta.n_modes == 0 {
            return Err(csv_err(1, "missing metadata key"));
        }
        match lines.next() {
            Some((_, "x,u")) => {}
            _ => return Err(csv_err(2, "expected column header x,u")),
        }
        let (mut x, mut u) = (Vec::new(), Vec::new());
        for (i, line) in lines {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| csv_err(i + 1, "expected 2 columns"))?;
            x.push(parse_num(a, i + 1)?);
            u.push(parse_num(b, i + 1)?);
        }
        if x.len() != meta.n_modes {
            return Err(csv_err(0, format!("expected {} rows, got {}", meta.n_modes, x.len())));
        }
        Ok((meta, Snapshot { t: meta.t, x, u }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_examples() {
        let a = richardson(675.27623578, 692.22147559, 2, 2.0).unwrap();
        assert!((a - 697.87).abs() < 5e-3);
        let b = richardson(692.22147576, 696.5301162, 2, 2.0).unwrap();
        assert!((b - 697.97).abs() < 5e-3);
        assert_eq!(richardson(3.5, 3.5, 2, 2.0).unwrap(), 3.5);
        assert!(richardson(1.0, 2.0, 2, 1.0).is_err());
        assert!(richardson(1.0, 2.0, 0, 2.0).is_err());
    }

    #[test]
    fn observed_order_of_quadratic_error() {
        let f = |h: f64| 5.0 + 3.0 * h * h;
        let p = observed_order(f(0.4), f(0.2), f(0.1), 2.0).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert!(observed_order(1.0, 1.0, 1.0, 2.0).is_none());
    }

    #[test]
    fn default_config_and_schedule() {
        let c = RunConfig::new(0.2);
        assert_eq!(c.n_modes, 8192);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.solver_tol, 1e-8);
        assert!((c.delta - 1.6e-4).abs() < 1e-18);
        assert_eq!(c.schedule().unwrap(), (100, 20));
        let mut bad = c.clone();
        bad.t_end = 0.1005;
        assert!(bad.validate().is_err());
        let mut zero = c.clone();
        zero.delta = 0.0;
        assert!(zero.validate().is_err());
        zero.allow_delta_zero = true;
        assert!(zero.validate().is_ok());
    }

    #[test]
    fn short_run_records_outputs() {
        let mut c = RunConfig::new(1.0);
        c.n_modes = 128;
        c.t_end = 0.004;
        c.output_every = 0.002;
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.series.rows.len(), 3);
        assert_eq!(r.snapshots.len(), 3);
        assert!(r.series.is_valid());
        let m0 = r.series.rows[0].mass;
        for row in &r.series.rows {
            assert!(((row.mass - m0) / m0).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaled_mode_matches_direct_run() {
        let mut c = RunConfig::new(0.5);
        c.n_modes = 256;
        c.t_end = 0.01;
        c.output_every = 0.01;
        let direct = run_simulation(&c).unwrap();
        c.rescaled_mode = true;
        let scaled = run_simulation(&c).unwrap();
        // the stretched y-domain maps onto the same x-grid
        let (a, b) = (direct.series.last().unwrap(), scaled.series.last().unwrap());
        assert!(((a.mass - b.mass) / a.mass).abs() < 1e-10);
        assert!(((a.h2dot - b.h2dot) / a.h2dot).abs() < 1e-6, "{} vs {}", a.h2dot, b.h2dot);
    }

    #[test]
    fn csv_round_trips() {
        let mut c = RunConfig::new(1.0);
        c.n_modes = 32;
        c.t_end = 0.002;
        c.output_every = 0.001;
        let r = run_simulation(&c).unwrap();
        let back: NormSeries = r.series.to_csv().parse().unwrap();
        assert_eq!(back, r.series);
        let snap = &r.snapshots[1];
        let (meta, parsed) = Snapshot::parse_csv(&snap.to_csv(&c)).unwrap();
        assert_eq!(&parsed, snap);
        assert_eq!(meta.n_modes, 32);
        assert!("t,l2\n".parse::<NormSeries>().is_err());
    }
}
