//! Line-oriented run configuration.
//!
//! Grammar: one `key = value` pair per line. `#` starts a comment that runs
//! to the end of the line; blank lines are ignored. Lists are comma
//! separated (`lambda = 1, 0.4, 0.2`). Booleans are `true` or `false`. Keys
//! may appear at most once and unknown keys are rejected.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Shoot,
    MuStar,
    Profile,
    ScalingTable,
    Sweep,
    Converge,
    CompactonCheck,
    Diagnose,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Shoot,
        Command::MuStar,
        Command::Profile,
        Command::ScalingTable,
        Command::Sweep,
        Command::Converge,
        Command::CompactonCheck,
        Command::Diagnose,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Shoot => "shoot",
            Command::MuStar => "mu-star",
            Command::Profile => "profile",
            Command::ScalingTable => "scaling-table",
            Command::Sweep => "sweep",
            Command::Converge => "converge",
            Command::CompactonCheck => "compacton-check",
            Command::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.as_str()).collect();
                format!("unknown command '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid value for '{key}': {msg}")]
    Validation { key: String, msg: String },
}

impl ConfigError {
    fn parse(line: usize, column: usize, msg: impl Into<String>) -> Self {
        ConfigError::Parse {
            line,
            column,
            msg: msg.into(),
        }
    }

    fn invalid(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}

/// Fully resolved parameters; every field has a documented default.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub lambda: Vec<f64>,
    pub n_modes: Vec<usize>,
    pub dt: Vec<f64>,
    pub t_end: f64,
    pub output_every: f64,
    pub solver_tol: f64,
    pub max_iters: usize,
    pub dealias: bool,
    pub rescaled: bool,
    /// Overrides the default `δ = .1λ⁴`.
    pub delta: Option<f64>,
    pub half_length: f64,
    pub center: f64,
    pub snapshots: bool,
    pub mu: Vec<f64>,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub bisect_tol: f64,
    pub taylor_eps: f64,
    pub max_tau: f64,
    pub atol: f64,
    pub rtol: f64,
    pub eps: Vec<f64>,
    pub include_mu_star: bool,
}

impl Params {
    pub fn defaults(command: Command) -> Self {
        let lambda = match command {
            Command::Converge => vec![0.2],
            Command::CompactonCheck => vec![0.5],
            _ => vec![1.0, 0.4, 0.2, 0.1, 0.05],
        };
        let dt = match command {
            Command::Converge => vec![0.004, 0.002, 0.001],
            _ => vec![0.001],
        };
        Self {
            lambda,
            n_modes: vec![8192],
            dt,
            t_end: 0.1,
            output_every: 0.02,
            solver_tol: 1e-8,
            max_iters: 100,
            dealias: true,
            rescaled: false,
            delta: None,
            half_length: 2.0 * std::f64::consts::PI,
            center: 0.0,
            snapshots: true,
            mu: vec![0.0, 0.1, 1.0, 5.0],
            bracket_lo: 0.0,
            bracket_hi: 5.0,
            bisect_tol: 1e-6,
            taylor_eps: 1e-4,
            max_tau: 50.0,
            atol: 1e-12,
            rtol: 1e-10,
            eps: vec![0.5, 0.2, 0.1],
            include_mu_star: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub params: Params,
    /// From the command-line flag or the `allow_delta_zero` key.
    pub allow_delta_zero: bool,
}

pub const KEYS: [&str; 24] = [
    "lambda",
    "n_modes",
    "dt",
    "t_end",
    "output_every",
    "solver_tol",
    "max_iters",
    "dealias",
    "rescaled",
    "delta",
    "half_length",
    "center",
    "snapshots",
    "mu",
    "bracket_lo",
    "bracket_hi",
    "bisect_tol",
    "taylor_eps",
    "max_tau",
    "atol",
    "rtol",
    "eps",
    "include_mu_star",
    "allow_delta_zero",
];

/// Value text with the column where it starts.
struct Value<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Value<'_> {
    fn items(&self) -> Vec<(&str, usize)> {
        if self.text.trim().is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut offset = 0;
        for piece in self.text.split(',') {
            let lead = piece.len() - piece.trim_start().len();
            out.push((piece.trim(), self.column + offset + lead));
            offset += piece.len() + 1;
        }
        out
    }

    fn f64_list(&self) -> Result<Vec<f64>, ConfigError> {
        self.items()
            .into_iter()
            .map(|(s, col)| {
                s.parse::<f64>()
                    .map_err(|_| ConfigError::parse(self.line, col, format!("expected a number, found '{s}'")))
            })
            .collect()
    }

    fn usize_list(&self) -> Result<Vec<usize>, ConfigError> {
        self.items()
            .into_iter()
            .map(|(s, col)| {
                s.parse::<usize>().map_err(|_| {
                    ConfigError::parse(self.line, col, format!("expected a non-negative integer, found '{s}'"))
                })
            })
            .collect()
    }

    fn single<T>(&self, key: &str, list: Vec<T>) -> Result<T, ConfigError> {
        let n = list.len();
        let mut it = list.into_iter();
        match (it.next(), n) {
            (Some(v), 1) => Ok(v),
            _ => Err(ConfigError::invalid(key, format!("expected exactly one value, found {n}"))),
        }
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let list = self.f64_list()?;
        self.single(key, list)
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let list = self.usize_list()?;
        self.single(key, list)
    }

    fn bool(&self) -> Result<bool, ConfigError> {
        match self.text.trim() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(ConfigError::parse(
                self.line,
                self.column,
                format!("expected true or false, found '{other}'"),
            )),
        }
    }
}

/// Parses and validates a configuration for `command`.
pub fn parse_config(command: Command, text: &str) -> Result<ExperimentSpec, ConfigError> {
    parse_config_with(command, text, false)
}

/// As `parse_config`, with the command-line `δ = 0` override applied before
/// validation.
pub fn parse_config_with(
    command: Command,
    text: &str,
    allow_delta_zero_flag: bool,
) -> Result<ExperimentSpec, ConfigError> {
    let mut p = Params::defaults(command);
    let mut allow_delta_zero = allow_delta_zero_flag;
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let key_col = body.len() - body.trim_start().len() + 1;
        let (key_part, value_part) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::parse(line, key_col, "expected 'key = value'"))?;
        let key = key_part.trim();
        let key_ok = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if !key_ok {
            return Err(ConfigError::parse(line, key_col, format!("malformed key '{key}'")));
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::invalid(key, "unknown key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::parse(line, key_col, format!("duplicate key '{key}'")));
        }
        let value_col = key_part.len() + 2 + (value_part.len() - value_part.trim_start().len());
        let v = Value {
            text: value_part.trim(),
            line,
            column: value_col,
        };
        match key {
            "lambda" => p.lambda = v.f64_list()?,
            "n_modes" => p.n_modes = v.usize_list()?,
            "dt" => p.dt = v.f64_list()?,
            "t_end" => p.t_end = v.f64(key)?,
            "output_every" => p.output_every = v.f64(key)?,
            "solver_tol" => p.solver_tol = v.f64(key)?,
            "max_iters" => p.max_iters = v.usize(key)?,
            "dealias" => p.dealias = v.bool()?,
            "rescaled" => p.rescaled = v.bool()?,
            "delta" => p.delta = Some(v.f64(key)?),
            "half_length" => p.half_length = v.f64(key)?,
            "center" => p.center = v.f64(key)?,
            "snapshots" => p.snapshots = v.bool()?,
            "mu" => p.mu = v.f64_list()?,
            "bracket_lo" => p.bracket_lo = v.f64(key)?,
            "bracket_hi" => p.bracket_hi = v.f64(key)?,
            "bisect_tol" => p.bisect_tol = v.f64(key)?,
            "taylor_eps" => p.taylor_eps = v.f64(key)?,
            "max_tau" => p.max_tau = v.f64(key)?,
            "atol" => p.atol = v.f64(key)?,
            "rtol" => p.rtol = v.f64(key)?,
            "eps" => p.eps = v.f64_list()?,
            "include_mu_star" => p.include_mu_star = v.bool()?,
            "allow_delta_zero" => allow_delta_zero |= v.bool()?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    let spec = ExperimentSpec {
        command,
        params: p,
        allow_delta_zero,
    };
    validate(&spec)?;
    Ok(spec)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn nonempty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(ConfigError::invalid(key, "list must not be empty"))
    } else {
        Ok(())
    }
}

fn is_multiple(total: f64, dt: f64) -> bool {
    let n = (total / dt).round();
    (n * dt - total).abs() <= 1e-9 * total.max(dt)
}

pub fn validate(spec: &ExperimentSpec) -> Result<(), ConfigError> {
    let p = &spec.params;
    nonempty("lambda", &p.lambda)?;
    for &l in &p.lambda {
        positive("lambda", l)?;
    }
    nonempty("n_modes", &p.n_modes)?;
    for &n in &p.n_modes {
        if n < 8 || !n.is_power_of_two() || n > 1 << 22 {
            return Err(ConfigError::invalid(
                "n_modes",
                format!("must be a power of two in [8, 2^22], got {n}"),
            ));
        }
    }
    nonempty("dt", &p.dt)?;
    for &dt in &p.dt {
        positive("dt", dt)?;
    }
    positive("t_end", p.t_end)?;
    positive("output_every", p.output_every)?;
    for &dt in &p.dt {
        if !is_multiple(p.t_end, dt) {
            return Err(ConfigError::invalid("t_end", format!("must be an integer multiple of dt = {dt}")));
        }
        if !is_multiple(p.output_every, dt) {
            return Err(ConfigError::invalid(
                "output_every",
                format!("must be an integer multiple of dt = {dt}"),
            ));
        }
    }
    positive("solver_tol", p.solver_tol)?;
    if p.max_iters == 0 {
        return Err(ConfigError::invalid("max_iters", "must be at least 1"));
    }
    if let Some(d) = p.delta {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(ConfigError::invalid("delta", format!("must be >= 0, got {d}")));
        }
        if d == 0.0 && !spec.allow_delta_zero {
            return Err(ConfigError::invalid(
                "delta",
                "delta = 0 needs --allow-delta-zero (the unregularized problem is ill-posed)",
            ));
        }
    }
    positive("half_length", p.half_length)?;
    if !p.center.is_finite() {
        return Err(ConfigError::invalid("center", "must be finite"));
    }
    nonempty("mu", &p.mu)?;
    for &m in &p.mu {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(ConfigError::invalid("mu", format!("must be finite and >= 0, got {m}")));
        }
    }
    if !(p.bracket_lo >= 0.0 && p.bracket_lo.is_finite()) {
        return Err(ConfigError::invalid("bracket_lo", "must be finite and >= 0"));
    }
    positive("bracket_hi", p.bracket_hi)?;
    if p.bracket_lo >= p.bracket_hi {
        return Err(ConfigError::invalid("bracket_hi", "must exceed bracket_lo"));
    }
    positive("bisect_tol", p.bisect_tol)?;
    if !(p.taylor_eps > 0.0 && p.taylor_eps <= 1e-3) {
        return Err(ConfigError::invalid("taylor_eps", "must lie in (0, 1e-3]"));
    }
    positive("max_tau", p.max_tau)?;
    positive("atol", p.atol)?;
    positive("rtol", p.rtol)?;
    nonempty("eps", &p.eps)?;
    for &e in &p.eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(ConfigError::invalid("eps", format!("must lie in (0, 1), got {e}")));
        }
    }
    match spec.command {
        Command::Sweep | Command::CompactonCheck => {
            single_valued("n_modes", p.n_modes.len())?;
            single_valued("dt", p.dt.len())?;
        }
        _ => {}
    }
    if spec.command == Command::CompactonCheck && p.delta.is_none() {
        return Err(ConfigError::invalid("delta", "compacton-check needs an explicit delta"));
    }
    Ok(())
}

fn single_valued(key: &str, n: usize) -> Result<(), ConfigError> {
    if n == 1 {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("this command takes a single value, got {n}")))
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentSpec {
    /// Every resolved key in the canonical grammar; parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let p = &self.params;
        let mut out = format!("# resolved configuration for {}\n", self.command);
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("lambda", join(&p.lambda));
        kv("n_modes", join(&p.n_modes));
        kv("dt", join(&p.dt));
        kv("t_end", p.t_end.to_string());
        kv("output_every", p.output_every.to_string());
        kv("solver_tol", p.solver_tol.to_string());
        kv("max_iters", p.max_iters.to_string());
        kv("dealias", p.dealias.to_string());
        kv("rescaled", p.rescaled.to_string());
        if let Some(d) = p.delta {
            kv("delta", d.to_string());
        }
        kv("half_length", p.half_length.to_string());
        kv("center", p.center.to_string());
        kv("snapshots", p.snapshots.to_string());
        kv("mu", join(&p.mu));
        kv("bracket_lo", p.bracket_lo.to_string());
        kv("bracket_hi", p.bracket_hi.to_string());
        kv("bisect_tol", p.bisect_tol.to_string());
        kv("taylor_eps", p.taylor_eps.to_string());
        kv("max_tau", p.max_tau.to_string());
        kv("atol", p.atol.to_string());
        kv("rtol", p.rtol.to_string());
        kv("eps", join(&p.eps));
        kv("include_mu_star", p.include_mu_star.to_string());
        kv("allow_delta_zero", self.allow_delta_zero.to_string());
        out
    }
}
