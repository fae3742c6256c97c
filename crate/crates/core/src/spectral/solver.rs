//! One Crank–Nicolson step
//! `(I + δ∂⁴)(u⁺ − u) = (Δt/2)(F(u⁺) + F(u))`, `F(u) = w∂(u²) + ∂³(u²)`.
//!
//! The implicit equation is solved by a fixed-point sweep preconditioned by
//! `(I + δ∂⁴)⁻¹`. When the sweep stalls, Newton iterations take over with a
//! GMRES inner solve on the exact Jacobian action.

use num_complex::Complex64;

use super::field::{FourierOps, SpectralField};
use super::measure::norms;
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub delta: f64,
    /// Weight `w` of the first-order flux term.
    pub weight: f64,
    /// Bound on the `L²` norm of the step residual.
    pub tol: f64,
    /// Cap on outer iterations (fixed-point sweeps plus Newton updates).
    pub max_iters: usize,
    pub dealias: bool,
}

impl StepConfig {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |m: &str| Err(SpectralError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta must be >= 0");
        }
        if !self.weight.is_finite() {
            return bad("flux weight must be finite");
        }
        if !(self.tol > 0.0) {
            return bad("solver_tol must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub field: SpectralField,
    pub iters: usize,
    pub residual: f64,
    /// Whether the Newton fallback was needed.
    pub newton: bool,
}

/// Fourier symbol `i(w·k − k³)` of `w∂ + ∂³`.
fn flux_symbol(k: f64, weight: f64) -> Complex64 {
    Complex64::new(0.0, weight * k - k * k * k)
}

/// `w∂(q) + ∂³(q)` for a field `q`; the Nyquist mode is dropped.
fn apply_flux(q: &SpectralField, weight: f64) -> SpectralField {
    let g = q.grid;
    let nyq = g.nyquist_index();
    let mut out = q.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c = if i == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            *c * flux_symbol(g.wavenumber(i), weight)
        };
    }
    out
}

fn product(ops: &FourierOps, u: &SpectralField, v: &SpectralField, dealias: bool) -> SpectralField {
    if dealias {
        ops.dealiased_product(u, v)
    } else {
        ops.aliased_product(u, v)
    }
}

/// `F(u) = w∂ₓ(u²) + ∂ₓ³(u²)`.
pub fn nonlinear_rhs(ops: &FourierOps, u: &SpectralField, weight: f64, dealias: bool) -> SpectralField {
    apply_flux(&product(ops, u, u, dealias), weight)
}

struct Stepper<'a> {
    ops: &'a FourierOps,
    cfg: &'a StepConfig,
    u: &'a SpectralField,
    f0: SpectralField,
    /// `1 + δk⁴` per mode.
    lk: Vec<f64>,
}

impl Stepper<'_> {
    fn rhs(&self, w: &SpectralField) -> SpectralField {
        nonlinear_rhs(self.ops, w, self.cfg.weight, self.cfg.dealias)
    }

    /// `(I + δ∂⁴)(w − u) − (Δt/2)(F(w) + F(u))`.
    fn residual(&self, w: &SpectralField) -> SpectralField {
        let fw = self.rhs(w);
        let h = 0.5 * self.cfg.dt;
        let mut r = w.clone();
        for i in 0..r.coeffs.len() {
            r.coeffs[i] = self.lk[i] * (w.coeffs[i] - self.u.coeffs[i])
                - h * (fw.coeffs[i] + self.f0.coeffs[i]);
        }
        r
    }

    fn solve_l(&self, mut r: SpectralField) -> SpectralField {
        for (c, l) in r.coeffs.iter_mut().zip(&self.lk) {
            *c /= *l;
        }
        r
    }

    /// `v − (Δt/2)(I + δ∂⁴)⁻¹ F′(w)v` with `F′(w)v = (w∂ + ∂³)(2wv)`.
    fn jacobian(&self, w: &SpectralField, v: &[Complex64]) -> Vec<Complex64> {
        let vf = SpectralField {
            grid: w.grid,
            coeffs: v.to_vec(),
        };
        let dv = apply_flux(&product(self.ops, w, &vf, self.cfg.dealias), self.cfg.weight);
        let h = self.cfg.dt; // (Δt/2)·2
        v.iter()
            .zip(&dv.coeffs)
            .zip(&self.lk)
            .map(|((a, b), l)| a - h * b / l)
            .collect()
    }
}

/// Advances `u` by one step; `step` only labels errors.
pub fn cn_step(
    ops: &FourierOps,
    u: &SpectralField,
    cfg: &StepConfig,
    step: usize,
) -> Result<StepReport, SpectralError> {
    cfg.validate()?;
    if u.grid != ops.grid {
        return Err(SpectralError::InvalidConfig("field grid differs from transform grid".into()));
    }
    let f0 = nonlinear_rhs(ops, u, cfg.weight, cfg.dealias);
    let lk: Vec<f64> = ops
        .grid
        .wavenumbers()
        .into_iter()
        .map(|k| 1.0 + cfg.delta * k.powi(4))
        .collect();
    let st = Stepper { ops, cfg, u, f0, lk };

    // explicit predictor u + Δt(I + δ∂⁴)⁻¹F(u)
    let mut w = u.add(&st.solve_l(st.f0.clone()).scale(cfg.dt));
    let mut best = (f64::INFINITY, w.clone());
    let mut prev = f64::INFINITY;
    let mut iters = 0;
    loop {
        let r = st.residual(&w);
        let res = norms(&r).l2;
        if res <= cfg.tol {
            return Ok(StepReport {
                field: w,
                iters,
                residual: res,
                newton: false,
            });
        }
        if res < best.0 {
            best = (res, w.clone());
        }
        let stalled = !res.is_finite() || (iters >= 3 && res > 0.5 * prev);
        if stalled || iters >= cfg.max_iters {
            break;
        }
        w = w.sub(&st.solve_l(r));
        prev = res;
        iters += 1;
    }
    newton(&st, best.1, iters, step)
}

fn newton(
    st: &Stepper<'_>,
    mut w: SpectralField,
    mut iters: usize,
    step: usize,
) -> Result<StepReport, SpectralError> {
    let cfg = st.cfg;
    loop {
        let r = st.residual(&w);
        let res = norms(&r).l2;
        if res <= cfg.tol {
            return Ok(StepReport {
                field: w,
                iters,
                residual: res,
                newton: true,
            });
        }
        if iters >= cfg.max_iters || !res.is_finite() {
            return Err(SpectralError::NoConvergence {
                step,
                iters,
                residual: res,
            });
        }
        // frozen-coefficient preconditioner around the mean level of w
        let vals = st.ops.backward(&w);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let c = 0.5 * (hi + lo);
        let g = w.grid;
        let nyq = g.nyquist_index();
        let precond: Vec<Complex64> = (0..g.n_modes)
            .map(|i| {
                if i == nyq {
                    return Complex64::new(1.0, 0.0);
                }
                1.0 - cfg.dt * c * flux_symbol(g.wavenumber(i), cfg.weight) / st.lk[i]
            })
            .collect();
        let b: Vec<Complex64> = st.solve_l(r).coeffs.iter().map(|c| -c).collect();
        let forcing = (0.1 * cfg.tol / res).clamp(1e-10, 1e-3);
        let op = |y: &[Complex64]| {
            let x: Vec<Complex64> = y.iter().zip(&precond).map(|(a, p)| a / p).collect();
            st.jacobian(&w, &x)
        };
        let y = gmres(op, &b, forcing, 60, 600);
        for ((c, yi), p) in w.coeffs.iter_mut().zip(&y).zip(&precond) {
            *c += yi / p;
        }
        iters += 1;
    }
}

/// Real inner product on complex vectors: the operators here are only
/// real-linear, so Krylov scalars are kept real.
fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Restarted GMRES for `A y = b` from `y = 0`, stopping at relative residual
/// `rel_tol` or after `max_iter` Arnoldi steps.
fn gmres(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> Vec<Complex64> {
    let n = b.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return y;
    }
    let target = rel_tol * bnorm;
    let mut done = 0;
    while done < max_iter {
        let ay = apply(&y);
        let r0: Vec<Complex64> = b.iter().zip(&ay).map(|(a, c)| a - c).collect();
        let beta = dot(&r0, &r0).sqrt();
        if beta <= target {
            break;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r0.iter().map(|c| c / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        let mut k = 0;
        while k < restart && done < max_iter {
            let mut v = apply(&basis[k]);
            let mut col = vec![0.0; k + 2];
            for (j, q) in basis.iter().enumerate() {
                let hj = dot(q, &v);
                col[j] = hj;
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= hj * qi;
                }
            }
            let vn = dot(&v, &v).sqrt();
            col[k + 1] = vn;
            for j in 0..k {
                let t = cs[j] * col[j] + sn[j] * col[j + 1];
                col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
                col[j] = t;
            }
            let rho = col[k].hypot(col[k + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (col[k] / rho, col[k + 1] / rho) };
            col[k] = rho;
            col[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(col);
            k += 1;
            done += 1;
            if g[k].abs() <= target || vn == 0.0 {
                break;
            }
            basis.push(v.iter().map(|c| c / vn).collect());
        }
        // back substitution on the triangular factor
        let mut z = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * z[j];
            }
            z[i] = s / h[i][i];
        }
        for (j, zj) in z.iter().enumerate() {
            for (yi, q) in y.iter_mut().zip(&basis[j]) {
                *yi += zj * q;
            }
        }
        if g[k].abs() <= target {
            break;
        }
    }
    y
}
