//! Embedded Dormand–Prince 5(4) Runge–Kutta pair with adaptive step control.
//!
//! The stepper is deliberately low level: callers own the stepping loop so
//! that event handling (sign changes, singular endpoints) can be layered on
//! top without callbacks. [`integrate`] is a plain driver for smooth problems.

/// Right-hand side of a first-order system `y' = f(t, y)`.
///
/// Returning `None` marks a point where the vector field is undefined; the
/// stepper treats it as a rejected step.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Option<[f64; N]>;
}

/// Step-size controls shared by every adaptive integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub atol: f64,
    pub rtol: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            h_init: 1e-4,
            h_min: 1e-15,
            h_max: 2e-3,
            atol: 1e-12,
            rtol: 1e-10,
        }
    }
}

impl StepControl {
    pub fn is_valid(&self) -> bool {
        self.h_init > 0.0
            && self.h_min > 0.0
            && self.h_max >= self.h_min
            && self.atol > 0.0
            && self.rtol > 0.0
            && [self.h_init, self.h_min, self.h_max, self.atol, self.rtol]
                .iter()
                .all(|v| v.is_finite())
    }

    /// Same controls with both error tolerances scaled by `factor`.
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            atol: self.atol * factor,
            rtol: self.rtol * factor,
            ..*self
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// fifth-order weights (also the seventh stage row, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// difference between fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Fifth-order order of accuracy of the propagated solution.
pub const ORDER: i32 = 5;

/// Outcome of a single trial step.
#[derive(Debug, Clone, Copy)]
pub struct TrialStep<const N: usize> {
    pub y: [f64; N],
    /// Weighted RMS error estimate; `<= 1` means acceptable.
    pub error: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `(t, y)`.
///
/// Returns `None` if the vector field is undefined at any stage or the result
/// is not finite.
pub fn dp_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    h: f64,
    ctrl: &StepControl,
) -> Option<TrialStep<N>> {
    let k1 = sys.rhs(t, y)?;
    let k2 = sys.rhs(t + C2 * h, &axpy(y, h, &[(A21, &k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = sys.rhs(
        t + C4 * h,
        &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = sys.rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y_new = axpy(
        y,
        h,
        &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = sys.rhs(t + h, &y_new)?;

    let mut sq = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = ctrl.atol + ctrl.rtol * y[i].abs().max(y_new[i].abs());
        sq += (e / scale).powi(2);
    }
    let error = (sq / N as f64).sqrt();
    if !error.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(TrialStep { y: y_new, error })
}

/// Step-size factor from an error estimate (I-controller).
pub fn step_factor(error: f64) -> f64 {
    if error == 0.0 {
        return 5.0;
    }
    (0.9 * error.powf(-1.0 / ORDER as f64)).clamp(0.2, 5.0)
}

/// Failure of the plain driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveError {
    /// Step size fell below `h_min` at time `t`.
    StepUnderflow { t: f64 },
}

/// Integrates from `t0` to `t_end`, returning every accepted `(t, y)` pair
/// including the initial point.
pub fn integrate<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctrl: &StepControl,
) -> Result<Vec<(f64, [f64; N])>, DriveError> {
    let mut out = vec![(t0, y0)];
    let (mut t, mut y) = (t0, y0);
    let mut h = ctrl.h_init.min(ctrl.h_max);
    while t < t_end {
        let h_try = h.min(t_end - t);
        match dp_step(sys, t, &y, h_try, ctrl) {
            Some(step) if step.error <= 1.0 => {
                t = if h_try == t_end - t { t_end } else { t + h_try };
                y = step.y;
                out.push((t, y));
                h = (h_try * step_factor(step.error)).min(ctrl.h_max);
            }
            Some(step) => h = h_try * step_factor(step.error),
            None => h = h_try * 0.5,
        }
        if h < ctrl.h_min && t < t_end {
            return Err(DriveError::StepUnderflow { t });
        }
    }
    Ok(out)
}

/// Fixed-step mode: `steps` equal steps of the fifth-order propagator with
/// no error control.
pub fn integrate_fixed<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    steps: usize,
) -> Option<[f64; N]> {
    let h = (t_end - t0) / steps as f64;
    let ctrl = StepControl::default();
    let mut y = y0;
    for i in 0..steps {
        y = dp_step(sys, t0 + i as f64 * h, &y, h, &ctrl)?.y;
    }
    Some(y)
}
