use super::field::{FourierOps, SpectralField};
use super::SpectralError;

/// Samples `λ·exp(−4(x/λ^{1/3})²)` and transforms it.
pub fn init_scaled_gaussian(lambda: f64, ops: &FourierOps) -> Result<SpectralField, SpectralError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SpectralError::InvalidConfig(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let s = lambda.cbrt();
    let vals: Vec<f64> = ops
        .grid
        .points()
        .into_iter()
        .map(|x| {
            let y = x / s;
            lambda * (-4.0 * y * y).exp()
        })
        .collect();
    ops.forward(&vals)
}

/// `Q_λ(ξ) = (4λ/3)cos²(ξ/4)` on `|ξ| ≤ 2π`, zero elsewhere.
pub fn compacton_profile(lambda: f64, xi: f64) -> f64 {
    if xi.abs() > 2.0 * std::f64::consts::PI {
        return 0.0;
    }
    let c = (0.25 * xi).cos();
    4.0 * lambda / 3.0 * c * c
}

/// Compacton centered at `center`; its support must lie inside the domain.
pub fn compacton_field(
    lambda: f64,
    center: f64,
    ops: &FourierOps,
) -> Result<SpectralField, SpectralError> {
    let g = ops.grid;
    let two_pi = 2.0 * std::f64::consts::PI;
    let (lo, hi) = (center - two_pi, center + two_pi);
    // closed support against a half-open domain; the endpoints carry zero
    let slack = 1e-12 * g.half_length;
    if lo < -g.half_length - slack || hi > g.half_length + slack {
        return Err(SpectralError::SupportOverflow {
            lo,
            hi,
            domain_lo: -g.half_length,
            domain_hi: g.half_length,
        });
    }
    let vals: Vec<f64> = g
        .points()
        .into_iter()
        .map(|x| compacton_profile(lambda, x - center))
        .collect();
    ops.forward(&vals)
}

/// Exact left-moving traveling wave `Q_λ(x − center + λt)`, periodized over
/// the domain, sampled on the grid.
pub fn compacton_translate(lambda: f64, center: f64, t: f64, ops: &FourierOps) -> Vec<f64> {
    let g = ops.grid;
    let len = g.length();
    g.points()
        .into_iter()
        .map(|x| {
            let xi = (x - center + lambda * t + g.half_length).rem_euclid(len) - g.half_length;
            compacton_profile(lambda, xi)
        })
        .collect()
}
