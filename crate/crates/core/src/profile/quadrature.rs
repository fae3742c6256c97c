//! Composite trapezoid quadrature on nonuniform grids.
//!
//! When nodal derivatives are supplied each panel gets the Euler–Maclaurin
//! end correction `h²/12·(f′₀ − f′₁)`, which lifts the rule to fourth order
//! on smooth panels without changing the nodes.

/// Cumulative integral `∫_{x₀}^{x_i} f` at every node.
pub fn running_integral(x: &[f64], f: &[f64], df: Option<&[f64]>) -> Vec<f64> {
    assert_eq!(x.len(), f.len());
    if let Some(d) = df {
        assert_eq!(d.len(), x.len());
    }
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        let h = x[i] - x[i - 1];
        let mut panel = 0.5 * h * (f[i - 1] + f[i]);
        if let Some(d) = df {
            let corr = h * h / 12.0 * (d[i - 1] - d[i]);
            // panels touching a singular endpoint fall back to plain trapezoid
            if corr.is_finite() {
                panel += corr;
            }
        }
        acc += panel;
        out.push(acc);
    }
    out
}

/// `∫ f` over the whole grid.
pub fn integral(x: &[f64], f: &[f64], df: Option<&[f64]>) -> f64 {
    running_integral(x, f, df).last().copied().unwrap_or(0.0)
}
