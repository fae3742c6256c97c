use super::field::SpectralField;

/// `L²`, `Ḣ¹` and `Ḣ²` norms over the whole periodic domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1dot: f64,
    pub h2dot: f64,
}

/// `‖∂ˢu‖ = (L·Σ k²ˢ|ûⱼ|²)^{1/2}`, which equals the grid quadrature of the
/// squared derivative by Parseval.
pub fn norms(u: &SpectralField) -> Norms {
    let g = u.grid;
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (i, c) in u.coeffs.iter().enumerate() {
        let p = c.norm_sqr();
        let k2 = g.wavenumber(i).powi(2);
        s0 += p;
        s1 += k2 * p;
        s2 += k2 * k2 * p;
    }
    let len = g.length();
    Norms {
        l2: (len * s0).sqrt(),
        h1dot: (len * s1).sqrt(),
        h2dot: (len * s2).sqrt(),
    }
}

/// `∫u dx = L·û₀`.
pub fn mass(u: &SpectralField) -> f64 {
    u.grid.length() * u.coeffs[0].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{FourierOps, Grid};
    use std::f64::consts::PI;

    fn field(n: usize, f: impl Fn(f64) -> f64) -> SpectralField {
        let ops = FourierOps::new(Grid::standard(n).unwrap());
        let vals: Vec<f64> = ops.grid.points().into_iter().map(f).collect();
        ops.forward(&vals).unwrap()
    }

    #[test]
    fn sine_norms() {
        let n = norms(&field(64, f64::sin));
        let r = (2.0 * PI).sqrt();
        for v in [n.l2, n.h1dot, n.h2dot] {
            assert!((v - r).abs() < 1e-12);
        }
        let n2 = norms(&field(64, |x| (2.0 * x).sin()));
        assert!((n2.h2dot - 4.0 * n2.l2).abs() < 1e-12);
        assert_eq!(norms(&field(16, |_| 0.0)).l2, 0.0);
    }

    #[test]
    fn constant_mass() {
        assert!((mass(&field(32, |_| 1.0)) - 4.0 * PI).abs() < 1e-13);
        assert_eq!(mass(&field(32, |_| 0.0)), 0.0);
    }
}
