use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;
use super::SpectralError;

/// Real periodic field stored as Fourier coefficients in FFT order.
///
/// `u(x) = Σⱼ ûⱼ exp(i kⱼ x)` with `x` the physical coordinate, so
/// `ûⱼ = (1/N) Σₙ u(xₙ) exp(−i kⱼ xₙ)`. The coefficients of a real field are
/// Hermitian: `û₋ⱼ = conj(ûⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_modes],
        }
    }

    /// Largest violation of `û₋ⱼ = conj(ûⱼ)` (the Nyquist mode must be real).
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.n_modes)
            .map(|i| {
                let partner = g.index(-g.mode(i));
                (self.coeffs[i] - self.coeffs[partner].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Projects onto Hermitian-symmetric coefficients.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let orig = self.coeffs.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let partner = g.index(-g.mode(i));
            *c = 0.5 * (orig[i] + orig[partner].conj());
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Applies a real diagonal multiplier `m(k)` to every coefficient.
    pub fn map_symbol(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let g = self.grid;
        Self {
            grid: g,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * symbol(g.wavenumber(i)))
                .collect(),
        }
    }
}

/// FFT plans for one grid: length `N` and the padded length `3N/2`.
#[derive(Clone)]
pub struct FourierOps {
    pub grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_pad: Arc<dyn Fft<f64>>,
    inv_pad: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierOps").field("grid", &self.grid).finish()
    }
}

/// `(−1)^idx`, the phase from measuring `x` from the domain center.
fn parity(idx: usize) -> f64 {
    if idx.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl FourierOps {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_modes;
        let m = padded_len(n);
        Self {
            grid,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd_pad: planner.plan_fft_forward(m),
            inv_pad: planner.plan_fft_inverse(m),
        }
    }

    pub fn forward(&self, values: &[f64]) -> Result<SpectralField, SpectralError> {
        let n = self.grid.n_modes;
        if values.len() != n {
            return Err(SpectralError::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= parity(i) * inv_n;
        }
        Ok(SpectralField {
            grid: self.grid,
            coeffs: buf,
        })
    }

    /// Complex grid values; the imaginary parts measure loss of reality.
    pub fn backward_complex(&self, field: &SpectralField) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = field
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * parity(i))
            .collect();
        self.inv.process(&mut buf);
        buf
    }

    pub fn backward(&self, field: &SpectralField) -> Vec<f64> {
        self.backward_complex(field).into_iter().map(|c| c.re).collect()
    }

    /// `∂ₓ^order`: multiplies mode `k` by `(ik)^order`.
    ///
    /// For odd orders the Nyquist mode is zeroed since its derivative is not
    /// a real field.
    pub fn derivative(&self, field: &SpectralField, order: u32) -> SpectralField {
        derivative(field, order)
    }

    /// `u·v` without aliasing, by zero-padding to `3N/2` points.
    ///
    /// The Nyquist modes of the inputs are ignored and that of the result is
    /// zero; all other resolved modes are exact.
    pub fn dealiased_product(&self, u: &SpectralField, v: &SpectralField) -> SpectralField {
        let n = self.grid.n_modes;
        let m = padded_len(n);
        let pu = self.to_padded_values(u, m);
        let pv = if std::ptr::eq(u, v) {
            pu.clone()
        } else {
            self.to_padded_values(v, m)
        };
        let mut prod: Vec<Complex64> = pu
            .iter()
            .zip(&pv)
            .map(|(a, b)| Complex64::new(a.re * b.re, 0.0))
            .collect();
        self.fwd_pad.process(&mut prod);
        let mut out = SpectralField::zeros(self.grid);
        let inv_m = 1.0 / m as f64;
        let half = (n / 2) as i64;
        for j in (-half + 1)..half {
            let src = j.rem_euclid(m as i64) as usize;
            out.coeffs[self.grid.index(j)] = prod[src] * (parity(src) * inv_m);
        }
        out
    }

    pub fn dealias_square(&self, u: &SpectralField) -> SpectralField {
        self.dealiased_product(u, u)
    }

    /// Pointwise product on the `N`-point grid (aliased).
    pub fn aliased_product(&self, u: &SpectralField, v: &SpectralField) -> SpectralField {
        let a = self.backward(u);
        let b = self.backward(v);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.forward(&prod).expect("grid length")
    }

    fn to_padded_values(&self, u: &SpectralField, m: usize) -> Vec<Complex64> {
        let n = self.grid.n_modes;
        let half = (n / 2) as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for j in (-half + 1)..half {
            let dst = j.rem_euclid(m as i64) as usize;
            buf[dst] = u.coeffs[self.grid.index(j)] * parity(dst);
        }
        self.inv_pad.process(&mut buf);
        buf
    }
}

pub fn padded_len(n: usize) -> usize {
    3 * n / 2
}

pub fn derivative(field: &SpectralField, order: u32) -> SpectralField {
    let g = field.grid;
    let i_pow = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let nyq = g.nyquist_index();
    let coeffs = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if order % 2 == 1 && i == nyq {
                return Complex64::new(0.0, 0.0);
            }
            c * i_pow * g.wavenumber(i).powi(order as i32)
        })
        .collect();
    SpectralField { grid: g, coeffs }
}
