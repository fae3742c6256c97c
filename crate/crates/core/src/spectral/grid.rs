use std::f64::consts::PI;

use super::SpectralError;

/// Uniform periodic grid on `[−half_length, half_length)` resolving `n_modes`
/// Fourier modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_modes: usize,
    pub half_length: f64,
}

impl Grid {
    pub fn new(n_modes: usize, half_length: f64) -> Result<Self, SpectralError> {
        if n_modes < 8 || !n_modes.is_power_of_two() {
            return Err(SpectralError::InvalidGrid(format!(
                "n_modes must be a power of two >= 8, got {n_modes}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(SpectralError::InvalidGrid(format!(
                "half_length must be positive, got {half_length}"
            )));
        }
        Ok(Self {
            n_modes,
            half_length,
        })
    }

    /// `n_modes` points on `[−2π, 2π)`.
    pub fn standard(n_modes: usize) -> Result<Self, SpectralError> {
        Self::new(n_modes, 2.0 * PI)
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_modes as f64
    }

    pub fn point(&self, n: usize) -> f64 {
        -self.half_length + n as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_modes).map(|n| self.point(n)).collect()
    }

    /// Signed mode number `j ∈ [−N/2, N/2)` of storage index `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        let n = self.n_modes;
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// Storage index of signed mode `j`.
    pub fn index(&self, j: i64) -> usize {
        let n = self.n_modes as i64;
        j.rem_euclid(n) as usize
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_modes / 2
    }

    /// Physical wavenumber `k = j·π/half_length`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        self.mode(idx) as f64 * PI / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_modes).map(|i| self.wavenumber(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::standard(4).is_err());
        assert!(Grid::standard(96).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::standard(64).is_ok());
    }

    #[test]
    fn wavenumbers_on_standard_domain() {
        let g = Grid::standard(16).unwrap();
        assert_eq!(g.length(), 4.0 * PI);
        assert_eq!(g.point(0), -2.0 * PI);
        assert_eq!(g.mode(7), 7);
        assert_eq!(g.mode(8), -8);
        assert_eq!(g.mode(15), -1);
        // k = j/2 on a length-4π domain
        assert_eq!(g.wavenumber(2), 1.0);
        assert_eq!(g.wavenumber(14), -1.0);
        for j in -8..8 {
            assert_eq!(g.mode(g.index(j)), j);
        }
    }
}
