use super::assemble::ProfileSolution;
use super::ProfileError;

/// Window `d_min <= τ* − τ <= d_max` for the log fit of `A″`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub d_min: f64,
    pub d_max: f64,
    pub min_samples: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        // below d ~ 1e-5 the numerically critical orbit is no longer
        // critical and A″ saturates
        Self {
            d_min: 1e-4,
            d_max: 0.1,
            min_samples: 20,
        }
    }
}

/// Least-squares fit `A″ ≈ slope·ln|τ − τ*| + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
    /// Range of `|A″| / |ln|τ − τ*||` over the window.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`, returning `R²` too.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

pub fn fit_log_blowup(solution: &ProfileSolution) -> Result<LogFit, ProfileError> {
    fit_log_blowup_in(solution, &FitWindow::default())
}

pub fn fit_log_blowup_in(
    solution: &ProfileSolution,
    window: &FitWindow,
) -> Result<LogFit, ProfileError> {
    let ts = solution.tau_star;
    let (xs, ys): (Vec<f64>, Vec<f64>) = solution
        .right_half()
        .filter(|s| {
            let d = ts - s.tau;
            d >= window.d_min && d <= window.d_max
        })
        .map(|s| ((ts - s.tau).ln(), s.app))
        .unzip();
    if xs.len() < window.min_samples {
        return Err(ProfileError::InsufficientSamples {
            found: xs.len(),
            needed: window.min_samples,
        });
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let ratios = xs.iter().zip(&ys).map(|(x, y)| y.abs() / x.abs());
    let (ratio_min, ratio_max) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    });
    Ok(LogFit {
        slope,
        intercept,
        r_squared,
        samples: xs.len(),
        ratio_min,
        ratio_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize) -> ProfileSolution {
        let ts = 2.0;
        let taus: Vec<f64> = (0..n)
            .map(|i| ts - 10f64.powf(-1.0 - 4.0 * i as f64 / (n - 1) as f64))
            .collect();
        let mut grid: Vec<f64> = taus.iter().rev().map(|t| -t).collect();
        grid.push(0.0);
        grid.extend(&taus);
        let app: Vec<f64> = grid
            .iter()
            .map(|&t| if t > 0.0 { 2.0 * (ts - t).ln() } else { 0.0 })
            .collect();
        let zeros = vec![0.0; grid.len()];
        ProfileSolution {
            mu_star: 0.0,
            tau_star: ts,
            grid,
            a_values: zeros.clone(),
            ap_values: zeros,
            app_values: app,
            norm_a: 0.0,
            norm_ap: 0.0,
            norm_app: 0.0,
        }
    }

    #[test]
    fn recovers_exact_log_signal() {
        let fit = fit_log_blowup(&synthetic(60)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-11);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.ratio_min - 2.0).abs() < 1e-12 && (fit.ratio_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            fit_log_blowup(&synthetic(10)),
            Err(ProfileError::InsufficientSamples { .. })
        ));
    }
}
