//! H² size of the two-parameter family `u_{λ,T}(x,t) = λA(x/(λ(T−t))^{1/3})`.

use super::assemble::ProfileNorms;
use super::ProfileError;

/// Blow-up time `T = base + excess`.
///
/// Kept split because the sequence `T = 1 + ε¹⁶` is not representable in
/// `f64` once `ε¹⁶` drops below half an ulp of 1 (already at `ε = 0.1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupTime {
    pub base: f64,
    pub excess: f64,
}

impl From<f64> for BlowupTime {
    fn from(t: f64) -> Self {
        Self {
            base: t,
            excess: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingQuery {
    pub lambda: f64,
    pub big_t: BlowupTime,
    pub t: f64,
}

impl ScalingQuery {
    pub fn new(lambda: f64, big_t: f64, t: f64) -> Self {
        Self {
            lambda,
            big_t: big_t.into(),
            t,
        }
    }

    /// Member of the vanishing-data sequence `λ = ε²`, `T = 1 + ε¹⁶`.
    pub fn from_eps(eps: f64, t: f64) -> Self {
        Self {
            lambda: eps * eps,
            big_t: BlowupTime {
                base: 1.0,
                excess: eps.powi(16),
            },
            t,
        }
    }

    /// `T − t`, evaluated without forming `T`.
    pub fn remaining(&self) -> f64 {
        (self.big_t.base - self.t) + self.big_t.excess
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ProfileError::InvalidParams("lambda must be > 0".into()));
        }
        if !(self.remaining() > 0.0) {
            return Err(ProfileError::InvalidParams("need t < T".into()));
        }
        Ok(())
    }
}

/// `λ^{7/6}(T−t)^{1/6}‖A‖ + λ^{5/6}(T−t)^{−1/6}‖A′‖ + λ^{1/2}(T−t)^{−1/2}‖A″‖`.
///
/// This is the sum of the three scaled seminorms, an equivalent H² norm.
pub fn selfsim_h2_norm(q: &ScalingQuery, norms: &ProfileNorms) -> Result<f64, ProfileError> {
    q.validate()?;
    let s = q.remaining();
    Ok(q.lambda.powf(7.0 / 6.0) * s.powf(1.0 / 6.0) * norms.a
        + q.lambda.powf(5.0 / 6.0) * s.powf(-1.0 / 6.0) * norms.ap
        + q.lambda.sqrt() * s.powf(-0.5) * norms.app)
}

/// Root-sum-square variant of [`selfsim_h2_norm`].
pub fn selfsim_h2_norm_rss(q: &ScalingQuery, norms: &ProfileNorms) -> Result<f64, ProfileError> {
    q.validate()?;
    let s = q.remaining();
    let terms = [
        q.lambda.powf(7.0 / 6.0) * s.powf(1.0 / 6.0) * norms.a,
        q.lambda.powf(5.0 / 6.0) * s.powf(-1.0 / 6.0) * norms.ap,
        q.lambda.sqrt() * s.powf(-0.5) * norms.app,
    ];
    Ok(terms.iter().map(|v| v * v).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IllPosednessRow {
    pub eps: f64,
    pub norm_t0: f64,
    pub norm_t1: f64,
    pub ratio: f64,
}

/// Norms at `t = 0` and `t = 1` along the vanishing-data sequence.
pub fn ill_posedness_table(
    eps_list: &[f64],
    norms: &ProfileNorms,
) -> Result<Vec<IllPosednessRow>, ProfileError> {
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(ProfileError::InvalidParams(format!(
                    "eps must lie in (0, 1), got {eps}"
                )));
            }
            let norm_t0 = selfsim_h2_norm(&ScalingQuery::from_eps(eps, 0.0), norms)?;
            let norm_t1 = selfsim_h2_norm(&ScalingQuery::from_eps(eps, 1.0), norms)?;
            Ok(IllPosednessRow {
                eps,
                norm_t0,
                norm_t1,
                ratio: norm_t1 / norm_t0,
            })
        })
        .collect()
}

pub fn render_table(rows: &[IllPosednessRow]) -> String {
    let mut out = String::from("eps,norm_t0,norm_t1,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.eps, r.norm_t0, r.norm_t1, r.ratio
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const NORMS: ProfileNorms = ProfileNorms {
        a: 0.7,
        ap: 1.3,
        app: 4.1,
    };

    #[test]
    fn unit_scales_sum_norms() {
        let q = ScalingQuery::new(1.0, 2.0, 1.0);
        let v = selfsim_h2_norm(&q, &NORMS).unwrap();
        assert!((v - (0.7 + 1.3 + 4.1)).abs() < 1e-14);
        let rss = selfsim_h2_norm_rss(&q, &NORMS).unwrap();
        assert!((rss - (0.49f64 + 1.69 + 16.81).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn term_exponents() {
        let only = |a, ap, app| ProfileNorms { a, ap, app };
        let q1 = ScalingQuery::new(0.3, 1.0, 0.0);
        let q2 = ScalingQuery::new(0.3, 64.0, 0.0);
        let ratio = |n: ProfileNorms| {
            selfsim_h2_norm(&q2, &n).unwrap() / selfsim_h2_norm(&q1, &n).unwrap()
        };
        assert!((ratio(only(1.0, 0.0, 0.0)) - 2.0).abs() < 1e-13);
        assert!((ratio(only(0.0, 1.0, 0.0)) - 0.5).abs() < 1e-13);
        assert!((ratio(only(0.0, 0.0, 1.0)) - 0.125).abs() < 1e-13);
    }

    #[test]
    fn query_validation() {
        assert!(selfsim_h2_norm(&ScalingQuery::new(1.0, 1.0, 1.0), &NORMS).is_err());
        assert!(selfsim_h2_norm(&ScalingQuery::new(0.0, 1.0, 0.0), &NORMS).is_err());
        assert!((ScalingQuery::from_eps(0.1, 1.0).remaining() - 1e-16).abs() < 1e-30);
        assert!(ill_posedness_table(&[0.5, 1.0], &NORMS).is_err());
    }

    #[test]
    fn table_columns_are_monotone() {
        let rows = ill_posedness_table(&[0.5, 0.25, 0.125, 0.0625], &NORMS).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].norm_t0 < w[0].norm_t0);
            assert!(w[1].ratio > w[0].ratio);
            // t = 0 norm is O(ε)
            assert!(w[1].norm_t0 / w[1].eps <= w[0].norm_t0 / w[0].eps);
        }
        for r in &rows {
            assert_eq!(r.ratio, r.norm_t1 / r.norm_t0);
        }
    }
}
