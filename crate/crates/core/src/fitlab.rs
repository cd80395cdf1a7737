//! Least-squares extraction of `y ≈ a (ln x)² + b ln x + c`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample abscissae must be positive and finite, got {0}")]
    InvalidAbscissa(f64),
    #[error("sample value is not finite at x = {0}")]
    NonFiniteValue(f64),
    #[error("design matrix is singular: only {distinct} distinct abscissae")]
    SingularDesign { distinct: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub stderr_c: f64,
    /// `(min x, max x)`.
    pub window: (f64, f64),
    /// `|a_upper − a|` where `a_upper` is fitted on the upper half of the window.
    pub stability_shift: f64,
    /// `‖row_a (XᵀX)⁻¹Xᵀ‖₁`: a remainder bounded by `R` moves `a` by at most `R·kappa_a`.
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

impl LogFit {
    pub fn predict(&self, x: f64) -> f64 {
        let u = x.ln();
        self.a * u * u + self.b * u + self.c
    }
}

pub const MIN_SAMPLES: usize = 5;

struct Ols {
    coef: [f64; 3],
    stderr: [f64; 3],
    kappa: [f64; 3],
    rss: f64,
}

fn ols(us: &[f64], ys: &[f64]) -> Ols {
    let n = us.len();
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => us[i] * us[i],
        1 => us[i],
        _ => 1.0,
    });
    let y = DVector::from_column_slice(ys);
    let svd = x.clone().svd(true, true);
    let pinv = svd.pseudo_inverse(0.0).expect("SVD with both factors");
    let coef = &pinv * &y;
    let resid = &y - &x * &coef;
    let rss = resid.norm_squared();
    let dof = n.saturating_sub(3);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    // (XᵀX)⁻¹ = X⁺ X⁺ᵀ
    let cov = &pinv * pinv.transpose();
    let mut stderr = [0.0; 3];
    let mut kappa = [0.0; 3];
    for k in 0..3 {
        stderr[k] = (sigma2 * cov[(k, k)]).max(0.0).sqrt();
        kappa[k] = pinv.row(k).iter().map(|v| v.abs()).sum();
    }
    Ols {
        coef: [coef[0], coef[1], coef[2]],
        stderr,
        kappa,
        rss,
    }
}

/// Ordinary least squares of `y` on `[(ln x)², ln x, 1]`.
///
/// Samples are sorted by `x` first, so the result does not depend on input
/// order.
pub fn fit_log_square(samples: &[(f64, f64)]) -> Result<LogFit, FitError> {
    if samples.len() < MIN_SAMPLES {
        return Err(FitError::TooFewSamples {
            need: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    for &(x, y) in samples {
        if !(x > 0.0 && x.is_finite()) {
            return Err(FitError::InvalidAbscissa(x));
        }
        if !y.is_finite() {
            return Err(FitError::NonFiniteValue(x));
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let mut distinct = sorted.iter().map(|s| s.0.ln()).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() <= 3 {
        return Err(FitError::SingularDesign {
            distinct: distinct.len(),
        });
    }
    let us: Vec<f64> = sorted.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|s| s.1).collect();
    let full = ols(&us, &ys);

    let half = (sorted.len() / 2).max(3);
    let start = sorted.len() - half;
    let upper_distinct = {
        let mut d = us[start..].to_vec();
        d.dedup();
        d.len()
    };
    let stability_shift = if upper_distinct >= 3 {
        (ols(&us[start..], &ys[start..]).coef[0] - full.coef[0]).abs()
    } else {
        f64::NAN
    };

    Ok(LogFit {
        a: full.coef[0],
        b: full.coef[1],
        c: full.coef[2],
        stderr_a: full.stderr[0],
        stderr_b: full.stderr[1],
        stderr_c: full.stderr[2],
        window: (sorted[0].0, sorted[sorted.len() - 1].0),
        stability_shift,
        kappa_a: full.kappa[0],
        kappa_b: full.kappa[1],
        residual_rms: (full.rss / sorted.len() as f64).sqrt(),
        samples: sorted.len(),
    })
}

/// `n` points from `min` to `max` inclusive, geometrically spaced.
pub fn geometric_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let (lo, hi) = (min.ln(), max.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
