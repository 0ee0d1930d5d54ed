//! Normal-approximation intervals around an SNN estimate.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{fold_fits, FoldFit, NoiseModel, SnnConfig, SnnEstimate};
use crate::error::{Error, Result};
use crate::matrix::MaskedMatrix;
use crate::spectral::project_left;

/// Interval summary for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    /// Pooled residual variance `σ̂²`.
    pub sigma2: Option<f64>,
    /// `K⁻² Σ_k σ̂² ‖β̃^(k)‖²`.
    pub variance: Option<f64>,
    pub bounds: Option<(f64, f64)>,
    /// Set when the variance is zero although residuals are not.
    pub zero_variance_with_residuals: bool,
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Recomputes the interval for `est` at `cfg.ci_level`.
pub fn confidence_interval(est: &SnnEstimate, data: &MaskedMatrix, cfg: &SnnConfig) -> Result<Interval> {
    let fits = fold_fits(data, &est.plan, cfg)?;
    interval_from_fits(est, &fits, cfg)
}

pub(crate) fn interval_from_fits(est: &SnnEstimate, fits: &[FoldFit], cfg: &SnnConfig) -> Result<Interval> {
    if cfg.noise_model == NoiseModel::PerRowPlugin {
        return Err(Error::Unimplemented("per-row noise plug-in"));
    }
    if fits.len() != est.fold_betas.len() {
        return Err(Error::PlanViolation("fold count differs from the estimate's".into()));
    }
    let none = Interval {
        sigma2: None,
        variance: None,
        bounds: None,
        zero_variance_with_residuals: false,
    };

    let mut sigma2 = 0.0;
    for (fit, beta) in fits.iter().zip(&est.fold_betas) {
        let dof = fit.q.len().saturating_sub(fit.rank);
        if dof == 0 {
            return Ok(none);
        }
        let residual = &fit.q - fit.s.tr_mul(beta);
        sigma2 += residual.norm_squared() / dof as f64;
    }
    let k = fits.len() as f64;
    sigma2 /= k;

    let spread: f64 = fits
        .iter()
        .zip(&est.fold_betas)
        .map(|(fit, beta)| sigma2 * project_left(&fit.fact, beta, fit.rank).norm_squared())
        .sum();
    let variance = spread / (k * k);
    let half = normal_quantile(0.5 * (1.0 + cfg.ci_level)) * variance.sqrt();
    Ok(Interval {
        sigma2: Some(sigma2),
        variance: Some(variance),
        bounds: Some((est.value - half, est.value + half)),
        zero_variance_with_residuals: variance == 0.0 && sigma2 > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-7);
        assert!(normal_quantile(0.5).abs() < 1e-12);
        assert!((normal_quantile(0.05) + 1.644_853_626_951_472).abs() < 1e-7);
    }
}
