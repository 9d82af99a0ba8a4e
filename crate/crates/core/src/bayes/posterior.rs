//! The posterior `p(θ | U_N) ∝ exp(−I_N(θ − θ̂_N)²/2)·ϱ(θ)` on `(0, ∞)`.

use std::f64::consts::PI;

use super::prior::{GrowthCertificate, Prior};
use crate::error::{Error, Result};
use crate::mle::MleResult;
use crate::quadrature::{adaptive, composite, composite_ln, panel_edges};
use crate::special::{ln_norm_cdf, mills_ratio};

/// Minimum half-width of the integration window, in posterior standard
/// deviations.
pub(crate) const MIN_WINDOW: f64 = 12.0;
/// Required log-margin of the neglected tails.
const TAIL_LOG_MARGIN: f64 = -40.0;
const MAX_WINDOW: f64 = 400.0;

/// Truncated-normal law `N(m, s²)` restricted to `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub m: f64,
    pub s: f64,
}

impl TruncatedNormal {
    /// `ln ∫₀^∞ exp(−(θ − m)²/(2s²)) dθ = ln(√(2π)s) + ln Φ(m/s)`.
    pub fn ln_kernel_mass(&self) -> f64 {
        0.5 * (2.0 * PI).ln() + self.s.ln() + ln_norm_cdf(self.m / self.s)
    }

    /// `m + s·h(z)` with `h = φ/Φ`, `z = m/s`.
    pub fn mean(&self) -> f64 {
        self.m + self.s * mills_ratio(self.m / self.s)
    }

    /// `s²(1 − z·h(z) − h(z)²)`.
    pub fn variance(&self) -> f64 {
        let z = self.m / self.s;
        let h = mills_ratio(z);
        self.s * self.s * (1.0 - z * h - h * h)
    }
}

/// Conjugate update of a truncated-normal prior:
/// `m = (σ₀²θ̂ + μ₀/I)/(σ₀² + 1/I)`, `s² = (σ₀²/I)/(σ₀² + 1/I)`.
pub fn conjugate_update(theta_hat: f64, fisher: f64, mu0: f64, var0: f64) -> TruncatedNormal {
    let inv_i = 1.0 / fisher;
    let denom = var0 + inv_i;
    TruncatedNormal {
        m: (var0 * theta_hat + mu0 * inv_i) / denom,
        s: (var0 * inv_i / denom).sqrt(),
    }
}

#[derive(Debug, Clone)]
pub struct Posterior {
    theta_hat: f64,
    fisher: f64,
    prior: Prior,
    ln_normalizer: f64,
    center: f64,
    scale: f64,
}

/// Posterior built from an MLE and a prior, centered at the signed `θ̂_N`.
pub fn posterior_from_mle(result: &MleResult, prior: Prior) -> Result<Posterior> {
    Posterior::new(result.theta_hat, result.fisher, prior)
}

/// Normalizer, mean and variance computed by quadrature only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub ln_normalizer: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn new(theta_hat: f64, fisher: f64, prior: Prior) -> Result<Self> {
        if !(fisher > 0.0 && fisher.is_finite()) {
            return Err(Error::Domain(format!(
                "Fisher information must be positive, got {fisher}"
            )));
        }
        if !theta_hat.is_finite() {
            return Err(Error::Domain(format!("theta_hat must be finite, got {theta_hat}")));
        }
        let growth = prior.growth();
        if !(growth.r < 2.0) {
            return Err(Error::Config(format!(
                "prior growth exponent {} does not admit a normalizable posterior",
                growth.r
            )));
        }
        let sd = 1.0 / fisher.sqrt();
        let (center, scale) = match &prior {
            Prior::TruncatedNormal { mu0, var0 } => {
                let tn = conjugate_update(theta_hat, fisher, *mu0, *var0);
                (tn.m, tn.s)
            }
            _ => (theta_hat, sd),
        };
        let mut post = Self {
            theta_hat,
            fisher,
            prior,
            ln_normalizer: 0.0,
            center,
            scale,
        };
        post.ln_normalizer = match &post.prior {
            Prior::UniformPositive => TruncatedNormal { m: theta_hat, s: sd }.ln_kernel_mass(),
            Prior::TruncatedNormal { mu0, var0 } => {
                let d = theta_hat - mu0;
                -0.5 * d * d / (var0 + 1.0 / fisher) + TruncatedNormal { m: center, s: scale }.ln_kernel_mass()
            }
            Prior::Custom(_) => post.adaptive_ln_normalizer()?,
        };
        if !post.ln_normalizer.is_finite() {
            return Err(Error::Quadrature(format!(
                "posterior normalizer is not finite (theta_hat={theta_hat}, fisher={fisher})"
            )));
        }
        Ok(post)
    }

    pub fn theta_hat(&self) -> f64 {
        self.theta_hat
    }

    pub fn fisher(&self) -> f64 {
        self.fisher
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// `∫_{ℝ₊} exp(−I_N(η − θ̂_N)²/2)·ϱ(η) dη`.
    pub fn normalizer(&self) -> f64 {
        self.ln_normalizer.exp()
    }

    pub fn ln_normalizer(&self) -> f64 {
        self.ln_normalizer
    }

    /// Location and spread used to place integration windows: the
    /// conjugate truncated-normal parameters for the TN prior, `(θ̂, I^{−1/2})`
    /// otherwise.
    pub fn center_and_scale(&self) -> (f64, f64) {
        (self.center, self.scale)
    }

    /// Closed-form truncated-normal representation, when one exists.
    pub fn conjugate(&self) -> Option<TruncatedNormal> {
        match self.prior {
            Prior::UniformPositive | Prior::TruncatedNormal { .. } => Some(TruncatedNormal {
                m: self.center,
                s: self.scale,
            }),
            Prior::Custom(_) => None,
        }
    }

    pub fn ln_kernel(&self, theta: f64) -> f64 {
        if !(theta > 0.0) {
            return f64::NEG_INFINITY;
        }
        let d = theta - self.theta_hat;
        -0.5 * self.fisher * d * d + self.prior.ln_density(theta)
    }

    pub fn ln_density(&self, theta: f64) -> f64 {
        self.ln_kernel(theta) - self.ln_normalizer
    }

    pub fn density(&self, theta: f64) -> f64 {
        self.ln_density(theta).exp()
    }

    /// `ln C_N = ln(√I_N · normalizer)`.
    pub fn ln_lambda_normalizer(&self) -> f64 {
        self.ln_normalizer + 0.5 * self.fisher.ln()
    }

    /// Density of `λ = √I_N(θ − θ̂_N)`:
    /// `C_N⁻¹ ϱ(θ̂_N + λ/√I_N) exp(−λ²/2)` on `λ > −√I_N θ̂_N`, zero below.
    pub fn lambda_density(&self, lambda: f64) -> f64 {
        self.ln_lambda_density(lambda).exp()
    }

    pub fn ln_lambda_density(&self, lambda: f64) -> f64 {
        if lambda <= self.lambda_support_edge() {
            return f64::NEG_INFINITY;
        }
        let theta = self.theta_hat + lambda / self.fisher.sqrt();
        -0.5 * lambda * lambda + self.prior.ln_density(theta) - self.ln_lambda_normalizer()
    }

    /// `−√I_N θ̂_N`.
    pub fn lambda_support_edge(&self) -> f64 {
        -self.fisher.sqrt() * self.theta_hat
    }

    /// Integration window `[max(0, c − W s), c + W s]` where `W ≥ 12` grows
    /// until the certified bound on the neglected integrand, including an
    /// optional extra factor `g(factor_scale·(η − factor_center))`, is below
    /// `e^{−40}` relative to the kernel peak.
    pub(crate) fn window(&self, extra: Option<(GrowthCertificate, f64, f64)>) -> Result<(f64, f64)> {
        let (c, s) = (self.center, self.scale);
        let prior_growth = match self.prior {
            Prior::Custom(_) => Some(self.prior.growth()),
            _ => None,
        };
        let mut w = MIN_WINDOW;
        loop {
            let reach = c.abs() + w * s;
            let mut ln_bound = -0.5 * w * w;
            if let Some(g) = prior_growth {
                ln_bound += g.c2 * reach.powf(g.r);
            }
            if let Some((g, factor_scale, factor_center)) = extra {
                ln_bound += g.c2 * (factor_scale * ((c - factor_center).abs() + w * s)).powf(g.r);
            }
            if ln_bound < TAIL_LOG_MARGIN {
                break;
            }
            w += 1.0;
            if w > MAX_WINDOW {
                return Err(Error::Quadrature(
                    "could not certify the posterior tail with the declared growth bounds".into(),
                ));
            }
        }
        let lo = (c - w * s).max(0.0);
        let hi = c + w * s;
        if !(hi > lo) {
            return Err(Error::Quadrature(format!(
                "posterior mass lies entirely below zero (center {c}, scale {s})"
            )));
        }
        Ok((lo, hi))
    }

    /// Panel edges about one posterior standard deviation wide.
    pub(crate) fn panels(&self, lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<f64> {
        panel_edges(lo, hi, self.scale, breakpoints)
    }

    fn adaptive_ln_normalizer(&self) -> Result<f64> {
        let (lo, hi) = self.window(None)?;
        // shift by the largest sampled log-kernel so the integrand stays O(1)
        let shift = (0..=256)
            .map(|i| self.ln_kernel(lo + (hi - lo) * i as f64 / 256.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::Quadrature("posterior kernel vanishes on its window".into()));
        }
        let mass = adaptive(lo, hi, 0.0, 1e-13, |t| (self.ln_kernel(t) - shift).exp())?;
        Ok(shift + mass.ln())
    }

    /// Normalizer, mean and variance by composite Gauss–Legendre quadrature,
    /// independent of any closed form.
    pub fn quadrature_moments(&self) -> Result<QuadratureMoments> {
        let (lo, hi) = self.window(None)?;
        let edges = self.panels(lo, hi, &[]);
        let ln_z = composite_ln(&edges, |t| self.ln_kernel(t));
        let mean = composite(&edges, |t| t * (self.ln_kernel(t) - ln_z).exp());
        let variance = composite(&edges, |t| {
            let d = t - mean;
            d * d * (self.ln_kernel(t) - ln_z).exp()
        });
        Ok(QuadratureMoments {
            ln_normalizer: ln_z,
            mean,
            variance,
        })
    }

    /// Posterior mean: closed form when conjugate, quadrature otherwise.
    pub fn mean(&self) -> Result<f64> {
        match self.conjugate() {
            Some(tn) => Ok(tn.mean()),
            None => Ok(self.quadrature_moments()?.mean),
        }
    }

    pub fn variance(&self) -> Result<f64> {
        match self.conjugate() {
            Some(tn) => Ok(tn.variance()),
            None => Ok(self.quadrature_moments()?.variance),
        }
    }

    /// `∫ p(θ) dθ` by quadrature; 1 up to rounding.
    pub fn total_mass(&self) -> Result<f64> {
        let (lo, hi) = self.window(None)?;
        let edges = self.panels(lo, hi, &[]);
        Ok(composite(&edges, |t| self.density(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::prior::PriorClass;
    use crate::special::{norm_cdf, norm_pdf};

    #[test]
    fn uniform_normalizer_closed_form() {
        let p = Posterior::new(0.3, 17.0, Prior::UniformPositive).unwrap();
        let want = (2.0 * PI / 17.0).sqrt() * norm_cdf(0.3 * 17f64.sqrt());
        assert!(((p.normalizer() - want) / want).abs() < 1e-14);
    }

    #[test]
    fn uniform_mean_and_variance_reference() {
        let p = Posterior::new(0.3, 17.0, Prior::UniformPositive).unwrap();
        assert!((p.mean().unwrap() - 0.350_479_244_495_124_9).abs() < 1e-14);
        assert!((p.variance().unwrap() - 0.041_131_601_938_428_63).abs() < 1e-14);
    }

    #[test]
    fn conjugate_parameters() {
        let tn = conjugate_update(0.3, 17.0, 1.0, 0.1);
        let m = (0.1 * 0.3 + 1.0 / 17.0) / (0.1 + 1.0 / 17.0);
        let s2 = (0.1 / 17.0) / (0.1 + 1.0 / 17.0);
        assert!((tn.m - m).abs() < 1e-15);
        assert!((tn.s * tn.s - s2).abs() < 1e-15);
        // flat-prior limit
        let wide = conjugate_update(0.3, 17.0, 1.0, 1e12);
        assert!((wide.m - 0.3).abs() < 1e-10);
        assert!((wide.s - 1.0 / 17f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for fisher in [1.0, 17.0, 2870.0, 722_666.0] {
            for prior in [Prior::UniformPositive, Prior::truncated_normal(1.0, 0.1).unwrap()] {
                let p = Posterior::new(0.3, fisher, prior).unwrap();
                let q = p.quadrature_moments().unwrap();
                let z = p.normalizer();
                assert!(((q.ln_normalizer.exp() - z) / z).abs() < 1e-12, "I={fisher}");
                let m = p.mean().unwrap();
                assert!(((q.mean - m) / m).abs() < 1e-12, "I={fisher}");
                let v = p.variance().unwrap();
                assert!(((q.variance - v) / v).abs() < 1e-10, "I={fisher}");
                assert!((p.total_mass().unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_matches_truncated_normal_pointwise() {
        let p = Posterior::new(0.3, 17.0, Prior::truncated_normal(1.0, 0.1).unwrap()).unwrap();
        let tn = p.conjugate().unwrap();
        let mass = (tn.ln_kernel_mass()).exp();
        for theta in [0.01, 0.2, 0.5, 0.9, 1.5] {
            let want = (-(theta - tn.m).powi(2) / (2.0 * tn.s * tn.s)).exp() / mass;
            let got = p.density(theta);
            assert!(((got - want) / want).abs() < 1e-12, "θ={theta}");
        }
        assert_eq!(p.density(0.0), 0.0);
        assert_eq!(p.density(-0.2), 0.0);
    }

    #[test]
    fn lambda_density_uniform_form() {
        let p = Posterior::new(0.3, 17.0, Prior::UniformPositive).unwrap();
        let z = 0.3 * 17f64.sqrt();
        for lambda in [-1.0, 0.0, 0.7, 3.0] {
            let want = norm_pdf(lambda) / norm_cdf(z);
            assert!(((p.lambda_density(lambda) - want) / want).abs() < 1e-13);
        }
        assert_eq!(p.lambda_density(-z), 0.0);
        assert_eq!(p.lambda_density(-5.0), 0.0);
        let edges = panel_edges(-z, 20.0, 0.5, &[]);
        let mass = composite(&edges, |l| p.lambda_density(l));
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn custom_prior_uses_adaptive_normalizer() {
        // Gamma(2, 1)-shaped prior θ e^{−θ}: bounded, so (1, 0, 1) certifies it
        let g = GrowthCertificate::bounded(1.0);
        let prior = Prior::custom(|t: f64| t.ln() - t, g, PriorClass::Polynomial).unwrap();
        let p = Posterior::new(0.3, 17.0, prior).unwrap();
        let q = p.quadrature_moments().unwrap();
        assert!(((q.ln_normalizer - p.ln_normalizer()) / p.ln_normalizer()).abs() < 1e-11);
        assert!((p.total_mass().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_fisher() {
        assert!(Posterior::new(0.3, 0.0, Prior::UniformPositive).is_err());
        assert!(Posterior::new(f64::NAN, 1.0, Prior::UniformPositive).is_err());
    }
}
