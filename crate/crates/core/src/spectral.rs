//! Spectral data of the diagonal SPDE: eigenvalues `μ_k` of the operator,
//! noise weights `q_k`, noise amplitude `σ` and horizon `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Power-law spectrum `μ_k = k^p`, `q_k = k^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub p: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    mu: Vec<f64>,
    q: Vec<f64>,
    sigma: f64,
    horizon: f64,
    family: Option<PowerLaw>,
    /// `info_prefix[n] = Σ_{k≤n} μ_k²/q_k²`, accumulated with compensation.
    info_prefix: Vec<f64>,
}

impl SpectralModel {
    /// Model from explicit spectra. `mu[0]` is `μ_1`.
    pub fn new(mu: Vec<f64>, q: Vec<f64>, sigma: f64, horizon: f64) -> Result<Self> {
        Self::build(mu, q, sigma, horizon, None)
    }

    pub fn power_law(p: f64, alpha: f64, k_max: usize, sigma: f64, horizon: f64) -> Result<Self> {
        if !(p > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!(
                "power-law exponents must satisfy p > 0 and finite alpha (p={p}, alpha={alpha})"
            )));
        }
        let mu = (1..=k_max).map(|k| (k as f64).powf(p)).collect();
        let q = (1..=k_max).map(|k| (k as f64).powf(alpha)).collect();
        Self::build(mu, q, sigma, horizon, Some(PowerLaw { p, alpha }))
    }

    fn build(mu: Vec<f64>, q: Vec<f64>, sigma: f64, horizon: f64, family: Option<PowerLaw>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Config("spectral model needs at least one mode".into()));
        }
        if mu.len() != q.len() {
            return Err(Error::Config(format!(
                "mu has {} entries but q has {}",
                mu.len(),
                q.len()
            )));
        }
        if let Some(k) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Domain(format!("mu_{} must be positive and finite", k + 1)));
        }
        if let Some(k) = q.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("q_{} must be positive and finite", k + 1)));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T must be positive, got {horizon}")));
        }
        let mut acc = CompensatedSum::new();
        let mut info_prefix = Vec::with_capacity(mu.len() + 1);
        info_prefix.push(0.0);
        for (m, qk) in mu.iter().zip(&q) {
            let r = m / qk;
            acc.add(r * r);
            info_prefix.push(acc.value());
        }
        Ok(Self {
            mu,
            q,
            sigma,
            horizon,
            family,
            info_prefix,
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn family(&self) -> Option<PowerLaw> {
        self.family
    }

    /// Number of materialized modes `K_max`.
    pub fn k_max(&self) -> usize {
        self.mu.len()
    }

    pub fn check_modes(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.k_max() {
            Err(Error::ModeRange { n, max: self.k_max() })
        } else {
            Ok(())
        }
    }

    /// `Σ_{k≤n} μ_k² q_k⁻²`.
    pub fn info_sum(&self, n: usize) -> Result<f64> {
        self.check_modes(n)?;
        Ok(self.info_prefix[n])
    }

    /// Fisher information `I_N = (T/σ²) Σ_{k≤N} μ_k² q_k⁻²`; independent of θ.
    pub fn fisher_info(&self, n: usize) -> Result<f64> {
        Ok(self.horizon / (self.sigma * self.sigma) * self.info_sum(n)?)
    }

    /// Same spectrum restricted to the first `k_max` modes.
    pub fn truncated(&self, k_max: usize) -> Result<Self> {
        self.check_modes(k_max)?;
        Self::build(
            self.mu[..k_max].to_vec(),
            self.q[..k_max].to_vec(),
            self.sigma,
            self.horizon,
            self.family,
        )
    }

    /// Well-posedness check of `2θ − σ² q_k²/μ_k ≥ c > 0` for `k ≥ N₀`.
    ///
    /// Power-law spectra are decided analytically from the sign of `2α − p`.
    /// Other spectra are scanned over `k ≤ k_scan`, and the report carries
    /// the finite-scan caveat.
    pub fn check_wellposed(&self, theta: f64, k_scan: Option<usize>) -> Result<WellPosednessReport> {
        if !(theta > 0.0) {
            return Err(Error::Domain(format!("theta must be positive, got {theta}")));
        }
        let s2 = self.sigma * self.sigma;
        match self.family {
            Some(PowerLaw { p, alpha }) => {
                let e = 2.0 * alpha - p;
                if e.abs() <= 1e-12 {
                    let margin = 2.0 * theta - s2;
                    Ok(WellPosednessReport {
                        holds: margin > 0.0,
                        margin,
                        n0: 1,
                        route: WellPosednessRoute::BoundedRatio,
                        finite_scan: false,
                    })
                } else if e < 0.0 {
                    // ratio k^e decreases to 0: margin is attained at N₀
                    let margin_at = |k: usize| 2.0 * theta - s2 * (k as f64).powf(e);
                    let threshold = (2.0 * theta / s2).powf(1.0 / e);
                    if threshold >= MAX_EXACT_N0 {
                        // N₀ is beyond any addressable mode; report the margin just past it
                        let margin = -2.0 * theta * (e * (1.0 / threshold).ln_1p()).exp_m1();
                        return Ok(WellPosednessReport {
                            holds: true,
                            margin,
                            n0: usize::MAX,
                            route: WellPosednessRoute::PowerLaw,
                            finite_scan: false,
                        });
                    }
                    let guess = threshold.floor().max(1.0) as usize;
                    let mut n0 = guess.saturating_sub(1).max(1);
                    while margin_at(n0) <= 0.0 {
                        n0 += 1;
                    }
                    while n0 > 1 && margin_at(n0 - 1) > 0.0 {
                        n0 -= 1;
                    }
                    Ok(WellPosednessReport {
                        holds: true,
                        margin: margin_at(n0),
                        n0,
                        route: WellPosednessRoute::PowerLaw,
                        finite_scan: false,
                    })
                } else {
                    // ratio grows without bound; the scan only locates where it breaks
                    let k_scan = k_scan.unwrap_or(self.k_max()).max(1);
                    let ratio = |k: usize| (k as f64).powf(e);
                    let mut report = scan(theta, s2, k_scan, ratio);
                    report.holds = false;
                    report.finite_scan = false;
                    Ok(report)
                }
            }
            None => {
                let k_scan = k_scan.ok_or_else(|| {
                    Error::Config("explicit spectra need a scan bound for the well-posedness check".into())
                })?;
                self.check_modes(k_scan)?;
                Ok(scan(theta, s2, k_scan, |k| {
                    let qk = self.q[k - 1];
                    qk * qk / self.mu[k - 1]
                }))
            }
        }
    }
}

/// Above this the threshold mode is not resolved exactly in `f64`.
const MAX_EXACT_N0: f64 = 4_503_599_627_370_496.0;

fn scan(theta: f64, s2: f64, k_scan: usize, ratio: impl Fn(usize) -> f64) -> WellPosednessReport {
    let margins: Vec<f64> = (1..=k_scan).map(|k| 2.0 * theta - s2 * ratio(k)).collect();
    // smallest N₀ with every margin in [N₀, k_scan] positive
    let mut n0 = k_scan + 1;
    let mut running_min = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    for k in (1..=k_scan).rev() {
        let m = margins[k - 1];
        if m <= 0.0 {
            break;
        }
        running_min = running_min.min(m);
        n0 = k;
        best = running_min;
    }
    if n0 > k_scan {
        WellPosednessReport {
            holds: false,
            margin: margins[k_scan - 1],
            n0: k_scan,
            route: WellPosednessRoute::NumericScan,
            finite_scan: true,
        }
    } else {
        WellPosednessReport {
            holds: true,
            margin: best,
            n0,
            route: WellPosednessRoute::NumericScan,
            finite_scan: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WellPosednessRoute {
    /// `q_k² ≤ C μ_k^{1−ε}`: the ratio vanishes in the tail.
    PowerLaw,
    /// `q_k² = μ_k` with `2θ − σ² > 0`.
    BoundedRatio,
    NumericScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellPosednessReport {
    pub holds: bool,
    /// `inf_{k ≥ N₀} (2θ − σ² q_k²/μ_k)` over the checked range.
    pub margin: f64,
    pub n0: usize,
    pub route: WellPosednessRoute,
    /// Only finitely many `k` were checked; the tail is not certified.
    pub finite_scan: bool,
}

/// One-dimensional heat equation on `[0, π]` with Dirichlet boundary:
/// `μ_k = k²` and noise weights `q_k = k^α`.
pub fn heat_model_1d(alpha: f64, k_max: usize, sigma: f64, horizon: f64) -> Result<SpectralModel> {
    SpectralModel::power_law(2.0, alpha, k_max, sigma, horizon)
}

/// Sine coefficients `⟨x(π − x), h_k⟩` of the parabolic initial profile
/// `π²/4 − (x − π/2)²` against `h_k = √(2/π) sin(kx)`:
/// `√(2/π)·2(1 − (−1)^k)/k³`, zero for even `k`.
pub fn heat_initial_coefficient(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        0.0
    } else {
        (2.0 / std::f64::consts::PI).sqrt() * 4.0 / (k as f64).powi(3)
    }
}

/// Initial modes for the heat example, with vanishing even coefficients
/// replaced by `floor` so every mode is nonzero.
pub fn heat_initial_modes(k_max: usize, floor: f64) -> Vec<f64> {
    (1..=k_max)
        .map(|k| match heat_initial_coefficient(k) {
            0.0 => floor,
            c => c,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fisher_examples() {
        let m = SpectralModel::new(vec![1.0, 4.0], vec![1.0, 1.0], 1.0, 1.0).unwrap();
        assert_eq!(m.fisher_info(2).unwrap(), 17.0);
        let one = SpectralModel::new(vec![1.0], vec![1.0], 1.0, 1.0).unwrap();
        assert_eq!(one.fisher_info(1).unwrap(), 1.0);
        let heat = heat_model_1d(1.0, 20, 1.0, 1.0).unwrap();
        // Σ_{k≤20} k² = 20·21·41/6
        assert_eq!(heat.fisher_info(20).unwrap(), 2870.0);
        let heat0 = heat_model_1d(0.0, 20, 1.0, 1.0).unwrap();
        assert_eq!(heat0.fisher_info(20).unwrap(), 722_666.0);
    }

    #[test]
    fn fisher_scales_with_horizon_and_sigma() {
        let m = heat_model_1d(0.0, 3, 2.0, 3.0).unwrap();
        let base = 1.0 + 16.0 + 81.0;
        assert!((m.fisher_info(3).unwrap() - 3.0 / 4.0 * base).abs() < 1e-12);
    }

    #[test]
    fn fisher_out_of_range() {
        let m = heat_model_1d(0.0, 5, 1.0, 1.0).unwrap();
        assert!(matches!(m.fisher_info(0), Err(Error::ModeRange { .. })));
        assert!(matches!(m.fisher_info(6), Err(Error::ModeRange { n: 6, max: 5 })));
    }

    #[test]
    fn heat_model_spectra() {
        let m = heat_model_1d(0.0, 20, 1.0, 1.0).unwrap();
        assert_eq!(m.mu()[19], 400.0);
        assert!(m.q().iter().all(|&q| q == 1.0));
        let m = heat_model_1d(1.0, 2, 1.0, 1.0).unwrap();
        assert_eq!(m.q(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SpectralModel::new(vec![1.0], vec![0.0], 1.0, 1.0).is_err());
        assert!(SpectralModel::new(vec![-1.0], vec![1.0], 1.0, 1.0).is_err());
        assert!(SpectralModel::new(vec![1.0], vec![1.0], 0.0, 1.0).is_err());
        assert!(SpectralModel::new(vec![1.0], vec![1.0], 1.0, -1.0).is_err());
        assert!(SpectralModel::new(vec![1.0, 2.0], vec![1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn wellposed_bounded_ratio() {
        let m = heat_model_1d(1.0, 20, 1.0, 1.0).unwrap();
        let r = m.check_wellposed(0.505, None).unwrap();
        assert!(r.holds);
        assert!((r.margin - 0.01).abs() < 1e-12);
        assert_eq!(r.route, WellPosednessRoute::BoundedRatio);

        let r = m.check_wellposed(0.3, None).unwrap();
        assert!(!r.holds);
        assert!((r.margin + 0.4).abs() < 1e-12);
    }

    #[test]
    fn wellposed_power_law_tail() {
        let m = heat_model_1d(0.0, 20, 1.0, 1.0).unwrap();
        let r = m.check_wellposed(0.3, None).unwrap();
        assert!(r.holds);
        assert_eq!(r.n0, 2);
        assert!((r.margin - 0.35).abs() < 1e-12);
        assert_eq!(r.route, WellPosednessRoute::PowerLaw);
        assert!(!r.finite_scan);
    }

    #[test]
    fn wellposed_threshold_mode() {
        let m = heat_model_1d(0.9, 20, 1.0, 1.0).unwrap();
        let r = m.check_wellposed(0.3, None).unwrap();
        assert!(r.holds);
        assert_eq!(r.n0, 13);
        assert!((r.margin - (0.6 - 13f64.powf(-0.2))).abs() < 1e-15);

        // 0.6^{-500} is far beyond usize
        let m = heat_model_1d(0.999, 20, 1.0, 1.0).unwrap();
        let r = m.check_wellposed(0.3, None).unwrap();
        assert!(r.holds);
        assert_eq!(r.n0, usize::MAX);
        assert!(r.margin > 0.0 && r.margin < 1e-100);
    }

    #[test]
    fn wellposed_growing_ratio_fails() {
        let m = heat_model_1d(1.5, 10, 1.0, 1.0).unwrap();
        let r = m.check_wellposed(100.0, Some(10)).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn wellposed_explicit_spectrum_needs_scan_bound() {
        let m = SpectralModel::new(vec![1.0, 4.0, 9.0], vec![1.0, 1.0, 1.0], 1.0, 1.0).unwrap();
        assert!(matches!(m.check_wellposed(0.3, None), Err(Error::Config(_))));
        let r = m.check_wellposed(0.3, Some(3)).unwrap();
        assert!(r.holds && r.finite_scan);
        assert_eq!(r.n0, 2);
        assert!((r.margin - (0.6 - 0.25)).abs() < 1e-12);
        assert_eq!(r.route, WellPosednessRoute::NumericScan);
    }

    #[test]
    fn initial_coefficients_match_quadrature() {
        use crate::quadrature::{composite, panel_edges};
        let pi = std::f64::consts::PI;
        let edges = panel_edges(0.0, pi, 0.25, &[]);
        for k in 1..=9 {
            let kf = k as f64;
            let direct = composite(&edges, |x| {
                (pi * pi / 4.0 - (x - pi / 2.0).powi(2)) * (2.0 / pi).sqrt() * (kf * x).sin()
            });
            assert!(
                (direct - heat_initial_coefficient(k)).abs() < 1e-13,
                "k={k}: {direct} vs {}",
                heat_initial_coefficient(k)
            );
        }
        let u0 = heat_initial_modes(19, 1e-3);
        assert_eq!(u0[1], 1e-3);
        // odd coefficients below the floor are kept as they are
        assert_eq!(u0[18], heat_initial_coefficient(19));
        assert!(u0[18] < 1e-3);
        assert!(u0.iter().all(|&v| v != 0.0));
    }
}
