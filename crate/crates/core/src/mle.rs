//! Maximum-likelihood estimation of the drift parameter θ from the first
//! `N` modes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::{ito_log_integral, log_endpoint_statistic, ModePathSet};
use crate::spectral::SpectralModel;
use crate::sum::CompensatedSum;

/// Which statistic of the data the estimator is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Itô sums `∫du_k/u_k` approximated on the grid.
    Increments,
    /// Log endpoints `log(u_k(T)/u_k(0))`; no discretization error.
    Endpoints,
    /// True θ and Brownian endpoints. Test-only.
    Oracle,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Increments => "increments",
            Route::Endpoints => "endpoints",
            Route::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "increments" => Ok(Route::Increments),
            "endpoints" => Ok(Route::Endpoints),
            "oracle" => Ok(Route::Oracle),
            other => Err(Error::Config(format!("unknown estimator route `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    /// Untruncated estimator; may be negative.
    pub theta_hat: f64,
    /// `max(θ̂, 0)`.
    pub theta_hat_mle: f64,
    pub route: Route,
    pub n_modes: usize,
    pub fisher: f64,
    /// `θ̂ ≤ 0` occurred.
    pub truncated: bool,
}

impl MleResult {
    fn new(theta_hat: f64, route: Route, n_modes: usize, fisher: f64) -> Self {
        let truncated = !(theta_hat > 0.0);
        Self {
            theta_hat,
            theta_hat_mle: if truncated { 0.0 } else { theta_hat },
            route,
            n_modes,
            fisher,
            truncated,
        }
    }
}

fn check(model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<()> {
    model.check_modes(n)?;
    if n > pathset.n_modes() {
        return Err(Error::ModeRange {
            n,
            max: pathset.n_modes(),
        });
    }
    Ok(())
}

/// `θ̂_N = −Σ μ_k q_k⁻² ∫du_k/u_k / (T Σ μ_k² q_k⁻²)` with the Itô integral
/// replaced by its left-point sum.
pub fn mle_increments(model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<MleResult> {
    check(model, pathset, n)?;
    let mut num = CompensatedSum::new();
    for k in 1..=n {
        let (mu, q) = (model.mu()[k - 1], model.q()[k - 1]);
        num.add(mu / (q * q) * ito_log_integral(pathset, k)?);
    }
    let theta_hat = -num.value() / (model.horizon() * model.info_sum(n)?);
    Ok(MleResult::new(theta_hat, Route::Increments, n, model.fisher_info(n)?))
}

/// Endpoint form: `θ̂_N = −Σ μ_k(q_k⁻² log(u_k(T)/u_k(0)) + σ²T/2) / (T Σ μ_k² q_k⁻²)`.
pub fn mle_endpoints(model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<MleResult> {
    check(model, pathset, n)?;
    let t = model.horizon();
    let half_s2t = 0.5 * model.sigma() * model.sigma() * t;
    let mut num = CompensatedSum::new();
    for k in 1..=n {
        let (mu, q) = (model.mu()[k - 1], model.q()[k - 1]);
        num.add(mu * (log_endpoint_statistic(pathset, k)? / (q * q) + half_s2t));
    }
    let theta_hat = -num.value() / (t * model.info_sum(n)?);
    Ok(MleResult::new(theta_hat, Route::Endpoints, n, model.fisher_info(n)?))
}

/// `θ̂_N = θ₀ − (σ/T) Σ μ_k q_k⁻¹ w_k(T) / Σ μ_k² q_k⁻²`.
pub fn mle_oracle(model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<MleResult> {
    check(model, pathset, n)?;
    let oracle = pathset
        .oracle()
        .ok_or_else(|| Error::Capability("path set carries no oracle channel".into()))?;
    let noise: f64 = (1..=n)
        .map(|k| model.mu()[k - 1] / model.q()[k - 1] * oracle.w_terminal[k - 1])
        .collect::<CompensatedSum>()
        .value();
    let theta_hat = oracle.theta_true - model.sigma() / model.horizon() * noise / model.info_sum(n)?;
    Ok(MleResult::new(theta_hat, Route::Oracle, n, model.fisher_info(n)?))
}

pub fn estimate(route: Route, model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<MleResult> {
    match route {
        Route::Increments => mle_increments(model, pathset, n),
        Route::Endpoints => mle_endpoints(model, pathset, n),
        Route::Oracle => mle_oracle(model, pathset, n),
    }
}

/// `√I_N (θ̂_N − θ₀)`.
pub fn pivot(result: &MleResult, theta0: f64) -> f64 {
    result.fisher.sqrt() * (result.theta_hat - theta0)
}

/// The pivot expressed through the Brownian endpoints:
/// `ξ_N = −Σ μ_k q_k⁻¹ w_k(T) / √(T Σ μ_k² q_k⁻²)`, exactly `N(0, 1)`.
pub fn oracle_xi(model: &SpectralModel, pathset: &ModePathSet, n: usize) -> Result<f64> {
    check(model, pathset, n)?;
    let oracle = pathset
        .oracle()
        .ok_or_else(|| Error::Capability("path set carries no oracle channel".into()))?;
    let s: f64 = (1..=n)
        .map(|k| model.mu()[k - 1] / model.q()[k - 1] * oracle.w_terminal[k - 1])
        .collect::<CompensatedSum>()
        .value();
    Ok(-s / (model.horizon() * model.info_sum(n)?).sqrt())
}

/// `log dP^θ/dP^{θ_ref}` of the first `n` modes.
pub fn log_likelihood_ratio(
    model: &SpectralModel,
    pathset: &ModePathSet,
    n: usize,
    theta: f64,
    theta_ref: f64,
) -> Result<f64> {
    check(model, pathset, n)?;
    if !(theta > 0.0 && theta_ref > 0.0) {
        return Err(Error::Domain("likelihood ratio needs positive parameters".into()));
    }
    let s2 = model.sigma() * model.sigma();
    let mut drift = CompensatedSum::new();
    for k in 1..=n {
        let (mu, q) = (model.mu()[k - 1], model.q()[k - 1]);
        drift.add(mu / (q * q) * ito_log_integral(pathset, k)?);
    }
    Ok((theta_ref - theta) / s2 * drift.value()
        + (theta_ref * theta_ref - theta * theta) * model.horizon() / (2.0 * s2) * model.info_sum(n)?)
}
