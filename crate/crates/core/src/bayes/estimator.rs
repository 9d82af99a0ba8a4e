//! Bayesian estimators: minimizers of the posterior expected loss.

use super::loss::LossFunction;
use super::posterior::Posterior;
use crate::error::Result;
use crate::optimize::minimize_bracketed;
use crate::quadrature::{composite, composite_ln};

/// Smallest admissible estimate; the parameter set `(0, ∞)` is open.
pub const BETA_FLOOR: f64 = 1e-12;
/// Optimizer tolerance in units of the posterior standard deviation.
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

/// Evidence that `β*` is a local minimum: `R(β* ± δ) ≥ R(β*)` for
/// `δ ∈ {1, 2, 4}·tol`, up to quadrature rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCertificate {
    /// `(δ, R(β* − δ), R(β* + δ))`; the left value is `None` when `β* − δ`
    /// leaves the parameter set.
    pub probes: Vec<(f64, Option<f64>, f64)>,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct BayesEstimate {
    pub beta: f64,
    /// `true` for `β̃_N` (loss `ℓ(√I_N x)`), `false` for `β̂_N`.
    pub scaled: bool,
    pub loss: LossFunction,
    pub risk_at_min: f64,
    pub optimizer_iterations: usize,
    /// Minimum found on the lower edge `BETA_FLOOR`.
    pub at_boundary: bool,
    pub tolerance: f64,
    pub certificate: OptimalityCertificate,
}

/// `R(β) = ∫ ℓ(k(η − β)) p(η | U_N) dη` with `k = √I_N` when `scaled`,
/// else `k = 1`.
pub fn posterior_expected_loss(post: &Posterior, loss: &LossFunction, beta: f64, scaled: bool) -> Result<f64> {
    let k = if scaled { post.fisher().sqrt() } else { 1.0 };
    let (lo, hi) = post.window(Some((loss.growth(), k, beta)))?;
    let edges = post.panels(lo, hi, &[beta]);
    if loss.prefers_log_space() {
        let ln_r = composite_ln(&edges, |eta| loss.ln_eval(k * (eta - beta)) + post.ln_density(eta));
        Ok(ln_r.exp())
    } else {
        Ok(composite(&edges, |eta| loss.eval(k * (eta - beta)) * post.density(eta)))
    }
}

/// Minimizes the posterior risk over `β > 0` by golden-section search on
/// `[max(ε, θ̂ − 8/√I_N), θ̂ + 8/√I_N]`, expanding the bracket when needed.
pub fn bayes_estimator(post: &Posterior, loss: &LossFunction, scaled: bool) -> Result<BayesEstimate> {
    let sd = 1.0 / post.fisher().sqrt();
    let (_, scale) = post.center_and_scale();
    let tol = RELATIVE_TOLERANCE * scale;
    let lo = (post.theta_hat() - 8.0 * sd).max(BETA_FLOOR);
    let hi = (post.theta_hat() + 8.0 * sd).max(lo + 16.0 * sd);

    let mut failure = None;
    let mut risk = |beta: f64| match posterior_expected_loss(post, loss, beta, scaled) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let min = minimize_bracketed(&mut risk, BETA_FLOOR, lo, hi, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    let min = min?;

    let slack = 1e-12 * min.value.abs() + f64::MIN_POSITIVE;
    let mut probes = Vec::with_capacity(3);
    let mut holds = true;
    for mult in [1.0, 2.0, 4.0] {
        let delta = mult * tol;
        let right = posterior_expected_loss(post, loss, min.x + delta, scaled)?;
        let left = if min.x - delta >= BETA_FLOOR {
            Some(posterior_expected_loss(post, loss, min.x - delta, scaled)?)
        } else {
            None
        };
        holds &= right >= min.value - slack;
        holds &= left.is_none_or(|l| l >= min.value - slack);
        probes.push((delta, left, right));
    }

    Ok(BayesEstimate {
        beta: min.x,
        scaled,
        loss: loss.clone(),
        risk_at_min: min.value,
        optimizer_iterations: min.evaluations,
        at_boundary: min.at_lower_bound,
        tolerance: tol,
        certificate: OptimalityCertificate { probes, holds },
    })
}
