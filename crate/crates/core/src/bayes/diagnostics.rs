//! Bernstein–von Mises distance, the loss profile `ψ`, and the scaled-risk
//! limit check.

use std::fmt;
use std::sync::Arc;

use super::estimator::{bayes_estimator, posterior_expected_loss};
use super::loss::LossFunction;
use super::posterior::Posterior;
use super::prior::GrowthCertificate;
use crate::error::Result;
use crate::quadrature::{composite, composite_ln, panel_edges};
use crate::special::{abs_normal_moment, ln_norm_pdf};

const MIN_HALF_WIDTH: f64 = 20.0;
const MAX_PANEL: f64 = 0.5;
const SIGN_SCAN_STEP: f64 = 0.05;

/// Weight `f` in the BvM distance, with a certified sub-Gaussian majorant.
#[derive(Clone)]
pub struct Weight {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth: GrowthCertificate,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("growth", &self.growth)
            .finish_non_exhaustive()
    }
}

impl Weight {
    /// `f ≡ 1`: the BvM distance is then the L¹ distance.
    pub fn one() -> Self {
        Self {
            f: Arc::new(|_| 1.0),
            growth: GrowthCertificate::bounded(1.0),
        }
    }

    pub fn from_loss(loss: &LossFunction) -> Self {
        let loss = loss.clone();
        Self {
            growth: loss.growth(),
            f: Arc::new(move |x| loss.eval(x)),
        }
    }

    /// Rejects certificates with exponent `r ≥ 2`.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, growth: GrowthCertificate) -> Result<Self> {
        let growth = GrowthCertificate::new(growth.c1, growth.c2, growth.r)?;
        Ok(Self { f: Arc::new(f), growth })
    }

    pub fn growth(&self) -> GrowthCertificate {
        self.growth
    }

    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Smallest `L ≥ 20` with `c₂(L + shift)^r − L²/2 < −40`.
fn half_width(growth: GrowthCertificate, shift: f64) -> f64 {
    let mut l = MIN_HALF_WIDTH;
    while growth.c2 * (l + shift).powf(growth.r) - 0.5 * l * l >= -40.0 {
        l += 1.0;
    }
    l
}

/// `∫_{−L}^{L} f(λ)|p̃(λ | U_N) − φ(λ)| dλ`.
pub fn bvm_distance(post: &Posterior, weight: &Weight) -> Result<f64> {
    let l = half_width(weight.growth(), 0.0);
    let edge = post.lambda_support_edge();
    let diff = |lambda: f64| post.lambda_density(lambda) - (ln_norm_pdf(lambda)).exp();

    let mut breakpoints = vec![edge];
    // sign changes of p̃ − φ on the support
    let start = edge.max(-l);
    if start < l {
        let steps = ((l - start) / SIGN_SCAN_STEP).ceil() as usize;
        let at = |i: usize| start + (l - start) * i as f64 / steps as f64;
        let mut prev_x = at(1);
        let mut prev = diff(prev_x);
        for i in 2..=steps {
            let x = at(i);
            let v = diff(x);
            if prev != 0.0 && v != 0.0 && prev.signum() != v.signum() {
                breakpoints.push(bisect_root(&diff, prev_x, x));
            }
            prev_x = x;
            prev = v;
        }
    }
    let edges = panel_edges(-l, l, MAX_PANEL, &breakpoints);
    Ok(composite(&edges, |lambda| weight.eval(lambda) * diff(lambda).abs()))
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `ψ(r) = ∫ ℓ(λ + r) φ(λ) dλ` on a grid, with the strict-minimum check.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiProfile {
    pub points: Vec<(f64, f64)>,
    pub psi_zero: f64,
    /// `ψ(0) < ψ(r)` for every nonzero `r` of the grid.
    pub strict_min_at_zero: bool,
}

/// Composite Gauss–Legendre evaluation of `ψ` with a breakpoint at the
/// loss kink `λ = −r`.
pub fn psi(loss: &LossFunction, r: f64) -> f64 {
    let growth = loss.growth();
    let l = half_width(growth, r.abs());
    let edges = panel_edges(-l, l, MAX_PANEL, &[-r]);
    if loss.prefers_log_space() {
        composite_ln(&edges, |lambda| loss.ln_eval(lambda + r) + ln_norm_pdf(lambda)).exp()
    } else {
        composite(&edges, |lambda| loss.eval(lambda + r) * ln_norm_pdf(lambda).exp())
    }
}

pub fn psi_profile(loss: &LossFunction, r_values: &[f64]) -> PsiProfile {
    let psi_zero = psi(loss, 0.0);
    let points: Vec<(f64, f64)> = r_values.iter().map(|&r| (r, psi(loss, r))).collect();
    let strict_min_at_zero = points.iter().all(|&(r, v)| r == 0.0 || v > psi_zero);
    PsiProfile {
        points,
        psi_zero,
        strict_min_at_zero,
    }
}

/// `{±2^{−k}}_{k=0..10} ∪ {±1, ±2}`.
pub fn default_psi_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=10)
        .flat_map(|k| {
            let v = 0.5f64.powi(k);
            [v, -v]
        })
        .chain([2.0, -2.0])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Both sides of the risk limit for `ℓ(x) = exp(|x|^r) − 1`:
/// `lhs = I_N^{r/2} R(β̂_N)`, `rhs = E|Z|^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledRisk {
    pub lhs: f64,
    pub rhs: f64,
    pub beta_hat: f64,
}

impl ScaledRisk {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Computes `β̂_N` for `exp(|x|^r) − 1` and evaluates the scaled risk there.
pub fn scaled_risk_diagnostic(post: &Posterior, r: f64) -> Result<ScaledRisk> {
    let loss = LossFunction::exp_power(r)?;
    let est = bayes_estimator(post, &loss, false)?;
    Ok(ScaledRisk {
        lhs: post.fisher().powf(0.5 * r) * est.risk_at_min,
        rhs: abs_normal_moment(r),
        beta_hat: est.beta,
    })
}

/// Same as [`scaled_risk_diagnostic`] at an already computed `β̂_N`.
pub fn scaled_risk_at(post: &Posterior, r: f64, beta_hat: f64) -> Result<ScaledRisk> {
    let loss = LossFunction::exp_power(r)?;
    let risk = posterior_expected_loss(post, &loss, beta_hat, false)?;
    Ok(ScaledRisk {
        lhs: post.fisher().powf(0.5 * r) * risk,
        rhs: abs_normal_moment(r),
        beta_hat,
    })
}
