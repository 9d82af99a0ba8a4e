use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Declared majorant `g(x) ≤ c₁·exp(c₂·|x|^r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCertificate {
    pub c1: f64,
    pub c2: f64,
    pub r: f64,
}

impl GrowthCertificate {
    pub fn new(c1: f64, c2: f64, r: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) || !(c2 >= 0.0 && c2.is_finite()) {
            return Err(Error::Config(format!(
                "growth certificate needs c1 > 0 and c2 >= 0 (got c1={c1}, c2={c2})"
            )));
        }
        if !(r > 0.0 && r < 2.0) {
            return Err(Error::Config(format!("growth exponent must lie in (0, 2), got {r}")));
        }
        Ok(Self { c1, c2, r })
    }

    /// Certificate of a bounded function.
    pub const fn bounded(c1: f64) -> Self {
        Self { c1, c2: 0.0, r: 1.0 }
    }

    /// `ln(c₁) + c₂|x|^r`.
    pub fn ln_bound(&self, x: f64) -> f64 {
        self.c1.ln() + self.c2 * x.abs().powf(self.r)
    }
}

/// Prior growth classes: polynomial (`Q_p`) or sub-Gaussian exponential
/// (`Q_{e,2}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorClass {
    Polynomial,
    SubGaussianExp,
}

/// Positive, continuous prior density on `(0, ∞)` with a declared growth
/// bound. The density need not be normalized.
#[derive(Clone)]
pub struct CustomPrior {
    ln_density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth: GrowthCertificate,
    class: PriorClass,
}

impl CustomPrior {
    /// `ln_density` is the log of the (unnormalized) prior density.
    pub fn new(
        ln_density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth: GrowthCertificate,
        class: PriorClass,
    ) -> Self {
        Self {
            ln_density: Arc::new(ln_density),
            growth,
            class,
        }
    }
}

impl fmt::Debug for CustomPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPrior")
            .field("growth", &self.growth)
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Prior {
    /// Improper flat prior on `(0, ∞)`.
    UniformPositive,
    /// `N(μ₀, σ₀²)` restricted to `(0, ∞)`; `var0` is the variance `σ₀²`.
    TruncatedNormal {
        mu0: f64,
        var0: f64,
    },
    Custom(CustomPrior),
}

impl Prior {
    pub fn truncated_normal(mu0: f64, var0: f64) -> Result<Self> {
        if !mu0.is_finite() || !(var0 > 0.0 && var0.is_finite()) {
            return Err(Error::Config(format!(
                "truncated normal prior needs finite mu0 and var0 > 0 (got {mu0}, {var0})"
            )));
        }
        Ok(Prior::TruncatedNormal { mu0, var0 })
    }

    /// Custom prior; the certificate exponent must be below 2 for the
    /// posterior to normalize.
    pub fn custom(
        ln_density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth: GrowthCertificate,
        class: PriorClass,
    ) -> Result<Self> {
        let growth = GrowthCertificate::new(growth.c1, growth.c2, growth.r)?;
        Ok(Prior::Custom(CustomPrior::new(ln_density, growth, class)))
    }

    /// Log of the unnormalized density; `−∞` outside `(0, ∞)`.
    ///
    /// The truncated normal drops its normalizing constant, which cancels in
    /// the posterior.
    pub fn ln_density(&self, theta: f64) -> f64 {
        if !(theta > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self {
            Prior::UniformPositive => 0.0,
            Prior::TruncatedNormal { mu0, var0 } => {
                let d = theta - mu0;
                -0.5 * d * d / var0
            }
            Prior::Custom(c) => (c.ln_density)(theta),
        }
    }

    pub fn growth(&self) -> GrowthCertificate {
        match self {
            Prior::UniformPositive | Prior::TruncatedNormal { .. } => GrowthCertificate::bounded(1.0),
            Prior::Custom(c) => c.growth,
        }
    }

    pub fn class(&self) -> PriorClass {
        match self {
            Prior::UniformPositive | Prior::TruncatedNormal { .. } => PriorClass::Polynomial,
            Prior::Custom(c) => c.class,
        }
    }

    /// Short label used in file names and CSV columns.
    pub fn label(&self) -> &'static str {
        match self {
            Prior::UniformPositive => "uniform",
            Prior::TruncatedNormal { .. } => "tnormal",
            Prior::Custom(_) => "custom",
        }
    }

    /// Parses `uniform` or `tnormal:mu0,var0`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "uniform" {
            return Ok(Prior::UniformPositive);
        }
        if let Some(args) = spec.strip_prefix("tnormal:") {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if parts.len() == 2 {
                if let (Ok(mu0), Ok(var0)) = (parts[0].parse::<f64>(), parts[1].parse::<f64>()) {
                    return Prior::truncated_normal(mu0, var0);
                }
            }
        }
        Err(Error::Config(format!(
            "unknown prior `{spec}` (expected `uniform` or `tnormal:mu0,var0`)"
        )))
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::UniformPositive => write!(f, "uniform"),
            Prior::TruncatedNormal { mu0, var0 } => write!(f, "tnormal:{mu0},{var0}"),
            Prior::Custom(_) => write!(f, "custom"),
        }
    }
}
