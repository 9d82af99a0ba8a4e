use std::fmt;
use std::sync::Arc;

use super::prior::GrowthCertificate;
use crate::error::{Error, Result};
use crate::special::ln_expm1;

/// Loss classes by majorant: polynomial (`W_p`), sub-Gaussian exponential
/// (`W_{e,2}`), or merely monotone and locally bounded (`W′`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossClass {
    Polynomial,
    SubGaussianExp,
    Monotone,
}

#[derive(Clone)]
pub struct CustomLoss {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth: GrowthCertificate,
    class: LossClass,
}

impl fmt::Debug for CustomLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss")
            .field("growth", &self.growth)
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum LossFunction {
    /// `x²`.
    Quadratic,
    /// `|x|^a`.
    Power(f64),
    /// `exp(|x|^r) − 1` with `r ∈ (0, 2)`.
    ExpPower(f64),
    Custom(CustomLoss),
}

impl LossFunction {
    pub fn power(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("power loss exponent must be positive, got {a}")));
        }
        Ok(LossFunction::Power(a))
    }

    pub fn exp_power(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 2.0) {
            return Err(Error::Config(format!(
                "exp-power loss exponent must lie in (0, 2), got {r}"
            )));
        }
        Ok(LossFunction::ExpPower(r))
    }

    /// Symmetric loss with `ℓ(0) = 0`, nondecreasing on `[0, ∞)`. Symmetry
    /// and monotonicity are spot-checked on a grid.
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth: GrowthCertificate,
        class: LossClass,
    ) -> Result<Self> {
        let growth = GrowthCertificate::new(growth.c1, growth.c2, growth.r)?;
        let loss = LossFunction::Custom(CustomLoss {
            f: Arc::new(f),
            growth,
            class,
        });
        if loss.eval(0.0) != 0.0 {
            return Err(Error::Config("custom loss must vanish at 0".into()));
        }
        let mut prev = 0.0;
        for i in 1..=200 {
            let x = 0.05 * i as f64;
            let v = loss.eval(x);
            if !(v >= prev) || (v - loss.eval(-x)).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "custom loss is not symmetric and nondecreasing near x = {x}"
                )));
            }
            prev = v;
        }
        Ok(loss)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LossFunction::Quadratic => x * x,
            LossFunction::Power(a) => x.abs().powf(*a),
            LossFunction::ExpPower(r) => x.abs().powf(*r).exp_m1(),
            LossFunction::Custom(c) => (c.f)(x),
        }
    }

    /// `ln ℓ(x)`; `−∞` at zero loss.
    pub fn ln_eval(&self, x: f64) -> f64 {
        match self {
            LossFunction::ExpPower(r) => {
                let y = x.abs().powf(*r);
                if y == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_expm1(y)
                }
            }
            LossFunction::Quadratic => 2.0 * x.abs().ln(),
            LossFunction::Power(a) => a * x.abs().ln(),
            LossFunction::Custom(_) => self.eval(x).ln(),
        }
    }

    pub fn class(&self) -> LossClass {
        match self {
            LossFunction::Quadratic | LossFunction::Power(_) => LossClass::Polynomial,
            LossFunction::ExpPower(_) => LossClass::SubGaussianExp,
            LossFunction::Custom(c) => c.class,
        }
    }

    /// `ℓ(x) ≤ c₁ exp(c₂|x|^r)`.
    pub fn growth(&self) -> GrowthCertificate {
        match self {
            // x² e^{−|x|} ≤ 4/e² < 1
            LossFunction::Quadratic => GrowthCertificate {
                c1: 1.0,
                c2: 1.0,
                r: 1.0,
            },
            // |x|^a e^{−|x|} ≤ (a/e)^a
            LossFunction::Power(a) => GrowthCertificate {
                c1: (a / std::f64::consts::E).powf(*a).max(1.0),
                c2: 1.0,
                r: 1.0,
            },
            LossFunction::ExpPower(r) => GrowthCertificate {
                c1: 1.0,
                c2: 1.0,
                r: *r,
            },
            LossFunction::Custom(c) => c.growth,
        }
    }

    /// Integrate in log space to keep large losses finite.
    pub(crate) fn prefers_log_space(&self) -> bool {
        matches!(self, LossFunction::ExpPower(_))
    }

    /// Parses `quadratic`, `power:a` or `exp-power:r`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "quadratic" {
            return Ok(LossFunction::Quadratic);
        }
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad loss parameter in `{spec}`")))
        };
        if let Some(a) = spec.strip_prefix("power:") {
            return LossFunction::power(number(a)?);
        }
        if let Some(r) = spec.strip_prefix("exp-power:") {
            return LossFunction::exp_power(number(r)?);
        }
        Err(Error::Config(format!(
            "unknown loss `{spec}` (expected quadratic, power:a or exp-power:r)"
        )))
    }
}

impl fmt::Display for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossFunction::Quadratic => write!(f, "quadratic"),
            LossFunction::Power(a) => write!(f, "power:{a}"),
            LossFunction::ExpPower(r) => write!(f, "exp-power:{r}"),
            LossFunction::Custom(_) => write!(f, "custom"),
        }
    }
}
