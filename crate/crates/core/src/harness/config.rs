//! Experiment configuration files.
//!
//! ```toml
//! [model]
//! family = "heat"        # heat | power-law | explicit
//! alpha = 0.0
//! k_max = 20
//! sigma = 1.0
//! T = 1.0
//!
//! [experiment]
//! theta_true = 0.3
//! u0 = "analytic-heat"   # or an explicit array, or one constant value
//! u0_floor = 1e-3
//! dt = 5e-5
//! n_list = [1, 2, 3]
//! posterior_n = [2, 4, 8]
//! priors = ["uniform", "tnormal:1,0.1"]
//! losses = ["quadratic"]
//!
//! [seeds]
//! master = 1
//! replicates = 20
//!
//! [output]
//! dir = "out"
//! ```
//!
//! The second parameter of `tnormal:mu0,var0` is the variance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::{LossFunction, Prior};
use crate::error::{Error, Result};
use crate::mle::Route;
use crate::simulate::SimulationGrid;
use crate::spectral::{heat_initial_coefficient, SpectralModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub experiment: ExperimentSection,
    pub seeds: SeedSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Heat,
    PowerLaw,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    /// Scan bound for the well-posedness check of explicit spectra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_scan: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    /// `"analytic-heat"`: sine coefficients of `π²/4 − (x − π/2)²`.
    Named(String),
    Explicit(Vec<f64>),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub theta_true: f64,
    pub u0: InitialCondition,
    #[serde(default = "default_floor")]
    pub u0_floor: f64,
    pub dt: f64,
    pub n_list: Vec<usize>,
    #[serde(default = "default_posterior_n")]
    pub posterior_n: Vec<usize>,
    pub priors: Vec<String>,
    pub losses: Vec<String>,
    #[serde(default = "default_route")]
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub master: u64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn default_floor() -> f64 {
    1e-3
}

fn default_posterior_n() -> Vec<usize> {
    vec![2, 4, 8]
}

fn default_route() -> Route {
    Route::Endpoints
}

/// The three parameter sets of the heat-equation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterSet {
    /// `θ₀ = 0.3`, `α = 0`, quadratic loss.
    SetIAlpha0,
    /// `θ₀ = 0.3`, `α = 0.999`, quadratic loss.
    SetIAlpha0999,
    /// `θ₀ = 0.505`, `α = 1`, loss `exp(|x|^{3/2}) − 1`.
    SetII,
}

impl ParameterSet {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "I-a0" => Ok(Self::SetIAlpha0),
            "I-a0999" => Ok(Self::SetIAlpha0999),
            "II" => Ok(Self::SetII),
            other => Err(Error::Config(format!(
                "unknown parameter set `{other}` (expected I-a0, I-a0999 or II)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SetIAlpha0 => "I-a0",
            Self::SetIAlpha0999 => "I-a0999",
            Self::SetII => "II",
        }
    }

    fn source(self) -> &'static str {
        match self {
            Self::SetIAlpha0 => include_str!("../../configs/set_I_a0.toml"),
            Self::SetIAlpha0999 => include_str!("../../configs/set_I_a0999.toml"),
            Self::SetII => include_str!("../../configs/set_II.toml"),
        }
    }

    /// The checked-in configuration of this set.
    pub fn config(self) -> ExperimentConfig {
        ExperimentConfig::from_toml(self.source()).expect("built-in configuration is valid")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if self.model.sigma == 0.0 {
            return Err(Error::Config(
                "sigma = 0 leaves no noise: the pivot and the posterior are undefined".into(),
            ));
        }
        if !(e.theta_true > 0.0) {
            return Err(Error::Config(format!(
                "theta_true must be positive, got {}",
                e.theta_true
            )));
        }
        if e.n_list.is_empty() || e.n_list.windows(2).any(|w| w[1] < w[0]) || e.n_list[0] == 0 {
            return Err(Error::Config(
                "n_list must be a nonempty nondecreasing list of positive counts".into(),
            ));
        }
        if self.seeds.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(e.u0_floor > 0.0) {
            return Err(Error::Config("u0_floor must be positive".into()));
        }
        let model = self.spectral_model()?;
        let n_max = e.n_list.iter().chain(&e.posterior_n).copied().max().unwrap_or(0);
        if n_max > model.k_max() {
            return Err(Error::Config(format!(
                "mode count {n_max} exceeds k_max = {}",
                model.k_max()
            )));
        }
        self.priors()?;
        self.losses()?;
        self.initial_modes()?;
        SimulationGrid::new(model.horizon(), e.dt)?;
        Ok(())
    }

    pub fn spectral_model(&self) -> Result<SpectralModel> {
        let m = &self.model;
        let need_k = || {
            m.k_max
                .ok_or_else(|| Error::Config("model.k_max is required for analytic families".into()))
        };
        match m.family {
            Family::Heat => {
                let alpha = m
                    .alpha
                    .ok_or_else(|| Error::Config("model.alpha is required for the heat family".into()))?;
                SpectralModel::power_law(2.0, alpha, need_k()?, m.sigma, m.horizon)
            }
            Family::PowerLaw => {
                let (p, alpha) = m.p.zip(m.alpha).ok_or_else(|| {
                    Error::Config("model.p and model.alpha are required for the power-law family".into())
                })?;
                SpectralModel::power_law(p, alpha, need_k()?, m.sigma, m.horizon)
            }
            Family::Explicit => {
                let (mu, q) =
                    m.mu.clone().zip(m.q.clone()).ok_or_else(|| {
                        Error::Config("model.mu and model.q are required for explicit spectra".into())
                    })?;
                SpectralModel::new(mu, q, m.sigma, m.horizon)
            }
        }
        .map_err(|e| match e {
            Error::Domain(msg) => Error::Config(msg),
            other => other,
        })
    }

    /// Initial modes for `k = 1..=k_max`; zero coefficients are replaced by
    /// `u0_floor`.
    pub fn initial_modes(&self) -> Result<Vec<f64>> {
        let k_max = self.spectral_model()?.k_max();
        let floor = self.experiment.u0_floor;
        let lift = |v: f64| if v == 0.0 { floor } else { v };
        match &self.experiment.u0 {
            InitialCondition::Named(name) if name == "analytic-heat" => {
                Ok((1..=k_max).map(|k| lift(heat_initial_coefficient(k))).collect())
            }
            InitialCondition::Named(other) => Err(Error::Config(format!("unknown initial condition `{other}`"))),
            InitialCondition::Explicit(values) => {
                if values.len() < k_max {
                    return Err(Error::Config(format!(
                        "u0 lists {} values but k_max = {k_max}",
                        values.len()
                    )));
                }
                Ok(values[..k_max].iter().map(|&v| lift(v)).collect())
            }
            InitialCondition::Constant(v) => Ok(vec![lift(*v); k_max]),
        }
    }

    /// Modes whose initial value was replaced by the floor.
    pub fn floored_modes(&self) -> Result<Vec<usize>> {
        let k_max = self.spectral_model()?.k_max();
        Ok(match &self.experiment.u0 {
            InitialCondition::Named(_) => (1..=k_max).filter(|&k| heat_initial_coefficient(k) == 0.0).collect(),
            InitialCondition::Explicit(values) => (1..=k_max).filter(|&k| values[k - 1] == 0.0).collect(),
            InitialCondition::Constant(v) => {
                if *v == 0.0 {
                    (1..=k_max).collect()
                } else {
                    Vec::new()
                }
            }
        })
    }

    pub fn grid(&self) -> Result<SimulationGrid> {
        SimulationGrid::new(self.model.horizon, self.experiment.dt)
    }

    pub fn priors(&self) -> Result<Vec<Prior>> {
        self.experiment.priors.iter().map(|s| Prior::parse(s)).collect()
    }

    pub fn losses(&self) -> Result<Vec<LossFunction>> {
        self.experiment.losses.iter().map(|s| LossFunction::parse(s)).collect()
    }

    pub fn max_modes(&self) -> usize {
        self.experiment
            .n_list
            .iter()
            .chain(&self.experiment.posterior_n)
            .copied()
            .max()
            .unwrap_or(1)
    }
}
