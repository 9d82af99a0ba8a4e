//! Simulation and drift estimation for diagonal parabolic SPDEs driven by
//! multiplicative spectral noise,
//!
//! ```text
//! du_k + θ μ_k u_k dt = σ q_k u_k dw_k,   k = 1, 2, …
//! ```
//!
//! observed through their first `N` Fourier modes on `[0, T]`.
//!
//! * [`spectral`]: spectral data, Fisher information, well-posedness.
//! * [`simulate`]: exact mode simulation and observation statistics.
//! * [`mle`]: the maximum-likelihood estimator in its three forms.
//! * [`bayes`]: posteriors, Bayesian estimators, BvM and risk diagnostics.
//! * [`harness`]: configured experiments and Monte Carlo suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod error;
pub mod harness;
pub mod mle;
pub mod optimize;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod spectral;
pub mod sum;

pub use error::{Error, Result};
pub use mle::{MleResult, Route};
pub use simulate::{ModePathSet, SimulationGrid};
pub use spectral::SpectralModel;
