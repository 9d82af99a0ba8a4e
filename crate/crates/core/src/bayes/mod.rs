//! Posterior construction, Bayesian estimators and asymptotic diagnostics.

pub mod diagnostics;
pub mod estimator;
pub mod loss;
pub mod posterior;
pub mod prior;

pub use diagnostics::{
    bvm_distance, default_psi_grid, psi, psi_profile, scaled_risk_at, scaled_risk_diagnostic, PsiProfile, ScaledRisk,
    Weight,
};
pub use estimator::{bayes_estimator, posterior_expected_loss, BayesEstimate, OptimalityCertificate};
pub use loss::{LossClass, LossFunction};
pub use posterior::{conjugate_update, posterior_from_mle, Posterior, QuadratureMoments, TruncatedNormal};
pub use prior::{CustomPrior, GrowthCertificate, Prior, PriorClass};
