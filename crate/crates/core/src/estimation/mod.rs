//! Rank-based estimation of Φ, φ and γ, the plug-in asymptotic standard
//! deviation of Φ̂, confidence intervals and the test of countermonotonicity.

mod empirical;
mod estimators;
mod inference;
mod influence;
mod ranks;

pub use empirical::{empirical_copula, partial_derivative_hat, EmpiricalCopula, Partial};
pub use estimators::{footrule_hat, gini_hat, phi_hat, phi_hat_rational, FootruleNorm};
pub use inference::{
    confidence_interval, countermonotonicity_test, estimate, hampel_bound,
    perturbation_bound_check, sigma_hat, EstimateReport, EstimationOptions, TestVerdict,
};
pub use influence::{
    default_bandwidth, influence_hat, InfluenceFunction, InfluenceGrid, DEFAULT_GRID,
};
pub use ranks::{rank_data, RankedSample, TiePolicy};
