//! The W-footrule coefficient Φ_C, a copula-based measure of distance to
//! perfect negative dependence.
//!
//! The crate covers four layers:
//!
//! * [`copula`]: parametric and constructed bivariate copulas with CDF
//!   evaluation and the transpose / survival / tilde / mixture transforms.
//! * [`sampling`] and [`rng`]: reproducible i.i.d. draws on the copula scale,
//!   one independent counter-based stream per Monte Carlo replication.
//! * [`truth`]: exact or quadrature values of Φ_C, Spearman's footrule φ_C
//!   and Gini's γ_C, with an L¹ Monte Carlo oracle.
//! * [`estimation`] and [`montecarlo`]: rank estimators, the plug-in
//!   asymptotic variance, confidence intervals, the countermonotonicity test,
//!   and the replication harness that regenerates the simulation table.
//!
//! With the default `parallel` feature, replications and the influence grid
//! run on rayon. Without it every [`Execution`] falls back to a sequential
//! loop; results are bit-identical either way.

pub mod copula;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod normal;
mod par;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod truth;

pub use copula::{Copula, UnitSquarePoint};
pub use error::{CopulaError, EstimationError, MonteCarloError, SamplingError, TruthError};
pub use estimation::{
    rank_data, EstimateReport, EstimationOptions, RankedSample, TestVerdict, TiePolicy,
};
pub use montecarlo::{McResult, Scenario};
pub use par::Execution;
pub use sampling::{sample, SampleBatch};
pub use truth::{Method, TrueValues};

/// Seed used whenever the caller does not provide one.
pub const DEFAULT_SEED: u64 = 20_240_917;
