use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopulaError {
    #[error("{family} parameter {value} outside admissible range {range}")]
    InvalidParameter {
        family: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("mixture weight {0} outside [0, 1]")]
    InvalidWeight(f64),
    #[error("point ({u}, {v}) is not in the unit square")]
    OutOfUnitSquare { u: f64, v: f64 },
    #[error("cannot parse copula specification `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("bivariate normal CDF lost precision at ({u}, {v}): got {value}")]
    Precision { u: f64, v: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("copula `{0}` is not samplable")]
    NotSamplable(String),
    #[error("sample size must be at least 1")]
    EmptySample,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TruthError {
    #[error("quadrature did not reach tolerance {tol:e}: estimate {estimate}, achieved bound {achieved:e}")]
    NoConvergence {
        estimate: f64,
        achieved: f64,
        tol: f64,
    },
    #[error("tolerance {0:e} must be at least 1e-12")]
    ToleranceTooSmall(f64),
    #[error(
        "direct Gini value {direct} disagrees with decomposition {decomposed} beyond {bound:e}"
    )]
    DecompositionMismatch {
        direct: f64,
        decomposed: f64,
        bound: f64,
    },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("column lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
    #[error("tied values in column {column} (first tie at row {row})")]
    Ties { column: usize, row: usize },
    #[error("invalid rank vector: {0}")]
    InvalidRanks(String),
    #[error("bandwidth must be positive, got {0}")]
    Bandwidth(f64),
    #[error("grid size must be at least 2, got {0}")]
    GridSize(usize),
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("observation index {index} out of range for n = {n}")]
    Index { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("scenario {scenario} failed at replication {replication}: {source}")]
    Replication {
        scenario: String,
        replication: u64,
        #[source]
        source: ReplicationFailure,
    },
    #[error("scenario {scenario}: true values unavailable: {source}")]
    Truth {
        scenario: String,
        #[source]
        source: TruthError,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplicationFailure {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}
