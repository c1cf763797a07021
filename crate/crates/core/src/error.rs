use thiserror::Error;

/// Errors raised by selection, region computation and inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("design columns {columns:?} (1-based) are numerically rank deficient")]
    RankDeficient { columns: Vec<usize> },

    #[error("number of steps K={k} must satisfy 1 <= K <= p={p}")]
    InvalidK { k: usize, p: usize },

    #[error("history is empty")]
    EmptyHistory,

    #[error("truncation region carries no probability mass")]
    DegenerateRegion,

    #[error("variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("constraint with vanishing slope is violated at the seed point (e={e:e})")]
    InconsistentConstraints { e: f64 },

    #[error("homotopy walk stalled at z={z}")]
    StalledPath { z: f64 },

    #[error("feature {0} (1-based) is not in the selected set")]
    FeatureNotSelected(usize),

    #[error("observed statistic {z} lies outside the truncation region")]
    PointOutsideRegion { z: f64 },

    #[error("enumeration too large: {0}")]
    CostGuard(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
