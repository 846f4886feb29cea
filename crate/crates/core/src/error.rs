use std::path::PathBuf;

/// Errors raised anywhere in the clustering and explanation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to load {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error(
        "cluster {cluster} cannot reach coverage {alpha} even with every tag selected (best possible {max_coverage})"
    )]
    StructurallyInfeasible {
        cluster: usize,
        alpha: f64,
        max_coverage: f64,
    },

    #[error("no feasible orthogonality bound up to {cap}")]
    BetaSearchExhausted { cap: u32 },

    #[error("integer program has {variables} variables, above the cap of {cap}")]
    ProblemTooLarge { variables: usize, cap: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("index {index} out of range for batch of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{0}")]
    Metric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
