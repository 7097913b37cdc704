use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// Two eigenvalue clusters are closer than the separation the clustering
    /// tolerance can resolve.
    #[error("ambiguous eigenvalue clustering near {near}: gap {gap:e} (raw eigenvalues attached)")]
    ClusterAmbiguity { near: f64, gap: f64, raw: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
