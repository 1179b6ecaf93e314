use thiserror::Error;

#[derive(Debug, Error)]
pub enum DkitError {
    #[error("input error: {0}")]
    Input(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("point (t={t}, x={x}) lies outside the model domain")]
    OutsideDomain { t: f64, x: f64 },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integration error: {0}")]
    Integration(String),
    #[error("topology on {ground} points has more than {cap} open sets")]
    TopologyTooLarge { ground: usize, cap: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DkitError>;
