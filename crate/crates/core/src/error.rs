use thiserror::Error;

/// Errors raised by the state, measurement and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("group {group} has coherence {coherence} < 1; dense engine needs a pure state")]
    NotPure { group: usize, coherence: f64 },

    #[error("{photons} photons exceeds the configured maximum of {max}")]
    TooLarge { photons: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right} photons")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid coherence {0}: must lie in [0, 1]")]
    InvalidCoherence(f64),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("bad photon subset: {0}")]
    BadSubset(String),

    #[error("probe has {photons} photons but the source model has {channels} channels")]
    ChannelMismatch { channels: usize, photons: usize },

    #[error("invalid source model: {0}")]
    InvalidSource(String),

    #[error("singular point: smallest outcome probability {min_probability:e} is below 1e-12")]
    SingularPoint { min_probability: f64 },

    #[error("Fisher matrix is not invertible")]
    SingularMatrix,

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("flat likelihood: {0}")]
    FlatLikelihood(String),

    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
