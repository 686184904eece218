use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A stencil or objective evaluation produced NaN or an unexpected infinity.
    #[error("non-finite value encountered at {point:?}")]
    NonFinite { point: Vec<f64> },

    /// Input is structurally valid but numerically unusable (empty search
    /// region, vanishing denominator, singular metric, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The requested margin swallows the whole footprint.
    #[error("empty footprint: margin {margin} leaves no interior (radius {radius})")]
    EmptyFootprint { margin: f64, radius: f64 },

    /// A direction or point lies outside the cone (or its interior) where the
    /// operation is defined.
    #[error("direction outside the cone footprint")]
    OutsideCone,

    /// The support function fails to stay below zero on interior samples, so
    /// no copolar body exists on the other side of the pairing.
    #[error("support function is {value:.3e} at an interior sample; copolar is degenerate")]
    DegenerateSupport { value: f64 },

    /// Linear map is not invertible.
    #[error("singular linear map")]
    Singular,

    /// The tangent frame at a chart point does not span a hyperplane.
    #[error("rank-deficient tangent frame at chart point")]
    RankDeficient,

    /// Two routes to the same quantity disagree beyond ten times the noise
    /// budget for the evaluation route in use.
    #[error("{what}: cross-route disagreement {got:.3e} exceeds 10x budget {budget:.3e}")]
    NoiseBudgetExceeded { what: String, got: f64, budget: f64 },

    /// crucial_map requires a boundary point (gauge 1).
    #[error("point is not on the boundary: gauge = {gauge}")]
    NotOnBoundary { gauge: f64 },

    /// Cone construction rejected the input.
    #[error("invalid cone: {0}")]
    InvalidCone(String),

    /// Family parameters out of range.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// The operation is not defined for this representation.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
