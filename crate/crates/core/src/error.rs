use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adjacency matrix is not primitive (no positive power up to {bound})")]
    NotPrimitive { bound: usize },

    #[error("symbol {symbol} has no {direction} edge")]
    StrandedSymbol { symbol: usize, direction: &'static str },

    #[error("{what} would need {requested} entries, cap is {cap}")]
    CapacityExceeded {
        what: &'static str,
        requested: u128,
        cap: usize,
    },

    #[error("bracket needs x_0 = y_0, got {left} and {right}")]
    SymbolMismatch { left: usize, right: usize },

    #[error("inadmissible sequence: {0}")]
    Inadmissible(String),

    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },

    #[error("points are not on a common stable set")]
    NotOnStableSet,

    #[error("points are not on a common unstable set")]
    NotOnUnstableSet,

    #[error("point is not homoclinic to the periodic point")]
    NotHomoclinic,

    #[error("point is not periodic")]
    NotPeriodic,

    #[error("points do not form a holonomy rectangle: {0}")]
    NotARectangle(&'static str),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("no admissible connector of length <= {k_max}")]
    NoAdmissibleConnector { k_max: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
