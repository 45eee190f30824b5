use thiserror::Error;

/// Errors raised by the diagnostics library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("no boundary: every spatial axis is periodic")]
    NoBoundary,
    #[error("empty region")]
    EmptyRegion,
    #[error("epsilon under-resolved: {0}")]
    UnderResolved(String),
    #[error("empty shrunk interior for epsilon = {0}")]
    EmptyInterior(f64),
    #[error("region reaches within epsilon of the boundary: {0}")]
    RegionTouchesBoundary(String),
    #[error("shift exceeds domain: {0}")]
    ShiftOutOfDomain(String),
    #[error("state-domain violation: component `{component}` = {value} outside [{lo}, {hi}] at grid index {index}")]
    StateDomain {
        component: String,
        value: f64,
        lo: f64,
        hi: f64,
        index: usize,
    },
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("system `{0}` requires a pressure law")]
    MissingPressureLaw(String),
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("not enough points for a fit: {0} positive values, need at least 4")]
    TooFewPoints(usize),
    #[error("test-function support violation: {0}")]
    Support(String),
    #[error("too few snapshots: {0}, need at least 3")]
    TooFewSnapshots(usize),
    #[error("epsilon {epsilon} is not below the tubular width {eps0}")]
    EpsilonTooLarge { epsilon: f64, eps0: f64 },
    #[error("empty shell for epsilon = {0}")]
    EmptyShell(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
