use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice box is empty")]
    EmptyBox,
    #[error("potential levels must satisfy a < b (got a = {a}, b = {b})")]
    InvalidLevels { a: f64, b: f64 },
    #[error("alpha must lie in [0, 1] (got {0})")]
    InvalidAlpha(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("site {site:?} lies outside the lattice box")]
    OutOfBox { site: Vec<i64> },
    #[error("point {point:?} lies outside the lattice box")]
    PointOutOfBox { point: Vec<f64> },
    #[error("segment leaves the lattice box at cube {cube:?}")]
    SegmentOutsideBox { cube: Vec<i64> },
    #[error("shift {shift:?} exceeds the allocated margin of the environment")]
    ShiftMargin { shift: Vec<i64> },
    #[error("environment box too small: cubes {need_lo:?}..{need_hi:?} required")]
    BoxTooSmall { need_lo: Vec<i64>, need_hi: Vec<i64> },
    #[error("payoff is -inf at every reachable endpoint")]
    Unreachable,
    #[error("invalid parameter `{key}`: {msg}")]
    Param { key: &'static str, msg: String },
    #[error("instance too large for enumeration: {0} paths")]
    InstanceTooLarge(f64),
    #[error("shift hash requires m >= 2 (got {0})")]
    HashOrder(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(key: &'static str, msg: impl Into<String>) -> Self {
        Error::Param { key, msg: msg.into() }
    }

    /// True for errors caused by invalid user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Unreachable | Error::InstanceTooLarge(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
