use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("eigen-solve failed in block l={l} ({family}): {msg}")]
    Eigen {
        l: usize,
        family: &'static str,
        msg: String,
    },
    #[error("constraint rank deficiency in block l={l} ({family})")]
    Rank { l: usize, family: &'static str },
    #[error("form invariant violated in {name}: {detail}")]
    Form { name: &'static str, detail: String },
    #[error("non-finite state at t={t}; last good snapshot at t={last_good}")]
    NonFinite { t: f64, last_good: f64 },
    #[error("point at r={r} is not in region {region}")]
    Region { r: f64, region: &'static str },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
