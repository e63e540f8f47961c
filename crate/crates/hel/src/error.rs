use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("non-canonical element: {0}")]
    NonCanonical(String),
    #[error("operands live in different groups")]
    GroupMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what} exceeds the cap: {actual} > {limit}")]
    CapExceeded { what: &'static str, limit: usize, actual: usize },
    #[error("set is not convex: {0}")]
    NotConvex(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn cap(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        Err(Error::CapExceeded { what, limit, actual })
    } else {
        Ok(())
    }
}
