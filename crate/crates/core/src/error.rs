use alloc::string::String;

use crate::geometry::Point;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid scenario, parameter or argument combination.
    #[error("configuration error: {0}")]
    Config(String),
    /// A query the guard zone cannot answer exactly.
    #[error("query error: {0}")]
    Query(String),
    #[error("numeric error: non-finite value {value} at {point:?}")]
    Numeric { value: f64, point: Point },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn query(msg: impl Into<String>) -> Self {
        Error::Query(msg.into())
    }
}
