// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the estimators, the simulation harness and the ingest path.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpError {
    /// A constructor or operation received input outside its contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The working scale (known or plug-in sigma) is zero.
    #[error("degenerate scale")]
    DegenerateScale,

    /// A point handed to the inverse map does not lie on the manifold.
    #[error("point off manifold")]
    OffManifold,

    /// Power iteration on the dense transition matrix did not settle.
    #[error("oracle did not converge")]
    OracleDidNotConverge,

    #[error("no data")]
    NoData,

    #[error("unsorted input")]
    UnsortedInput,

    #[error("empty slice")]
    EmptySlice,

    /// A CSV record could not be parsed; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl CpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for CpError {
    fn from(err: std::io::Error) -> Self {
        Self::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CpError>;
