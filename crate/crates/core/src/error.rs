use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    /// The table has too few rows for the requested operation.
    #[error("sample too small: n = {n}, need at least {min}")]
    SampleTooSmall { n: usize, min: usize },

    /// A grouping that violates its own invariants (empty group, overlap,
    /// fewer than two groups) or does not match the table it is used with.
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    /// A structurally valid grouping that the operation does not support.
    #[error("unsupported grouping: {0}")]
    UnsupportedGrouping(String),

    /// A table that violates the `DataTable` invariants.
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// A configuration or argument value outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A relationship family identifier that is not in the catalog.
    #[error("unknown family: {0}")]
    UnknownFamily(String),

    /// A correction table file that cannot be parsed.
    #[error("malformed correction table: {0}")]
    MalformedCorrectionTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
