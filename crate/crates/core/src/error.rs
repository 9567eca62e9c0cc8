use alloc::string::String;
use core::fmt;

/// Errors raised by the pure core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// A metric term normalized to zero tokens.
    EmptyTerm(String),
    /// A URL could not be parsed.
    MalformedUrl { url: String, reason: &'static str },
    /// The universal set is too small to extract expectation bands from.
    UniversalSetTooSmall { query_id: String, size: usize },
    /// An input lies outside its documented range.
    OutOfRange { field: &'static str, value: String },
    /// No query carries at least two labeled results with distinct grades.
    NoTuningSignal,
    /// A component id is not part of the taxonomy.
    UnknownComponent(String),
    /// A mock defect flag is not recognised.
    UnknownDefect(String),
    /// A feature-family id is not registered.
    UnknownFamily(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::EmptyTerm(term) => write!(f, "term {term:?} normalizes to zero tokens"),
            CoreError::MalformedUrl { url, reason } => write!(f, "malformed URL {url:?}: {reason}"),
            CoreError::UniversalSetTooSmall { query_id, size } => write!(
                f,
                "query {query_id}: universal set has {size} documents, at least 3 are required"
            ),
            CoreError::OutOfRange { field, value } => write!(f, "{field} out of range: {value}"),
            CoreError::NoTuningSignal => {
                f.write_str("no query has two or more labeled results with distinct grades")
            }
            CoreError::UnknownComponent(id) => write!(f, "unknown component id {id:?}"),
            CoreError::UnknownDefect(id) => write!(f, "unknown defect flag {id:?}"),
            CoreError::UnknownFamily(id) => write!(f, "unregistered feature family {id:?}"),
        }
    }
}

impl core::error::Error for CoreError {}
