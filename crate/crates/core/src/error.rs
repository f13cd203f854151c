use thiserror::Error;

/// Errors surfaced by graph containers, the lookup table and the encoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {0} does not exist")]
    UnknownVertex(u32),
    #[error("vertex {0} is deleted")]
    Deleted(u32),
    #[error("{{{0}, {1}}} is not an edge")]
    NotAnEdge(u32, u32),
    #[error("edge {{{0}, {1}}} already exists")]
    EdgeExists(u32, u32),
    #[error("self operation on vertex {0}")]
    SameVertex(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("value {0} outside universe of size {1}")]
    OutOfUniverse(u64, u64),
    #[error("index {0} out of range (size {1})")]
    IndexOutOfRange(u64, u64),
    #[error("table parameter {0} exceeds cap of 6")]
    CapExceeded(u32),
    #[error("graph has {0} vertices, tiny planarity test is capped at 8")]
    TooLarge(usize),
    #[error("merge of {0} and {1} would be nonplanar")]
    NonplanarResult(u32, u32),
    #[error("vertex {0} is not a boundary vertex")]
    NotBoundary(u32),
    #[error("label {0} is not in the managed set")]
    NotManaged(u32),
    #[error("graph is not connected")]
    NotConnected,
    #[error("input graph is not planar: {0}")]
    NotPlanar(String),
    #[error("hashing mode required for this operation")]
    HashingRequired,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
