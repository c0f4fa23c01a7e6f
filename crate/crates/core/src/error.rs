use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("generator gave up after {attempts} attempts: {reason}")]
    RetryCapExceeded { attempts: u32, reason: String },

    #[error("vertex {vertex} is out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex x{0} has no neighbours")]
    IsolatedVertex(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("not a tree: {0}")]
    NotATree(String),

    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: String, cap: u64 },

    #[error("bound parameters out of range: {0}")]
    BoundDomain(String),

    #[error("malformed edge list at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
