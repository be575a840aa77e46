use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{requested} qubits exceeds the exact-simulation cap of {cap}")]
    QubitCap { requested: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("shared state was already consumed by a measurement")]
    SpentState,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("gave up after {cap} LogicalOr invocations without completing the index assignment")]
    RoundCap { cap: usize },

    #[error("malformed bulletin board: {rows} rows, widths {widths:?}, expected {n}x{n}")]
    MalformedBoard { rows: usize, widths: Vec<usize>, n: usize },

    #[error("source strategy fault: {0}")]
    StrategyFault(String),

    #[error("transcript line {line}: {reason}")]
    Transcript { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
