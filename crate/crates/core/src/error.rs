//! Error type shared across the simulator, mitigation and training modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{gate} acts on duplicate qubit indices")]
    DuplicateQubits { gate: &'static str },

    #[error("dense simulation capped at {max} qubits, requested {requested}")]
    TooManyQubits { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("gate is not Clifford: {0}")]
    NonClifford(String),

    #[error("circuit layering is inconsistent: {0}")]
    InvalidLayering(String),

    #[error("activation domain violation: {0}")]
    ActivationDomain(String),

    #[error("noise too strong to invert (lambda_eff = {lambda_eff})")]
    NoiseTooStrong { lambda_eff: f64 },

    #[error("noise-map training set must have at least 2 circuits, got {0}")]
    DegenerateTrainingSet(usize),

    #[error("loss became non-finite at epoch {epoch} (loss = {loss})")]
    NanLoss { epoch: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
