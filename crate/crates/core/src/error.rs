use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid region: {0}")]
    Region(String),
    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("tableau has {generators} generators for {qubits} qubits; a complete set is required")]
    Underdetermined { generators: usize, qubits: usize },
    #[error("invalid stabilizer generators: {0}")]
    Generators(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("plot failed: {0}")]
    Plot(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
