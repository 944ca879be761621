use thiserror::Error;

/// Errors raised by builders, solvers and the circuit compiler.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {nqubits}-qubit register")]
    QubitOutOfRange { qubit: usize, nqubits: usize },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("register of {nqubits} qubits exceeds the dense cap of {cap}")]
    DenseCap { nqubits: usize, cap: usize },
    #[error("register of {0} qubits exceeds the 128-qubit Pauli string width")]
    TooManyQubits(usize),
    #[error("layout: {0}")]
    Layout(String),
    #[error("unsupported form: {0}")]
    Form(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("charge {charge} does not commute with Hamiltonian term {term}")]
    NotConserved { charge: String, term: String },
    #[error("sector: {0}")]
    Sector(String),
    #[error("no convergence: {what} (residual {residual:e})")]
    Convergence { what: String, residual: f64 },
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("circuit: {0}")]
    Circuit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
