use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("basis string has length {got}, register has {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid basis string {0:?}")]
    InvalidBasis(String),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("register size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("bus is still entangled with the register (spread {spread:e})")]
    EntangledBus { spread: f64 },
    #[error("instruction {index} is not a displacement")]
    NotDisplacementOnly { index: usize },
    #[error("qubits must be distinct (got {0} twice)")]
    EqualQubits(usize),
    #[error("coupling matrix is invalid: {0}")]
    InvalidCouplings(String),
    #[error("strategy infeasible: {0}")]
    InfeasibleStrategy(String),
    #[error("couplings are not of product form: V[{row}][{col}] = {value} breaks the ratio test")]
    NotProductForm { row: usize, col: usize, value: f64 },
    #[error("carryover schedule unsatisfiable: {0}")]
    UnsatisfiableCarryover(String),
    #[error("ancilla {ancilla} overlaps the {num_system} system qubits")]
    InvalidAncilla { ancilla: usize, num_system: usize },
    #[error("excitation sectors need r = 1 (got r = {r})")]
    SectorUnavailable { r: f64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("register of {got} qubits exceeds the dense limit of {limit}")]
    TooLarge { got: usize, limit: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
