use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("{what}: expected length {expected}, found {found}")]
    InvalidLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("{0} qubits not supported here")]
    UnsupportedQubits(usize),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(&'static str),

    #[error("Pauli terms {first} and {second} do not commute")]
    NonCommuting { first: usize, second: usize },

    #[error("trial state is annihilated by the matrix")]
    DegenerateTrial,

    #[error("singular matrix: pivot {pivot} below threshold")]
    Singular { pivot: usize },

    #[error("optimization did not converge (achieved cost {cost:e})")]
    NotConverged { cost: f64 },

    #[error("q-FPGA preparation did not converge (initial cost {initial_cost:e}, final cost {final_cost:e})")]
    QfpgaNotConverged { initial_cost: f64, final_cost: f64 },

    #[error("soft-margin constant must be positive and finite, got {0}")]
    InvalidGamma(f64),

    #[error("invalid dataset: {0}")]
    InvalidDataset(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("model has a zero normal vector, no hyperplane")]
    NoHyperplane,
}
