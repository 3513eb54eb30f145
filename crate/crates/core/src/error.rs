use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge {edge} has nonpositive weight {weight}")]
    NonPositiveWeight { edge: usize, weight: f64 },

    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },

    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge {{{u}, {v}}} is not in the graph")]
    UnknownEdge { u: usize, v: usize },

    #[error("edge index {index} out of range (m = {m})")]
    EdgeIndexOutOfRange { index: usize, m: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("graph is not connected (algebraic connectivity {connectivity:e} <= tolerance {tolerance:e})")]
    NotConnected { connectivity: f64, tolerance: f64 },

    #[error("perturbed weight of edge {edge} is {weight}, must stay positive")]
    InvalidPerturbation { edge: usize, weight: f64 },

    #[error("source and sink coincide at vertex {vertex}")]
    SameVertex { vertex: usize },

    #[error("injected current must be nonzero")]
    ZeroCurrent,

    #[error("hyper-dual value with real part {re:e} is not invertible")]
    NonInvertible { re: f64 },

    #[error("perturbation matrix row sums are nonzero (max {max_abs:e})")]
    NonZeroRowSums { max_abs: f64 },

    #[error("matrix has eigenvalue {value:e} below -{tolerance:e}")]
    NegativeEigenvalue { value: f64, tolerance: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a
    /// numerical failure inside the library.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NegativeEigenvalue { .. } | Error::NonFinite { .. } | Error::NoConvergence { .. })
    }
}
