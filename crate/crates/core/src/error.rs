use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix entry ({u}, {v}) = {value} is nonzero but {{{u}, {v}}} is not an edge")]
    NotSupported { u: usize, v: usize, value: f64 },

    #[error("edge entry ({u}, {v}) = {value} is not strictly negative")]
    NonNegativeEdge { u: usize, v: usize, value: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("vector is identically zero; nodal invariants are undefined")]
    ZeroVector,

    #[error("{zeros} zeros need 2^{zeros} signings, over the budget of 2^{budget}")]
    EnumerationBudget { zeros: usize, budget: usize },

    #[error("pattern vanishes on the whole connected component containing vertex {0}")]
    VanishesOnComponent(usize),

    #[error("basis is empty")]
    EmptyBasis,

    #[error("basis is rank deficient (vector {0} is dependent on its predecessors)")]
    RankDeficient(usize),

    #[error("eigenvalue index {k} is not simple (group multiplicity {m})")]
    NotSimple { k: usize, m: usize },

    #[error("eigenvalue index {k} out of range 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },

    #[error("eigenvector has no Urschel vertices")]
    NoUrschelVertices,

    #[error("reduced perturbation system is singular: {0}")]
    SingularSystem(String),

    #[error("step validation failed: {0}")]
    StepValidation(String),

    #[error("splitting diagonal failed: {0}")]
    Splitting(String),

    #[error("singular block: {0}")]
    SingularBlock(&'static str),

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
}
