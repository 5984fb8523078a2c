use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed cycle notation at byte {position}: {message}")]
    CycleSyntax { position: usize, message: String },

    #[error("element {element} appears more than once in cycle notation")]
    RepeatedElement { element: usize },

    #[error("index {index} is out of range for domain size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("image list is not a bijection on 0..{size}")]
    NotABijection { size: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("at least one generator is required")]
    NoGenerators,

    #[error("group order exceeds the enumeration limit of {limit} elements")]
    GroupTooLarge { limit: usize },

    #[error("generating set is not closed under inverses: inverse of {generator} is missing")]
    NotInverseClosed { generator: String },

    #[error("permutation {element} is not an element of the group")]
    NotInGroup { element: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph carries no Cayley structure")]
    NotCayley,

    #[error("unknown vertex label `{0}`")]
    UnknownLabel(String),

    #[error("{description} is not an automorphism of the graph")]
    NotAnAutomorphism { description: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("orbits are inconsistent with the graph: {0}")]
    OrbitsInconsistent(String),

    #[error("{description} does not map orbits onto orbits")]
    NotOrbitCompatible { description: String },

    #[error("vertex {vertex} has degree {degree} but the coin acts on dimension {coin}")]
    DegreeMismatch { vertex: usize, degree: usize, coin: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator does not commute with {generator} (max deviation {deviation:e})")]
    CommutationFailure { generator: String, deviation: f64 },

    #[error("quotient coin is not block diagonal (max off-block entry {deviation:e})")]
    BlockStructure { deviation: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("superoperator dimension {dim} exceeds the dense limit {limit}; reduce with a quotient first")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("measurement does not commute with {generator}")]
    MeasurementSymmetryViolation { generator: String },

    #[error("invalid matrix JSON: {0}")]
    MatrixFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
