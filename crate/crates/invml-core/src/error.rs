use thiserror::Error;

/// Errors produced by the numeric core.
#[derive(Error, Debug)]
pub enum InvMlError {
    #[error("matrix data length {got} does not match {rows}x{cols}")]
    BadDimensions { rows: usize, cols: usize, got: usize },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("matrix is singular (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("matrix is ill-conditioned (estimate {estimate:.3e} exceeds cap {cap:.3e})")]
    IllConditioned { estimate: f64, cap: f64 },
    #[error("spectral norm of an all-zero matrix is undefined")]
    ZeroMatrix,
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("head rows are not linearly independent")]
    RankDeficientHead,
    #[error("sparse recovery did not reach tolerance {tolerance:.3e} (residual {residual:.3e} after {atoms} atoms)")]
    NoConvergence { residual: f64, tolerance: f64, atoms: usize },
    #[error("k = {k} too large for {n} samples")]
    KTooLarge { k: usize, n: usize },
    #[error("dataset has no labels but a label-dependent quantity was requested")]
    MissingLabels,
    #[error("invalid neighbor bounds k1={k1}, k2={k2} for {n} samples")]
    KRangeInvalid { k1: usize, k2: usize, n: usize },
    #[error("fold {fold} is degenerate: {reason}")]
    DegenerateFold { fold: usize, reason: String },
    #[error("non-finite loss at epoch {epoch} in component `{component}`")]
    NonFiniteLoss { epoch: usize, component: String },
    #[error("samples {i} and {j} are not connected in the neighbor graph")]
    DisconnectedPair { i: usize, j: usize },
    #[error("no waypoint sequence satisfies the rank constraint between {i} and {j}")]
    NoValidWaypoints { i: usize, j: usize },
    #[error("bad IDX magic number {got:#010x} (expected {expected:#010x})")]
    BadMagic { got: u32, expected: u32 },
    #[error("IDX file truncated: expected {expected} bytes of payload, found {got}")]
    TruncatedFile { expected: usize, got: usize },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("checkpoint version {got} unsupported (expected {expected})")]
    VersionMismatch { got: u32, expected: u32 },
    #[error("checkpoint checksum mismatch")]
    ChecksumMismatch,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, InvMlError>;
