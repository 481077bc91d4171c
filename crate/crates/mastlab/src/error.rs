//! Crate-wide error type.

use crate::newick::ParseError;

/// Errors produced by tree operations, samplers, bound arithmetic and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("leaf set is empty")]
    EmptyLeafSet,

    #[error("label {0} is not a leaf of the tree")]
    UnknownLabel(u32),

    #[error("node id {0} is not a node of the tree")]
    InvalidNode(usize),

    #[error("trees are labeled by different leaf sets")]
    LabelSetMismatch,

    #[error("trees have different shapes")]
    ShapeMismatch,

    #[error("leaf labels must be distinct; {0} occurs twice")]
    DuplicateLabel(u32),

    #[error("n = {n} exceeds the limit {limit} for exhaustive computation")]
    SizeLimit { n: usize, limit: usize },

    #[error("blobification requires k >= 2, got {0}")]
    InvalidK(usize),

    #[error("s = {s} is out of range for n = {n}")]
    InvalidS { n: usize, s: usize },

    #[error("m = {0} is out of range; double factorial requires m >= -1")]
    NegativeDoubleFactorial(i64),

    #[error("subset size {s} exceeds n = {n}")]
    SubsetTooLarge { n: usize, s: usize },

    #[error("the marginal is not exchangeable; the bound hypothesis fails")]
    NotExchangeable,

    #[error("lambda = {0} must exceed e*sqrt(2) > 3.844231")]
    LambdaTooSmall(f64),

    #[error("line fit needs at least two points with distinct x values")]
    DegenerateFit,

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("sampling requires n >= 1")]
    EmptyTree,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
