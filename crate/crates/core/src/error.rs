use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("mask is not binary")]
    InvalidMask,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("edge ({0}, {1}) is not in the graph")]
    InvalidEdge(usize, usize),
    #[error("node {0} is out of range")]
    InvalidNode(usize),
    #[error("cannot place {requested} cross edges between parts of size {left} and {right}")]
    InfeasibleJoin {
        requested: usize,
        left: usize,
        right: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("nothing to perturb: the perturbable side has no edges")]
    NothingToPerturb,
    #[error("support of size {size} exceeds the cap {cap}")]
    SupportTooLarge { size: u128, cap: u128 },
    #[error("raw metric value must be non-negative, got {0}")]
    InvalidRaw(f64),
    #[error("plausibility is undefined for an all-zero ground truth")]
    UndefinedPlausibility,
    #[error("correlation is undefined: zero variance")]
    UndefinedCorrelation,
    #[error("binomial coefficient out of range: C({0}, {1})")]
    Overflow(u64, u64),
    #[error("no counterfactual found in the searched space")]
    NoCounterfactual,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("graph carries no ground-truth mask")]
    MissingGroundTruth,
    #[error("node alignment error: {0}")]
    AlignmentError(String),
    #[error("graph carries no label")]
    MissingLabel,
    #[error("detector output is not maximally plausible (wiou = {0})")]
    NotMaximallyPlausible(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
