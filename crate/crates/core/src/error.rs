use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("branching factor at level {level} is zero; every vertex above the frontier needs a child")]
    ZeroBranching { level: usize },

    #[error("tree document: duplicate vertex id `{0}`")]
    DuplicateVertex(String),

    #[error("tree document: multiple roots (`{first}` and `{second}` both have a null parent)")]
    MultipleRoots { first: String, second: String },

    #[error("tree document: no root (no vertex has a null parent)")]
    NoRoot,

    #[error("tree document: vertex `{vertex}` references unknown parent `{parent}`")]
    UnknownParent { vertex: String, parent: String },

    #[error("tree document: cycle through vertex `{0}`")]
    Cycle(String),

    #[error("vertex index {index} out of range for a tree with {len} vertices")]
    InvalidVertex { index: usize, len: usize },

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("truncation depth {requested} exceeds the stored depth {available}")]
    DepthOutOfRange { requested: usize, available: usize },

    #[error("weight at vertex `{vertex}` must be positive and finite, got {value}")]
    InvalidWeight { vertex: String, value: f64 },

    #[error("weight document has no value for vertex `{0}`")]
    MissingWeight(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} has {found} entries but the tree has {expected} vertices")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("map sends `{vertex}` to `{image}`, which is not a stored vertex")]
    ImageOutsideTree { vertex: String, image: String },

    #[error("map document has no image for vertex `{0}`")]
    MissingImage(String),

    #[error("depth-square map needs depth {needed} for level {level}, tree is truncated at {depth}")]
    TreeTooShallow { level: usize, needed: usize, depth: usize },

    #[error("depth-square map needs |level {target}| >= |level {level}|, found {target_size} < {level_size}")]
    LevelSizeViolation {
        level: usize,
        target: usize,
        level_size: usize,
        target_size: usize,
    },

    #[error("exponent p must satisfy 1 <= p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("Schatten exponent must satisfy q >= 1, got {0}")]
    InvalidSchattenExponent(f64),

    #[error("operation needs the Hilbert space case p = 2, spec has p = {0}")]
    RequiresHilbert(f64),

    #[error("tail defect needs n > N, got n = {n}, N = {cutoff}")]
    TailDefectRegime { n: usize, cutoff: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dense oracle capped at {cap} vertices, operator has {size}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("Jacobi SVD did not converge in {sweeps} sweeps")]
    SvdNotConverged { sweeps: usize },

    #[error("spec document: {0}")]
    InvalidSpec(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
