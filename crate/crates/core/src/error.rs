use thiserror::Error;

/// Coarse error class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Schema,
    Precondition,
    Budget,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Schema => 2,
            ErrorCategory::Precondition => 3,
            ErrorCategory::Budget => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("point {0} does not lie in the complex")]
    OutsideComplex(String),

    #[error("map is undefined at {0}")]
    Undefined(String),

    #[error("piece {piece} of segment {segment} is constant with image {image}; its level set has positive length")]
    DegeneratePiece {
        segment: usize,
        piece: usize,
        image: String,
    },

    #[error("map is discontinuous at {0}")]
    Discontinuous(String),

    #[error("map is not injective: {0}")]
    NotInjective(String),

    #[error("objects live on different graphs or complexes")]
    GraphMismatch,

    #[error("graph failed validation: {0}")]
    InvalidGraph(String),

    #[error("operation requires a discrete graph")]
    NotDiscrete,

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("edge fiber over ({v}, {w}) is empty; no nest representation exists")]
    EmptyFiber { v: String, w: String },

    #[error("nest weights are all zero")]
    ZeroWeights,

    #[error("nest weights have total modulus {0} > 1")]
    WeightBound(f64),

    #[error("weight attached to an edge outside the fiber: {0}")]
    WeightOffFiber(String),

    #[error("cover does not cover the complex; uncovered point {0}")]
    NotCovering(String),

    #[error("invalid sheet structure: {0}")]
    SheetStructure(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("permutation data disagree at pair ({0}, {1})")]
    PermutationMismatch(usize, usize),

    #[error("invalid flip: {0}")]
    InvalidFlip(String),

    #[error("agreement condition fails: {0}")]
    AgreementFails(String),

    #[error("admissibility condition {condition} fails: {detail}")]
    NotAdmissible { condition: String, detail: String },

    #[error("representation is not triangularizable in the given basis: {0}")]
    NotTriangularizable(String),

    #[error("invalid character parameter: {0}")]
    InvalidCharacter(String),

    #[error("search budget of {0} candidates exhausted")]
    Budget(u64),

    #[error("{0}")]
    Precondition(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Schema { .. } | Error::Io(_) => ErrorCategory::Schema,
            Error::Budget(_) => ErrorCategory::Budget,
            _ => ErrorCategory::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
