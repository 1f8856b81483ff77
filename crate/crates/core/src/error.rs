use thiserror::Error;

/// Structural problems with an input graph or decoration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{location}: unknown vertex `{id}`")]
    UnknownVertex { location: String, id: String },
    #[error("{location}: unknown {kind} `{id}`")]
    UnknownItem {
        location: String,
        kind: &'static str,
        id: String,
    },
    #[error("graph has no vertices")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("level map has {got} entries, graph has {expected} vertices")]
    LevelArity { expected: usize, got: usize },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("enumeration needs {needed} candidate level maps, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
    #[error("stabilization leaves no stable vertex")]
    Unstabilizable,
}

/// Errors from building or evaluating the evaluation morphism.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvError {
    #[error("no value assigned at `{0}`")]
    MissingValue(String),
    #[error("point `{0}` is a pole and has no finite value")]
    ValueAtPole(String),
    #[error("cycle is not supported on levels <= {level}")]
    NotSupported { level: i64 },
    #[error("malformed value `{0}`")]
    BadValue(String),
}

/// Failures of the twist and stabilization constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwistError {
    #[error("input is not a valid twistable rational function: {0}")]
    InvalidTwr(String),
    #[error("input is not a valid twisted rational function: {0}")]
    InvalidTwdr(String),
    #[error("unstable component violates the local-maximum lemma: {0}")]
    LocalMax(String),
    #[error("stabilization is not a twistable rational function: {0}")]
    BadStabilization(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ev(#[from] EvError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HurwitzError {
    #[error("degree {degree} exceeds the brute-force cap {cap}")]
    CapExceeded { degree: u32, cap: u32 },
    #[error("profile {profile:?} is not a partition of {degree}")]
    BadProfile { profile: Vec<u32>, degree: u32 },
    #[error("degree mismatch on vertex `{vertex}`: zeros {zeros}, poles {poles}")]
    DegreeMismatch { vertex: String, zeros: i64, poles: i64 },
    #[error("negative residual ramification {residual} on vertex `{vertex}`")]
    NegativeResidual { vertex: String, residual: i64 },
    #[error("coordinate collision at {0}")]
    CoordinateCollision(String),
    #[error("{0}")]
    Invalid(String),
}

/// Errors raised while reading the JSON exchange formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl FormatError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
