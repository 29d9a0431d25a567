use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OagError {
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("operands belong to different groups")]
    GroupMismatch,
    #[error("element is not divisible by {0} inside the group")]
    NotDivisible(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("convex subgroup tail({level}) is outside the chain of this group")]
    UnknownConvex { level: usize },
    #[error("oracle search space exceeded {0} candidates")]
    OracleBoundExceeded(usize),
    #[error("subgroups are not nested: {0}")]
    NotNested(String),
    #[error("quotient is not elementary abelian: p times {0} is not in the smaller subgroup")]
    NotElementaryAbelian(String),
    #[error("witness stream exhausted after {0} certified witnesses")]
    StreamExhausted(usize),
    #[error("more than {0} solution cosets")]
    CapExceeded(usize),
    #[error("target subgroup is not of an admissible shape: {0}")]
    InadmissibleTarget(String),
    #[error("evaluation produced {found} cosets, more than the multiplicity bound {bound}")]
    MultiplicityExceeded { found: usize, bound: usize },
    #[error("construction requires a different group family: {0}")]
    WrongFamily(String),
    #[error("finite ambient group too large ({0} elements)")]
    AmbientTooLarge(u64),
    #[error("invalid finite ambient data: {0}")]
    InvalidAmbient(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
}

pub type Result<T, E = OagError> = std::result::Result<T, E>;

pub(crate) fn parse_err<T>(position: usize, message: impl Into<String>) -> Result<T> {
    Err(OagError::Parse {
        position,
        message: message.into(),
    })
}
