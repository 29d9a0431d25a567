use oag_core::OagError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("{lemma} does not apply to {group}")]
    IncompatibleFamily { lemma: String, group: String },
    #[error(transparent)]
    Core(#[from] OagError),
}

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;
