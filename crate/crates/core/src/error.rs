use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Conllu { line: usize, message: String },

    #[error("alignment line {line}: {message}")]
    Alignment { line: usize, message: String },

    #[error("sentence {0} is not a full dependency tree")]
    PartialTree(String),

    #[error("invalid edge: modifier {modifier}, head {head}")]
    InvalidEdge { modifier: usize, head: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("alignment is not one-to-one")]
    NotOneToOne,

    #[error("need at least {needed} reordering instances, got {got}")]
    TooFewInstances { needed: usize, got: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("malformed table, line {line}: {message}")]
    Table { line: usize, message: String },

    #[error("model file: {0}")]
    Model(String),

    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
