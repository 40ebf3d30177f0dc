use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{split} split uses labels never seen in train: {}", .labels.join(", "))]
    UnseenLabels { split: &'static str, labels: Vec<String> },

    #[error("duplicate triple ({subject}, {predicate}, {object}) in {split} split")]
    DuplicateTriple {
        split: &'static str,
        subject: String,
        predicate: String,
        object: String,
    },

    #[error("graph has no training triples")]
    EmptyTrain,

    #[error("ontology has no class for entities: {}", .labels.join(", "))]
    UnclassifiedEntities { labels: Vec<String> },

    #[error("relation `{0}` has no domain/range signature")]
    MissingSignature(String),

    #[error("class `{class}` is empty, cannot sample a type-constrained corruption for relation `{relation}`")]
    EmptyClass { class: String, relation: String },

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{kind} id {id} out of range (size {size})")]
    IdOutOfRange { kind: &'static str, id: u32, size: usize },

    #[error("embedding dimension must be at least 1")]
    ZeroDimension,

    #[error("unsupported regularizer exponent p={0} (expected 2 or 3)")]
    UnsupportedExponent(u32),

    #[error("non-finite gradient for {table} row {row}")]
    NonFiniteGradient { table: &'static str, row: u32 },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("triple ({0}, {1}, {2}) is not in any registered split")]
    UnknownTriple(u32, u32, u32),

    #[error("cannot evaluate an empty split")]
    EmptySplit,

    #[error("shape mismatch: {0}")]
    Shape(String),
}
