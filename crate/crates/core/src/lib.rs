//! Knowledge graph embedding training with mixed negative sampling.
//!
//! Every positive triple is contrasted against `eta` corruptions, a `nu`
//! fraction of which respect the relation's domain/range classes while the
//! rest are drawn uniformly from all entities. The crate covers the whole
//! pipeline: an indexed triple store with class structure ([`kg`]), the
//! negative samplers ([`sampler`]), four scoring models with analytic
//! gradients ([`models`]), losses, sparse Adam and the early-stopping loop
//! ([`training`]), and filtered link-prediction evaluation ([`eval`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command line live in the `kgns` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod kg;
pub mod models;
pub mod rng;
pub mod sampler;
pub mod training;

pub use error::{Error, Result};
pub use eval::{evaluate, filtered_rank, EvalConfig, EvalReport, Metrics, TieBreak};
pub use kg::{
    build_graph, infer_classes, random_split, ClassId, ClassIndex, ClassSource, EntityId, Side, Split,
    KnowledgeGraph, LabeledTriple, RelationId, SplitSpec, Triple,
};
pub use models::{ModelKind, ModelState};
pub use sampler::{NegativeBatch, Provenance, SamplerConfig, SidePolicy};
pub use training::{train, LossKind, TrainConfig, TrainingLog};
