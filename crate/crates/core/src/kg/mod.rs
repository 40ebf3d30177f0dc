//! Indexed triple store.
//!
//! A [`KnowledgeGraph`] owns dense entity and relation vocabularies, the
//! train/valid/test splits as id triples, and an exact filter index holding
//! every triple registered from any split. Class structure lives in
//! [`ClassIndex`], splitting in [`random_split`].

mod classes;
mod split;

pub use classes::{infer_classes, ClassIndex, ClassSource};
pub use split::{random_split, SplitSpec};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};

pub(crate) type FxHashMap<K, V> = HashMap<K, V, FxBuildHasher>;
pub(crate) type FxHashSet<T> = HashSet<T, FxBuildHasher>;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

dense_id!(
    /// Dense entity id, assigned by first appearance.
    EntityId
);
dense_id!(
    /// Dense relation id, assigned by first appearance.
    RelationId
);
dense_id!(
    /// Index into a [`ClassIndex`].
    ClassId
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: RelationId,
    pub object: EntityId,
}

impl Triple {
    pub const fn new(subject: u32, predicate: u32, object: u32) -> Self {
        Triple {
            subject: EntityId(subject),
            predicate: RelationId(predicate),
            object: EntityId(object),
        }
    }
}

/// A triple as it appears in a file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl LabeledTriple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: impl Into<String>) -> Self {
        LabeledTriple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }
}

/// Bidirectional label <-> dense id map.
#[derive(Clone, Debug, Default)]
pub struct Vocab {
    labels: Vec<String>,
    index: FxHashMap<String, u32>,
}

impl Vocab {
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocab::default();
        for label in labels {
            let label = label.into();
            if vocab.index.contains_key(&label) {
                return Err(Error::Config(alloc::format!("duplicate vocabulary label `{label}`")));
            }
            vocab.intern(&label);
        }
        Ok(vocab)
    }

    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Which end of a triple is replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Subject,
    Object,
}

impl Side {
    pub const fn name(self) -> &'static str {
        match self {
            Side::Subject => "subject",
            Side::Object => "object",
        }
    }

    pub const fn other(self) -> Side {
        match self {
            Side::Subject => Side::Object,
            Side::Object => Side::Subject,
        }
    }
}

impl Triple {
    /// Copy of `self` with `side` replaced by `entity`.
    #[inline]
    pub fn corrupt(self, side: Side, entity: EntityId) -> Triple {
        match side {
            Side::Subject => Triple { subject: entity, ..self },
            Side::Object => Triple { object: entity, ..self },
        }
    }

    #[inline]
    pub fn entity(self, side: Side) -> EntityId {
        match side {
            Side::Subject => self.subject,
            Side::Object => self.object,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

/// Entity/relation vocabularies, the three splits, and the filter index.
///
/// Immutable once built.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    entities: Vocab,
    relations: Vocab,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    filter: FxHashSet<Triple>,
}

impl KnowledgeGraph {
    /// Builds a graph over explicit vocabularies.
    ///
    /// Entities need not occur in any triple; they still count as candidates
    /// for corruption and ranking.
    pub fn from_parts(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let mut graph = KnowledgeGraph {
            entities,
            relations,
            train: Vec::new(),
            valid: Vec::new(),
            test: Vec::new(),
            filter: FxHashSet::default(),
        };
        for (split, triples) in [(Split::Train, train), (Split::Valid, valid), (Split::Test, test)] {
            graph.register(split, triples)?;
        }
        Ok(graph)
    }

    /// Convenience constructor with generated labels `e{i}` / `r{i}`.
    pub fn from_ids(
        num_entities: usize,
        num_relations: usize,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let entities = Vocab::from_labels((0..num_entities).map(|i| alloc::format!("e{i}")))?;
        let relations = Vocab::from_labels((0..num_relations).map(|i| alloc::format!("r{i}")))?;
        Self::from_parts(entities, relations, train, valid, test)
    }

    fn register(&mut self, split: Split, triples: Vec<Triple>) -> Result<()> {
        let mut seen = FxHashSet::with_capacity_and_hasher(triples.len(), FxBuildHasher);
        for t in &triples {
            self.check_ids(t)?;
            if !seen.insert(*t) {
                return Err(Error::DuplicateTriple {
                    split: split.name(),
                    subject: self.entities.label(t.subject.0).to_string(),
                    predicate: self.relations.label(t.predicate.0).to_string(),
                    object: self.entities.label(t.object.0).to_string(),
                });
            }
        }
        self.filter.extend(seen);
        match split {
            Split::Train => self.train = triples,
            Split::Valid => self.valid = triples,
            Split::Test => self.test = triples,
        }
        Ok(())
    }

    pub fn check_ids(&self, t: &Triple) -> Result<()> {
        let ne = self.entities.len();
        for e in [t.subject, t.object] {
            if e.index() >= ne {
                return Err(Error::IdOutOfRange { kind: "entity", id: e.0, size: ne });
            }
        }
        if t.predicate.index() >= self.relations.len() {
            return Err(Error::IdOutOfRange {
                kind: "relation",
                id: t.predicate.0,
                size: self.relations.len(),
            });
        }
        Ok(())
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entities(&self) -> &Vocab {
        &self.entities
    }

    pub fn relations(&self) -> &Vocab {
        &self.relations
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        self.entities.label(id.0)
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        self.relations.label(id.0)
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn valid(&self) -> &[Triple] {
        &self.valid
    }

    pub fn test(&self) -> &[Triple] {
        &self.test
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// Whether `t` was registered from any split.
    #[inline]
    pub fn is_known(&self, t: &Triple) -> bool {
        self.filter.contains(t)
    }

    pub fn filter_len(&self) -> usize {
        self.filter.len()
    }

    pub fn to_labeled(&self, t: &Triple) -> LabeledTriple {
        LabeledTriple::new(
            self.entity_label(t.subject),
            self.relation_label(t.predicate),
            self.entity_label(t.object),
        )
    }

    /// Maps a labeled triple onto ids, if every label is in the vocabulary.
    pub fn resolve(&self, t: &LabeledTriple) -> Option<Triple> {
        Some(Triple {
            subject: EntityId(self.entities.get(&t.subject)?),
            predicate: RelationId(self.relations.get(&t.predicate)?),
            object: EntityId(self.entities.get(&t.object)?),
        })
    }
}

/// Indexes the three splits into a [`KnowledgeGraph`].
///
/// Ids are assigned by first appearance (subject before object) over train.
/// Valid and test may only use labels seen in train.
pub fn build_graph(
    train: &[LabeledTriple],
    valid: &[LabeledTriple],
    test: &[LabeledTriple],
) -> Result<KnowledgeGraph> {
    if train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let mut entities = Vocab::default();
    let mut relations = Vocab::default();
    let mut train_ids = Vec::with_capacity(train.len());
    for t in train {
        let subject = EntityId(entities.intern(&t.subject));
        let predicate = RelationId(relations.intern(&t.predicate));
        let object = EntityId(entities.intern(&t.object));
        train_ids.push(Triple { subject, predicate, object });
    }

    let resolve_split = |split: Split, triples: &[LabeledTriple]| -> Result<Vec<Triple>> {
        let mut out = Vec::with_capacity(triples.len());
        let mut unseen: Vec<String> = Vec::new();
        let mut note = |label: &str| {
            if !unseen.iter().any(|u| u == label) {
                unseen.push(label.to_string());
            }
        };
        for t in triples {
            let s = entities.get(&t.subject);
            let p = relations.get(&t.predicate);
            let o = entities.get(&t.object);
            match (s, p, o) {
                (Some(s), Some(p), Some(o)) => out.push(Triple::new(s, p, o)),
                _ => {
                    if s.is_none() {
                        note(&t.subject);
                    }
                    if p.is_none() {
                        note(&t.predicate);
                    }
                    if o.is_none() {
                        note(&t.object);
                    }
                }
            }
        }
        if unseen.is_empty() {
            Ok(out)
        } else {
            Err(Error::UnseenLabels { split: split.name(), labels: unseen })
        }
    };
    let valid_ids = resolve_split(Split::Valid, valid)?;
    let test_ids = resolve_split(Split::Test, test)?;

    KnowledgeGraph::from_parts(entities, relations, train_ids, valid_ids, test_ids)
}
