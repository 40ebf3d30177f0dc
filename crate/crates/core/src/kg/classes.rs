use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{ClassId, EntityId, FxHashMap, KnowledgeGraph, RelationId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassSource {
    Ontology,
    RelationInferred,
}

/// Entity classes plus the per-relation (domain, range) class binding used by
/// type-constrained corruption.
#[derive(Clone, Debug)]
pub struct ClassIndex {
    source: ClassSource,
    labels: Vec<String>,
    members: Vec<Vec<EntityId>>,
    entity_classes: Vec<Vec<ClassId>>,
    signatures: Vec<(ClassId, ClassId)>,
}

/// Relation-inferred classes: `domain:p` holds every subject of `p` in
/// train and `range:p` every object. Class `2p` is the domain of relation
/// `p`, class `2p + 1` its range; identical sets are not merged.
pub fn infer_classes(graph: &KnowledgeGraph) -> Result<ClassIndex> {
    if graph.train().is_empty() {
        return Err(Error::EmptyTrain);
    }
    let nr = graph.num_relations();
    let mut members: Vec<Vec<EntityId>> = vec![Vec::new(); 2 * nr];
    for t in graph.train() {
        let p = t.predicate.index();
        members[2 * p].push(t.subject);
        members[2 * p + 1].push(t.object);
    }
    for m in &mut members {
        m.sort_unstable();
        m.dedup();
    }
    let mut labels = Vec::with_capacity(2 * nr);
    for p in 0..nr {
        let name = graph.relation_label(RelationId(p as u32));
        labels.push(format!("domain:{name}"));
        labels.push(format!("range:{name}"));
    }
    let signatures = (0..nr as u32).map(|p| (ClassId(2 * p), ClassId(2 * p + 1))).collect();
    Ok(ClassIndex::assemble(
        ClassSource::RelationInferred,
        labels,
        members,
        graph.num_entities(),
        signatures,
    ))
}

impl ClassIndex {
    fn assemble(
        source: ClassSource,
        labels: Vec<String>,
        members: Vec<Vec<EntityId>>,
        num_entities: usize,
        signatures: Vec<(ClassId, ClassId)>,
    ) -> Self {
        let mut entity_classes = vec![Vec::new(); num_entities];
        for (c, ms) in members.iter().enumerate() {
            for e in ms {
                entity_classes[e.index()].push(ClassId(c as u32));
            }
        }
        ClassIndex { source, labels, members, entity_classes, signatures }
    }

    /// Classes given by an ontology.
    ///
    /// `assignments` maps entity labels to class labels (an entity may have
    /// several); `signatures` maps a predicate label to its (domain, range)
    /// class labels. Labels unknown to the graph are ignored. Every graph
    /// entity needs at least one class and every relation a signature.
    pub fn from_ontology<A, S, T>(graph: &KnowledgeGraph, assignments: A, signatures: S) -> Result<Self>
    where
        A: IntoIterator<Item = (T, T)>,
        S: IntoIterator<Item = (T, T, T)>,
        T: AsRef<str>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut class_ids: FxHashMap<String, u32> = FxHashMap::default();
        let mut intern = |label: &str, labels: &mut Vec<String>| -> ClassId {
            if let Some(&id) = class_ids.get(label) {
                return ClassId(id);
            }
            let id = labels.len() as u32;
            labels.push(label.to_string());
            class_ids.insert(label.to_string(), id);
            ClassId(id)
        };

        let mut members: Vec<Vec<EntityId>> = Vec::new();
        for (entity, class) in assignments {
            let c = intern(class.as_ref(), &mut labels);
            if members.len() <= c.index() {
                members.resize(c.index() + 1, Vec::new());
            }
            if let Some(e) = graph.entities().get(entity.as_ref()) {
                members[c.index()].push(EntityId(e));
            }
        }

        let mut bound: Vec<Option<(ClassId, ClassId)>> = vec![None; graph.num_relations()];
        for (predicate, domain, range) in signatures {
            let d = intern(domain.as_ref(), &mut labels);
            let r = intern(range.as_ref(), &mut labels);
            if let Some(p) = graph.relations().get(predicate.as_ref()) {
                bound[p as usize] = Some((d, r));
            }
        }
        members.resize(labels.len(), Vec::new());
        for m in &mut members {
            m.sort_unstable();
            m.dedup();
        }

        let index = ClassIndex::assemble(ClassSource::Ontology, labels, members, graph.num_entities(), Vec::new());
        let missing: Vec<String> = index
            .entity_classes
            .iter()
            .enumerate()
            .filter(|(_, cs)| cs.is_empty())
            .take(10)
            .map(|(e, _)| graph.entity_label(EntityId(e as u32)).to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::UnclassifiedEntities { labels: missing });
        }
        let mut signatures = Vec::with_capacity(bound.len());
        for (p, sig) in bound.into_iter().enumerate() {
            match sig {
                Some((d, r)) => {
                    for c in [d, r] {
                        if index.members[c.index()].is_empty() {
                            return Err(Error::EmptyClass {
                                class: index.labels[c.index()].clone(),
                                relation: graph.relation_label(RelationId(p as u32)).to_string(),
                            });
                        }
                    }
                    signatures.push((d, r));
                }
                None => {
                    return Err(Error::MissingSignature(
                        graph.relation_label(RelationId(p as u32)).to_string(),
                    ))
                }
            }
        }
        Ok(ClassIndex { signatures, ..index })
    }

    pub fn source(&self) -> ClassSource {
        self.source
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn class_label(&self, c: ClassId) -> &str {
        &self.labels[c.index()]
    }

    /// Members of `c`, sorted by entity id.
    pub fn members(&self, c: ClassId) -> &[EntityId] {
        &self.members[c.index()]
    }

    pub fn classes_of(&self, e: EntityId) -> &[ClassId] {
        &self.entity_classes[e.index()]
    }

    pub fn domain(&self, p: RelationId) -> ClassId {
        self.signatures[p.index()].0
    }

    pub fn range(&self, p: RelationId) -> ClassId {
        self.signatures[p.index()].1
    }

    pub fn domain_members(&self, p: RelationId) -> &[EntityId] {
        self.members(self.domain(p))
    }

    pub fn range_members(&self, p: RelationId) -> &[EntityId] {
        self.members(self.range(p))
    }

    pub fn num_relations(&self) -> usize {
        self.signatures.len()
    }

    /// Class sizes in class-id order.
    pub fn class_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(Vec::len)
    }
}
