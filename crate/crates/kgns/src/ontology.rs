//! Ontology files: tab-separated lines under two section headers.
//!
//! ```text
//! [entities]
//! aspirin   Compound
//! headache  Symptom
//! [signatures]
//! treats    Compound  Symptom
//! ```
//!
//! An entity may be listed under several classes. Lines starting with `#`
//! are comments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use kgns_core::{ClassIndex, EntityId, KnowledgeGraph, RelationId};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    /// `(entity, class)` memberships.
    pub entities: Vec<(String, String)>,
    /// `(predicate, domain class, range class)`.
    pub signatures: Vec<(String, String, String)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Entities,
    Signatures,
}

impl Ontology {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut out = Ontology::default();
        let mut section = Section::None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let bad = |message: String| Error::Parse { path: origin.to_path_buf(), line: i + 1, message };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.trim() {
                "[entities]" => {
                    section = Section::Entities;
                    continue;
                }
                "[signatures]" => {
                    section = Section::Signatures;
                    continue;
                }
                s if s.starts_with('[') => return Err(bad(format!("unknown section {s}"))),
                _ => {}
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.iter().any(|f| f.is_empty()) {
                return Err(bad("empty field".into()));
            }
            match (section, fields.as_slice()) {
                (Section::Entities, [e, c]) => out.entities.push((e.to_string(), c.to_string())),
                (Section::Signatures, [p, d, r]) => out.signatures.push((p.to_string(), d.to_string(), r.to_string())),
                (Section::None, _) => return Err(bad("line outside [entities] or [signatures]".into())),
                (Section::Entities, f) => return Err(bad(format!("expected entity<TAB>class, found {} fields", f.len()))),
                (Section::Signatures, f) => {
                    return Err(bad(format!("expected predicate<TAB>domain<TAB>range, found {} fields", f.len())))
                }
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[entities]\n");
        for (e, c) in &self.entities {
            let _ = writeln!(s, "{e}\t{c}");
        }
        s.push_str("[signatures]\n");
        for (p, d, r) in &self.signatures {
            let _ = writeln!(s, "{p}\t{d}\t{r}");
        }
        s
    }

    pub fn class_index(&self, graph: &KnowledgeGraph) -> Result<ClassIndex> {
        let entities = self.entities.iter().map(|(e, c)| (e.as_str(), c.as_str()));
        let signatures = self.signatures.iter().map(|(p, d, r)| (p.as_str(), d.as_str(), r.as_str()));
        Ok(ClassIndex::from_ontology(graph, entities, signatures)?)
    }

    /// The ontology equivalent of an existing class index, e.g. inferred
    /// classes written out for editing.
    pub fn from_index(graph: &KnowledgeGraph, classes: &ClassIndex) -> Self {
        let mut out = Ontology::default();
        for e in 0..graph.num_entities() as u32 {
            for &c in classes.classes_of(EntityId(e)) {
                out.entities.push((graph.entity_label(EntityId(e)).into(), classes.class_label(c).into()));
            }
        }
        for p in 0..graph.num_relations() as u32 {
            let p = RelationId(p);
            out.signatures.push((
                graph.relation_label(p).into(),
                classes.class_label(classes.domain(p)).into(),
                classes.class_label(classes.range(p)).into(),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgns_core::{build_graph, infer_classes, LabeledTriple};

    const TEXT: &str = "# toy\n[entities]\naspirin\tCompound\nheadache\tSymptom\n\n[signatures]\ntreats\tCompound\tSymptom\n";

    #[test]
    fn parses_sections() {
        let o = Ontology::parse(TEXT, Path::new("o")).unwrap();
        assert_eq!(o.entities.len(), 2);
        assert_eq!(o.signatures, vec![("treats".into(), "Compound".into(), "Symptom".into())]);
        assert_eq!(Ontology::parse(&o.to_text(), Path::new("o")).unwrap(), o);
    }

    #[test]
    fn rejects_stray_lines() {
        assert!(Ontology::parse("aspirin\tCompound\n", Path::new("o")).is_err());
        let err = Ontology::parse("[entities]\naspirin\n", Path::new("o")).unwrap_err();
        assert!(err.to_string().starts_with("o:2:"));
        assert!(Ontology::parse("[relations]\n", Path::new("o")).is_err());
    }

    #[test]
    fn inferred_classes_survive_a_round_trip() {
        let train = vec![LabeledTriple::new("a", "r", "b"), LabeledTriple::new("b", "s", "c"), LabeledTriple::new("a", "s", "c")];
        let g = build_graph(&train, &[], &[]).unwrap();
        let inferred = infer_classes(&g).unwrap();
        let o = Ontology::from_index(&g, &inferred);
        let again = o.class_index(&g).unwrap();
        for p in 0..2 {
            let p = RelationId(p);
            assert_eq!(again.domain_members(p), inferred.domain_members(p));
            assert_eq!(again.range_members(p), inferred.range_members(p));
        }
    }
}
