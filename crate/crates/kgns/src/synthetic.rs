//! A small biomedical-flavoured graph with one dominant entity class.
//!
//! Genes make up about 80% of the entities. Every other class is small, and
//! three of them have one or two members. Entities fall into ten latent
//! groups and links stay inside a group, so a model can generalise from a
//! gene's known links to its held-out ones, but only if it learns to tell
//! apart the members of each small class.

use std::collections::BTreeSet;

use kgns_core::LabeledTriple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ontology::Ontology;

const GROUPS: usize = 10;

const CLASSES: &[(&str, usize)] = &[
    ("Gene", 600),
    ("Disease", 20),
    ("Anatomy", 20),
    ("Pathway", 20),
    ("Compound", 20),
    ("Symptom", 20),
    ("SideEffect", 20),
    ("PharmaClass", 2),
    ("Tissue", 1),
    ("Organ", 2),
];

const SIGNATURES: &[(&str, &str, &str)] = &[
    ("associates", "Gene", "Disease"),
    ("expressed_in", "Gene", "Anatomy"),
    ("participates", "Gene", "Pathway"),
    ("binds", "Compound", "Gene"),
    ("treats", "Compound", "Disease"),
    ("causes", "Compound", "SideEffect"),
    ("in_class", "Compound", "PharmaClass"),
    ("presents", "Disease", "Symptom"),
    ("found_in", "Disease", "Tissue"),
    ("enriched_in", "Gene", "Tissue"),
    ("located_in", "Gene", "Organ"),
];

pub struct SyntheticKg {
    pub triples: Vec<LabeledTriple>,
    pub ontology: Ontology,
}

impl SyntheticKg {
    pub fn class_sizes() -> impl Iterator<Item = (&'static str, usize)> {
        CLASSES.iter().copied()
    }
}

fn label(class: &str, i: usize) -> String {
    format!("{}{i}", class.to_lowercase())
}

/// Members of `class` that belong to `group`. Classes smaller than the
/// number of groups are shared round-robin.
fn members(class: &str, group: usize) -> Vec<usize> {
    let n = CLASSES.iter().find(|c| c.0 == class).unwrap().1;
    if n >= GROUPS {
        (group..n).step_by(GROUPS).collect()
    } else {
        vec![group % n]
    }
}

/// Roughly 2,300 triples over 725 entities.
pub fn imbalanced(seed: u64) -> SyntheticKg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(String, &str, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut add = |rng: &mut ChaCha8Rng, s: String, rel: &'static str, class: &str, group: usize| {
        let pool = members(class, group);
        let o = label(class, pool[rng.gen_range(0..pool.len())]);
        if seen.insert((s.clone(), rel, o.clone())) {
            out.push((s, rel, o));
        }
    };
    for i in 0..600 {
        let (s, g) = (label("Gene", i), i % GROUPS);
        add(&mut rng, s.clone(), "associates", "Disease", g);
        add(&mut rng, s.clone(), "expressed_in", "Anatomy", g);
        add(&mut rng, s.clone(), "participates", "Pathway", g);
        if g < 3 {
            add(&mut rng, s, "enriched_in", "Tissue", g);
        } else if g < 6 {
            add(&mut rng, s, "located_in", "Organ", g);
        }
    }
    for i in 0..20 {
        let (s, g) = (label("Compound", i), i % GROUPS);
        for _ in 0..4 {
            add(&mut rng, s.clone(), "binds", "Gene", g);
        }
        for _ in 0..2 {
            add(&mut rng, s.clone(), "treats", "Disease", g);
            add(&mut rng, s.clone(), "causes", "SideEffect", g);
        }
        add(&mut rng, s, "in_class", "PharmaClass", g);
    }
    for i in 0..20 {
        let (s, g) = (label("Disease", i), i % GROUPS);
        for _ in 0..2 {
            add(&mut rng, s.clone(), "presents", "Symptom", g);
        }
        add(&mut rng, s, "found_in", "Tissue", g);
    }

    let triples = out.into_iter().map(|(s, r, o)| LabeledTriple::new(s, r, o)).collect();
    let mut ontology = Ontology::default();
    for &(class, n) in CLASSES {
        for i in 0..n {
            ontology.entities.push((label(class, i), class.to_string()));
        }
    }
    ontology.signatures = SIGNATURES.iter().map(|&(p, d, r)| (p.into(), d.into(), r.into())).collect();
    SyntheticKg { triples, ontology }
}
