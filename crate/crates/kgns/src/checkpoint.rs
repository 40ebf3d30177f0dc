//! Binary checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `KGNSCKPT` | 8 bytes |
//! | format version | u32 |
//! | model kind | u8 (`ModelKind::ALL` index) |
//! | dim, entities, relations | 3 × u32 |
//! | vocabulary hash | 32 bytes |
//! | config digest | 32 bytes |
//! | best validation MRR (NaN if none) | f64 |
//! | entity table, relation table | f32 each |
//! | entity labels, relation labels | u32 length + UTF-8 each |
//! | SHA-256 of everything above | 32 bytes |
//!
//! Only embeddings are stored; optimiser moments are not.

use std::fs;
use std::path::Path;

use kgns_core::{EntityId, KnowledgeGraph, ModelKind, ModelState, RelationId};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::write_file;

const MAGIC: &[u8; 8] = b"KGNSCKPT";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: ModelState,
    pub entity_labels: Vec<String>,
    pub relation_labels: Vec<String>,
    pub config_digest: [u8; 32],
    pub best_valid_mrr: Option<f64>,
}

/// Hash of both vocabularies in id order.
pub fn vocab_hash<'a>(entities: impl Iterator<Item = &'a str>, relations: impl Iterator<Item = &'a str>) -> [u8; 32] {
    let mut h = Sha256::new();
    for (tag, labels) in [(b'E', entities.collect::<Vec<_>>()), (b'R', relations.collect())] {
        h.update([tag]);
        h.update((labels.len() as u64).to_le_bytes());
        for l in labels {
            h.update((l.len() as u64).to_le_bytes());
            h.update(l.as_bytes());
        }
    }
    h.finalize().into()
}

pub fn graph_vocab_hash(graph: &KnowledgeGraph) -> [u8; 32] {
    vocab_hash(
        (0..graph.num_entities() as u32).map(|e| graph.entity_label(EntityId(e))),
        (0..graph.num_relations() as u32).map(|r| graph.relation_label(RelationId(r))),
    )
}

impl Checkpoint {
    pub fn new(state: ModelState, graph: &KnowledgeGraph, config_digest: [u8; 32], best_valid_mrr: Option<f64>) -> Self {
        Checkpoint {
            state,
            entity_labels: (0..graph.num_entities() as u32).map(|e| graph.entity_label(EntityId(e)).to_owned()).collect(),
            relation_labels: (0..graph.num_relations() as u32)
                .map(|r| graph.relation_label(RelationId(r)).to_owned())
                .collect(),
            config_digest,
            best_valid_mrr,
        }
    }

    pub fn vocab_hash(&self) -> [u8; 32] {
        vocab_hash(self.entity_labels.iter().map(String::as_str), self.relation_labels.iter().map(String::as_str))
    }

    /// Fails unless `graph` assigns the same ids to the same labels.
    pub fn check_graph(&self, graph: &KnowledgeGraph) -> std::result::Result<(), String> {
        if self.vocab_hash() != graph_vocab_hash(graph) {
            return Err(format!(
                "vocabulary hash mismatch: checkpoint has {} entities / {} relations, graph has {} / {}",
                self.entity_labels.len(),
                self.relation_labels.len(),
                graph.num_entities(),
                graph.num_relations()
            ));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.state;
        let mut b = Vec::with_capacity(128 + 4 * (s.entity_table().len() + s.relation_table().len()));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.push(ModelKind::ALL.iter().position(|&k| k == s.kind()).unwrap() as u8);
        for n in [s.dim(), s.num_entities(), s.num_relations()] {
            b.extend_from_slice(&(n as u32).to_le_bytes());
        }
        b.extend_from_slice(&self.vocab_hash());
        b.extend_from_slice(&self.config_digest);
        b.extend_from_slice(&self.best_valid_mrr.unwrap_or(f64::NAN).to_le_bytes());
        for v in s.entity_table().iter().chain(s.relation_table()) {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for l in self.entity_labels.iter().chain(&self.relation_labels) {
            b.extend_from_slice(&(l.len() as u32).to_le_bytes());
            b.extend_from_slice(l.as_bytes());
        }
        let sum = Sha256::digest(&b);
        b.extend_from_slice(&sum);
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < MAGIC.len() + 32 || &bytes[..8] != MAGIC {
            return Err("not a checkpoint file".into());
        }
        let (body, sum) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != sum {
            return Err("checksum mismatch: the file is damaged or was edited".into());
        }
        let mut r = Reader { buf: body, pos: 8 };
        let version = r.u32()?;
        if version != VERSION {
            return Err(format!("unsupported format version {version}"));
        }
        let kind = *ModelKind::ALL.get(r.u8()? as usize).ok_or("unknown model kind")?;
        let (dim, ne, nr) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
        let stored_vocab: [u8; 32] = r.take(32)?.try_into().unwrap();
        let config_digest: [u8; 32] = r.take(32)?.try_into().unwrap();
        let mrr = r.f64()?;
        let ew = kind.entity_width(dim).checked_mul(ne).ok_or("entity table too large")?;
        let rw = kind.relation_width(dim).checked_mul(nr).ok_or("relation table too large")?;
        let entity_table = r.f32s(ew)?;
        let relation_table = r.f32s(rw)?;
        if entity_table.iter().chain(&relation_table).any(|v| !v.is_finite()) {
            return Err("embedding tables contain non-finite values".into());
        }
        let entity_labels = (0..ne).map(|_| r.label()).collect::<std::result::Result<Vec<_>, _>>()?;
        let relation_labels = (0..nr).map(|_| r.label()).collect::<std::result::Result<Vec<_>, _>>()?;
        if r.pos != body.len() {
            return Err("trailing bytes after labels".into());
        }
        let state =
            ModelState::from_tables(kind, dim, ne, nr, entity_table, relation_table).map_err(|e| e.to_string())?;
        let ckpt = Checkpoint {
            state,
            entity_labels,
            relation_labels,
            config_digest,
            best_valid_mrr: (!mrr.is_nan()).then_some(mrr),
        };
        if ckpt.vocab_hash() != stored_vocab {
            return Err("vocabulary hash does not match the stored labels".into());
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|message| Error::Checkpoint { path: path.to_path_buf(), message })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("file is truncated")?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> std::result::Result<Vec<f32>, String> {
        let raw = self.take(n.checked_mul(4).ok_or("table too large")?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn label(&mut self) -> std::result::Result<String, String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| "label is not UTF-8".into())
    }
}
