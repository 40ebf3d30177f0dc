//! Embedding tables and the TransE, DistMult, ComplEx and RotatE scoring
//! functions with analytic gradients.
//!
//! Tables are stored as `f32`; all arithmetic runs in `f64`. For ComplEx and
//! RotatE `dim` is the complex dimension, so entity rows hold `2 * dim`
//! reals. RotatE relation rows hold `dim` phases in radians.

pub mod kernels;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityId, FxHashMap, RelationId, Triple};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    TransE,
    DistMult,
    ComplEx,
    RotatE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx, ModelKind::RotatE];

    pub const fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::DistMult => "distmult",
            ModelKind::ComplEx => "complex",
            ModelKind::RotatE => "rotate",
        }
    }

    pub const fn entity_width(self, dim: usize) -> usize {
        match self {
            ModelKind::TransE | ModelKind::DistMult => dim,
            ModelKind::ComplEx | ModelKind::RotatE => 2 * dim,
        }
    }

    pub const fn relation_width(self, dim: usize) -> usize {
        match self {
            ModelKind::TransE | ModelKind::DistMult | ModelKind::RotatE => dim,
            ModelKind::ComplEx => 2 * dim,
        }
    }

    pub const fn complex_entities(self) -> bool {
        matches!(self, ModelKind::ComplEx | ModelKind::RotatE)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "distmult" => Ok(ModelKind::DistMult),
            "complex" | "complex-n3" => Ok(ModelKind::ComplEx),
            "rotate" => Ok(ModelKind::RotatE),
            other => Err(Error::Config(alloc::format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    kind: ModelKind,
    dim: usize,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<f32>,
    relations: Vec<f32>,
}

impl ModelState {
    /// Uniform init in `[-6/sqrt(dim), 6/sqrt(dim)]`; RotatE phases uniform
    /// in `[-pi, pi]`.
    pub fn init(kind: ModelKind, dim: usize, num_entities: usize, num_relations: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut stream = rng::stream(seed, &[rng::tag::INIT]);
        let bound = (6.0 / libm::sqrt(dim as f64)) as f32;
        let entities = (0..num_entities * kind.entity_width(dim))
            .map(|_| stream.gen_range(-bound..=bound))
            .collect();
        let relations = (0..num_relations * kind.relation_width(dim))
            .map(|_| match kind {
                ModelKind::RotatE => stream.gen_range(-core::f32::consts::PI..=core::f32::consts::PI),
                _ => stream.gen_range(-bound..=bound),
            })
            .collect();
        Ok(ModelState { kind, dim, num_entities, num_relations, entities, relations })
    }

    /// Wraps existing tables, checking shapes and finiteness.
    pub fn from_tables(
        kind: ModelKind,
        dim: usize,
        num_entities: usize,
        num_relations: usize,
        entities: Vec<f32>,
        relations: Vec<f32>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if entities.len() != num_entities * kind.entity_width(dim)
            || relations.len() != num_relations * kind.relation_width(dim)
        {
            return Err(Error::Shape(alloc::format!(
                "{kind} dim {dim}: expected {}x{} entity and {}x{} relation values",
                num_entities,
                kind.entity_width(dim),
                num_relations,
                kind.relation_width(dim)
            )));
        }
        if entities.iter().chain(&relations).any(|v| !v.is_finite()) {
            return Err(Error::Shape("embedding tables contain non-finite values".into()));
        }
        Ok(ModelState { kind, dim, num_entities, num_relations, entities, relations })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn entity_width(&self) -> usize {
        self.kind.entity_width(self.dim)
    }

    pub fn relation_width(&self) -> usize {
        self.kind.relation_width(self.dim)
    }

    pub fn entity_table(&self) -> &[f32] {
        &self.entities
    }

    pub fn relation_table(&self) -> &[f32] {
        &self.relations
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut [f32], &mut [f32]) {
        (&mut self.entities, &mut self.relations)
    }

    #[inline]
    pub fn entity_row(&self, e: EntityId) -> &[f32] {
        let w = self.entity_width();
        &self.entities[e.index() * w..(e.index() + 1) * w]
    }

    #[inline]
    pub fn relation_row(&self, p: RelationId) -> &[f32] {
        let w = self.relation_width();
        &self.relations[p.index() * w..(p.index() + 1) * w]
    }

    pub fn check_triple(&self, t: &Triple) -> Result<()> {
        for e in [t.subject, t.object] {
            if e.index() >= self.num_entities {
                return Err(Error::IdOutOfRange { kind: "entity", id: e.0, size: self.num_entities });
            }
        }
        if t.predicate.index() >= self.num_relations {
            return Err(Error::IdOutOfRange { kind: "relation", id: t.predicate.0, size: self.num_relations });
        }
        Ok(())
    }

    /// Score of one triple. Ids must be in range.
    #[inline]
    pub fn score_triple(&self, t: &Triple) -> f64 {
        kernels::score(
            self.kind,
            self.entity_row(t.subject),
            self.relation_row(t.predicate),
            self.entity_row(t.object),
        )
    }

    /// One score per triple, in input order.
    pub fn score(&self, triples: &[Triple]) -> Result<Vec<f64>> {
        triples
            .iter()
            .map(|t| {
                self.check_triple(t)?;
                Ok(self.score_triple(t))
            })
            .collect()
    }

    /// Sum of score gradients over `triples`, on touched rows only.
    pub fn score_gradients(&self, triples: &[Triple]) -> Result<Gradients> {
        let mut grads = Gradients::for_state(self);
        for t in triples {
            self.check_triple(t)?;
            self.accumulate_gradient(t, 1.0, &mut grads);
        }
        Ok(grads)
    }

    /// Adds `upstream * d score(t)` into `grads`. Ids must be in range.
    pub fn accumulate_gradient(&self, t: &Triple, upstream: f64, grads: &mut Gradients) {
        let (ew, rw) = (self.entity_width(), self.relation_width());
        let scratch = &mut grads.scratch;
        scratch.clear();
        scratch.resize(2 * ew + rw, 0.0);
        let (gs, rest) = scratch.split_at_mut(ew);
        let (go, gr) = rest.split_at_mut(ew);
        kernels::accumulate_grad(
            self.kind,
            self.entity_row(t.subject),
            self.relation_row(t.predicate),
            self.entity_row(t.object),
            upstream,
            gs,
            gr,
            go,
        );
        add_into(grads.entities.row_mut(t.subject.0), gs);
        add_into(grads.entities.row_mut(t.object.0), go);
        add_into(grads.relations.row_mut(t.predicate.0), gr);
    }
}

#[inline]
fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Sparse per-row gradient buffer. Rows keep first-touch order.
#[derive(Clone, Debug, Default)]
pub struct RowGrads {
    width: usize,
    rows: Vec<u32>,
    values: Vec<f64>,
    slots: FxHashMap<u32, usize>,
}

impl RowGrads {
    pub fn new(width: usize) -> Self {
        RowGrads { width, ..Default::default() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn clear(&mut self) {
        self.rows.clear();
        self.values.clear();
        self.slots.clear();
    }

    /// Gradient row for `id`, zero-initialised on first touch.
    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        let w = self.width;
        let slot = match self.slots.get(&id) {
            Some(&slot) => slot,
            None => {
                let slot = self.rows.len();
                self.rows.push(id);
                self.values.resize(self.values.len() + w, 0.0);
                self.slots.insert(id, slot);
                slot
            }
        };
        &mut self.values[slot * w..(slot + 1) * w]
    }

    pub fn get(&self, id: u32) -> Option<&[f64]> {
        let &slot = self.slots.get(&id)?;
        Some(&self.values[slot * self.width..(slot + 1) * self.width])
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &[f64])> + '_ {
        self.rows.iter().copied().zip(self.values.chunks_exact(self.width.max(1)))
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

/// Gradients for the entity and relation tables.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    pub entities: RowGrads,
    pub relations: RowGrads,
    scratch: Vec<f64>,
}

impl Gradients {
    pub fn for_state(state: &ModelState) -> Self {
        Gradients {
            entities: RowGrads::new(state.entity_width()),
            relations: RowGrads::new(state.relation_width()),
            scratch: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        self.entities.clear();
        self.relations.clear();
    }

    pub fn scale(&mut self, factor: f64) {
        self.entities.scale(factor);
        self.relations.scale(factor);
    }
}

/// Lp penalty `lambda * sum over touched rows of sum_i |v_i|^p`.
///
/// Complex tables use the per-coordinate modulus. RotatE phase rows are not
/// penalised: `|e^{i theta}|` is always 1. Returns the penalty and adds its
/// gradient into `grads`.
pub fn regularizer(
    state: &ModelState,
    entity_rows: &[EntityId],
    relation_rows: &[RelationId],
    p: u32,
    lambda: f64,
    grads: &mut Gradients,
) -> Result<f64> {
    if p != 2 && p != 3 {
        return Err(Error::UnsupportedExponent(p));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let complex = state.kind.complex_entities();
    let mut penalty = 0.0;
    for &e in entity_rows {
        let row = state.entity_row(e);
        penalty += kernels::row_penalty(row, complex, p);
        kernels::accumulate_penalty_grad(row, complex, p, lambda, grads.entities.row_mut(e.0));
    }
    if state.kind != ModelKind::RotatE {
        let complex = state.kind == ModelKind::ComplEx;
        for &r in relation_rows {
            let row = state.relation_row(r);
            penalty += kernels::row_penalty(row, complex, p);
            kernels::accumulate_penalty_grad(row, complex, p, lambda, grads.relations.row_mut(r.0));
        }
    }
    Ok(lambda * penalty)
}

/// Empty gradient buffer shaped for `state`.
pub fn zeroed(state: &ModelState) -> Gradients {
    Gradients::for_state(state)
}
