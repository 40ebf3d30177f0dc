//! Filtered link-prediction evaluation.
//!
//! Each target triple is ranked twice, once against every subject
//! corruption and once against every object corruption. Corruptions that are
//! known triples (train, valid or test) are dropped from the candidates; the
//! target itself always stays. MRR and Hits@N average over all `2 * |split|`
//! ranks.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId, Side, Triple};
use crate::models::ModelState;

/// How candidates scoring exactly like the target are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Target placed before all ties.
    Optimistic,
    /// Target placed after all ties.
    Pessimistic,
    /// Mean of the two.
    #[default]
    Realistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub tie_break: TieBreak,
    /// Candidates scored per chunk. Has no effect on results.
    pub chunk_size: usize,
    /// Keep per-triple ranks in the report.
    pub rank_dump: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { tie_break: TieBreak::Realistic, chunk_size: 4096, rank_dump: false }
    }
}

/// Rank of `target` among the filtered corruptions of `side`.
pub fn filtered_rank(
    state: &ModelState,
    target: &Triple,
    side: Side,
    graph: &KnowledgeGraph,
    config: &EvalConfig,
) -> Result<f64> {
    let mut scratch = Vec::new();
    filtered_rank_in(state, target, side, graph, config, &mut scratch)
}

/// [`filtered_rank`] reusing a caller-owned score buffer.
pub fn filtered_rank_in(
    state: &ModelState,
    target: &Triple,
    side: Side,
    graph: &KnowledgeGraph,
    config: &EvalConfig,
    scratch: &mut Vec<f64>,
) -> Result<f64> {
    graph.check_ids(target)?;
    state.check_triple(target)?;
    if state.num_entities() != graph.num_entities() {
        return Err(Error::Shape("model and graph disagree on the number of entities".into()));
    }
    if !graph.is_known(target) {
        return Err(Error::UnknownTriple(target.subject.0, target.predicate.0, target.object.0));
    }
    let chunk = config.chunk_size.max(1);
    let truth = target.entity(side);
    let target_score = state.score_triple(target);
    let (mut higher, mut ties) = (0u64, 0u64);

    let n = graph.num_entities() as u32;
    let mut start = 0u32;
    while start < n {
        let end = start.saturating_add(chunk as u32).min(n);
        scratch.clear();
        scratch.extend((start..end).map(|e| state.score_triple(&target.corrupt(side, EntityId(e)))));
        for (e, &score) in (start..end).zip(scratch.iter()) {
            if score < target_score {
                continue;
            }
            let e = EntityId(e);
            if e == truth || graph.is_known(&target.corrupt(side, e)) {
                continue;
            }
            if score > target_score {
                higher += 1;
            } else {
                ties += 1;
            }
        }
        start = end;
    }

    let (higher, ties) = (higher as f64, ties as f64);
    Ok(match config.tie_break {
        TieBreak::Optimistic => higher + 1.0,
        TieBreak::Pessimistic => higher + ties + 1.0,
        TieBreak::Realistic => higher + ties / 2.0 + 1.0,
    })
}

/// MRR and Hits@{1,3,10} over a set of ranks.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Metrics {
    /// Number of ranks.
    pub count: usize,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl Metrics {
    /// Sorts `ranks` so the result does not depend on their order.
    pub fn from_ranks(ranks: &mut [f64]) -> Metrics {
        if ranks.is_empty() {
            return Metrics::default();
        }
        ranks.sort_unstable_by(f64::total_cmp);
        let n = ranks.len() as f64;
        let mrr = ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n;
        let hits = |k: f64| ranks.iter().filter(|&&r| r <= k).count() as f64 / n;
        Metrics { count: ranks.len(), mrr, hits1: hits(1.0), hits3: hits(3.0), hits10: hits(10.0) }
    }

    /// Hits@N for N in {1, 3, 10}.
    pub fn hits(&self, n: usize) -> Option<f64> {
        match n {
            1 => Some(self.hits1),
            3 => Some(self.hits3),
            10 => Some(self.hits10),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankRecord {
    pub triple: Triple,
    pub side: Side,
    pub rank: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub overall: Metrics,
    pub subject: Metrics,
    pub object: Metrics,
    /// Relations present in the split, by id.
    pub per_relation: Vec<(RelationId, Metrics)>,
    pub rank_dump: Option<Vec<RankRecord>>,
}

impl EvalReport {
    /// Assembles a report; the result does not depend on record order except
    /// for the optional rank dump, which keeps it.
    pub fn from_records(records: Vec<RankRecord>, keep_dump: bool) -> EvalReport {
        let mut all: Vec<f64> = records.iter().map(|r| r.rank).collect();
        let by_side = |side| -> Vec<f64> {
            records.iter().filter(|r| r.side == side).map(|r| r.rank).collect()
        };
        let mut subject = by_side(Side::Subject);
        let mut object = by_side(Side::Object);
        let mut per_rel: BTreeMap<RelationId, Vec<f64>> = BTreeMap::new();
        for r in &records {
            per_rel.entry(r.triple.predicate).or_default().push(r.rank);
        }
        EvalReport {
            overall: Metrics::from_ranks(&mut all),
            subject: Metrics::from_ranks(&mut subject),
            object: Metrics::from_ranks(&mut object),
            per_relation: per_rel.into_iter().map(|(p, mut ranks)| (p, Metrics::from_ranks(&mut ranks))).collect(),
            rank_dump: keep_dump.then_some(records),
        }
    }

    pub fn mrr(&self) -> f64 {
        self.overall.mrr
    }
}

/// Ranks both sides of every triple in `split`.
pub fn rank_split(
    state: &ModelState,
    split: &[Triple],
    graph: &KnowledgeGraph,
    config: &EvalConfig,
) -> Result<Vec<RankRecord>> {
    let mut scratch = Vec::with_capacity(config.chunk_size.min(graph.num_entities()));
    let mut records = Vec::with_capacity(2 * split.len());
    for t in split {
        for side in [Side::Subject, Side::Object] {
            let rank = filtered_rank_in(state, t, side, graph, config, &mut scratch)?;
            records.push(RankRecord { triple: *t, side, rank });
        }
    }
    Ok(records)
}

/// Filtered MRR and Hits@N over `split`.
pub fn evaluate(
    state: &ModelState,
    split: &[Triple],
    graph: &KnowledgeGraph,
    config: &EvalConfig,
) -> Result<EvalReport> {
    if split.is_empty() {
        return Err(Error::EmptySplit);
    }
    let records = rank_split(state, split, graph, config)?;
    Ok(EvalReport::from_records(records, config.rank_dump))
}
