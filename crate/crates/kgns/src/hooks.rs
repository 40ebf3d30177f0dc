use std::time::Instant;

use kgns_core::eval::{rank_split, RankRecord};
use kgns_core::training::{TrainHooks, ValidationRound};
use kgns_core::{EvalConfig, EvalReport, KnowledgeGraph, ModelState, Triple};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable holding the worker thread count. Unset means 1.
pub const THREADS_ENV: &str = "KGNS_THREADS";

pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))
}

/// Filtered evaluation over `threads` workers. Ranks are gathered in split
/// order, so the report does not depend on the thread count.
pub fn evaluate_parallel(
    state: &ModelState,
    split: &[Triple],
    graph: &KnowledgeGraph,
    config: &EvalConfig,
    pool: Option<&rayon::ThreadPool>,
) -> kgns_core::Result<EvalReport> {
    let Some(pool) = pool.filter(|p| p.current_num_threads() > 1) else {
        return kgns_core::evaluate(state, split, graph, config);
    };
    if split.is_empty() {
        return Err(kgns_core::Error::EmptySplit);
    }
    let chunk = split.len().div_ceil(pool.current_num_threads() * 4).max(1);
    let parts: Vec<kgns_core::Result<Vec<RankRecord>>> =
        pool.install(|| split.par_chunks(chunk).map(|c| rank_split(state, c, graph, config)).collect());
    let mut records = Vec::with_capacity(2 * split.len());
    for part in parts {
        records.extend(part?);
    }
    Ok(EvalReport::from_records(records, config.rank_dump))
}

/// Wall-clock timing, optional parallel validation and progress lines on
/// stderr.
pub struct StdHooks {
    start: Instant,
    pool: Option<rayon::ThreadPool>,
    pub verbose: bool,
}

impl StdHooks {
    pub fn new(threads: usize, verbose: bool) -> Result<Self> {
        let pool = if threads > 1 { Some(thread_pool(threads)?) } else { None };
        Ok(StdHooks { start: Instant::now(), pool, verbose })
    }

    pub fn pool(&self) -> Option<&rayon::ThreadPool> {
        self.pool.as_ref()
    }
}

impl TrainHooks for StdHooks {
    fn now_ms(&mut self) -> Option<f64> {
        Some(self.start.elapsed().as_secs_f64() * 1e3)
    }

    fn validate(&mut self, state: &ModelState, graph: &KnowledgeGraph, config: &EvalConfig) -> kgns_core::Result<EvalReport> {
        evaluate_parallel(state, graph.valid(), graph, config, self.pool.as_ref())
    }

    fn on_round(&mut self, round: &ValidationRound) {
        if self.verbose {
            let ms = round.ms_per_step.map_or_else(String::new, |m| format!(" {m:.3} ms/step"));
            eprintln!(
                "epoch {:>5}  loss {:.5}  valid mrr {:.4}  hits@10 {:.4}{ms}",
                round.epoch, round.train_loss, round.valid.mrr, round.valid.hits10
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgns_core::ModelKind;

    #[test]
    fn thread_count_does_not_change_reports() {
        let train: Vec<Triple> = (0..60u32).map(|i| Triple::new(i % 20, i % 3, (i * 7 + i / 20 + 1) % 20)).collect();
        let mut train = train;
        train.sort();
        train.dedup();
        let test = train.split_off(45);
        let g = KnowledgeGraph::from_ids(20, 3, train, vec![], test).unwrap();
        let state = ModelState::init(ModelKind::ComplEx, 4, 20, 3, 1).unwrap();
        let config = EvalConfig { rank_dump: true, ..Default::default() };
        let serial = kgns_core::evaluate(&state, g.test(), &g, &config).unwrap();
        let pool = thread_pool(3).unwrap();
        let parallel = evaluate_parallel(&state, g.test(), &g, &config, Some(&pool)).unwrap();
        assert_eq!(serial, parallel);
    }
}
