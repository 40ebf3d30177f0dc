//! Dataset loading and the train / evaluate / sweep workflows behind the CLI.

use std::fmt::Write as _;
use std::path::Path;

use kgns_core::sampler::{positive_stream, sample_mixed, split_counts};
use kgns_core::training::{train_with, TrainHooks, TrainingLog};
use kgns_core::{build_graph, infer_classes, ClassIndex, EvalReport, KnowledgeGraph, LabeledTriple, ModelState};
use rayon::prelude::*;

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hooks::{evaluate_parallel, StdHooks};
use crate::io::{read_triples, write_file};
use crate::ontology::Ontology;
use crate::report::{epoch_losses_tsv, training_log_tsv, write_report};

pub struct Dataset {
    pub graph: KnowledgeGraph,
    pub classes: ClassIndex,
}

impl Dataset {
    /// Classes come from `ontology` when given, otherwise from the train
    /// split's relation slots.
    pub fn from_triples(
        train: &[LabeledTriple],
        valid: &[LabeledTriple],
        test: &[LabeledTriple],
        ontology: Option<&Ontology>,
    ) -> Result<Self> {
        let graph = build_graph(train, valid, test)?;
        let classes = match ontology {
            Some(o) => o.class_index(&graph)?,
            None => infer_classes(&graph)?,
        };
        Ok(Dataset { graph, classes })
    }

    pub fn load(config: &RunConfig) -> Result<Self> {
        Self::load_with_test(config, config.data.test.as_deref())
    }

    /// Like [`Dataset::load`] with the test split read from `test` instead.
    pub fn load_with_test(config: &RunConfig, test: Option<&Path>) -> Result<Self> {
        let d = &config.data;
        let read_opt = |p: Option<&Path>| p.map(read_triples).transpose().map(Option::unwrap_or_default);
        let train = read_triples(&d.train)?;
        let valid = read_opt(d.valid.as_deref())?;
        let test = read_opt(test)?;
        let ontology = d.ontology.as_deref().map(Ontology::read).transpose()?;
        Self::from_triples(&train, &valid, &test, ontology.as_ref())
    }
}

pub struct RunOutcome {
    pub state: ModelState,
    pub log: TrainingLog,
    pub test: Option<EvalReport>,
}

/// Trains per `config` and, when the graph has a test split, evaluates on it.
pub fn run<H: TrainHooks>(config: &RunConfig, data: &Dataset, hooks: &mut H, pool: Option<&rayon::ThreadPool>) -> Result<RunOutcome> {
    let kind = config.model_kind()?;
    let (state, log) = train_with(&data.graph, &data.classes, kind, &config.train_config(), hooks)?;
    let test = if data.graph.test().is_empty() {
        None
    } else {
        Some(evaluate_parallel(&state, data.graph.test(), &data.graph, &config.eval_config(), pool)?)
    };
    Ok(RunOutcome { state, log, test })
}

/// Writes `checkpoint.bin`, `train_log.tsv`, `epoch_loss.tsv`, a copy of
/// the resolved config and the test report into `dir`.
pub fn write_outputs(dir: &Path, config: &RunConfig, data: &Dataset, outcome: &RunOutcome) -> Result<()> {
    let ckpt = Checkpoint::new(outcome.state.clone(), &data.graph, config.digest(), outcome.log.best_valid_mrr);
    ckpt.save(&dir.join("checkpoint.bin"))?;
    write_file(&dir.join("train_log.tsv"), training_log_tsv(&outcome.log).as_bytes())?;
    write_file(&dir.join("epoch_loss.tsv"), epoch_losses_tsv(&outcome.log).as_bytes())?;
    write_file(&dir.join("config.toml"), config.to_toml().as_bytes())?;
    if let Some(report) = &outcome.test {
        write_report(dir, "test", report, &data.graph)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub eta_tc: usize,
    pub eta_rand: usize,
    pub best_epoch: usize,
    pub valid_mrr: Option<f64>,
    pub test: Option<kgns_core::Metrics>,
    pub ms_per_step: Option<f64>,
}

/// Trains once per `nu`, holding everything else (seeds included) fixed, so
/// each row equals a standalone run with that `nu`. Rows come back in input
/// order whatever the thread count.
pub fn nu_sweep(config: &RunConfig, data: &Dataset, nus: &[f64], threads: usize, verbose: bool) -> Result<Vec<SweepRow>> {
    for &nu in nus {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::Config(format!("nu values must lie in [0, 1], got {nu}")));
        }
    }
    let one = |nu: f64| -> Result<SweepRow> {
        let mut c = config.clone();
        c.sampler.nu = nu;
        let mut hooks = StdHooks::new(1, verbose)?;
        let out = run(&c, data, &mut hooks, None)?;
        let (eta_tc, eta_rand) = split_counts(c.sampler.eta, nu);
        let timed: Vec<f64> = out.log.rounds.iter().filter_map(|r| r.ms_per_step).collect();
        Ok(SweepRow {
            nu,
            eta_tc,
            eta_rand,
            best_epoch: out.log.best_epoch,
            valid_mrr: out.log.best_valid_mrr,
            test: out.test.map(|r| r.overall),
            ms_per_step: (!timed.is_empty()).then(|| timed.iter().sum::<f64>() / timed.len() as f64),
        })
    };
    if threads > 1 {
        let pool = crate::hooks::thread_pool(threads)?;
        pool.install(|| nus.par_iter().map(|&nu| one(nu)).collect())
    } else {
        nus.iter().map(|&nu| one(nu)).collect()
    }
}

pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let na = |v: Option<f64>| v.map_or_else(|| "NA".into(), |v| v.to_string());
    let mut s = String::from("nu\teta_tc\teta_rand\tbest_epoch\tvalid_mrr\ttest_mrr\ttest_hits@1\ttest_hits@3\ttest_hits@10\tms_per_step\n");
    for r in rows {
        let t = r.test;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.nu,
            r.eta_tc,
            r.eta_rand,
            r.best_epoch,
            na(r.valid_mrr),
            na(t.map(|m| m.mrr)),
            na(t.map(|m| m.hits1)),
            na(t.map(|m| m.hits3)),
            na(t.map(|m| m.hits10)),
            r.ms_per_step.map_or_else(|| "NA".into(), |m| format!("{m:.4}")),
        );
    }
    s
}

/// The corruptions the first epoch of training draws for the first `n`
/// train triples, one row per corruption.
pub fn inspect_negatives(config: &RunConfig, data: &Dataset, n: usize) -> Result<String> {
    let sampler = config.train_config().sampler;
    sampler.validate()?;
    let g = &data.graph;
    let mut s = String::from("index\tsubject\tpredicate\tobject\tcorrupt_subject\tcorrupt_object\tside\tprovenance\n");
    let mut buf = Vec::with_capacity(sampler.eta);
    for (i, t) in g.train().iter().take(n).enumerate() {
        buf.clear();
        sample_mixed(*t, &sampler, g, &data.classes, &mut positive_stream(sampler.seed, 1, i as u64), &mut buf)?;
        let pos = g.to_labeled(t);
        for c in &buf {
            let neg = g.to_labeled(&c.triple);
            let _ = writeln!(
                s,
                "{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                pos.subject,
                pos.predicate,
                pos.object,
                neg.subject,
                neg.object,
                c.side.name(),
                c.provenance.name()
            );
        }
    }
    Ok(s)
}
