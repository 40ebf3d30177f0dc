//! Text outputs: evaluation reports, rank dumps and training logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use kgns_core::eval::RankRecord;
use kgns_core::training::TrainingLog;
use kgns_core::{EvalReport, KnowledgeGraph, Metrics};
use serde::Serialize;

use crate::error::Result;
use crate::io::write_file;

const METRIC_HEADER: &str = "count\tmrr\thits@1\thits@3\thits@10";

fn metric_cells(m: &Metrics) -> String {
    format!("{}\t{}\t{}\t{}\t{}", m.count, m.mrr, m.hits1, m.hits3, m.hits10)
}

/// One row per scope: overall, each side, then each relation in id order.
pub fn report_tsv(report: &EvalReport, graph: &KnowledgeGraph) -> String {
    let mut s = format!("scope\t{METRIC_HEADER}\n");
    let _ = writeln!(s, "overall\t{}", metric_cells(&report.overall));
    let _ = writeln!(s, "subject\t{}", metric_cells(&report.subject));
    let _ = writeln!(s, "object\t{}", metric_cells(&report.object));
    for (p, m) in &report.per_relation {
        let _ = writeln!(s, "relation:{}\t{}", graph.relation_label(*p), metric_cells(m));
    }
    s
}

#[derive(Serialize)]
struct JsonMetrics {
    count: usize,
    mrr: f64,
    #[serde(rename = "hits@1")]
    hits1: f64,
    #[serde(rename = "hits@3")]
    hits3: f64,
    #[serde(rename = "hits@10")]
    hits10: f64,
}

impl From<&Metrics> for JsonMetrics {
    fn from(m: &Metrics) -> Self {
        JsonMetrics { count: m.count, mrr: m.mrr, hits1: m.hits1, hits3: m.hits3, hits10: m.hits10 }
    }
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    split: &'a str,
    overall: JsonMetrics,
    subject: JsonMetrics,
    object: JsonMetrics,
    per_relation: BTreeMap<&'a str, JsonMetrics>,
}

pub fn report_json(report: &EvalReport, graph: &KnowledgeGraph, split: &str) -> String {
    let summary = JsonSummary {
        split,
        overall: (&report.overall).into(),
        subject: (&report.subject).into(),
        object: (&report.object).into(),
        per_relation: report.per_relation.iter().map(|(p, m)| (graph.relation_label(*p), m.into())).collect(),
    };
    serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
}

pub fn rank_dump_tsv(records: &[RankRecord], graph: &KnowledgeGraph) -> String {
    let mut s = String::from("subject\tpredicate\tobject\tside\trank\n");
    for r in records {
        let t = graph.to_labeled(&r.triple);
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", t.subject, t.predicate, t.object, r.side.name(), r.rank);
    }
    s
}

/// Writes `<stem>_report.tsv`, `<stem>_summary.json` and, when the report
/// carries ranks, `<stem>_ranks.tsv` into `dir`.
pub fn write_report(dir: &Path, stem: &str, report: &EvalReport, graph: &KnowledgeGraph) -> Result<()> {
    write_file(&dir.join(format!("{stem}_report.tsv")), report_tsv(report, graph).as_bytes())?;
    write_file(&dir.join(format!("{stem}_summary.json")), report_json(report, graph, stem).as_bytes())?;
    if let Some(dump) = &report.rank_dump {
        write_file(&dir.join(format!("{stem}_ranks.tsv")), rank_dump_tsv(dump, graph).as_bytes())?;
    }
    Ok(())
}

pub const LOG_HEADER: &str = "epoch\ttrain_loss\tvalid_mrr\thits@1\thits@3\thits@10\tms_per_step";

/// One line per validation round. `ms_per_step` is `NA` without a clock.
pub fn training_log_tsv(log: &TrainingLog) -> String {
    let mut s = format!("{LOG_HEADER}\n");
    for r in &log.rounds {
        let ms = r.ms_per_step.map_or_else(|| "NA".to_string(), |m| format!("{m:.4}"));
        let v = &r.valid;
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}\t{}\t{ms}", r.epoch, r.train_loss, v.mrr, v.hits1, v.hits3, v.hits10);
    }
    s
}

/// The training log without its timing column, for run-to-run comparison.
pub fn strip_timing(log_tsv: &str) -> String {
    log_tsv
        .lines()
        .map(|l| l.rsplit_once('\t').map_or(l, |(head, _)| head))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

pub fn epoch_losses_tsv(log: &TrainingLog) -> String {
    let mut s = String::from("epoch\tloss\n");
    for (i, l) in log.epoch_losses.iter().enumerate() {
        let _ = writeln!(s, "{}\t{l}", i + 1);
    }
    s
}
