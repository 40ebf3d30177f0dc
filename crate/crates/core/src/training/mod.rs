//! Mini-batch training with mixed negative sampling, sparse Adam and early
//! stopping on validation MRR.

pub mod adam;
pub mod loss;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalConfig, EvalReport, Metrics};
use crate::kg::{ClassIndex, EntityId, KnowledgeGraph, RelationId};
use crate::models::{regularizer, Gradients, ModelKind, ModelState};
use crate::rng;
use crate::sampler::{positive_stream, sample_mixed, Corruption, SamplerConfig};

pub use adam::{adam_step, OptimizerState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossKind {
    MulticlassNll,
    SelfAdversarial { temperature: f64, margin: f64 },
}

impl LossKind {
    pub const DEFAULT_TEMPERATURE: f64 = 1.0;
    pub const DEFAULT_MARGIN: f64 = 6.0;

    pub fn self_adversarial() -> Self {
        LossKind::SelfAdversarial { temperature: Self::DEFAULT_TEMPERATURE, margin: Self::DEFAULT_MARGIN }
    }

    /// Group loss; writes negative-score gradients into `grad_negatives` and
    /// returns `(loss, d loss / d positive)`.
    pub fn evaluate(self, positive: f64, negatives: &[f64], grad_negatives: &mut [f64]) -> (f64, f64) {
        match self {
            LossKind::MulticlassNll => loss::multiclass_nll(positive, negatives, grad_negatives),
            LossKind::SelfAdversarial { temperature, margin } => {
                loss::self_adversarial(positive, negatives, temperature, margin, grad_negatives)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EarlyStopping {
    /// Validation rounds without improvement before stopping.
    pub patience: usize,
    /// Epochs between validation rounds.
    pub validation_frequency: usize,
}

impl Default for EarlyStopping {
    fn default() -> Self {
        EarlyStopping { patience: 10, validation_frequency: 25 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub loss: LossKind,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub reg_p: u32,
    pub reg_lambda: f64,
    /// `None` trains for `epochs` and returns the final state.
    pub early_stopping: Option<EarlyStopping>,
    pub sampler: SamplerConfig,
    pub eval: EvalConfig,
    /// Seeds initialisation and shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            loss: LossKind::MulticlassNll,
            lr: 1e-3,
            batch_size: 1000,
            epochs: 1000,
            reg_p: 3,
            reg_lambda: 1e-3,
            early_stopping: Some(EarlyStopping::default()),
            sampler: SamplerConfig { nu: 0.5, ..SamplerConfig::default() },
            eval: EvalConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Config(msg));
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(alloc::format!("training.lr must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return bad("training.batch_size must be at least 1".into());
        }
        if self.reg_p != 2 && self.reg_p != 3 {
            return Err(Error::UnsupportedExponent(self.reg_p));
        }
        if !(self.reg_lambda >= 0.0 && self.reg_lambda.is_finite()) {
            return bad(alloc::format!("training.reg_lambda must be >= 0, got {}", self.reg_lambda));
        }
        if let LossKind::SelfAdversarial { temperature, margin } = self.loss {
            if !(temperature >= 0.0 && temperature.is_finite()) || !margin.is_finite() {
                return bad("self-adversarial temperature must be >= 0 and margin finite".into());
            }
        }
        if let Some(es) = self.early_stopping {
            if es.patience == 0 || es.validation_frequency == 0 {
                return bad("early stopping patience and validation_frequency must be >= 1".into());
            }
        }
        if self.eval.chunk_size == 0 {
            return bad("eval.chunk_size must be at least 1".into());
        }
        self.sampler.validate()
    }
}

/// One validation round.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRound {
    pub epoch: usize,
    /// Mean training objective over the last epoch.
    pub train_loss: f64,
    pub valid: Metrics,
    /// Mean wall-clock per optimisation step since the previous round, when
    /// a clock is available.
    pub ms_per_step: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    /// Mean training objective of every epoch run.
    pub epoch_losses: Vec<f64>,
    pub rounds: Vec<ValidationRound>,
    /// Epoch whose state was returned.
    pub best_epoch: usize,
    pub best_valid_mrr: Option<f64>,
    pub stopped_early: bool,
    pub steps: u64,
}

impl TrainingLog {
    pub fn epochs_run(&self) -> usize {
        self.epoch_losses.len()
    }
}

/// Extension points for the training loop. All methods have defaults, so
/// `NoHooks` gives a clock-free, single-threaded run.
pub trait TrainHooks {
    /// Monotonic time in milliseconds.
    fn now_ms(&mut self) -> Option<f64> {
        None
    }

    fn validate(&mut self, state: &ModelState, graph: &KnowledgeGraph, config: &EvalConfig) -> Result<EvalReport> {
        evaluate(state, graph.valid(), graph, config)
    }

    fn on_round(&mut self, _round: &ValidationRound) {}
}

pub struct NoHooks;

impl TrainHooks for NoHooks {}

/// Trains with default hooks.
pub fn train(
    graph: &KnowledgeGraph,
    classes: &ClassIndex,
    kind: ModelKind,
    config: &TrainConfig,
) -> Result<(ModelState, TrainingLog)> {
    train_with(graph, classes, kind, config, &mut NoHooks)
}

/// Per-batch working memory.
struct StepBuffers {
    grads: Gradients,
    corruptions: Vec<Corruption>,
    neg_scores: Vec<f64>,
    neg_grads: Vec<f64>,
    entity_rows: Vec<EntityId>,
    relation_rows: Vec<RelationId>,
}

/// One optimisation step over the positives at `batch` (indices into the
/// train split). Returns the batch objective.
#[allow(clippy::too_many_arguments)]
fn train_step(
    state: &mut ModelState,
    opt: &mut OptimizerState,
    graph: &KnowledgeGraph,
    classes: &ClassIndex,
    config: &TrainConfig,
    epoch: usize,
    batch: &[usize],
    buf: &mut StepBuffers,
) -> Result<f64> {
    let train = graph.train();
    let scale = 1.0 / batch.len() as f64;
    buf.grads.clear();
    let mut total = 0.0;
    for &idx in batch {
        let positive = train[idx];
        buf.corruptions.clear();
        let mut stream = positive_stream(config.sampler.seed, epoch as u64, idx as u64);
        sample_mixed(positive, &config.sampler, graph, classes, &mut stream, &mut buf.corruptions)?;

        buf.neg_scores.clear();
        buf.neg_scores.extend(buf.corruptions.iter().map(|c| state.score_triple(&c.triple)));
        buf.neg_grads.clear();
        buf.neg_grads.resize(buf.neg_scores.len(), 0.0);
        let pos_score = state.score_triple(&positive);
        let (loss, d_pos) = config.loss.evaluate(pos_score, &buf.neg_scores, &mut buf.neg_grads);
        total += loss;

        state.accumulate_gradient(&positive, d_pos * scale, &mut buf.grads);
        for (c, &g) in buf.corruptions.iter().zip(&buf.neg_grads) {
            state.accumulate_gradient(&c.triple, g * scale, &mut buf.grads);
        }
    }
    let mut objective = total * scale;
    if config.reg_lambda > 0.0 {
        buf.entity_rows.clear();
        buf.entity_rows.extend(buf.grads.entities.rows().iter().map(|&e| EntityId(e)));
        buf.relation_rows.clear();
        buf.relation_rows.extend(buf.grads.relations.rows().iter().map(|&r| RelationId(r)));
        objective += regularizer(
            state,
            &buf.entity_rows,
            &buf.relation_rows,
            config.reg_p,
            config.reg_lambda,
            &mut buf.grads,
        )?;
    }
    adam_step(opt, state, &buf.grads, config.lr)?;
    Ok(objective)
}

/// Trains `kind` on the train split of `graph`.
///
/// Each epoch shuffles the train triples (seeded by `(seed, epoch)`), walks
/// them in batches of `batch_size` (the last batch may be partial), draws
/// `eta` negatives per positive and applies one Adam step per batch. With
/// early stopping, validation runs every `validation_frequency` epochs and at
/// the final epoch; training stops after `patience` rounds without a strictly
/// better MRR and the best-scoring state is returned.
pub fn train_with<H: TrainHooks + ?Sized>(
    graph: &KnowledgeGraph,
    classes: &ClassIndex,
    kind: ModelKind,
    config: &TrainConfig,
    hooks: &mut H,
) -> Result<(ModelState, TrainingLog)> {
    config.validate()?;
    if graph.train().is_empty() {
        return Err(Error::EmptyTrain);
    }
    if config.early_stopping.is_some() && graph.valid().is_empty() {
        return Err(Error::Config("early stopping needs a non-empty validation split".into()));
    }
    if classes.num_relations() != graph.num_relations() {
        return Err(Error::Shape("class index was built for a different graph".into()));
    }

    let mut state = ModelState::init(kind, config.dim, graph.num_entities(), graph.num_relations(), config.seed)?;
    let mut opt = OptimizerState::new(&state);
    let mut log = TrainingLog::default();
    let mut buf = StepBuffers {
        grads: Gradients::for_state(&state),
        corruptions: Vec::with_capacity(config.sampler.eta),
        neg_scores: Vec::with_capacity(config.sampler.eta),
        neg_grads: vec![0.0; config.sampler.eta],
        entity_rows: Vec::new(),
        relation_rows: Vec::new(),
    };

    let n = graph.train().len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, usize, ModelState)> = None;
    let mut stale_rounds = 0usize;
    let mut step_ms = 0.0;
    let mut steps_since_round = 0u64;

    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(config.seed, &[rng::tag::SHUFFLE, epoch as u64]));

        let mut epoch_total = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let start = hooks.now_ms();
            let objective = train_step(&mut state, &mut opt, graph, classes, config, epoch, batch, &mut buf)?;
            if let (Some(t0), Some(t1)) = (start, hooks.now_ms()) {
                step_ms += t1 - t0;
            }
            if !objective.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            epoch_total += objective * batch.len() as f64;
            steps_since_round += 1;
            log.steps += 1;
        }
        let epoch_loss = epoch_total / n as f64;
        log.epoch_losses.push(epoch_loss);

        let Some(es) = config.early_stopping else { continue };
        if epoch % es.validation_frequency != 0 && epoch != config.epochs {
            continue;
        }
        let report = hooks.validate(&state, graph, &config.eval)?;
        let round = ValidationRound {
            epoch,
            train_loss: epoch_loss,
            valid: report.overall,
            ms_per_step: mean_step_ms(hooks, step_ms, steps_since_round),
        };
        step_ms = 0.0;
        steps_since_round = 0;
        hooks.on_round(&round);
        let mrr = round.valid.mrr;
        log.rounds.push(round);

        let improved = best.as_ref().is_none_or(|(b, _, _)| mrr > *b);
        if improved {
            best = Some((mrr, epoch, state.clone()));
            stale_rounds = 0;
        } else {
            stale_rounds += 1;
            if stale_rounds >= es.patience {
                log.stopped_early = epoch < config.epochs;
                break;
            }
        }
    }

    match best {
        Some((mrr, epoch, best_state)) => {
            log.best_epoch = epoch;
            log.best_valid_mrr = Some(mrr);
            Ok((best_state, log))
        }
        None => {
            log.best_epoch = log.epochs_run();
            Ok((state, log))
        }
    }
}

fn mean_step_ms<H: TrainHooks + ?Sized>(hooks: &mut H, total_ms: f64, steps: u64) -> Option<f64> {
    hooks.now_ms().filter(|_| steps > 0).map(|_| total_ms / steps as f64)
}
