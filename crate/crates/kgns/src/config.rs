//! Run configuration, stored as TOML.
//!
//! ```toml
//! [data]
//! train = "train.tsv"
//! valid = "valid.tsv"
//! test = "test.tsv"
//! ontology = "ontology.txt"   # optional; classes are inferred otherwise
//!
//! [model]
//! kind = "complex"
//! dim = 200
//!
//! [training]
//! loss = "multiclass_nll"
//! lr = 1e-4
//!
//! [sampler]
//! eta = 10
//! nu = 0.8
//! ```
//!
//! Every section except `[data]` and `[model]` may be omitted. Unknown keys
//! are errors. Relative paths are resolved against the config file's
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use kgns_core::training::EarlyStopping;
use kgns_core::{EvalConfig, LossKind, ModelKind, SamplerConfig, SidePolicy, TieBreak, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub model: ModelSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub early_stopping: EarlyStoppingSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub train: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontology: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `transe`, `distmult`, `complex` (alias `complex-n3`) or `rotate`.
    pub kind: String,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossName {
    MulticlassNll,
    SelfAdversarial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub loss: LossName,
    /// Self-adversarial sampling temperature.
    pub temperature: f64,
    /// Self-adversarial margin.
    pub margin: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub reg_p: u32,
    pub reg_lambda: f64,
    pub seed: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainingSection {
            loss: LossName::MulticlassNll,
            temperature: LossKind::DEFAULT_TEMPERATURE,
            margin: LossKind::DEFAULT_MARGIN,
            lr: t.lr,
            batch_size: t.batch_size,
            epochs: t.epochs,
            reg_p: t.reg_p,
            reg_lambda: t.reg_lambda,
            seed: t.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EarlyStoppingSection {
    pub enabled: bool,
    pub patience: usize,
    pub validation_frequency: usize,
}

impl Default for EarlyStoppingSection {
    fn default() -> Self {
        let e = EarlyStopping::default();
        EarlyStoppingSection { enabled: true, patience: e.patience, validation_frequency: e.validation_frequency }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Bernoulli,
    Subject,
    Object,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub eta: usize,
    pub nu: f64,
    pub seed: u64,
    pub side: SideName,
    /// Probability of corrupting the subject under `side = "bernoulli"`.
    pub subject_prob: f64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let s = TrainConfig::default().sampler;
        SamplerSection { eta: s.eta, nu: s.nu, seed: s.seed, side: SideName::Bernoulli, subject_prob: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieName {
    Optimistic,
    Pessimistic,
    Realistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub tie_break: TieName,
    pub chunk_size: usize,
    pub rank_dump: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { tie_break: TieName::Realistic, chunk_size: EvalConfig::default().chunk_size, rank_dump: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("runs/latest") }
    }
}

impl RunConfig {
    /// Parses and validates; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all representable in TOML")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_toml().as_bytes()).into()
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.train);
        for p in [&mut self.data.valid, &mut self.data.test, &mut self.data.ontology].into_iter().flatten() {
            fix(p);
        }
        fix(&mut self.output.dir);
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        self.model
            .kind
            .parse()
            .map_err(|_| Error::Config(format!("model.kind: unknown model {:?}", self.model.kind)))
    }

    pub fn validate(&self) -> Result<()> {
        self.model_kind()?;
        if self.early_stopping.enabled && self.data.valid.is_none() {
            return Err(Error::Config("early_stopping.enabled needs data.valid".into()));
        }
        self.train_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.training;
        let loss = match t.loss {
            LossName::MulticlassNll => LossKind::MulticlassNll,
            LossName::SelfAdversarial => LossKind::SelfAdversarial { temperature: t.temperature, margin: t.margin },
        };
        let side_policy = match self.sampler.side {
            SideName::Bernoulli => SidePolicy::Bernoulli { subject_prob: self.sampler.subject_prob },
            SideName::Subject => SidePolicy::SubjectOnly,
            SideName::Object => SidePolicy::ObjectOnly,
        };
        let es = &self.early_stopping;
        TrainConfig {
            dim: self.model.dim,
            loss,
            lr: t.lr,
            batch_size: t.batch_size,
            epochs: t.epochs,
            reg_p: t.reg_p,
            reg_lambda: t.reg_lambda,
            early_stopping: es
                .enabled
                .then_some(EarlyStopping { patience: es.patience, validation_frequency: es.validation_frequency }),
            sampler: SamplerConfig { eta: self.sampler.eta, nu: self.sampler.nu, side_policy, seed: self.sampler.seed },
            eval: self.eval_config(),
            seed: t.seed,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            tie_break: match self.eval.tie_break {
                TieName::Optimistic => TieBreak::Optimistic,
                TieName::Pessimistic => TieBreak::Pessimistic,
                TieName::Realistic => TieBreak::Realistic,
            },
            chunk_size: self.eval.chunk_size,
            rank_dump: self.eval.rank_dump,
        }
    }
}
