//! Negative sampling.
//!
//! For each positive triple `eta` corruptions are produced. A `nu` share of
//! them (rounded up) replace the subject with a member of the relation's
//! domain class or the object with a member of its range class; the rest
//! replace either side with an entity drawn uniformly from the whole graph.
//! Draws are with replacement and false negatives are kept: a corruption may
//! coincide with the positive itself or with another known triple.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{ClassIndex, EntityId, KnowledgeGraph, Side, Triple};
use crate::rng::{self, Stream};

/// How the corrupted side is chosen for each corruption.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SidePolicy {
    /// Subject with probability `subject_prob`, object otherwise.
    Bernoulli { subject_prob: f64 },
    SubjectOnly,
    ObjectOnly,
}

impl Default for SidePolicy {
    fn default() -> Self {
        SidePolicy::Bernoulli { subject_prob: 0.5 }
    }
}

impl SidePolicy {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Side {
        match self {
            SidePolicy::Bernoulli { subject_prob } => {
                if rng.gen_bool(subject_prob) {
                    Side::Subject
                } else {
                    Side::Object
                }
            }
            SidePolicy::SubjectOnly => Side::Subject,
            SidePolicy::ObjectOnly => Side::Object,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Negatives per positive.
    pub eta: usize,
    /// Fraction of type-constrained negatives.
    pub nu: f64,
    pub side_policy: SidePolicy,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { eta: 10, nu: 0.0, side_policy: SidePolicy::default(), seed: 0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta == 0 {
            return Err(Error::Config("sampler.eta must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(Error::Config(alloc::format!("sampler.nu must lie in [0, 1], got {}", self.nu)));
        }
        if let SidePolicy::Bernoulli { subject_prob } = self.side_policy {
            if !(0.0..=1.0).contains(&subject_prob) {
                return Err(Error::Config(alloc::format!(
                    "sampler.subject_prob must lie in [0, 1], got {subject_prob}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Random,
    TypeConstrained,
}

impl Provenance {
    pub const fn name(self) -> &'static str {
        match self {
            Provenance::Random => "random",
            Provenance::TypeConstrained => "type_constrained",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corruption {
    pub triple: Triple,
    pub side: Side,
    pub provenance: Provenance,
}

/// `(eta_tc, eta_rand)` with `eta_tc = ceil(eta * nu)`.
pub fn split_counts(eta: usize, nu: f64) -> (usize, usize) {
    let exact = eta as f64 * nu;
    let nearest = libm::round(exact);
    // 10 * 0.7 is 7.000000000000001 in binary floating point.
    let tc = if libm::fabs(exact - nearest) < 1e-9 { nearest } else { libm::ceil(exact) };
    let tc = (tc as usize).min(eta);
    (tc, eta - tc)
}

/// Appends `n` corruptions drawn uniformly from all entities.
pub fn sample_uniform<R: Rng + ?Sized>(
    positive: Triple,
    n: usize,
    num_entities: usize,
    side_policy: SidePolicy,
    rng: &mut R,
    out: &mut Vec<Corruption>,
) {
    let bound = num_entities as u32;
    for _ in 0..n {
        let side = side_policy.draw(rng);
        let entity = EntityId(rng.gen_range(0..bound));
        out.push(Corruption { triple: positive.corrupt(side, entity), side, provenance: Provenance::Random });
    }
}

/// Appends `n` corruptions whose replacement comes from the relation's domain
/// (subject side) or range (object side) class.
pub fn sample_type_constrained<R: Rng + ?Sized>(
    positive: Triple,
    n: usize,
    classes: &ClassIndex,
    side_policy: SidePolicy,
    rng: &mut R,
    out: &mut Vec<Corruption>,
) -> Result<()> {
    let p = positive.predicate;
    for _ in 0..n {
        let side = side_policy.draw(rng);
        let class = match side {
            Side::Subject => classes.domain(p),
            Side::Object => classes.range(p),
        };
        let pool = classes.members(class);
        if pool.is_empty() {
            return Err(Error::EmptyClass {
                class: classes.class_label(class).into(),
                relation: alloc::format!("{}", p),
            });
        }
        let entity = pool[rng.gen_range(0..pool.len() as u32) as usize];
        out.push(Corruption {
            triple: positive.corrupt(side, entity),
            side,
            provenance: Provenance::TypeConstrained,
        });
    }
    Ok(())
}

/// Appends exactly `config.eta` corruptions for `positive`: the uniform
/// share first, then the type-constrained share. Duplicates are kept.
pub fn sample_mixed<R: Rng + ?Sized>(
    positive: Triple,
    config: &SamplerConfig,
    graph: &KnowledgeGraph,
    classes: &ClassIndex,
    rng: &mut R,
    out: &mut Vec<Corruption>,
) -> Result<()> {
    let (n_tc, n_rand) = split_counts(config.eta, config.nu);
    sample_uniform(positive, n_rand, graph.num_entities(), config.side_policy, rng, out);
    sample_type_constrained(positive, n_tc, classes, config.side_policy, rng, out)
}

/// Random stream for the positive at `index` during sampling round `round`
/// (the training epoch). Independent of batch boundaries.
pub fn positive_stream(seed: u64, round: u64, index: u64) -> Stream {
    rng::stream(seed, &[rng::tag::NEGATIVES, round, index])
}

/// `eta` corruptions for each of a run of positives.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativeBatch {
    eta: usize,
    positives: Vec<Triple>,
    corruptions: Vec<Corruption>,
}

impl NegativeBatch {
    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }

    pub fn positives(&self) -> &[Triple] {
        &self.positives
    }

    pub fn corruptions(&self) -> &[Corruption] {
        &self.corruptions
    }

    pub fn negatives(&self, i: usize) -> &[Corruption] {
        &self.corruptions[i * self.eta..(i + 1) * self.eta]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triple, &[Corruption])> + '_ {
        self.positives.iter().copied().zip(self.corruptions.chunks_exact(self.eta))
    }
}

/// Applies [`sample_mixed`] to every positive. Positive `i` draws from
/// [`positive_stream`]`(seed, round, first_index + i)`, so splitting a batch
/// and adjusting `first_index` reproduces the same corruptions.
pub fn sample_batch(
    positives: &[Triple],
    config: &SamplerConfig,
    graph: &KnowledgeGraph,
    classes: &ClassIndex,
    round: u64,
    first_index: u64,
) -> Result<NegativeBatch> {
    config.validate()?;
    if positives.is_empty() {
        return Err(Error::Config("cannot sample negatives for an empty batch".into()));
    }
    let mut corruptions = Vec::with_capacity(positives.len() * config.eta);
    for (i, &t) in positives.iter().enumerate() {
        let mut stream = positive_stream(config.seed, round, first_index + i as u64);
        sample_mixed(t, config, graph, classes, &mut stream, &mut corruptions)?;
    }
    Ok(NegativeBatch { eta: config.eta, positives: positives.to_vec(), corruptions })
}
