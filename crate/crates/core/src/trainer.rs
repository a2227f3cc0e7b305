//! Closed-form IM estimation of log-linear parameters from incomplete data.
//!
//! Each step computes, for every property, the conditional expectation over
//! the candidate sets of the observed sentences (numerator) and the model
//! expectation over the universe (denominator), then moves
//! `lambda_i += ln(numerator_i / denominator_i) / K`, where `K` is the
//! constant total feature mass guaranteed by the correction property. With
//! unique parses everywhere the numerator is the empirical expectation and
//! the loop is ordinary generalized iterative scaling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{conditional_parse_prob, model_expectation, LogLinearModel, ParseDistribution};
use crate::properties::{FeaturizedCorpus, PropertyRegistry};

/// Slack on the monotone-likelihood check.
pub const MONOTONICITY_SLACK: f64 = 1e-10;

/// Sentences per partial sum in the E-step. Fixed so that the reduction
/// order does not depend on the number of threads.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    UniformZero,
    /// i.i.d. uniform on `[-range, range]`.
    Random {
        range: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub init: Init,
    pub max_iterations: usize,
    /// Stop once `|L(t) - L(t-1)|` falls below this.
    pub likelihood_tolerance: f64,
    pub checkpoint_every: usize,
    /// Expectations are floored here before taking logs; properties whose
    /// conditional expectation is below it are held fixed for the step.
    pub expectation_floor: f64,
    /// Bound on `|gamma_i|`; `None` means `20 / K`.
    pub gamma_clamp: Option<f64>,
    /// Worker threads for the E-step; results do not depend on it.
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            init: Init::UniformZero,
            max_iterations: 500,
            likelihood_tolerance: 1e-9,
            checkpoint_every: 5,
            expectation_floor: 1e-12,
            gamma_clamp: None,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.likelihood_tolerance.is_finite() && self.likelihood_tolerance > 0.0) {
            return Err(Error::Config(
                "likelihood_tolerance must be positive".into(),
            ));
        }
        if !(self.expectation_floor.is_finite() && self.expectation_floor > 0.0) {
            return Err(Error::Config("expectation_floor must be positive".into()));
        }
        if self.checkpoint_every < 1 {
            return Err(Error::Config("checkpoint_every must be at least 1".into()));
        }
        if let Some(c) = self.gamma_clamp {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config("gamma_clamp must be positive".into()));
            }
        }
        if let Init::Random { range, .. } = self.init {
            if !(range.is_finite() && range >= 0.0) {
                return Err(Error::Config("random init range must be >= 0".into()));
            }
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    #[serde(rename = "iter")]
    pub iteration: usize,
    #[serde(rename = "L")]
    pub log_likelihood: f64,
    pub max_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub lambda: Vec<f64>,
}

/// Likelihood per iteration (iteration 0 is the starting point) and
/// parameter snapshots at checkpoints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<IterationRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub converged: bool,
}

impl TrainingTrace {
    pub fn final_likelihood(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.log_likelihood)
    }

    pub fn initial_likelihood(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.log_likelihood)
    }

    /// JSON Lines, one `{iter, L, max_gamma}` record per iteration.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain record") + "\n")
            .collect()
    }
}

/// Result of one IM update.
#[derive(Debug, Clone)]
pub struct ImStep {
    pub model: LogLinearModel,
    pub gamma: Vec<f64>,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub log_likelihood: f64,
}

fn weights(corpus: &FeaturizedCorpus) -> Result<Vec<f64>> {
    let total: f64 = corpus.sentences.iter().map(|s| s.weight).sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Data("corpus weights sum to zero".into()));
    }
    Ok(corpus.sentences.iter().map(|s| s.weight / total).collect())
}

/// `L = sum_y p~(y) ln sum_{x in X(y)} p(x)`, weights rescaled to sum to one.
pub fn incomplete_log_likelihood(model: &LogLinearModel, corpus: &FeaturizedCorpus) -> Result<f64> {
    let dist = model.normalize(corpus)?;
    likelihood_from(&dist, corpus, &weights(corpus)?)
}

fn likelihood_from(dist: &ParseDistribution, corpus: &FeaturizedCorpus, w: &[f64]) -> Result<f64> {
    let mut l = 0.0;
    for (s, &ws) in w.iter().enumerate() {
        let mass = dist.sentence_log_mass(s);
        if !mass.is_finite() {
            return Err(Error::ZeroMass {
                sentence: corpus.sentences[s].sentence_id.clone(),
            });
        }
        l += ws * mass;
    }
    Ok(l)
}

/// `p~[k[nu]]`: expected features under the per-sentence conditionals.
pub fn conditional_expectation(
    corpus: &FeaturizedCorpus,
    dist: &ParseDistribution,
    threads: usize,
) -> Result<Vec<f64>> {
    let w = weights(corpus)?;
    let dim = corpus.dim;
    let chunk_sum = |c: usize| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; dim];
        let end = ((c + 1) * CHUNK).min(corpus.sentences.len());
        for (s, &ws) in w.iter().enumerate().take(end).skip(c * CHUNK) {
            let k = conditional_parse_prob(dist, s)?;
            for (f, kx) in corpus.sentences[s].features.iter().zip(k) {
                for (i, v) in f.iter() {
                    acc[i] += ws * kx * v;
                }
            }
        }
        Ok(acc)
    };
    let n_chunks = corpus.sentences.len().div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(chunk_sum)
                .collect::<Result<_>>()
        })?
    } else {
        (0..n_chunks).map(chunk_sum).collect::<Result<_>>()?
    };
    let mut out = vec![0.0; dim];
    for p in partials {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    Ok(out)
}

/// `dL/dlambda_i = p~[k[nu_i]] - p[nu_i]`.
pub fn likelihood_gradient(model: &LogLinearModel, corpus: &FeaturizedCorpus) -> Result<Vec<f64>> {
    let dist = model.normalize(corpus)?;
    let num = conditional_expectation(corpus, &dist, 1)?;
    let den = model_expectation(corpus, &dist)?;
    Ok(num.iter().zip(&den).map(|(a, b)| a - b).collect())
}

/// The constant total `K`, after checking that the corpus really has it and
/// that every value is nonnegative.
fn check_constant_total(registry: &PropertyRegistry, corpus: &FeaturizedCorpus) -> Result<f64> {
    let k = registry
        .correction_k()
        .ok_or_else(|| Error::Config("registry lacks the correction property".into()))?;
    for s in &corpus.sentences {
        for (j, f) in s.features.iter().enumerate() {
            if let Some((i, v)) = f.iter().find(|&(_, v)| v < 0.0) {
                return Err(Error::Data(format!(
                    "{}/{}: negative value {v} for property {i}",
                    s.sentence_id, s.parse_ids[j]
                )));
            }
            let total = f.sum();
            if (total - k).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::Data(format!(
                    "{}/{}: feature total {total} differs from K = {k}",
                    s.sentence_id, s.parse_ids[j]
                )));
            }
        }
    }
    Ok(k)
}

struct StepOutput {
    model: LogLinearModel,
    gamma: Vec<f64>,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    dist: ParseDistribution,
    log_likelihood: f64,
}

fn step(
    model: &LogLinearModel,
    corpus: &FeaturizedCorpus,
    dist: &ParseDistribution,
    k: f64,
    w: &[f64],
    config: &TrainingConfig,
) -> Result<StepOutput> {
    let numerator = conditional_expectation(corpus, dist, config.threads)?;
    let denominator = model_expectation(corpus, dist)?;
    let floor = config.expectation_floor;
    let clamp = config.gamma_clamp.unwrap_or(20.0 / k);
    let gamma: Vec<f64> = numerator
        .iter()
        .zip(&denominator)
        .map(|(&num, &den)| {
            if k <= 0.0 || num < floor {
                0.0
            } else {
                ((num.max(floor) / den.max(floor)).ln() / k).clamp(-clamp, clamp)
            }
        })
        .collect();
    let lambda: Vec<f64> = model
        .lambda()
        .iter()
        .zip(&gamma)
        .map(|(l, g)| l + g)
        .collect();
    let next = model.with_lambda(lambda)?;
    let next_dist = next.normalize(corpus)?;
    let log_likelihood = likelihood_from(&next_dist, corpus, w)?;
    Ok(StepOutput {
        model: next,
        gamma,
        numerator,
        denominator,
        dist: next_dist,
        log_likelihood,
    })
}

/// One IM update of `model` on the universe `corpus`.
pub fn im_step(
    model: &LogLinearModel,
    corpus: &FeaturizedCorpus,
    config: &TrainingConfig,
) -> Result<ImStep> {
    config.validate()?;
    let k = check_constant_total(model.registry(), corpus)?;
    let w = weights(corpus)?;
    let dist = model.normalize(corpus)?;
    let out = step(model, corpus, &dist, k, &w, config)?;
    Ok(ImStep {
        model: out.model,
        gamma: out.gamma,
        numerator: out.numerator,
        denominator: out.denominator,
        log_likelihood: out.log_likelihood,
    })
}

pub fn initial_lambda(init: Init, n: usize) -> Vec<f64> {
    match init {
        Init::UniformZero => vec![0.0; n],
        Init::Random { range, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    if range > 0.0 {
                        rng.gen_range(-range..=range)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

/// Iterates IM steps from the configured start until the likelihood gain
/// drops below tolerance or the iteration budget is spent. Zero-weight
/// sentences are dropped first; the rest form the universe.
pub fn train(
    corpus: &FeaturizedCorpus,
    registry: Arc<PropertyRegistry>,
    config: &TrainingConfig,
) -> Result<(LogLinearModel, TrainingTrace)> {
    config.validate()?;
    let corpus = corpus.universe();
    if corpus.sentences.is_empty() {
        return Err(Error::EmptyCorpus(" (no positively weighted sentences)"));
    }
    if corpus.dim != registry.len() {
        return Err(Error::Dimension {
            expected: registry.len(),
            found: corpus.dim,
        });
    }
    let k = check_constant_total(&registry, &corpus)?;
    let w = weights(&corpus)?;
    let lambda = initial_lambda(config.init, registry.len());
    let mut model = LogLinearModel::new(
        registry,
        lambda,
        crate::model::Reference::Uniform,
        corpus.n_parses(),
    )?;
    let mut dist = model.normalize(&corpus)?;
    let mut ll = likelihood_from(&dist, &corpus, &w)?;
    let mut trace = TrainingTrace::default();
    trace.records.push(IterationRecord {
        iteration: 0,
        log_likelihood: ll,
        max_gamma: 0.0,
    });

    for t in 1..=config.max_iterations {
        let out = step(&model, &corpus, &dist, k, &w, config)?;
        if out.log_likelihood < ll - MONOTONICITY_SLACK {
            return Err(Error::LikelihoodDecrease {
                iteration: t,
                previous: ll,
                current: out.log_likelihood,
            });
        }
        let delta = out.log_likelihood - ll;
        model = out.model;
        dist = out.dist;
        ll = out.log_likelihood;
        trace.records.push(IterationRecord {
            iteration: t,
            log_likelihood: ll,
            max_gamma: out.gamma.iter().fold(0.0, |m, g| m.max(g.abs())),
        });
        if t % config.checkpoint_every == 0 {
            trace.checkpoints.push(Checkpoint {
                iteration: t,
                lambda: model.lambda().to_vec(),
            });
        }
        if delta.abs() < config.likelihood_tolerance {
            trace.converged = true;
            break;
        }
    }
    let last = trace.records.last().map_or(0, |r| r.iteration);
    if trace.checkpoints.last().map(|c| c.iteration) != Some(last) {
        trace.checkpoints.push(Checkpoint {
            iteration: last,
            lambda: model.lambda().to_vec(),
        });
    }
    Ok((model, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitComparison {
    pub uniform_initial_l: f64,
    pub uniform_final_l: f64,
    pub random_initial_ls: Vec<f64>,
    pub random_final_ls: Vec<f64>,
    /// Fraction of random runs whose final likelihood does not exceed the
    /// uniform run's by more than `tie_slack`. Zero when there are no
    /// random runs.
    pub win_rate: f64,
    pub tie_slack: f64,
}

/// Trains once from `lambda = 0` and once per seed `base_seed + i` from a
/// random start on `[-range, range]`.
#[allow(clippy::too_many_arguments)]
pub fn compare_inits(
    corpus: &FeaturizedCorpus,
    registry: Arc<PropertyRegistry>,
    config: &TrainingConfig,
    n_random_seeds: usize,
    range: f64,
    base_seed: u64,
    tie_slack: f64,
) -> Result<InitComparison> {
    let uniform_cfg = TrainingConfig {
        init: Init::UniformZero,
        ..config.clone()
    };
    let (_, ut) = train(corpus, Arc::clone(&registry), &uniform_cfg)?;
    let mut random_initial_ls = Vec::with_capacity(n_random_seeds);
    let mut random_final_ls = Vec::with_capacity(n_random_seeds);
    for i in 0..n_random_seeds {
        let cfg = TrainingConfig {
            init: Init::Random {
                range,
                seed: base_seed + i as u64,
            },
            ..config.clone()
        };
        let (_, rt) = train(corpus, Arc::clone(&registry), &cfg)?;
        random_initial_ls.push(rt.initial_likelihood());
        random_final_ls.push(rt.final_likelihood());
    }
    let uniform_final_l = ut.final_likelihood();
    let wins = random_final_ls
        .iter()
        .filter(|&&l| l <= uniform_final_l + tie_slack)
        .count();
    Ok(InitComparison {
        uniform_initial_l: ut.initial_likelihood(),
        uniform_final_l,
        random_initial_ls,
        random_final_ls,
        win_rate: if n_random_seeds == 0 {
            0.0
        } else {
            wins as f64 / n_random_seeds as f64
        },
        tie_slack,
    })
}
