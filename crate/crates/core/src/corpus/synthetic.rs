//! Seeded generator of desk-scale corpora with a hidden log-linear model.
//!
//! A pool of sentence types is created, each with a random candidate parse
//! set carrying small nonnegative integer features. Sentences are then drawn
//! by sampling a parse from the hidden model over the whole pool; the
//! drawn parse is the gold parse and its sentence type is what gets
//! observed. Observed sentence frequencies therefore follow the hidden
//! model's sentence masses, and gold indices follow its conditionals.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, ParseRecord, Relation, SentenceEntry, Voice};
use crate::error::{Error, Result};
use crate::lexicalization::DEFAULT_RELATIONS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_sentences: usize,
    /// Inclusive range of parse-set sizes.
    pub ambiguity_range: (usize, usize),
    pub n_features: usize,
    /// Relation annotations per parse.
    pub n_relations: usize,
    pub seed: u64,
    /// Number of distinct sentence types; defaults to `max(1, n_sentences / 4)`.
    pub pool_size: Option<usize>,
    /// Hidden parameters are drawn uniformly from `[-param_scale, param_scale]`
    /// when not given.
    pub param_scale: f64,
    pub max_feature_value: u32,
    /// Probability that a feature is nonzero on a parse.
    pub feature_density: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_sentences: 1000,
            ambiguity_range: (1, 8),
            n_features: 10,
            n_relations: 2,
            seed: 0,
            pool_size: None,
            param_scale: 1.0,
            max_feature_value: 3,
            feature_density: 0.5,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ambiguity_range;
        if self.n_sentences == 0 {
            return Err(Error::Config("n_sentences must be at least 1".into()));
        }
        if lo < 1 || hi > 50 || lo > hi {
            return Err(Error::Config(format!(
                "ambiguity range [{lo}, {hi}] must lie within [1, 50]"
            )));
        }
        if self.pool_size == Some(0) {
            return Err(Error::Config("pool_size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.feature_density) {
            return Err(Error::Config("feature_density must lie in [0, 1]".into()));
        }
        if !(self.param_scale.is_finite() && self.param_scale >= 0.0) {
            return Err(Error::Config("param_scale must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Everything needed to recompute the hidden model over a generated corpus:
/// the parameters apply to `precomputed_features` of every parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenModel {
    pub format: String,
    pub version: u32,
    pub config: SyntheticConfig,
    pub true_params: Vec<f64>,
}

impl HiddenModel {
    pub fn log_score(&self, parse: &ParseRecord) -> f64 {
        parse
            .precomputed_features
            .iter()
            .flatten()
            .map(|(&i, &v)| self.true_params.get(i).copied().unwrap_or(0.0) * v)
            .sum()
    }

    /// Conditional distribution of the hidden model over one parse set.
    pub fn conditional(&self, entry: &SentenceEntry) -> Vec<f64> {
        let scores: Vec<f64> = entry.parses.iter().map(|p| self.log_score(p)).collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

struct SentenceType {
    tokens: Vec<String>,
    parses: Vec<ParseRecord>,
    log_scores: Vec<f64>,
}

pub fn generate_synthetic(
    config: &SyntheticConfig,
    true_params: Option<Vec<f64>>,
) -> Result<(Corpus, HiddenModel)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = match true_params {
        Some(p) if p.len() != config.n_features => {
            return Err(Error::Dimension {
                expected: config.n_features,
                found: p.len(),
            })
        }
        Some(p) => p,
        None => (0..config.n_features)
            .map(|_| {
                if config.param_scale > 0.0 {
                    rng.gen_range(-config.param_scale..=config.param_scale)
                } else {
                    0.0
                }
            })
            .collect(),
    };

    let pool_size = config
        .pool_size
        .unwrap_or_else(|| (config.n_sentences / 4).max(1));
    let pool: Vec<SentenceType> = (0..pool_size)
        .map(|t| sentence_type(t, config, &params, &mut rng))
        .collect();

    let type_mass: Vec<f64> = {
        let lse: Vec<f64> = pool.iter().map(|t| log_sum_exp(&t.log_scores)).collect();
        let max = lse.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lse.iter().map(|l| (l - max).exp()).collect()
    };
    let type_dist =
        WeightedIndex::new(&type_mass).map_err(|e| Error::Consistency(e.to_string()))?;

    let weight = 1.0 / config.n_sentences as f64;
    let mut entries = Vec::with_capacity(config.n_sentences);
    for s in 0..config.n_sentences {
        let ty = &pool[type_dist.sample(&mut rng)];
        let max = ty
            .log_scores
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ty.log_scores.iter().map(|l| (l - max).exp()).collect();
        let gold = WeightedIndex::new(&w)
            .map_err(|e| Error::Consistency(e.to_string()))?
            .sample(&mut rng);
        entries.push(SentenceEntry {
            sentence_id: format!("s{s:06}"),
            tokens: ty.tokens.clone(),
            weight,
            gold_index: Some(gold),
            parses: ty.parses.clone(),
        });
    }

    let hidden = HiddenModel {
        format: "forest-hidden-model".into(),
        version: 1,
        config: config.clone(),
        true_params: params,
    };
    Ok((Corpus::new(entries)?, hidden))
}

fn sentence_type(
    t: usize,
    config: &SyntheticConfig,
    params: &[f64],
    rng: &mut ChaCha8Rng,
) -> SentenceType {
    let (lo, hi) = config.ambiguity_range;
    let k = rng.gen_range(lo..=hi);
    let len = rng.gen_range(3..=12);
    let mut tokens = vec![format!("t{t}")];
    tokens.extend((1..len).map(|_| format!("w{}", rng.gen_range(0..200))));

    let mut parses = Vec::with_capacity(k);
    let mut log_scores = Vec::with_capacity(k);
    for j in 0..k {
        let mut feats = BTreeMap::new();
        for i in 0..config.n_features {
            if config.max_feature_value > 0 && rng.gen_bool(config.feature_density) {
                feats.insert(i, rng.gen_range(1..=config.max_feature_value) as f64);
            }
        }
        let relations = (0..config.n_relations)
            .map(|r| Relation {
                relation: DEFAULT_RELATIONS[rng.gen_range(0..DEFAULT_RELATIONS.len())].into(),
                verb: format!("v{}", rng.gen_range(0..20)),
                noun: format!("n{}", rng.gen_range(0..60)),
                voice: if rng.gen_bool(0.8) {
                    Voice::Active
                } else {
                    Voice::Passive
                },
                verb_position: (r % 3) as u32 + 1,
            })
            // one verb per position inside a parse
            .fold(Vec::<Relation>::new(), |mut acc, mut r| {
                if let Some(prev) = acc.iter().find(|p| p.verb_position == r.verb_position) {
                    r.verb = prev.verb.clone();
                }
                acc.push(r);
                acc
            });
        log_scores.push(feats.iter().map(|(&i, &v)| params[i] * v).sum());
        parses.push(ParseRecord {
            parse_id: format!("p{j}"),
            cstructure: None,
            fstructure: None,
            relations,
            frame: Some(format!("frame{}", rng.gen_range(0..3))),
            precomputed_features: Some(feats),
        });
    }
    SentenceType {
        tokens,
        parses,
        log_scores,
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_corpus;

    fn bytes(c: &Corpus) -> Vec<u8> {
        let mut buf = Vec::new();
        write_corpus(c, &mut buf).unwrap();
        buf
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SyntheticConfig {
            n_sentences: 200,
            seed: 9,
            ..Default::default()
        };
        let (a, ha) = generate_synthetic(&cfg, None).unwrap();
        let (b, hb) = generate_synthetic(&cfg, None).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        assert_eq!(ha, hb);
        let (c, _) = generate_synthetic(&SyntheticConfig { seed: 10, ..cfg }, None).unwrap();
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn unit_ambiguity_forces_gold_zero() {
        let cfg = SyntheticConfig {
            n_sentences: 50,
            ambiguity_range: (1, 1),
            ..Default::default()
        };
        let (c, _) = generate_synthetic(&cfg, None).unwrap();
        assert!(c
            .entries()
            .iter()
            .all(|e| e.parses.len() == 1 && e.gold_index == Some(0)));
    }

    #[test]
    fn zero_params_give_uniform_gold() {
        let cfg = SyntheticConfig {
            n_sentences: 10_000,
            ambiguity_range: (4, 4),
            seed: 3,
            ..Default::default()
        };
        let (c, _) = generate_synthetic(&cfg, Some(vec![0.0; cfg.n_features])).unwrap();
        let mut freq = [0usize; 4];
        for e in c.entries() {
            freq[e.gold_index.unwrap()] += 1;
        }
        // binomial(10000, 0.25)
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for f in freq {
            assert!((f as f64 - 2500.0).abs() <= 3.0 * sigma, "{freq:?}");
        }
    }

    #[test]
    fn invalid_ranges() {
        for range in [(0, 3), (4, 2), (1, 51)] {
            let cfg = SyntheticConfig {
                ambiguity_range: range,
                ..Default::default()
            };
            assert!(matches!(
                generate_synthetic(&cfg, None),
                Err(Error::Config(_))
            ));
        }
        let cfg = SyntheticConfig {
            n_sentences: 0,
            ..Default::default()
        };
        assert!(generate_synthetic(&cfg, None).is_err());
    }

    #[test]
    fn top1_gold_rate_tracks_hidden_top1_mass() {
        let cfg = SyntheticConfig {
            n_sentences: 4000,
            ambiguity_range: (2, 6),
            seed: 21,
            param_scale: 1.5,
            ..Default::default()
        };
        let (c, hidden) = generate_synthetic(&cfg, None).unwrap();
        let mut hits = 0.0;
        let mut expected = 0.0;
        let mut var = 0.0;
        for e in c.entries() {
            let k = hidden.conditional(e);
            let (best, pmax) =
                k.iter().enumerate().fold(
                    (0, f64::MIN),
                    |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
                );
            if e.gold_index == Some(best) {
                hits += 1.0;
            }
            expected += pmax;
            var += pmax * (1.0 - pmax);
        }
        assert!(
            (hits - expected).abs() <= 3.0 * var.sqrt(),
            "{hits} vs {expected}"
        );
    }
}
