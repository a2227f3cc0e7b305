#![allow(dead_code)]

use std::sync::Arc;

use forestlm::corpus::{Corpus, ParseRecord, SentenceEntry};
use forestlm::properties::{FeaturizedCorpus, PropertyRegistry};
use forestlm::sparse::SparseVector;
use rand::Rng;

/// Dense pre-correction feature vectors: sentence -> parse -> feature.
pub type Dense = Vec<Vec<Vec<f64>>>;

pub struct Instance {
    pub dense: Dense,
    pub weights: Vec<f64>,
    pub n_features: usize,
}

impl Instance {
    /// Featurized form with the correction column appended.
    pub fn featurize(&self) -> (Arc<PropertyRegistry>, FeaturizedCorpus) {
        let sentences = self
            .dense
            .iter()
            .zip(&self.weights)
            .map(|(parses, &w)| {
                let vs = parses
                    .iter()
                    .map(|f| SparseVector::from_pairs(f.iter().copied().enumerate()))
                    .collect();
                (w, Some(0), vs)
            })
            .collect();
        let (r, fc) = FeaturizedCorpus::from_vectors(self.n_features, sentences).with_correction();
        (Arc::new(r), fc)
    }

    pub fn n_parses(&self) -> usize {
        self.dense.iter().map(Vec::len).sum()
    }

    /// Same data as a corpus of flat records.
    pub fn corpus(&self) -> Corpus {
        let entries = self
            .dense
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(s, (parses, &w))| SentenceEntry {
                sentence_id: format!("s{s}"),
                tokens: vec!["w".into()],
                weight: w,
                gold_index: Some(0),
                parses: parses
                    .iter()
                    .enumerate()
                    .map(|(j, f)| ParseRecord {
                        parse_id: format!("p{j}"),
                        cstructure: None,
                        fstructure: None,
                        relations: vec![],
                        frame: None,
                        precomputed_features: Some(
                            f.iter()
                                .enumerate()
                                .filter(|(_, v)| **v != 0.0)
                                .map(|(i, v)| (i, *v))
                                .collect(),
                        ),
                    })
                    .collect(),
            })
            .collect();
        Corpus::new(entries).expect("valid instance")
    }
}

/// Random instance with integer feature values in `0..=max_value`.
pub fn random_instance(
    rng: &mut impl Rng,
    n_sentences: usize,
    max_ambiguity: usize,
    n_features: usize,
    max_value: u32,
) -> Instance {
    let dense = (0..n_sentences)
        .map(|_| {
            let k = rng.gen_range(1..=max_ambiguity);
            (0..k)
                .map(|_| {
                    (0..n_features)
                        .map(|_| {
                            if rng.gen_bool(0.5) {
                                rng.gen_range(0..=max_value) as f64
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let raw: Vec<f64> = (0..n_sentences).map(|_| rng.gen_range(0.1..1.0)).collect();
    let z: f64 = raw.iter().sum();
    Instance {
        dense,
        weights: raw.into_iter().map(|w| w / z).collect(),
        n_features,
    }
}

/// Incomplete-data log-likelihood computed directly from dense vectors,
/// without the correction column.
pub fn oracle_likelihood(inst: &Instance, lambda: &[f64]) -> f64 {
    let scores: Vec<Vec<f64>> = inst
        .dense
        .iter()
        .map(|ps| {
            ps.iter()
                .map(|f| f.iter().zip(lambda).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let max = scores
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let log_z = max
        + scores
            .iter()
            .flatten()
            .map(|s| (s - max).exp())
            .sum::<f64>()
            .ln();
    scores
        .iter()
        .zip(&inst.weights)
        .map(|(row, w)| {
            let m = row.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
            let mass = m + row.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
            w * (mass - log_z)
        })
        .sum()
}

fn grid_best(
    inst: &Instance,
    center: &[f64],
    half_width: f64,
    step: f64,
    best: &mut (f64, Vec<f64>),
) {
    let n = center.len();
    let m = (half_width / step).round() as i64;
    let side = (2 * m + 1) as usize;
    let mut idx = vec![0usize; n];
    let mut lambda = vec![0.0; n];
    loop {
        for d in 0..n {
            lambda[d] = center[d] + (idx[d] as i64 - m) as f64 * step;
        }
        let l = oracle_likelihood(inst, &lambda);
        if l > best.0 {
            *best = (l, lambda.clone());
        }
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] < side {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Maximum of the likelihood by grid search: step 0.1 over `[-5, 5]^n`,
/// then step 0.01 around the best cell, then compass search from there
/// (unconstrained, down to step 1e-10).
pub fn grid_oracle(inst: &Instance) -> (f64, Vec<f64>) {
    let n = inst.n_features;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    grid_best(inst, &vec![0.0; n], 5.0, 0.1, &mut best);
    let c = best.1.clone();
    grid_best(inst, &c, 0.1, 0.01, &mut best);
    let (mut l, mut x) = best;
    let mut step = 0.01;
    while step > 1e-10 {
        let mut moved = false;
        for d in 0..n {
            for dir in [1.0, -1.0] {
                loop {
                    let mut y = x.clone();
                    y[d] += dir * step;
                    let ly = oracle_likelihood(inst, &y);
                    if ly > l {
                        l = ly;
                        x = y;
                        moved = true;
                        step *= 2.0;
                    } else {
                        break;
                    }
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (l, x)
}
