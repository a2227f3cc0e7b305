//! Log-linear measure over the finite parse universe of a training corpus:
//! `p(x) = exp(lambda . nu(x)) p0(x) / Z`.
//!
//! Normalization runs over the universe only. Parses outside it (test data)
//! are ranked by their unnormalized scores.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::properties::{FeaturizedCorpus, FeaturizedSentence, PropertyRegistry};
use crate::sparse::SparseVector;

pub const MODEL_FORMAT: &str = "forest-model";
pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

/// Reference distribution `p0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Uniform,
    /// Positive per-parse weights in universe order (sentence by sentence);
    /// they need not be normalized.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearModel {
    lambda: Vec<f64>,
    registry: Arc<PropertyRegistry>,
    reference: Reference,
    universe_size: usize,
}

impl LogLinearModel {
    pub fn new(
        registry: Arc<PropertyRegistry>,
        lambda: Vec<f64>,
        reference: Reference,
        universe_size: usize,
    ) -> Result<Self> {
        if lambda.len() != registry.len() {
            return Err(Error::Dimension {
                expected: registry.len(),
                found: lambda.len(),
            });
        }
        if let Some(bad) = lambda.iter().find(|l| !l.is_finite()) {
            return Err(Error::Data(format!("non-finite parameter {bad}")));
        }
        if universe_size == 0 {
            return Err(Error::Data("empty parse universe".into()));
        }
        if let Reference::Explicit(w) = &reference {
            if w.len() != universe_size {
                return Err(Error::Dimension {
                    expected: universe_size,
                    found: w.len(),
                });
            }
            if let Some(i) = w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Data(format!(
                    "reference weight {i} must be positive"
                )));
            }
        }
        Ok(LogLinearModel {
            lambda,
            registry,
            reference,
            universe_size,
        })
    }

    /// All parameters zero: with a uniform reference this is the
    /// maximum-entropy model over the universe.
    pub fn zeros(registry: Arc<PropertyRegistry>, universe_size: usize) -> Result<Self> {
        let n = registry.len();
        Self::new(registry, vec![0.0; n], Reference::Uniform, universe_size)
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn registry(&self) -> &Arc<PropertyRegistry> {
        &self.registry
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn with_lambda(&self, lambda: Vec<f64>) -> Result<Self> {
        Self::new(
            Arc::clone(&self.registry),
            lambda,
            self.reference.clone(),
            self.universe_size,
        )
    }

    fn check_width(&self, features: &SparseVector) -> Result<()> {
        if features.width() > self.lambda.len() {
            return Err(Error::Dimension {
                expected: self.lambda.len(),
                found: features.width(),
            });
        }
        Ok(())
    }

    /// `lambda . nu(x)`.
    pub fn linear_score(&self, features: &SparseVector) -> Result<f64> {
        self.check_width(features)?;
        Ok(features.dot(&self.lambda))
    }

    /// `lambda . nu(x) + ln p0(x)` under the uniform reference.
    pub fn score(&self, features: &SparseVector) -> Result<f64> {
        Ok(self.linear_score(features)? - (self.universe_size as f64).ln())
    }

    fn log_reference(&self) -> Vec<f64> {
        match &self.reference {
            Reference::Uniform => vec![-(self.universe_size as f64).ln(); self.universe_size],
            Reference::Explicit(w) => {
                let z: f64 = w.iter().sum();
                w.iter().map(|x| (x / z).ln()).collect()
            }
        }
    }

    /// The distribution over the universe, computed with max-score
    /// subtraction.
    pub fn normalize(&self, corpus: &FeaturizedCorpus) -> Result<ParseDistribution> {
        let n = corpus.n_parses();
        if n != self.universe_size {
            return Err(Error::Dimension {
                expected: self.universe_size,
                found: n,
            });
        }
        let log_p0 = self.log_reference();
        let mut flat = 0;
        let mut scores = Vec::with_capacity(corpus.sentences.len());
        for s in &corpus.sentences {
            let mut row = Vec::with_capacity(s.len());
            for f in &s.features {
                let score = self.linear_score(f)? + log_p0[flat];
                if !score.is_finite() {
                    return Err(Error::NonFinite {
                        sentence: s.sentence_id.clone(),
                        score,
                    });
                }
                row.push(score);
                flat += 1;
            }
            scores.push(row);
        }
        let log_z = log_sum_exp(scores.iter().flatten().copied());
        let log_probs: Vec<Vec<f64>> = scores
            .into_iter()
            .map(|row| row.into_iter().map(|s| s - log_z).collect())
            .collect();
        Ok(ParseDistribution::from_log(log_probs, log_z))
    }

    /// Unique argmax of the restricted scores when the best two differ by
    /// more than `tie_epsilon`; otherwise every parse within `tie_epsilon`
    /// of the maximum.
    pub fn disambiguate(
        &self,
        sentence: &FeaturizedSentence,
        tie_epsilon: f64,
    ) -> Result<Decision> {
        let scores = sentence
            .features
            .iter()
            .map(|f| self.linear_score(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(decide(&scores, tie_epsilon))
    }
}

/// Decision rule over raw log-scores.
pub fn decide(scores: &[f64], tie_epsilon: f64) -> Decision {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| max - s <= tie_epsilon)
        .map(|(i, _)| i)
        .collect();
    if top.len() == 1 {
        Decision::Unique(top[0])
    } else {
        Decision::DontKnow(top)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Unique(usize),
    DontKnow(Vec<usize>),
}

/// Probabilities over the universe, sentence by sentence, with their logs.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseDistribution {
    log_probs: Vec<Vec<f64>>,
    probs: Vec<Vec<f64>>,
    log_z: f64,
}

impl ParseDistribution {
    pub fn from_log(log_probs: Vec<Vec<f64>>, log_z: f64) -> Self {
        let probs = log_probs
            .iter()
            .map(|r| r.iter().map(|l| l.exp()).collect())
            .collect();
        ParseDistribution {
            log_probs,
            probs,
            log_z,
        }
    }

    /// Wraps explicit probabilities (assumed normalized).
    pub fn from_probs(probs: Vec<Vec<f64>>) -> Self {
        let log_probs = probs
            .iter()
            .map(|r| r.iter().map(|p| p.ln()).collect())
            .collect();
        ParseDistribution {
            log_probs,
            probs,
            log_z: 0.0,
        }
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[Vec<f64>] {
        &self.log_probs
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    /// `ln sum_{x in X(y)} p(x)` for sentence `s`.
    pub fn sentence_log_mass(&self, s: usize) -> f64 {
        log_sum_exp(self.log_probs[s].iter().copied())
    }

    /// `k(x|y) = p(x) / sum_{x' in X(y)} p(x')` for sentence `s`.
    pub fn conditional(&self, s: usize) -> Result<Vec<f64>> {
        conditional_parse_prob(self, s)
    }
}

/// Conditional probabilities of the parses of sentence `s`.
pub fn conditional_parse_prob(dist: &ParseDistribution, s: usize) -> Result<Vec<f64>> {
    let row = &dist.log_probs[s];
    let mass = log_sum_exp(row.iter().copied());
    if !mass.is_finite() {
        return Err(Error::ZeroMass {
            sentence: s.to_string(),
        });
    }
    Ok(row.iter().map(|l| (l - mass).exp()).collect())
}

/// `p[nu_i] = sum_x p(x) nu_i(x)`, summed in corpus order.
pub fn model_expectation(corpus: &FeaturizedCorpus, dist: &ParseDistribution) -> Result<Vec<f64>> {
    let mut out = vec![0.0; corpus.dim];
    for (s, probs) in corpus.sentences.iter().zip(dist.probs()) {
        if probs.len() != s.len() {
            return Err(Error::Dimension {
                expected: s.len(),
                found: probs.len(),
            });
        }
        for (f, &p) in s.features.iter().zip(probs) {
            for (i, v) in f.iter() {
                if i >= out.len() {
                    return Err(Error::Dimension {
                        expected: out.len(),
                        found: i + 1,
                    });
                }
                out[i] += p * v;
            }
        }
    }
    Ok(out)
}

/// `D(p || q) = sum p ln(p / q)`.
pub fn kl_divergence(p: &ParseDistribution, q: &ParseDistribution) -> Result<f64> {
    let (pp, qq) = (p.probs(), q.probs());
    if pp.len() != qq.len() || pp.iter().zip(qq).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Data("distributions over different universes".into()));
    }
    let mut d = 0.0;
    let mut flat = 0;
    for ((pr, qr), (lpr, lqr)) in pp
        .iter()
        .zip(qq)
        .zip(p.log_probs().iter().zip(q.log_probs()))
    {
        for j in 0..pr.len() {
            if pr[j] > 0.0 {
                if qr[j] <= 0.0 {
                    return Err(Error::Support(flat));
                }
                d += pr[j] * (lpr[j] - lqr[j]);
            }
            flat += 1;
        }
    }
    Ok(d.max(0.0))
}

pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    lambda: Vec<f64>,
    registry: PropertyRegistry,
    reference_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_weights: Option<Vec<f64>>,
    universe_size: usize,
}

impl LogLinearModel {
    /// Versioned JSON. Floats are written in shortest round-trip form, so a
    /// reload reproduces every parameter bit for bit.
    pub fn to_json(&self) -> Result<String> {
        let (kind, weights) = match &self.reference {
            Reference::Uniform => ("uniform", None),
            Reference::Explicit(w) => ("explicit", Some(w.clone())),
        };
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            lambda: self.lambda.clone(),
            registry: (*self.registry).clone(),
            reference_kind: kind.into(),
            reference_weights: weights,
            universe_size: self.universe_size,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Consistency(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile =
            serde_json::from_str(s).map_err(|e| Error::Data(format!("model file: {e}")))?;
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported model {:?} v{}",
                f.format, f.version
            )));
        }
        let reference = match (f.reference_kind.as_str(), f.reference_weights) {
            ("uniform", _) => Reference::Uniform,
            ("explicit", Some(w)) => Reference::Explicit(w),
            (kind, _) => return Err(Error::Data(format!("bad reference kind {kind:?}"))),
        };
        Self::new(Arc::new(f.registry), f.lambda, reference, f.universe_size)
    }
}
