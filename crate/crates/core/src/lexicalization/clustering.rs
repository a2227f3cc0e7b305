//! Latent-class model over (verb, noun) pairs,
//! `p(v, n) = sum_c p(c) p(v|c) p(n|c)`, estimated by EM from pair
//! frequencies.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const CLUSTER_FORMAT: &str = "forest-clusters";
pub const CLUSTER_VERSION: u32 = 1;

/// Pair frequencies `f(v, n)` with their vocabularies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairCounts {
    counts: BTreeMap<(String, String), u64>,
}

impl PairCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, verb: impl Into<String>, noun: impl Into<String>, count: u64) {
        *self.counts.entry((verb.into(), noun.into())).or_insert(0) += count;
    }

    pub fn get(&self, verb: &str, noun: &str) -> u64 {
        self.counts
            .get(&(verb.to_string(), noun.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.counts
            .iter()
            .map(|((v, n), &c)| (v.as_str(), n.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Sorted verb and noun vocabularies.
    pub fn vocabularies(&self) -> (Vec<String>, Vec<String>) {
        let mut verbs: Vec<String> = self.counts.keys().map(|(v, _)| v.clone()).collect();
        let mut nouns: Vec<String> = self.counts.keys().map(|(_, n)| n.clone()).collect();
        verbs.sort();
        verbs.dedup();
        nouns.sort();
        nouns.dedup();
        (verbs, nouns)
    }

    /// Counts every distinct (verb, noun) pair once per sentence, over the
    /// relations of all its parses.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut out = PairCounts::new();
        for e in corpus.entries() {
            let pairs: std::collections::BTreeSet<(&str, &str)> = e
                .parses
                .iter()
                .flat_map(|p| &p.relations)
                .map(|r| (r.verb.as_str(), r.noun.as_str()))
                .collect();
            for (v, n) in pairs {
                out.add(v, n, 1);
            }
        }
        out
    }

    /// Reads `verb<TAB>noun<TAB>count` lines. Blank lines are skipped.
    pub fn read_tsv(reader: impl BufRead) -> Result<Self> {
        let mut out = PairCounts::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<pair counts>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::malformed(
                    i + 1,
                    "line",
                    "expected verb<TAB>noun<TAB>count",
                ));
            }
            let count: u64 = fields[2]
                .trim()
                .parse()
                .map_err(|e| Error::malformed(i + 1, "count", e))?;
            out.add(fields[0], fields[1], count);
        }
        Ok(out)
    }

    pub fn write_tsv(&self, mut w: impl Write) -> Result<()> {
        for (v, n, c) in self.iter() {
            writeln!(w, "{v}\t{n}\t{c}").map_err(|e| Error::io("<pair counts>", e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub n_classes: usize,
    pub max_iterations: usize,
    /// Stop once the likelihood gain falls below `tolerance * max(1, |L|)`.
    pub tolerance: f64,
    pub seed: u64,
    /// Relative amplitude of the random perturbation of the uniform start.
    pub jitter: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            n_classes: 32,
            max_iterations: 200,
            tolerance: 1e-6,
            seed: 0,
            jitter: 0.1,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 {
            return Err(Error::Config("n_classes must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::Config("jitter must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClusterFile", into = "ClusterFile")]
pub struct ClusterModel {
    priors: Vec<f64>,
    /// `verb_given_class[c][v]`
    verb_given_class: Vec<Vec<f64>>,
    /// `noun_given_class[c][n]`
    noun_given_class: Vec<Vec<f64>>,
    verbs: Vec<String>,
    nouns: Vec<String>,
    verb_index: HashMap<String, usize>,
    noun_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct ClusterFile {
    format: String,
    version: u32,
    n_classes: usize,
    priors: Vec<f64>,
    verbs: Vec<String>,
    nouns: Vec<String>,
    verb_given_class: Vec<Vec<f64>>,
    noun_given_class: Vec<Vec<f64>>,
}

impl From<ClusterModel> for ClusterFile {
    fn from(m: ClusterModel) -> Self {
        ClusterFile {
            format: CLUSTER_FORMAT.into(),
            version: CLUSTER_VERSION,
            n_classes: m.priors.len(),
            priors: m.priors,
            verbs: m.verbs,
            nouns: m.nouns,
            verb_given_class: m.verb_given_class,
            noun_given_class: m.noun_given_class,
        }
    }
}

impl TryFrom<ClusterFile> for ClusterModel {
    type Error = String;

    fn try_from(f: ClusterFile) -> std::result::Result<Self, String> {
        if f.format != CLUSTER_FORMAT || f.version != CLUSTER_VERSION {
            return Err(format!(
                "unsupported cluster model {:?} v{}",
                f.format, f.version
            ));
        }
        if f.priors.len() != f.n_classes {
            return Err("n_classes does not match priors".into());
        }
        ClusterModel::new(
            f.priors,
            f.verb_given_class,
            f.noun_given_class,
            f.verbs,
            f.nouns,
        )
        .map_err(|e| e.to_string())
    }
}

fn sums_to_one(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x >= 0.0 && x.is_finite()) && (xs.iter().sum::<f64>() - 1.0).abs() <= 1e-10
}

impl ClusterModel {
    /// Validates shapes and that every distribution sums to one.
    pub fn new(
        priors: Vec<f64>,
        verb_given_class: Vec<Vec<f64>>,
        noun_given_class: Vec<Vec<f64>>,
        verbs: Vec<String>,
        nouns: Vec<String>,
    ) -> Result<Self> {
        let c = priors.len();
        if c == 0 || verb_given_class.len() != c || noun_given_class.len() != c {
            return Err(Error::Data("cluster model shape mismatch".into()));
        }
        if verb_given_class.iter().any(|r| r.len() != verbs.len())
            || noun_given_class.iter().any(|r| r.len() != nouns.len())
        {
            return Err(Error::Data("emission width differs from vocabulary".into()));
        }
        if !sums_to_one(&priors)
            || !verb_given_class.iter().all(|r| sums_to_one(r))
            || !noun_given_class.iter().all(|r| sums_to_one(r))
        {
            return Err(Error::Data("cluster distributions must sum to 1".into()));
        }
        let verb_index = verbs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let noun_index = nouns
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        Ok(ClusterModel {
            priors,
            verb_given_class,
            noun_given_class,
            verbs,
            nouns,
            verb_index,
            noun_index,
        })
    }

    /// Every distribution uniform.
    pub fn uniform(n_classes: usize, verbs: Vec<String>, nouns: Vec<String>) -> Result<Self> {
        let row = |n: usize| vec![1.0 / n as f64; n];
        Self::new(
            row(n_classes),
            vec![row(verbs.len()); n_classes],
            vec![row(nouns.len()); n_classes],
            verbs,
            nouns,
        )
    }

    /// Uniform start with multiplicative jitter `1 + jitter * u`,
    /// `u ~ U[0, 1)`, on every emission; priors stay uniform.
    pub fn jittered(
        n_classes: usize,
        verbs: Vec<String>,
        nouns: Vec<String>,
        jitter: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut row = |n: usize| {
            let raw: Vec<f64> = (0..n).map(|_| 1.0 + jitter * rng.gen::<f64>()).collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / z).collect::<Vec<f64>>()
        };
        let vg = (0..n_classes).map(|_| row(verbs.len())).collect();
        let ng = (0..n_classes).map(|_| row(nouns.len())).collect();
        Self::new(
            vec![1.0 / n_classes as f64; n_classes],
            vg,
            ng,
            verbs,
            nouns,
        )
    }

    pub fn n_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn verb_given_class(&self, class: usize) -> &[f64] {
        &self.verb_given_class[class]
    }

    pub fn noun_given_class(&self, class: usize) -> &[f64] {
        &self.noun_given_class[class]
    }

    pub fn verbs(&self) -> &[String] {
        &self.verbs
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    fn joint_by_class(&self, v: Option<usize>, n: Option<usize>) -> Vec<f64> {
        (0..self.n_classes())
            .map(|c| {
                self.priors[c]
                    * v.map_or(1.0, |v| self.verb_given_class[c][v])
                    * n.map_or(1.0, |n| self.noun_given_class[c][n])
            })
            .collect()
    }

    /// Posterior `p(c | v, n)`. An out-of-vocabulary word drops its factor,
    /// so a fully unknown pair gets the class priors.
    pub fn class_membership(&self, verb: &str, noun: &str) -> Vec<f64> {
        let joint = self.joint_by_class(
            self.verb_index.get(verb).copied(),
            self.noun_index.get(noun).copied(),
        );
        let z: f64 = joint.iter().sum();
        if z > 0.0 {
            joint.into_iter().map(|x| x / z).collect()
        } else {
            self.priors.clone()
        }
    }

    /// `sum_{v,n} f(v,n) ln p(v,n)`.
    pub fn log_likelihood(&self, counts: &PairCounts) -> f64 {
        counts
            .iter()
            .map(|(v, n, f)| {
                let p: f64 = self
                    .joint_by_class(
                        self.verb_index.get(v).copied(),
                        self.noun_index.get(n).copied(),
                    )
                    .iter()
                    .sum();
                f as f64 * p.ln()
            })
            .sum()
    }

    /// One EM iteration. Classes that receive no responsibility keep their
    /// previous emissions.
    pub fn em_step(&self, counts: &PairCounts) -> Result<ClusterModel> {
        let k = self.n_classes();
        let mut class_mass = vec![0.0; k];
        let mut verb_mass = vec![vec![0.0; self.verbs.len()]; k];
        let mut noun_mass = vec![vec![0.0; self.nouns.len()]; k];
        for (v, n, f) in counts.iter() {
            let (Some(&vi), Some(&ni)) = (self.verb_index.get(v), self.noun_index.get(n)) else {
                return Err(Error::Data(format!(
                    "pair ({v}, {n}) outside the model vocabulary"
                )));
            };
            let resp = self.class_membership(v, n);
            for c in 0..k {
                let w = f as f64 * resp[c];
                class_mass[c] += w;
                verb_mass[c][vi] += w;
                noun_mass[c][ni] += w;
            }
        }
        let total: f64 = class_mass.iter().sum();
        if total <= 0.0 {
            return Err(Error::Data("pair counts carry no mass".into()));
        }
        let mut next = self.clone();
        for c in 0..k {
            next.priors[c] = class_mass[c] / total;
            if class_mass[c] > 0.0 {
                next.verb_given_class[c] = verb_mass[c].iter().map(|x| x / class_mass[c]).collect();
                next.noun_given_class[c] = noun_mass[c].iter().map(|x| x / class_mass[c]).collect();
            }
        }
        Ok(next)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Data(format!("cluster model: {e}")))
    }
}

/// Runs EM from the jittered uniform start. Returns the model and the
/// log-likelihood of every visited parameter value, starting with the
/// initial one.
pub fn train_clusters(
    counts: &PairCounts,
    config: &ClusterConfig,
) -> Result<(ClusterModel, Vec<f64>)> {
    config.validate()?;
    if counts.is_empty() || counts.total() == 0 {
        return Err(Error::Data("pair counts are empty".into()));
    }
    let (verbs, nouns) = counts.vocabularies();
    let init = ClusterModel::jittered(config.n_classes, verbs, nouns, config.jitter, config.seed)?;
    train_clusters_from(init, counts, config)
}

/// EM from an explicit starting model.
pub fn train_clusters_from(
    init: ClusterModel,
    counts: &PairCounts,
    config: &ClusterConfig,
) -> Result<(ClusterModel, Vec<f64>)> {
    config.validate()?;
    let mut model = init;
    let mut trace = vec![model.log_likelihood(counts)];
    for _ in 0..config.max_iterations {
        let next = model.em_step(counts)?;
        let ll = next.log_likelihood(counts);
        let prev = *trace.last().expect("trace starts non-empty");
        if ll < prev - 1e-10 * prev.abs().max(1.0) {
            return Err(Error::LikelihoodDecrease {
                iteration: trace.len(),
                previous: prev,
                current: ll,
            });
        }
        model = next;
        trace.push(ll);
        if (ll - prev).abs() < config.tolerance * ll.abs().max(1.0) {
            break;
        }
    }
    Ok((model, trace))
}
