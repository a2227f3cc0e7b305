//! Sentences, their candidate parse sets, and the parse records themselves.
//!
//! A [`Corpus`] is the empirical sample: every [`SentenceEntry`] carries the
//! finite set of analyses the grammar produced for it and an empirical weight.
//! The union of the parse sets of all positively weighted entries is the
//! universe over which a log-linear model is normalized.

mod io;
mod synthetic;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, read_corpus, write_corpus, LoadOptions, CORPUS_FORMAT, CORPUS_VERSION};
pub use synthetic::{generate_synthetic, HiddenModel, SyntheticConfig};

/// Constituent tree. Encoded in JSON as nested `[label, [children...]]`
/// arrays with plain strings as leaves.
///
/// A node label may carry a grammatical-function annotation after a colon,
/// e.g. `"PP:ADJUNCT"` or `"NP:OBJ"`. The part before the colon is the
/// category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CTree {
    Leaf(String),
    Node(String, Vec<CTree>),
}

impl CTree {
    pub fn node(label: impl Into<String>, children: Vec<CTree>) -> Self {
        CTree::Node(label.into(), children)
    }

    pub fn leaf(word: impl Into<String>) -> Self {
        CTree::Leaf(word.into())
    }

    pub fn label(&self) -> &str {
        match self {
            CTree::Leaf(w) => w,
            CTree::Node(l, _) => l,
        }
    }

    /// Label with any function annotation stripped.
    pub fn category(&self) -> &str {
        match self {
            CTree::Leaf(w) => w,
            CTree::Node(l, _) => l.split_once(':').map_or(l.as_str(), |(c, _)| c),
        }
    }

    /// Function annotation of a nonterminal, if any.
    pub fn function(&self) -> Option<&str> {
        match self {
            CTree::Leaf(_) => None,
            CTree::Node(l, _) => l.split_once(':').map(|(_, f)| f),
        }
    }

    pub fn children(&self) -> &[CTree] {
        match self {
            CTree::Leaf(_) => &[],
            CTree::Node(_, c) => c,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, CTree::Leaf(_))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            CTree::Leaf(_) => 1,
            CTree::Node(_, c) => c.iter().map(CTree::leaf_count).sum(),
        }
    }

    /// Pre-order traversal over every node including leaves.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a CTree)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

/// Simplified f-structure: atomic attribute-value pairs addressed by path,
/// plus the grammatical functions present.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FStructure {
    #[serde(default)]
    pub pairs: Vec<(String, String)>,
    #[serde(default)]
    pub functions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Voice {
    Active,
    Passive,
}

impl Voice {
    pub fn as_str(self) -> &'static str {
        match self {
            Voice::Active => "active",
            Voice::Passive => "passive",
        }
    }
}

/// Head annotation of one grammatical relation: the verbal head and the
/// nominal head of the relation within a parse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub relation: String,
    pub verb: String,
    pub noun: String,
    pub voice: Voice,
    /// 1-based index of the verb in sentence order.
    pub verb_position: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseRecord {
    pub parse_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cstructure: Option<CTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fstructure: Option<FStructure>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precomputed_features: Option<BTreeMap<usize, f64>>,
}

impl ParseRecord {
    pub fn has_structure(&self) -> bool {
        self.cstructure.is_some() && self.fstructure.is_some()
    }

    /// Checks the record against the sentence it belongs to. The error
    /// message names the parse.
    pub fn validate(&self, n_tokens: usize) -> std::result::Result<(), String> {
        let id = &self.parse_id;
        if !self.has_structure() && self.precomputed_features.is_none() {
            return Err(format!(
                "parse {id:?} has neither cstructure+fstructure nor precomputed_features"
            ));
        }
        if let Some(tree) = &self.cstructure {
            let leaves = tree.leaf_count();
            if leaves != n_tokens {
                return Err(format!(
                    "parse {id:?} has {leaves} cstructure leaves for {n_tokens} tokens"
                ));
            }
        }
        let mut verbs: HashMap<u32, &str> = HashMap::new();
        for r in &self.relations {
            if r.verb_position == 0 {
                return Err(format!("parse {id:?}: verb_position starts at 1"));
            }
            match verbs.insert(r.verb_position, &r.verb) {
                Some(prev) if prev != r.verb => {
                    return Err(format!(
                        "parse {id:?}: verbs {prev:?} and {:?} share position {}",
                        r.verb, r.verb_position
                    ));
                }
                _ => {}
            }
        }
        if let Some(feats) = &self.precomputed_features {
            if let Some((i, v)) = feats.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                return Err(format!("parse {id:?}: feature {i} has invalid value {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceEntry {
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub weight: f64,
    #[serde(default)]
    pub gold_index: Option<usize>,
    pub parses: Vec<ParseRecord>,
}

impl SentenceEntry {
    pub fn ambiguity(&self) -> usize {
        self.parses.len()
    }

    pub fn gold(&self) -> Option<&ParseRecord> {
        self.gold_index.and_then(|i| self.parses.get(i))
    }

    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        if self.parses.is_empty() {
            return Err(("parses".into(), "sentence has no parses".into()));
        }
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(("weight".into(), format!("invalid weight {}", self.weight)));
        }
        if let Some(g) = self.gold_index {
            if g >= self.parses.len() {
                return Err((
                    "gold_index".into(),
                    format!("{g} out of range for {} parses", self.parses.len()),
                ));
            }
        }
        let mut seen = HashSet::new();
        for (i, p) in self.parses.iter().enumerate() {
            if !seen.insert(p.parse_id.as_str()) {
                return Err((
                    format!("parses[{i}].parse_id"),
                    format!("duplicate parse_id {:?}", p.parse_id),
                ));
            }
            p.validate(self.tokens.len())
                .map_err(|m| (format!("parses[{i}]"), m))?;
        }
        Ok(())
    }
}

/// A validated collection of sentence entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    entries: Vec<SentenceEntry>,
    universe_size: usize,
}

impl Corpus {
    /// Validates every entry and computes the universe size. Does not touch
    /// weights.
    pub fn new(entries: Vec<SentenceEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus(""));
        }
        let mut ids = HashSet::new();
        for e in &entries {
            e.validate().map_err(|(field, msg)| {
                Error::Data(format!("{}: {field}: {msg}", e.sentence_id))
            })?;
            if !ids.insert(e.sentence_id.as_str()) {
                return Err(Error::DuplicateSentence(e.sentence_id.clone()));
            }
        }
        let universe_size = entries
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| e.parses.len())
            .sum();
        Ok(Corpus {
            entries,
            universe_size,
        })
    }

    pub fn entries(&self) -> &[SentenceEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<SentenceEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of parses over all entries with positive weight.
    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// Rescales weights to sum to one. A corpus whose weights are all zero
    /// gets uniform weights.
    pub fn normalize_weights(mut self) -> Self {
        let total = self.total_weight();
        let n = self.entries.len() as f64;
        // already normalized up to summation error: leave untouched so
        // that normalizing twice is a no-op
        let settled = (total - 1.0).abs() <= f64::EPSILON * n.max(1.0);
        for e in self.entries.iter_mut().filter(|_| !settled) {
            e.weight = if total > 0.0 {
                e.weight / total
            } else {
                1.0 / n
            };
        }
        self.universe_size = self
            .entries
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| e.parses.len())
            .sum();
        self
    }

    /// Merges entries with identical tokens and parse sets into one entry
    /// carrying the summed weight. The first sentence_id is kept; a gold
    /// index survives only when all merged entries agree on it.
    pub fn aggregate_duplicates(self) -> Result<Self> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut merged: Vec<SentenceEntry> = Vec::with_capacity(self.entries.len());
        let mut gold_agrees: Vec<bool> = Vec::new();
        for e in self.entries {
            let key = serde_json::to_string(&(&e.tokens, &e.parses))
                .map_err(|err| Error::Consistency(err.to_string()))?;
            match index.get(&key) {
                Some(&i) => {
                    merged[i].weight += e.weight;
                    if merged[i].gold_index != e.gold_index {
                        gold_agrees[i] = false;
                    }
                }
                None => {
                    index.insert(key, merged.len());
                    merged.push(e);
                    gold_agrees.push(true);
                }
            }
        }
        for (e, agrees) in merged.iter_mut().zip(gold_agrees) {
            if !agrees {
                e.gold_index = None;
            }
        }
        Corpus::new(merged)
    }

    /// Keeps entries whose parse count is at most `max_parses`.
    pub fn filter_ambiguity(self, max_parses: usize) -> Result<Self> {
        let kept: Vec<_> = self
            .entries
            .into_iter()
            .filter(|e| e.parses.len() <= max_parses)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyCorpus(" after ambiguity cutoff"));
        }
        Corpus::new(kept)
    }

    /// Splits into the first `n` entries and the rest, without touching
    /// weights.
    pub fn split_at(self, n: usize) -> Result<(Corpus, Corpus)> {
        let mut head = self.entries;
        let tail = head.split_off(n.min(head.len()));
        Ok((Corpus::new(head)?, Corpus::new(tail)?))
    }
}

/// Subcorpus of sentences with exactly one parse, usable as complete data.
/// Weights are renormalized and every gold index is set to 0.
pub fn extract_parsebank(corpus: &Corpus) -> Result<Corpus> {
    let entries: Vec<_> = corpus
        .entries
        .iter()
        .filter(|e| e.parses.len() == 1)
        .cloned()
        .map(|mut e| {
            e.gold_index = Some(0);
            e
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyCorpus(": no unambiguous sentences"));
    }
    Ok(Corpus::new(entries)?.normalize_weights())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_sentences: usize,
    pub mean_ambiguity: f64,
    pub mean_length: f64,
    pub universe_size: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let n = corpus.entries.len();
    let parses: usize = corpus.entries.iter().map(|e| e.parses.len()).sum();
    let tokens: usize = corpus.entries.iter().map(|e| e.tokens.len()).sum();
    CorpusStats {
        n_sentences: n,
        mean_ambiguity: parses as f64 / n as f64,
        mean_length: tokens as f64 / n as f64,
        universe_size: corpus.universe_size,
    }
}
