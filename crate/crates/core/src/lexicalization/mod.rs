//! Class-based lexicalization: class-smoothed pair frequencies
//! `f_c(v, n) = max_c p(c|v,n) (f(v,n) + 1)` and the per-relation
//! pre-disambiguation property, which marks within a sentence the parses
//! whose head pair for a relation slot has the largest `f_c`.

mod clustering;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceEntry, Voice};
use crate::error::{Error, Result};

pub use clustering::{
    train_clusters, train_clusters_from, ClusterConfig, ClusterModel, PairCounts, CLUSTER_FORMAT,
    CLUSTER_VERSION,
};

pub const TABLE_FORMAT: &str = "forest-lex-table";
pub const TABLE_VERSION: u32 = 1;

/// Subject, direct object, indirect object, infinitival object, and the
/// oblique and adjunctival dative and accusative prepositions.
pub const DEFAULT_RELATIONS: &[&str] = &[
    "SUBJ", "OBJ", "OBJ2", "OBJ-INF", "OBL-DAT", "OBL-ACC", "ADJ-DAT", "ADJ-ACC",
];

/// Which (relation, voice, verb position) slots get a lexicalized property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub relations: Vec<String>,
    pub voices: Vec<Voice>,
    pub max_verb_position: u32,
    /// Combinations that never occur, e.g. a direct object in the passive.
    pub excluded: Vec<(String, Voice)>,
}

impl Default for RelationSpec {
    /// 8 relations x 2 voices minus passive OBJ, for the first three verbs:
    /// 45 slots.
    fn default() -> Self {
        RelationSpec {
            relations: DEFAULT_RELATIONS.iter().map(|s| s.to_string()).collect(),
            voices: vec![Voice::Active, Voice::Passive],
            max_verb_position: 3,
            excluded: vec![("OBJ".into(), Voice::Passive)],
        }
    }
}

impl RelationSpec {
    pub fn admits(&self, relation: &str, voice: Voice, position: u32) -> bool {
        position >= 1
            && position <= self.max_verb_position
            && self.voices.contains(&voice)
            && self.relations.iter().any(|r| r == relation)
            && !self
                .excluded
                .iter()
                .any(|(r, v)| r == relation && *v == voice)
    }

    /// Every admitted slot key.
    pub fn slots(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.relations {
            for &v in &self.voices {
                for p in 1..=self.max_verb_position {
                    if self.admits(r, v, p) {
                        out.push(slot_key(r, v, p));
                    }
                }
            }
        }
        out
    }
}

pub fn slot_key(relation: &str, voice: Voice, position: u32) -> String {
    format!("{relation}/{}/{position}", voice.as_str())
}

/// Class-based estimated frequencies for the counted pairs, with the
/// cluster model kept for pairs seen only at lookup time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableFile", into = "TableFile")]
pub struct LexFrequencyTable {
    model: ClusterModel,
    entries: BTreeMap<(String, String), (u64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    format: String,
    version: u32,
    cluster_model: ClusterModel,
    /// `[verb, noun, f, f_c]`
    entries: Vec<(String, String, u64, f64)>,
}

impl From<LexFrequencyTable> for TableFile {
    fn from(t: LexFrequencyTable) -> Self {
        TableFile {
            format: TABLE_FORMAT.into(),
            version: TABLE_VERSION,
            cluster_model: t.model,
            entries: t
                .entries
                .into_iter()
                .map(|((v, n), (f, fc))| (v, n, f, fc))
                .collect(),
        }
    }
}

impl TryFrom<TableFile> for LexFrequencyTable {
    type Error = String;

    fn try_from(t: TableFile) -> std::result::Result<Self, String> {
        if t.format != TABLE_FORMAT || t.version != TABLE_VERSION {
            return Err(format!(
                "unsupported frequency table {:?} v{}",
                t.format, t.version
            ));
        }
        Ok(LexFrequencyTable {
            model: t.cluster_model,
            entries: t
                .entries
                .into_iter()
                .map(|(v, n, f, fc)| ((v, n), (f, fc)))
                .collect(),
        })
    }
}

/// `max_c p(c|v,n) (f + 1)`.
fn class_frequency(model: &ClusterModel, verb: &str, noun: &str, f: u64) -> f64 {
    let best = model
        .class_membership(verb, noun)
        .into_iter()
        .fold(0.0, f64::max);
    best * (f as f64 + 1.0)
}

pub fn build_freq_table(model: &ClusterModel, counts: &PairCounts) -> LexFrequencyTable {
    let entries = counts
        .iter()
        .map(|(v, n, f)| {
            (
                (v.to_string(), n.to_string()),
                (f, class_frequency(model, v, n, f)),
            )
        })
        .collect();
    LexFrequencyTable {
        model: model.clone(),
        entries,
    }
}

impl LexFrequencyTable {
    /// `f_c(v, n)`; unseen pairs are computed with `f = 0`.
    pub fn get(&self, verb: &str, noun: &str) -> f64 {
        match self.entries.get(&(verb.to_string(), noun.to_string())) {
            Some(&(_, fc)) => fc,
            None => class_frequency(&self.model, verb, noun, 0),
        }
    }

    pub fn model(&self) -> &ClusterModel {
        &self.model
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u64, f64)> {
        self.entries
            .iter()
            .map(|((v, n), &(f, fc))| (v.as_str(), n.as_str(), f, fc))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Data(format!("frequency table: {e}")))
    }
}

/// A frequency table together with the slot inventory it feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub table: LexFrequencyTable,
    pub spec: RelationSpec,
}

/// Per-parse indicator features keyed by slot. For every slot occupied by
/// some parse of the sentence, the parses whose `f_c` on that slot is at
/// least every competitor's get 1; ties give several 1s and parses without
/// the slot get nothing.
pub fn lexicalized_properties(
    entry: &SentenceEntry,
    table: &LexFrequencyTable,
    spec: &RelationSpec,
) -> Vec<BTreeMap<String, f64>> {
    // slot -> f_c per parse (max over the parse's relations in that slot)
    let per_parse: Vec<BTreeMap<String, f64>> = entry
        .parses
        .iter()
        .map(|p| {
            let mut slots: BTreeMap<String, f64> = BTreeMap::new();
            for r in &p.relations {
                if !spec.admits(&r.relation, r.voice, r.verb_position) {
                    continue;
                }
                let fc = table.get(&r.verb, &r.noun);
                let e = slots
                    .entry(slot_key(&r.relation, r.voice, r.verb_position))
                    .or_insert(fc);
                *e = e.max(fc);
            }
            slots
        })
        .collect();

    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for slots in &per_parse {
        for (k, &v) in slots {
            let e = best.entry(k.as_str()).or_insert(v);
            *e = e.max(v);
        }
    }
    per_parse
        .iter()
        .map(|slots| {
            slots
                .iter()
                .filter(|(k, &v)| v >= best[k.as_str()])
                .map(|(k, _)| (k.clone(), 1.0))
                .collect()
        })
        .collect()
}
