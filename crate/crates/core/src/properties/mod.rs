//! The property-function vector: template instantiation over a corpus,
//! sparse extraction, the correction property, and frequency-based
//! selection.

mod extract;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ParseRecord, SentenceEntry};
use crate::error::{Error, Result};
use crate::lexicalization::{lexicalized_properties, Lexicon};
use crate::sparse::SparseVector;

pub use extract::{
    complexity_bucket, structural_features, RawFeatures, ADJUNCT_KEY, ARGUMENT_KEY,
    COORDINATION_LABELS, COORD_KEY, NON_RIGHT_BRANCHING_KEY,
};

pub const REGISTRY_FORMAT: &str = "forest-registry";
pub const REGISTRY_VERSION: u32 = 1;
pub const CORRECTION_KEY: &str = "K-minus-total";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    Production,
    SubtreeAttachment,
    FstrAttribute,
    FstrAtomicPair,
    AttachmentComplexity,
    NonRightBranching,
    CoordNonParallel,
    /// Passthrough of a parse's `precomputed_features` entry.
    Precomputed,
    LexicalizedRelation,
    Correction,
}

impl PropertyKind {
    pub const STRUCTURAL: [PropertyKind; 7] = [
        PropertyKind::Production,
        PropertyKind::SubtreeAttachment,
        PropertyKind::FstrAttribute,
        PropertyKind::FstrAtomicPair,
        PropertyKind::AttachmentComplexity,
        PropertyKind::NonRightBranching,
        PropertyKind::CoordNonParallel,
    ];

    pub fn is_structural(self) -> bool {
        Self::STRUCTURAL.contains(&self)
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDescriptor {
    pub index: usize,
    pub kind: PropertyKind,
    pub key: String,
    /// Parses of the defining corpus on which the property is nonzero.
    pub activation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryConfig {
    pub enabled_kinds: BTreeSet<PropertyKind>,
    pub include_lexicalized: bool,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            enabled_kinds: PropertyKind::STRUCTURAL.into_iter().collect(),
            include_lexicalized: false,
        }
    }
}

/// Indexed vector of property functions. Once the correction property has
/// been appended the registry is frozen and every parse of the defining
/// corpus has the same total feature mass `K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RegistryFile", into = "RegistryFile")]
pub struct PropertyRegistry {
    properties: Vec<PropertyDescriptor>,
    correction_k: Option<f64>,
    frozen: bool,
    lookup: HashMap<(PropertyKind, String), usize>,
    structural_kinds: Vec<PropertyKind>,
}

impl PartialEq for PropertyRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.properties == other.properties
            && self.correction_k.map(f64::to_bits) == other.correction_k.map(f64::to_bits)
            && self.frozen == other.frozen
    }
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    format: String,
    version: u32,
    descriptors: Vec<PropertyDescriptor>,
    #[serde(rename = "correction_K")]
    correction_k: Option<f64>,
    frozen: bool,
}

impl From<PropertyRegistry> for RegistryFile {
    fn from(r: PropertyRegistry) -> Self {
        RegistryFile {
            format: REGISTRY_FORMAT.into(),
            version: REGISTRY_VERSION,
            descriptors: r.properties,
            correction_k: r.correction_k,
            frozen: r.frozen,
        }
    }
}

impl TryFrom<RegistryFile> for PropertyRegistry {
    type Error = String;

    fn try_from(f: RegistryFile) -> std::result::Result<Self, String> {
        if f.format != REGISTRY_FORMAT || f.version != REGISTRY_VERSION {
            return Err(format!(
                "unsupported registry {:?} v{}",
                f.format, f.version
            ));
        }
        if f.descriptors.iter().enumerate().any(|(i, d)| d.index != i) {
            return Err("descriptor indices must equal positions".into());
        }
        let has_correction = f
            .descriptors
            .last()
            .is_some_and(|d| d.kind == PropertyKind::Correction);
        if f.correction_k.is_some() != has_correction {
            return Err("correction_K must accompany a trailing correction descriptor".into());
        }
        Ok(PropertyRegistry::from_parts(
            f.descriptors,
            f.correction_k,
            f.frozen,
        ))
    }
}

impl PropertyRegistry {
    fn from_parts(
        properties: Vec<PropertyDescriptor>,
        correction_k: Option<f64>,
        frozen: bool,
    ) -> Self {
        let lookup = properties
            .iter()
            .map(|d| ((d.kind, d.key.clone()), d.index))
            .collect();
        let structural_kinds = properties
            .iter()
            .map(|d| d.kind)
            .filter(|k| k.is_structural())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        PropertyRegistry {
            properties,
            correction_k,
            frozen,
            lookup,
            structural_kinds,
        }
    }

    /// Sorts descriptors by kind then key (precomputed keys numerically) and
    /// assigns indices.
    fn from_unordered(mut properties: Vec<PropertyDescriptor>) -> Self {
        properties.sort_by(|a, b| {
            a.kind.cmp(&b.kind).then_with(|| {
                if a.kind == PropertyKind::Precomputed {
                    let n = |d: &PropertyDescriptor| d.key.parse::<usize>().unwrap_or(usize::MAX);
                    n(a).cmp(&n(b))
                } else {
                    a.key.cmp(&b.key)
                }
            })
        });
        for (i, d) in properties.iter_mut().enumerate() {
            d.index = i;
        }
        Self::from_parts(properties, None, false)
    }

    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    pub fn descriptors(&self) -> &[PropertyDescriptor] {
        &self.properties
    }

    pub fn correction_k(&self) -> Option<f64> {
        self.correction_k
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn index_of(&self, kind: PropertyKind, key: &str) -> Option<usize> {
        self.lookup.get(&(kind, key.to_string())).copied()
    }

    pub fn correction_index(&self) -> Option<usize> {
        self.correction_k.map(|_| self.properties.len() - 1)
    }

    pub fn has_lexicalized(&self) -> bool {
        self.properties
            .iter()
            .any(|d| d.kind == PropertyKind::LexicalizedRelation)
    }

    /// Wraps raw passthrough features as a registry, one descriptor per
    /// column. Useful for hand-built instances.
    pub fn precomputed(width: usize) -> Self {
        Self::from_unordered(
            (0..width)
                .map(|i| PropertyDescriptor {
                    index: i,
                    kind: PropertyKind::Precomputed,
                    key: i.to_string(),
                    activation_count: 0,
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Data(format!("registry: {e}")))
    }
}

fn raw_features(parse: &ParseRecord, kinds: &[PropertyKind]) -> RawFeatures {
    let mut raw = structural_features(parse, kinds);
    if let Some(pre) = &parse.precomputed_features {
        for (&i, &v) in pre {
            raw.insert((PropertyKind::Precomputed, i.to_string()), v);
        }
    }
    raw
}

/// Per-parse template instantiations of one sentence, lexicalized slots
/// included when a lexicon is given.
fn sentence_raw_features(
    entry: &SentenceEntry,
    kinds: &[PropertyKind],
    lexicon: Option<&Lexicon>,
) -> Vec<RawFeatures> {
    let mut per_parse: Vec<RawFeatures> = entry
        .parses
        .iter()
        .map(|p| raw_features(p, kinds))
        .collect();
    if let Some(lex) = lexicon {
        for (raw, slots) in per_parse
            .iter_mut()
            .zip(lexicalized_properties(entry, &lex.table, &lex.spec))
        {
            for (slot, v) in slots {
                raw.insert((PropertyKind::LexicalizedRelation, slot), v);
            }
        }
    }
    per_parse
}

/// One descriptor per template instantiation observed in the corpus, ordered
/// by kind then key.
pub fn build_registry(
    corpus: &Corpus,
    config: &RegistryConfig,
    lexicon: Option<&Lexicon>,
) -> Result<PropertyRegistry> {
    if let Some(k) = config.enabled_kinds.iter().find(|k| !k.is_structural()) {
        return Err(Error::Config(format!("{k:?} is not a structural kind")));
    }
    if config.include_lexicalized && lexicon.is_none() {
        return Err(Error::Config(
            "lexicalized properties requested without a frequency table".into(),
        ));
    }
    let kinds: Vec<PropertyKind> = config.enabled_kinds.iter().copied().collect();
    let has_structure = corpus
        .entries()
        .iter()
        .flat_map(|e| &e.parses)
        .any(ParseRecord::has_structure);
    let has_precomputed = corpus
        .entries()
        .iter()
        .flat_map(|e| &e.parses)
        .any(|p| p.precomputed_features.is_some());
    if !kinds.is_empty() && !has_structure {
        return Err(Error::Config(format!(
            "structural kinds {kinds:?} enabled but no parse carries c-/f-structure"
        )));
    }
    if kinds.is_empty() && !has_precomputed && !config.include_lexicalized {
        return Err(Error::Config(
            "no structural kinds enabled and no precomputed features present".into(),
        ));
    }

    let lexicon = if config.include_lexicalized {
        lexicon
    } else {
        None
    };
    let mut counts: BTreeMap<(PropertyKind, String), usize> = BTreeMap::new();
    for entry in corpus.entries() {
        for raw in sentence_raw_features(entry, &kinds, lexicon) {
            for (key, v) in raw {
                *counts.entry(key).or_insert(0) += usize::from(v != 0.0);
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::Data("no property instantiations observed".into()));
    }
    Ok(PropertyRegistry::from_unordered(
        counts
            .into_iter()
            .map(|((kind, key), activation_count)| PropertyDescriptor {
                index: 0,
                kind,
                key,
                activation_count,
            })
            .collect(),
    ))
}

/// Structural and passthrough features of one parse, indexed by the
/// registry. Instantiations unknown to the registry are ignored; the
/// lexicalized and correction entries are not produced here.
pub fn extract_features(parse: &ParseRecord, registry: &PropertyRegistry) -> SparseVector {
    SparseVector::from_pairs(
        raw_features(parse, &registry.structural_kinds)
            .into_iter()
            .filter_map(|((kind, key), v)| registry.index_of(kind, &key).map(|i| (i, v))),
    )
}

/// Complete feature vectors of every parse of one sentence. `clamped`
/// counts parses whose raw total exceeded `K`; with `strict` set that is an
/// error instead.
pub fn sentence_features(
    entry: &SentenceEntry,
    registry: &PropertyRegistry,
    lexicon: Option<&Lexicon>,
    strict: bool,
    clamped: &mut usize,
) -> Result<Vec<SparseVector>> {
    if registry.has_lexicalized() && lexicon.is_none() {
        return Err(Error::Config(
            "registry has lexicalized properties but no frequency table was given".into(),
        ));
    }
    let raws = sentence_raw_features(entry, &registry.structural_kinds, lexicon);
    let mut out = Vec::with_capacity(raws.len());
    for (parse, raw) in entry.parses.iter().zip(raws) {
        let mut v = SparseVector::from_pairs(
            raw.into_iter()
                .filter_map(|((kind, key), v)| registry.index_of(kind, &key).map(|i| (i, v))),
        );
        if let (Some(k), Some(ci)) = (registry.correction_k, registry.correction_index()) {
            let total = v.sum();
            if total > k {
                if strict {
                    return Err(Error::Data(format!(
                        "{}/{}: feature total {total} exceeds K = {k} (stale registry)",
                        entry.sentence_id, parse.parse_id
                    )));
                }
                *clamped += 1;
            }
            v.push(ci, (k - total).max(0.0));
        }
        out.push(v);
    }
    Ok(out)
}

/// Appends the correction property `K - total(x)` with `K` the maximal
/// total over the universe parses, and freezes the registry.
pub fn add_correction(
    registry: &PropertyRegistry,
    corpus: &Corpus,
    lexicon: Option<&Lexicon>,
) -> Result<PropertyRegistry> {
    if registry.frozen {
        return Err(Error::Config(
            "registry already has a correction property".into(),
        ));
    }
    let mut totals = Vec::new();
    let mut unused = 0;
    for entry in corpus.entries().iter().filter(|e| e.weight > 0.0) {
        for v in sentence_features(entry, registry, lexicon, false, &mut unused)? {
            totals.push(v.sum());
        }
    }
    let k = totals.iter().cloned().fold(0.0, f64::max);
    let mut props = registry.properties.clone();
    props.push(PropertyDescriptor {
        index: props.len(),
        kind: PropertyKind::Correction,
        key: CORRECTION_KEY.into(),
        activation_count: totals.iter().filter(|&&t| t < k).count(),
    });
    Ok(PropertyRegistry::from_parts(props, Some(k), true))
}

/// Keeps properties active on at least `cutoff` parses, recompacting
/// indices. Must run before the correction is added.
pub fn select_properties(registry: &PropertyRegistry, cutoff: usize) -> Result<PropertyRegistry> {
    if registry.frozen {
        return Err(Error::Config(
            "select properties before adding the correction".into(),
        ));
    }
    let kept: Vec<PropertyDescriptor> = registry
        .properties
        .iter()
        .filter(|d| d.activation_count >= cutoff)
        .cloned()
        .enumerate()
        .map(|(i, mut d)| {
            d.index = i;
            d
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "cutoff {cutoff} removes every property"
        )));
    }
    Ok(PropertyRegistry::from_parts(kept, None, false))
}

/// A corpus turned into feature vectors against a fixed registry. This is
/// what the model and trainer operate on.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizedCorpus {
    pub sentences: Vec<FeaturizedSentence>,
    pub dim: usize,
    /// Parses whose correction value had to be clamped at zero.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizedSentence {
    pub sentence_id: String,
    pub weight: f64,
    pub gold_index: Option<usize>,
    pub parse_ids: Vec<String>,
    pub frames: Vec<Option<String>>,
    pub features: Vec<SparseVector>,
}

impl FeaturizedSentence {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl FeaturizedCorpus {
    /// `strict` rejects parses whose totals exceed `K`; use it for the
    /// defining (training) corpus.
    pub fn build(
        corpus: &Corpus,
        registry: &PropertyRegistry,
        lexicon: Option<&Lexicon>,
        strict: bool,
    ) -> Result<Self> {
        let mut clamped = 0;
        let mut sentences = Vec::with_capacity(corpus.len());
        for e in corpus.entries() {
            let features = sentence_features(e, registry, lexicon, strict, &mut clamped)?;
            sentences.push(FeaturizedSentence {
                sentence_id: e.sentence_id.clone(),
                weight: e.weight,
                gold_index: e.gold_index,
                parse_ids: e.parses.iter().map(|p| p.parse_id.clone()).collect(),
                frames: e.parses.iter().map(|p| p.frame.clone()).collect(),
                features,
            });
        }
        Ok(FeaturizedCorpus {
            sentences,
            dim: registry.len(),
            clamped,
        })
    }

    /// Builds directly from per-sentence feature vectors; used for
    /// hand-built and randomly generated instances. Weights are taken as
    /// given.
    pub fn from_vectors(
        dim: usize,
        sentences: Vec<(f64, Option<usize>, Vec<SparseVector>)>,
    ) -> Self {
        let sentences = sentences
            .into_iter()
            .enumerate()
            .map(|(s, (weight, gold_index, features))| FeaturizedSentence {
                sentence_id: format!("s{s}"),
                weight,
                gold_index,
                parse_ids: (0..features.len()).map(|j| format!("p{j}")).collect(),
                frames: vec![None; features.len()],
                features,
            })
            .collect();
        FeaturizedCorpus {
            sentences,
            dim,
            clamped: 0,
        }
    }

    /// Appends a correction column to hand-built vectors, treating every
    /// column as a passthrough property. `K` is the largest total over the
    /// positively weighted sentences.
    pub fn with_correction(self) -> (PropertyRegistry, FeaturizedCorpus) {
        let base = PropertyRegistry::precomputed(self.dim);
        let totals = || {
            self.sentences
                .iter()
                .filter(|s| s.weight > 0.0)
                .flat_map(|s| s.features.iter().map(SparseVector::sum))
        };
        let k = totals().fold(0.0, f64::max);
        let mut props = base.properties;
        props.push(PropertyDescriptor {
            index: self.dim,
            kind: PropertyKind::Correction,
            key: CORRECTION_KEY.into(),
            activation_count: totals().filter(|&t| t < k).count(),
        });
        let registry = PropertyRegistry::from_parts(props, Some(k), true);
        let dim = self.dim;
        let sentences = self
            .sentences
            .into_iter()
            .map(|mut s| {
                for f in &mut s.features {
                    let t = f.sum();
                    f.push(dim, (k - t).max(0.0));
                }
                s
            })
            .collect();
        (
            registry,
            FeaturizedCorpus {
                sentences,
                dim: dim + 1,
                clamped: self.clamped,
            },
        )
    }

    /// Sentences with positive weight: the training universe.
    pub fn universe(&self) -> FeaturizedCorpus {
        FeaturizedCorpus {
            sentences: self
                .sentences
                .iter()
                .filter(|s| s.weight > 0.0)
                .cloned()
                .collect(),
            dim: self.dim,
            clamped: self.clamped,
        }
    }

    pub fn n_parses(&self) -> usize {
        self.sentences.iter().map(FeaturizedSentence::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::{entry, flat_parse};
    use crate::corpus::{CTree, FStructure};

    fn structural_corpus(trees: Vec<CTree>) -> Corpus {
        let entries = trees
            .into_iter()
            .enumerate()
            .map(|(i, t)| SentenceEntry {
                sentence_id: format!("s{i}"),
                tokens: vec!["w".into(); t.leaf_count()],
                weight: 1.0,
                gold_index: None,
                parses: vec![ParseRecord {
                    parse_id: "p0".into(),
                    cstructure: Some(t),
                    fstructure: Some(FStructure::default()),
                    relations: vec![],
                    frame: None,
                    precomputed_features: None,
                }],
            })
            .collect();
        Corpus::new(entries).unwrap()
    }

    fn flat_corpus(sentences: &[&[&[(usize, f64)]]]) -> Corpus {
        Corpus::new(
            sentences
                .iter()
                .enumerate()
                .map(|(s, parses)| SentenceEntry {
                    sentence_id: format!("s{s}"),
                    tokens: vec![],
                    weight: 1.0,
                    gold_index: None,
                    parses: parses
                        .iter()
                        .enumerate()
                        .map(|(j, f)| flat_parse(&format!("p{j}"), f))
                        .collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn no_structural() -> RegistryConfig {
        RegistryConfig {
            enabled_kinds: BTreeSet::new(),
            include_lexicalized: false,
        }
    }

    #[test]
    fn productions_become_descriptors() {
        let t = CTree::node(
            "S",
            vec![
                CTree::node("NP", vec![CTree::leaf("DT"), CTree::leaf("NN")]),
                CTree::leaf("VP"),
            ],
        );
        let cfg = RegistryConfig {
            enabled_kinds: [PropertyKind::Production].into_iter().collect(),
            include_lexicalized: false,
        };
        let r = build_registry(&structural_corpus(vec![t]), &cfg, None).unwrap();
        let keys: Vec<_> = r.descriptors().iter().map(|d| d.key.as_str()).collect();
        assert_eq!(keys, vec!["NP -> DT NN", "S -> NP VP"]);
        assert!(!r.is_frozen());
    }

    #[test]
    fn precomputed_passthrough() {
        let c = flat_corpus(&[&[&[(0, 1.0), (1, 2.0), (2, 1.0), (3, 1.0), (4, 1.0)]]]);
        let r = build_registry(&c, &no_structural(), None).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r
            .descriptors()
            .iter()
            .all(|d| d.kind == PropertyKind::Precomputed));
    }

    #[test]
    fn degenerate_configs_are_rejected() {
        let c = structural_corpus(vec![CTree::node("S", vec![CTree::leaf("a")])]);
        assert!(matches!(
            build_registry(&c, &no_structural(), None),
            Err(Error::Config(_))
        ));
        let flat = flat_corpus(&[&[&[(0, 1.0)]]]);
        assert!(matches!(
            build_registry(&flat, &RegistryConfig::default(), None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn correction_balances_totals() {
        let c = flat_corpus(&[&[&[(0, 3.0)], &[(0, 1.0), (1, 4.0)]], &[&[(1, 2.0)]]]);
        let r = build_registry(&c, &no_structural(), None).unwrap();
        let r = add_correction(&r, &c, None).unwrap();
        assert_eq!(r.correction_k(), Some(5.0));
        let fc = FeaturizedCorpus::build(&c, &r, None, true).unwrap();
        let corr: Vec<f64> = fc
            .sentences
            .iter()
            .flat_map(|s| s.features.iter().map(|v| v.get(2)))
            .collect();
        assert_eq!(corr, vec![2.0, 0.0, 3.0]);
        assert!(fc
            .sentences
            .iter()
            .flat_map(|s| &s.features)
            .all(|v| v.sum() == 5.0));
        assert!(add_correction(&r, &c, None).is_err());
    }

    #[test]
    fn correction_identity_cases() {
        let c = flat_corpus(&[&[&[(0, 4.0)], &[(1, 4.0)]]]);
        let r = add_correction(
            &build_registry(&c, &no_structural(), None).unwrap(),
            &c,
            None,
        )
        .unwrap();
        assert_eq!(r.correction_k(), Some(4.0));
        let fc = FeaturizedCorpus::build(&c, &r, None, true).unwrap();
        assert!(fc.sentences[0].features.iter().all(|v| v.get(2) == 0.0));

        let c = flat_corpus(&[&[&[(0, 7.0)]]]);
        let r = add_correction(
            &build_registry(&c, &no_structural(), None).unwrap(),
            &c,
            None,
        )
        .unwrap();
        assert_eq!(r.correction_k(), Some(7.0));
    }

    #[test]
    fn test_parses_clamp_instead_of_failing() {
        let train = flat_corpus(&[&[&[(0, 2.0)]]]);
        let r = add_correction(
            &build_registry(&train, &no_structural(), None).unwrap(),
            &train,
            None,
        )
        .unwrap();
        let test = flat_corpus(&[&[&[(0, 5.0)], &[(0, 1.0)]]]);
        let fc = FeaturizedCorpus::build(&test, &r, None, false).unwrap();
        assert_eq!(fc.clamped, 1);
        assert_eq!(fc.sentences[0].features[0].get(1), 0.0);
        assert_eq!(fc.sentences[0].features[1].get(1), 1.0);
        assert!(FeaturizedCorpus::build(&test, &r, None, true).is_err());
    }

    #[test]
    fn selection_thresholds_activation() {
        let mut r = PropertyRegistry::precomputed(3);
        for (d, c) in r.properties.iter_mut().zip([100, 3, 0]) {
            d.activation_count = c;
        }
        let s = select_properties(&r, 4).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.descriptors()[0].key, "0");
        assert_eq!(select_properties(&r, 0).unwrap().len(), 3);
        assert!(select_properties(&r, 101).is_err());
    }

    #[test]
    fn registry_json_round_trip() {
        let c = flat_corpus(&[&[&[(0, 3.0)], &[(1, 1.0)]]]);
        let r = add_correction(
            &build_registry(&c, &no_structural(), None).unwrap(),
            &c,
            None,
        )
        .unwrap();
        let back = PropertyRegistry::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.index_of(PropertyKind::Precomputed, "1"), Some(1));
    }

    #[test]
    fn universe_drops_zero_weight() {
        let c = Corpus::new(vec![entry("a", 2, 1.0), entry("b", 1, 0.0)]).unwrap();
        let r = build_registry(&c, &no_structural(), None).unwrap();
        let fc = FeaturizedCorpus::build(&c, &r, None, false).unwrap();
        assert_eq!(fc.universe().sentences.len(), 1);
    }
}
