//! Structural property templates over the c-structure tree and the
//! simplified f-structure.

use std::collections::BTreeMap;

use super::PropertyKind;
use crate::corpus::{CTree, FStructure, ParseRecord};

/// Categories that mark a coordination node when they occur among its
/// children.
pub const COORDINATION_LABELS: &[&str] = &["CC", "CONJ", "KON", "KOORD"];

pub const ARGUMENT_KEY: &str = "argument";
pub const ADJUNCT_KEY: &str = "adjunct";
pub const NON_RIGHT_BRANCHING_KEY: &str = "nonterminal-with-right-sibling";
pub const COORD_KEY: &str = "non-parallel-conjuncts";

pub type RawFeatures = BTreeMap<(PropertyKind, String), f64>;

fn bump(out: &mut RawFeatures, kind: PropertyKind, key: impl Into<String>, by: f64) {
    *out.entry((kind, key.into())).or_insert(0.0) += by;
}

fn is_adjunct(function: &str) -> bool {
    let f = function.to_ascii_uppercase();
    f == "ADJ" || f == "MOD" || f.starts_with("ADJUNCT")
}

/// Token-count bucket of an attached phrase.
pub fn complexity_bucket(tokens: usize) -> &'static str {
    match tokens {
        0 | 1 => "1",
        2..=3 => "2-3",
        4..=7 => "4-7",
        _ => "8+",
    }
}

/// Every template instantiation of the enabled structural kinds on one
/// parse, with its count. Parses without structure yield nothing.
pub fn structural_features(parse: &ParseRecord, kinds: &[PropertyKind]) -> RawFeatures {
    let mut out = RawFeatures::new();
    let enabled = |k| kinds.contains(&k);
    if let Some(tree) = &parse.cstructure {
        tree_features(tree, &enabled, &mut out);
    }
    if let Some(fs) = &parse.fstructure {
        fstructure_features(fs, &enabled, &mut out);
    }
    out
}

fn tree_features(tree: &CTree, enabled: &impl Fn(PropertyKind) -> bool, out: &mut RawFeatures) {
    use PropertyKind::*;
    tree.walk(&mut |node| {
        let children = node.children();
        if node.is_leaf() {
            return;
        }
        if enabled(Production) {
            let rhs: Vec<&str> = children.iter().map(CTree::category).collect();
            bump(
                out,
                Production,
                format!("{} -> {}", node.category(), rhs.join(" ")),
                1.0,
            );
        }
        if let Some(function) = node.function() {
            if enabled(SubtreeAttachment) {
                let key = if is_adjunct(function) {
                    ADJUNCT_KEY
                } else {
                    ARGUMENT_KEY
                };
                bump(out, SubtreeAttachment, key, 1.0);
            }
            if enabled(AttachmentComplexity) {
                bump(
                    out,
                    AttachmentComplexity,
                    complexity_bucket(node.leaf_count()),
                    1.0,
                );
            }
        }
        if enabled(NonRightBranching) {
            // every nonterminal child other than the last has a right sibling
            let n = children.len();
            let left = children
                .iter()
                .take(n.saturating_sub(1))
                .filter(|c| !c.is_leaf())
                .count();
            if left > 0 {
                bump(out, NonRightBranching, NON_RIGHT_BRANCHING_KEY, left as f64);
            }
        }
        if enabled(CoordNonParallel) {
            let has_conj = children
                .iter()
                .any(|c| COORDINATION_LABELS.contains(&c.category()));
            if has_conj {
                let conjuncts: Vec<&str> = children
                    .iter()
                    .map(CTree::category)
                    .filter(|c| !COORDINATION_LABELS.contains(c))
                    .collect();
                if conjuncts.windows(2).any(|w| w[0] != w[1]) {
                    bump(out, CoordNonParallel, COORD_KEY, 1.0);
                }
            }
        }
    });
}

fn fstructure_features(
    fs: &FStructure,
    enabled: &impl Fn(PropertyKind) -> bool,
    out: &mut RawFeatures,
) {
    if enabled(PropertyKind::FstrAttribute) {
        for f in &fs.functions {
            bump(out, PropertyKind::FstrAttribute, f.as_str(), 1.0);
        }
    }
    if enabled(PropertyKind::FstrAtomicPair) {
        for (path, value) in &fs.pairs {
            bump(
                out,
                PropertyKind::FstrAtomicPair,
                format!("{path}={value}"),
                1.0,
            );
        }
    }
}
