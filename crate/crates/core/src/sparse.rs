use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sparse real vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from unordered pairs; duplicate indices are summed and zeros
    /// dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert(0.0) += v;
        }
        map.into_iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    /// Largest stored index plus one, or 0.
    pub fn width(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i + 1)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    /// Appends an entry past the current width. Zero values are skipped.
    pub fn push(&mut self, index: usize, value: f64) {
        debug_assert!(index >= self.width());
        if value != 0.0 {
            self.entries.push((index, value));
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

impl FromIterator<(usize, f64)> for SparseVector {
    /// Expects increasing indices; zeros are dropped.
    fn from_iter<T: IntoIterator<Item = (usize, f64)>>(iter: T) -> Self {
        let entries: Vec<_> = iter.into_iter().filter(|&(_, v)| v != 0.0).collect();
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseVector { entries }
    }
}
