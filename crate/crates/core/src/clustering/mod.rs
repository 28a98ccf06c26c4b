//! Partitioning algorithms and partition agreement.

mod ari;
mod hierarchical;
mod kmeans;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ari::ari;
pub use hierarchical::{hierarchical, Linkage};
pub use kmeans::{kmeans, kmeans_with_trace, wcss, KmeansFit};
pub use spectral::{spectral, spectral_fit, AffinityScale, SpectralConfig, SpectralFit};

/// Cluster assignment with ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<usize>,
    k: usize,
}

impl LabelSet {
    /// Validates `labels[i] < k` for every entry.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::param("labels", format!("label {bad} is not below k = {k}")));
        }
        Ok(Self { labels, k })
    }

    /// Relabels arbitrary ids to `0..k` in order of first appearance.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels, k: map.len() }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Restriction to the given indices, renumbered by first appearance.
    pub fn select(&self, indices: &[usize]) -> Self {
        let raw: Vec<usize> = indices.iter().map(|&i| self.labels[i]).collect();
        Self::from_raw(&raw)
    }
}

/// Which algorithm a harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Kmeans,
    Spectral,
    Hierarchical,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::Spectral => "spectral",
            Algorithm::Hierarchical => "hier",
        }
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}, got {k}")));
    }
    Ok(())
}
