use std::collections::HashMap;

use super::LabelSet;
use crate::error::{Error, Result};

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Hubert–Arabie adjusted Rand index from the contingency table.
///
/// When the adjustment denominator vanishes (for instance both partitions
/// are a single cluster, or both are all singletons) the result is 1 if the
/// partitions coincide up to relabeling and 0 otherwise.
pub fn ari(a: &LabelSet, b: &LabelSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let n = a.len() as u64;
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows = vec![0u64; a.k()];
    let mut cols = vec![0u64; b.k()];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *table.entry((x, y)).or_default() += 1;
        rows[x] += 1;
        cols[y] += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.iter().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.iter().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        let same = LabelSet::from_raw(a.labels()) == LabelSet::from_raw(b.labels());
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}
