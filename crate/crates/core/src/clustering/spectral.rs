use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_k, kmeans, LabelSet};
use crate::bandwidth::scv;
use crate::cloud::{dist, sq_dist, PointCloud};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

const MEDIAN_SUBSAMPLE: usize = 500;
const KMEANS_RESTARTS: usize = 10;

/// Scale σ of the gaussian affinity `exp(−‖x − y‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityScale {
    Fixed(f64),
    /// Median pairwise distance of a seeded subsample of at most 500 points.
    Median,
    /// The given multiple of the SCV bandwidth of the clustered cloud.
    BandwidthScaled(f64),
}

/// Normalized spectral clustering settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub scale: AffinityScale,
    /// Keep an edge when either endpoint is among the other's `knn` nearest
    /// neighbours; `None` keeps the dense graph.
    pub knn: Option<usize>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            scale: AffinityScale::BandwidthScaled(0.6),
            knn: None,
        }
    }
}

/// Labels plus graph diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFit {
    pub labels: LabelSet,
    pub sigma: f64,
    /// Connected components of the affinity graph. More components than
    /// clusters is reported here rather than treated as an error.
    pub components: usize,
}

fn median_distance(data: &PointCloud, seed: u64) -> f64 {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    if idx.len() > MEDIAN_SUBSAMPLE {
        idx.shuffle(&mut rng_from_seed(seed));
        idx.truncate(MEDIAN_SUBSAMPLE);
    }
    let mut d = Vec::with_capacity(idx.len() * idx.len() / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            d.push(dist(data.point(i), data.point(j)));
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

fn resolve_sigma(data: &PointCloud, scale: AffinityScale, seed: u64) -> Result<f64> {
    let sigma = match scale {
        AffinityScale::Fixed(s) => s,
        AffinityScale::Median => median_distance(data, seed),
        AffinityScale::BandwidthScaled(f) => f * scv(data)?,
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("affinity_sigma", format!("must be finite and > 0, got {sigma}")));
    }
    Ok(sigma)
}

fn affinity(data: &PointCloud, sigma: f64, knn: Option<usize>) -> DMatrix<f64> {
    let n = data.len();
    let inv = -0.5 / (sigma * sigma);
    let mut d2 = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(data.point(i), data.point(j));
            d2[(i, j)] = v;
            d2[(j, i)] = v;
        }
    }
    let mut a = d2.map(|v| (v * inv).exp());
    a.fill_diagonal(0.0);
    if let Some(m) = knn {
        let mut keep = DMatrix::<bool>::from_element(n, n, false);
        for i in 0..n {
            keep[(i, i)] = true;
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&x, &y| d2[(i, x)].total_cmp(&d2[(i, y)]).then(x.cmp(&y)));
            for &j in order.iter().take(m) {
                keep[(i, j)] = true;
                keep[(j, i)] = true;
            }
        }
        a.zip_apply(&keep, |v, k| {
            if !k {
                *v = 0.0;
            }
        });
    }
    a
}

fn components(a: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && j != i && a[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

/// Normalized spectral clustering with diagnostics.
///
/// Gaussian affinity with zero diagonal, optional kNN sparsification,
/// operator `D^(−1/2) A D^(−1/2)`, its `k` leading eigenvectors with rows
/// scaled to unit length, then k-means with 10 restarts on those rows.
pub fn spectral_fit(
    data: &PointCloud,
    k: usize,
    config: &SpectralConfig,
    seed: u64,
) -> Result<SpectralFit> {
    let n = data.len();
    check_k(k, n)?;
    if n < k + 1 {
        return Err(Error::TooFewPoints { needed: k + 1, found: n });
    }
    if let Some(0) = config.knn {
        return Err(Error::param("knn", "must be at least 1"));
    }
    let sigma = resolve_sigma(data, config.scale, derive_seed(seed, 0))?;
    let a = affinity(data, sigma, config.knn);
    let comps = components(&a);
    if k == 1 {
        return Ok(SpectralFit {
            labels: LabelSet::new(vec![0; n], 1)?,
            sigma,
            components: comps,
        });
    }
    let inv_sqrt: Vec<f64> = a
        .row_iter()
        .map(|r| {
            let d: f64 = r.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = a;
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let mut rows = vec![0.0; n * k];
    for i in 0..n {
        let row = &mut rows[i * k..(i + 1) * k];
        for (c, &col) in order.iter().take(k).enumerate() {
            row[c] = eig.eigenvectors[(i, col)];
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    let embedding = PointCloud::from_flat(rows, k)?;
    let labels = kmeans(&embedding, k, derive_seed(seed, 1), KMEANS_RESTARTS)?;
    Ok(SpectralFit {
        labels,
        sigma,
        components: comps,
    })
}

/// Normalized spectral clustering labels; see [`spectral_fit`].
pub fn spectral(data: &PointCloud, k: usize, config: &SpectralConfig, seed: u64) -> Result<LabelSet> {
    Ok(spectral_fit(data, k, config, seed)?.labels)
}
