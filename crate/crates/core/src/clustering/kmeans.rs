use rand::Rng;

use super::{check_k, LabelSet};
use crate::cloud::{sq_dist, PointCloud};
use crate::error::Result;
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};

const MAX_ITER: usize = 300;

/// One k-means solution.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansFit {
    pub labels: LabelSet,
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
    /// Within-cluster sum of squares after every Lloyd update.
    pub history: Vec<f64>,
}

/// Within-cluster sum of squared distances to `centers`.
pub fn wcss(data: &PointCloud, labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    data.iter().zip(labels).map(|(p, &l)| sq_dist(p, &centers[l])).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_seed(data: &PointCloud, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![data.point(first).to_vec()];
    let mut d2: Vec<f64> = data.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if u < w {
                        break;
                    }
                    u -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // All remaining points coincide with a center.
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[pick] = true;
        let c = data.point(pick).to_vec();
        for (i, p) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(data: &PointCloud, mut centers: Vec<Vec<f64>>) -> KmeansFit {
    let n = data.len();
    let k = centers.len();
    let dim = data.dim();
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..MAX_ITER {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for (i, p) in data.iter().enumerate() {
            let (j, d) = nearest(p, &centers);
            dists[i] = d;
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        // An empty cluster takes over the point farthest from its center.
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("k <= n leaves a donor cluster");
                let old = labels[far];
                counts[old] -= 1;
                for (s, v) in sums[old].iter_mut().zip(data.point(far)) {
                    *s -= v;
                }
                labels[far] = j;
                counts[j] = 1;
                sums[j] = data.point(far).to_vec();
                dists[far] = 0.0;
                changed = true;
            }
        }
        for j in 0..k {
            centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
        }
        history.push(wcss(data, &labels, &centers));
        if !changed {
            break;
        }
    }
    let wcss = *history.last().expect("at least one iteration");
    KmeansFit {
        labels: LabelSet::new(labels, k).expect("labels below k"),
        centers,
        wcss,
        history,
    }
}

/// Best of `restarts` k-means++-seeded Lloyd runs, with the full fit.
/// Restart `r` draws its seeding from `derive_seed(seed, r)`.
pub fn kmeans_with_trace(
    data: &PointCloud,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<KmeansFit> {
    check_k(k, data.len())?;
    let mut best: Option<KmeansFit> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng_from_seed(derive_seed(seed, r as u64));
        let fit = lloyd(data, plus_plus_seed(data, k, &mut rng));
        if best.as_ref().is_none_or(|b| fit.wcss < b.wcss) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// k-means labels (best of `restarts` by within-cluster sum of squares).
pub fn kmeans(data: &PointCloud, k: usize, seed: u64, restarts: usize) -> Result<LabelSet> {
    Ok(kmeans_with_trace(data, k, seed, restarts)?.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ari;
    use crate::synthetic::gen_gmm_2d;

    #[test]
    fn separated_blobs() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0], vec![20.0, 0.0]], &[1.0, 1.0], &[50, 50], 3)
            .unwrap();
        let labels = kmeans(&x.cloud, 2, 1, 5).unwrap();
        assert_eq!(ari(&labels, &LabelSet::from_raw(&x.labels)).unwrap(), 1.0);
    }

    #[test]
    fn extreme_k() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0]], &[1.0], &[12], 4).unwrap();
        let one = kmeans(&x.cloud, 1, 1, 3).unwrap();
        assert!(one.labels().iter().all(|&l| l == 0));
        let all = kmeans_with_trace(&x.cloud, 12, 1, 1).unwrap();
        assert_eq!(all.wcss, 0.0);
        let mut seen = all.labels.labels().to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 12);
        assert!(kmeans(&x.cloud, 13, 1, 1).is_err());
        assert!(kmeans(&x.cloud, 0, 1, 1).is_err());
    }

    #[test]
    fn duplicates_and_empty_clusters() {
        let x = PointCloud::from_rows(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]).unwrap();
        let fit = kmeans_with_trace(&x, 3, 2, 2).unwrap();
        assert_eq!(fit.labels.len(), 4);
        assert_eq!(fit.wcss, 0.0);
    }

    #[test]
    fn objective_never_increases() {
        let x = gen_gmm_2d(
            &[vec![0.0, 0.0], vec![3.0, 0.0], vec![1.5, 2.5]],
            &[1.0, 1.0, 1.0],
            &[60, 60, 60],
            9,
        )
        .unwrap();
        for seed in 0..10 {
            let fit = kmeans_with_trace(&x.cloud, 4, seed, 1).unwrap();
            for w in fit.history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0].abs());
            }
        }
    }

    #[test]
    fn deterministic() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0], vec![2.0, 0.0]], &[1.0, 1.0], &[40, 40], 5).unwrap();
        assert_eq!(kmeans(&x.cloud, 3, 7, 4).unwrap(), kmeans(&x.cloud, 3, 7, 4).unwrap());
    }
}
