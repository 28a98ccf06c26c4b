use serde::{Deserialize, Serialize};

use super::{check_k, LabelSet};
use crate::cloud::{dist, sq_dist, PointCloud};
use crate::error::Result;

/// Inter-cluster dissimilarity for agglomerative merging.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
    /// Ward's minimum-variance criterion on squared Euclidean distances.
    Ward,
}

/// Agglomerative clustering down to `k` clusters with Lance–Williams
/// updates. Among equal dissimilarities the pair `(i, j)`, `i < j`, with the
/// smallest `i`, then smallest `j`, merges first. Output ids follow order
/// of first appearance.
pub fn hierarchical(data: &PointCloud, k: usize, linkage: Linkage) -> Result<LabelSet> {
    let n = data.len();
    check_k(k, n)?;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match linkage {
                Linkage::Ward => sq_dist(data.point(i), data.point(j)),
                _ => dist(data.point(i), data.point(j)),
            };
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    while active.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                let v = d[i * n + j];
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (dij, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for &m in &active {
            if m == i || m == j {
                continue;
            }
            let (dim, djm) = (d[i * n + m], d[j * n + m]);
            let nm = size[m] as f64;
            let v = match linkage {
                Linkage::Single => dim.min(djm),
                Linkage::Complete => dim.max(djm),
                Linkage::Average => (ni * dim + nj * djm) / (ni + nj),
                Linkage::Ward => {
                    ((ni + nm) * dim + (nj + nm) * djm - nm * dij) / (ni + nj + nm)
                }
            };
            d[i * n + m] = v;
            d[m * n + i] = v;
        }
        size[i] += size[j];
        active.retain(|&c| c != j);
        for o in owner.iter_mut() {
            if *o == j {
                *o = i;
            }
        }
    }
    Ok(LabelSet::from_raw(&owner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ari;
    use crate::synthetic::gen_gmm_2d;

    const ALL: [Linkage; 4] = [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward];

    #[test]
    fn separated_blobs_any_linkage() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0], vec![30.0, 0.0]], &[1.0, 1.0], &[30, 30], 2)
            .unwrap();
        let truth = LabelSet::from_raw(&x.labels);
        for l in ALL {
            assert_eq!(ari(&hierarchical(&x.cloud, 2, l).unwrap(), &truth).unwrap(), 1.0);
        }
    }

    #[test]
    fn singletons_when_k_is_n() {
        let x = PointCloud::from_scalars(&[3.0, 1.0, 2.0, 7.0]).unwrap();
        for l in ALL {
            assert_eq!(hierarchical(&x, 4, l).unwrap().labels(), &[0, 1, 2, 3]);
        }
    }

    /// Best 2-split under single linkage maximizes the smallest gap between
    /// the groups; enumerate every split.
    fn best_single_split(v: &[f64]) -> Vec<usize> {
        let n = v.len();
        let mut best = (f64::NEG_INFINITY, vec![]);
        for mask in 1..(1u32 << n) - 1 {
            let mut gap = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if (mask >> i) & 1 == 1 && (mask >> j) & 1 == 0 {
                        gap = gap.min((v[i] - v[j]).abs());
                    }
                }
            }
            if gap > best.0 {
                let raw: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
                best = (gap, LabelSet::from_raw(&raw).labels().to_vec());
            }
        }
        best.1
    }

    #[test]
    fn five_point_single_linkage() {
        let v = [0.0, 0.1, 0.2, 10.0, 10.1];
        let x = PointCloud::from_scalars(&v).unwrap();
        let got = hierarchical(&x, 2, Linkage::Single).unwrap();
        assert_eq!(got.labels(), &[0, 0, 0, 1, 1]);
        assert_eq!(got.labels(), best_single_split(&v).as_slice());
    }

    #[test]
    fn ties_merge_lowest_pair_first() {
        // Equal gaps: (0,1) merges before (1,2).
        let x = PointCloud::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(hierarchical(&x, 2, Linkage::Complete).unwrap().labels(), &[0, 0, 1]);
    }
}
