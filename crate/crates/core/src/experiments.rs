//! Replicated before/after-denoising clustering comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthRule;
use crate::clustering::{ari, hierarchical, kmeans, spectral, Algorithm, LabelSet, Linkage, SpectralConfig};
use crate::cloud::PointCloud;
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::shift::ShiftOperator;
use crate::synthetic::ClusterCase;

/// Settings of one clustering comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterEvalConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub bandwidth: BandwidthRule,
    pub sweeps: usize,
    /// Also cluster the denoised data.
    pub msd: bool,
    pub spectral: SpectralConfig,
    pub linkage: Linkage,
    pub kmeans_restarts: usize,
}

impl ClusterEvalConfig {
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        Self {
            algorithm,
            k,
            bandwidth: BandwidthRule::Scv,
            sweeps: 1,
            msd: true,
            spectral: SpectralConfig::default(),
            linkage: Linkage::default(),
            kmeans_restarts: 10,
        }
    }

    fn cluster(&self, data: &PointCloud, seed: u64) -> Result<LabelSet> {
        match self.algorithm {
            Algorithm::Kmeans => kmeans(data, self.k, seed, self.kmeans_restarts),
            Algorithm::Spectral => spectral(data, self.k, &self.spectral, seed),
            Algorithm::Hierarchical => hierarchical(data, self.k, self.linkage),
        }
    }
}

/// ARI before and after denoising for one dataset; the denoised side is
/// absent when `msd` is off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AriPair {
    pub before: f64,
    pub after: Option<f64>,
    pub bandwidth: Option<f64>,
}

/// Clusters `data` as given and, when `config.msd` is set, again after
/// `config.sweeps` empirical sweeps with its own KDE. Partitions are scored
/// against `truth` on the points in `scored` (all points when `None`).
pub fn evaluate_once(
    data: &PointCloud,
    truth: &[usize],
    scored: Option<&[usize]>,
    config: &ClusterEvalConfig,
    seed: u64,
) -> Result<AriPair> {
    if truth.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: truth.len(),
        });
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let scored = scored.unwrap_or(&all);
    let reference = LabelSet::from_raw(&scored.iter().map(|&i| truth[i]).collect::<Vec<_>>());
    let score = |labels: &LabelSet| ari(&labels.select(scored), &reference);
    let before = score(&config.cluster(data, derive_seed(seed, 0))?)?;
    if !config.msd {
        return Ok(AriPair {
            before,
            after: None,
            bandwidth: None,
        });
    }
    let h = config.bandwidth.select(data)?;
    let model = DensityModel::gaussian(data.clone(), h)?;
    let denoised = ShiftOperator::empirical(&model).denoise(data, config.sweeps)?;
    let after = score(&config.cluster(&denoised, derive_seed(seed, 1))?)?;
    Ok(AriPair {
        before,
        after: Some(after),
        bandwidth: Some(h),
    })
}

/// Mean and standard deviation of ARI over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEvalReport {
    pub case: String,
    pub config: ClusterEvalConfig,
    pub reps: usize,
    pub seed: u64,
    pub before_mean: f64,
    /// Sample sd (n − 1 divisor); 0 for a single replicate.
    pub before_sd: f64,
    pub after_mean: Option<f64>,
    pub after_sd: Option<f64>,
    pub replicates: Vec<AriPair>,
}

pub(crate) fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn summarize(
    case: &str,
    config: &ClusterEvalConfig,
    seed: u64,
    replicates: Vec<AriPair>,
) -> ClusterEvalReport {
    let before: Vec<f64> = replicates.iter().map(|r| r.before).collect();
    let after: Option<Vec<f64>> = replicates.iter().map(|r| r.after).collect();
    let (before_mean, before_sd) = mean_sd(&before);
    let after = after.map(|a| mean_sd(&a));
    ClusterEvalReport {
        case: case.to_string(),
        config: *config,
        reps: replicates.len(),
        seed,
        before_mean,
        before_sd,
        after_mean: after.map(|a| a.0),
        after_sd: after.map(|a| a.1),
        replicates,
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    Ok(())
}

/// Runs `reps` replicates of a simulated case. Replicate `i` generates its
/// data from `derive_seed(seed, i)`; ARI is scored on the structure points
/// while clustering uses every point.
pub fn cluster_eval(
    case: ClusterCase,
    config: &ClusterEvalConfig,
    reps: usize,
    seed: u64,
) -> Result<ClusterEvalReport> {
    check_reps(reps)?;
    let replicates: Vec<AriPair> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let data = case.generate(s)?;
            let scored = data.structure_indices();
            evaluate_once(&data.cloud, &data.labels, Some(&scored), config, derive_seed(s, 7))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(case.name(), config, seed, replicates))
}

/// Replicates on a fixed labelled dataset; only the clustering seeds vary.
pub fn cluster_eval_dataset(
    name: &str,
    data: &PointCloud,
    truth: &[usize],
    config: &ClusterEvalConfig,
    reps: usize,
    seed: u64,
) -> Result<ClusterEvalReport> {
    check_reps(reps)?;
    let replicates: Vec<AriPair> = (0..reps)
        .into_par_iter()
        .map(|i| evaluate_once(data, truth, None, config, derive_seed(seed, i as u64)))
        .collect::<Result<_>>()?;
    Ok(summarize(name, config, seed, replicates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::gen_gmm_2d;

    #[test]
    fn single_replicate_has_zero_sd() {
        let cfg = ClusterEvalConfig::new(Algorithm::Kmeans, 2);
        let r = cluster_eval(ClusterCase::Spiral4, &cfg, 1, 3).unwrap();
        assert_eq!(r.before_sd, 0.0);
        assert_eq!(r.after_sd, Some(0.0));
        assert_eq!(r, cluster_eval(ClusterCase::Spiral4, &cfg, 1, 3).unwrap());
        assert!(cluster_eval(ClusterCase::Spiral4, &cfg, 0, 3).is_err());
    }

    #[test]
    fn separated_blobs_score_perfectly() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0], vec![12.0, 0.0]], &[1.0, 1.0], &[40, 40], 1).unwrap();
        for algo in [Algorithm::Kmeans, Algorithm::Spectral, Algorithm::Hierarchical] {
            let cfg = ClusterEvalConfig::new(algo, 2);
            let r = evaluate_once(&x.cloud, &x.labels, None, &cfg, 2).unwrap();
            assert_eq!(r.before, 1.0, "{algo:?}");
            assert_eq!(r.after, Some(1.0), "{algo:?}");
        }
    }

    #[test]
    fn msd_off_skips_denoising() {
        let x = gen_gmm_2d(&[vec![0.0, 0.0], vec![12.0, 0.0]], &[1.0, 1.0], &[30, 30], 4).unwrap();
        let cfg = ClusterEvalConfig { msd: false, ..ClusterEvalConfig::new(Algorithm::Kmeans, 2) };
        let r = cluster_eval_dataset("blobs", &x.cloud, &x.labels, &cfg, 3, 1).unwrap();
        assert_eq!((r.before_mean, r.before_sd), (1.0, 0.0));
        assert_eq!((r.after_mean, r.after_sd), (None, None));
        assert!(r.replicates.iter().all(|p| p.bandwidth.is_none()));
    }

    #[test]
    fn mean_sd_convention() {
        assert_eq!(mean_sd(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_sd(&[5.0]), (5.0, 0.0));
    }
}
