//! Seeded generators for the simulated datasets.
//!
//! Every generator is a pure function of its arguments: the seed feeds a
//! fresh [`ChaCha8Rng`](crate::rng::ChaCha8Rng) consumed sequentially.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytic::Mixture1d;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, ChaCha8Rng};

/// Points with ground-truth structure ids.
///
/// Structure labels are `0..k`; background noise and planted outliers get
/// the next free label, recorded in `noise_label` / `outlier_label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCloud {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
    pub noise_label: Option<usize>,
    pub outlier_label: Option<usize>,
}

impl LabeledCloud {
    pub fn new(cloud: PointCloud, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(Error::DimensionMismatch {
                expected: cloud.len(),
                found: labels.len(),
            });
        }
        Ok(Self {
            cloud,
            labels,
            noise_label: None,
            outlier_label: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels, assuming they are contiguous from 0.
    pub fn label_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Appends `noise` under a fresh label.
    pub fn with_noise(mut self, noise: &PointCloud) -> Result<Self> {
        let label = self.label_count();
        self.cloud = self.cloud.concat(noise)?;
        self.labels.extend(std::iter::repeat_n(label, noise.len()));
        self.noise_label = Some(label);
        Ok(self)
    }

    /// Indices of points that belong to a structure (neither noise nor
    /// outlier).
    pub fn structure_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| Some(**l) != self.noise_label && Some(**l) != self.outlier_label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices carrying the outlier label.
    pub fn outlier_indices(&self) -> Vec<usize> {
        match self.outlier_label {
            Some(o) => (0..self.len()).filter(|&i| self.labels[i] == o).collect(),
            None => Vec::new(),
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    Ok(())
}

/// Eye of `round(eye_fraction·n0)` points around the origin (label 0) and a
/// ring of radius `ring_radius` (label 1), both with gaussian noise of sd
/// `sigma`. Ring angles are uniform.
pub fn gen_bullseye(
    n0: usize,
    ring_radius: f64,
    eye_fraction: f64,
    sigma: f64,
    seed: u64,
) -> Result<LabeledCloud> {
    if n0 < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n0 });
    }
    if !(eye_fraction > 0.0 && eye_fraction < 1.0) {
        return Err(Error::param("eye_fraction", "must lie in (0, 1)"));
    }
    if !(ring_radius.is_finite() && ring_radius > 0.0) {
        return Err(Error::param("ring_radius", "must be finite and > 0"));
    }
    check_sigma(sigma)?;
    let n_eye = (eye_fraction * n0 as f64).round() as usize;
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n0);
    let mut labels = Vec::with_capacity(n0);
    for _ in 0..n_eye {
        rows.push([sigma * normal(&mut rng), sigma * normal(&mut rng)]);
        labels.push(0);
    }
    for _ in n_eye..n0 {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        rows.push([
            ring_radius * c + sigma * normal(&mut rng),
            ring_radius * s + sigma * normal(&mut rng),
        ]);
        labels.push(1);
    }
    LabeledCloud::new(PointCloud::from_rows(&rows)?, labels)
}

/// `n1` i.i.d. uniform points in the box `[low, high]`.
pub fn gen_uniform_noise(n1: usize, low: &[f64], high: &[f64], seed: u64) -> Result<PointCloud> {
    if low.len() != high.len() {
        return Err(Error::DimensionMismatch {
            expected: low.len(),
            found: high.len(),
        });
    }
    if low.is_empty() {
        return Err(Error::param("box", "must have at least one dimension"));
    }
    if low.iter().zip(high).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
        return Err(Error::param("box", "need low < high in every coordinate"));
    }
    if n1 == 0 {
        return Err(Error::Empty("uniform noise"));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = Vec::with_capacity(n1 * low.len());
    for _ in 0..n1 {
        for (l, h) in low.iter().zip(high) {
            data.push(rng.random_range(*l..*h));
        }
    }
    PointCloud::from_flat(data, low.len())
}

/// Parameter range of a spiral arm.
pub const SPIRAL_T_RANGE: (f64, f64) = (0.2, 1.0);
const SPIRAL_SCALE: f64 = 0.75;

/// Point of arm `k` at parameter `t`:
/// `0.75·t·(cos(2πt + kπ), sin(2πt + kπ))`.
pub fn spiral_arm(k: usize, t: f64) -> [f64; 2] {
    let angle = std::f64::consts::TAU * t + k as f64 * std::f64::consts::PI;
    let (s, c) = angle.sin_cos();
    [SPIRAL_SCALE * t * c, SPIRAL_SCALE * t * s]
}

/// Two interleaved one-turn Archimedean arms, `n0/2` points each, with
/// parameters uniform on [`SPIRAL_T_RANGE`] and gaussian jitter of sd
/// `sigma`. Arm `k` carries label `k`. The noiseless arms lie inside
/// `[−0.75, 0.75]²`.
pub fn gen_spiral(n0: usize, sigma: f64, seed: u64) -> Result<LabeledCloud> {
    if n0 == 0 || !n0.is_multiple_of(2) {
        return Err(Error::param("n0", format!("must be positive and even, got {n0}")));
    }
    check_sigma(sigma)?;
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n0);
    let mut labels = Vec::with_capacity(n0);
    for k in 0..2 {
        for _ in 0..n0 / 2 {
            let t = rng.random_range(SPIRAL_T_RANGE.0..SPIRAL_T_RANGE.1);
            let [x, y] = spiral_arm(k, t);
            rows.push([x + sigma * normal(&mut rng), y + sigma * normal(&mut rng)]);
            labels.push(k);
        }
    }
    LabeledCloud::new(PointCloud::from_rows(&rows)?, labels)
}

/// `n` draws from `mix·N(mu1, s1²) + (1 − mix)·N(mu2, s2²)`.
pub fn gen_gmm_1d(
    n: usize,
    mix: f64,
    mu1: f64,
    mu2: f64,
    s1: f64,
    s2: f64,
    seed: u64,
) -> Result<PointCloud> {
    let m = Mixture1d {
        weight: mix,
        mu1,
        mu2,
        s1,
        s2,
    };
    m.validate()?;
    if n == 0 {
        return Err(Error::Empty("mixture sample"));
    }
    let mut rng = rng_from_seed(seed);
    let v: Vec<f64> = (0..n).map(|_| m.draw(&mut rng)).collect();
    PointCloud::from_scalars(&v)
}

/// Isotropic gaussian blobs; component `j` contributes `counts[j]` points
/// labelled `j`.
pub fn gen_gmm_2d(
    means: &[Vec<f64>],
    sds: &[f64],
    counts: &[usize],
    seed: u64,
) -> Result<LabeledCloud> {
    if means.is_empty() {
        return Err(Error::Empty("mixture components"));
    }
    if sds.len() != means.len() || counts.len() != means.len() {
        return Err(Error::param("components", "means, sds and counts must have equal length"));
    }
    let dim = means[0].len();
    let mut rng = rng_from_seed(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (j, ((mean, &sd), &count)) in means.iter().zip(sds).zip(counts).enumerate() {
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mean.len(),
            });
        }
        check_sigma(sd)?;
        for _ in 0..count {
            data.extend(mean.iter().map(|m| m + sd * normal(&mut rng)));
            labels.push(j);
        }
    }
    LabeledCloud::new(PointCloud::from_flat(data, dim)?, labels)
}

/// Appends `outliers` under a dedicated outlier label. An empty list
/// returns the input unchanged.
pub fn plant_outliers(cloud: LabeledCloud, outliers: &[Vec<f64>]) -> Result<LabeledCloud> {
    if outliers.is_empty() {
        return Ok(cloud);
    }
    let extra = PointCloud::from_rows(outliers)?;
    cloud.cloud.check_dim(extra.dim())?;
    let label = cloud.label_count();
    let mut out = cloud;
    out.cloud = out.cloud.concat(&extra)?;
    out.labels.extend(std::iter::repeat_n(label, extra.len()));
    out.outlier_label = Some(label);
    Ok(out)
}

/// Blob centers of the default anomaly scenario.
pub const ANOMALY_MEANS: [[f64; 2]; 3] = [[-3.0, 0.0], [3.0, 0.0], [0.0, 4.0]];
pub const ANOMALY_SD: f64 = 0.7;
pub const ANOMALY_COUNT: usize = 200;
/// Planted points of the default anomaly scenario: each lies 2.6 from its
/// nearest blob center, on the outer side of the configuration.
pub const ANOMALY_OUTLIERS: [[f64; 2]; 5] =
    [[-5.6, 0.0], [-4.56, -2.08], [5.6, 0.0], [4.56, -2.08], [0.0, 6.6]];

/// Three blobs of 200 points (sd 0.7) followed by the five planted points,
/// which occupy indices 600..605.
pub fn anomaly_scenario(seed: u64) -> Result<LabeledCloud> {
    let means: Vec<Vec<f64>> = ANOMALY_MEANS.iter().map(|m| m.to_vec()).collect();
    let blobs = gen_gmm_2d(&means, &[ANOMALY_SD; 3], &[ANOMALY_COUNT; 3], seed)?;
    let outliers: Vec<Vec<f64>> = ANOMALY_OUTLIERS.iter().map(|o| o.to_vec()).collect();
    plant_outliers(blobs, &outliers)
}

/// The six simulated clustering cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterCase {
    Bullseye1,
    Bullseye2,
    Bullseye3,
    Spiral4,
    Spiral5,
    Spiral6,
}

impl ClusterCase {
    pub const ALL: [ClusterCase; 6] = [
        ClusterCase::Bullseye1,
        ClusterCase::Bullseye2,
        ClusterCase::Bullseye3,
        ClusterCase::Spiral4,
        ClusterCase::Spiral5,
        ClusterCase::Spiral6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClusterCase::Bullseye1 => "bullseye1",
            ClusterCase::Bullseye2 => "bullseye2",
            ClusterCase::Bullseye3 => "bullseye3",
            ClusterCase::Spiral4 => "spiral4",
            ClusterCase::Spiral5 => "spiral5",
            ClusterCase::Spiral6 => "spiral6",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// `(n0, n1)`: structure and background-noise sizes.
    pub fn sizes(self) -> (usize, usize) {
        match self {
            ClusterCase::Bullseye1 => (500, 100),
            ClusterCase::Bullseye2 => (500, 150),
            ClusterCase::Bullseye3 => (500, 300),
            ClusterCase::Spiral4 => (300, 20),
            ClusterCase::Spiral5 => (300, 50),
            ClusterCase::Spiral6 => (300, 100),
        }
    }

    pub fn clusters(self) -> usize {
        2
    }

    /// Structure plus uniform background noise. Bullseye: r = 6, eye
    /// fraction 0.2, σ = 1, noise on `[−6.5, 6.5]²`. Spiral: σ = 0.05,
    /// noise on `[−0.8, 0.8]²`.
    pub fn generate(self, seed: u64) -> Result<LabeledCloud> {
        let (n0, n1) = self.sizes();
        let structure_seed = crate::rng::derive_seed(seed, 0);
        let noise_seed = crate::rng::derive_seed(seed, 1);
        let (structure, half) = match self {
            ClusterCase::Bullseye1 | ClusterCase::Bullseye2 | ClusterCase::Bullseye3 => {
                (gen_bullseye(n0, 6.0, 0.2, 1.0, structure_seed)?, 6.5)
            }
            _ => (gen_spiral(n0, 0.05, structure_seed)?, 0.8),
        };
        let noise = gen_uniform_noise(n1, &[-half, -half], &[half, half], noise_seed)?;
        structure.with_noise(&noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bullseye_split_and_exact_ring() {
        let b = gen_bullseye(500, 6.0, 0.2, 1.0, 3).unwrap();
        assert_eq!(b.labels.iter().filter(|&&l| l == 0).count(), 100);
        assert_eq!(b.labels.iter().filter(|&&l| l == 1).count(), 400);
        let clean = gen_bullseye(50, 6.0, 0.2, 0.0, 3).unwrap();
        for (p, l) in clean.cloud.iter().zip(&clean.labels) {
            let r = p[0].hypot(p[1]);
            if *l == 1 {
                assert!((r - 6.0).abs() < 1e-12);
            } else {
                assert_eq!(r, 0.0);
            }
        }
        assert!(gen_bullseye(500, 6.0, 1.0, 1.0, 3).is_err());
        assert!(gen_bullseye(500, 6.0, 0.2, -1.0, 3).is_err());
        assert_eq!(gen_bullseye(500, 6.0, 0.2, 1.0, 9), gen_bullseye(500, 6.0, 0.2, 1.0, 9));
    }

    #[test]
    fn uniform_noise_in_box_with_centered_mean() {
        let n = 3000;
        let x = gen_uniform_noise(n, &[-6.5, -6.5], &[6.5, 6.5], 11).unwrap();
        assert!(x.as_flat().iter().all(|v| (-6.5..6.5).contains(v)));
        let tol = 4.0 * 13.0 / (12.0 * n as f64).sqrt();
        for m in x.mean() {
            assert!(m.abs() < tol);
        }
        assert!(gen_uniform_noise(5, &[0.0], &[0.0], 1).is_err());
    }

    #[test]
    fn spiral_points_on_arms_when_noiseless() {
        let s = gen_spiral(300, 0.0, 5).unwrap();
        assert_eq!(s.labels.iter().filter(|&&l| l == 1).count(), 150);
        for (p, &k) in s.cloud.iter().zip(&s.labels) {
            // Recover t from the radius and compare with the analytic arm.
            let t = p[0].hypot(p[1]) / SPIRAL_SCALE;
            let q = spiral_arm(k, t);
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
            assert!(p[0].abs() <= 0.8 && p[1].abs() <= 0.8);
        }
        assert!(gen_spiral(301, 0.05, 5).is_err());
    }

    #[test]
    fn spiral_arms_do_not_intersect() {
        let (lo, hi) = SPIRAL_T_RANGE;
        let grid: Vec<f64> = (0..=800).map(|i| lo + (hi - lo) * i as f64 / 800.0).collect();
        let a: Vec<[f64; 2]> = grid.iter().map(|&t| spiral_arm(0, t)).collect();
        let b: Vec<[f64; 2]> = grid.iter().map(|&t| spiral_arm(1, t)).collect();
        let mut best = f64::INFINITY;
        for p in &a {
            for q in &b {
                best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        assert!(best > 0.1, "min inter-arm distance {best}");
    }

    #[test]
    fn gmm_1d_degenerate_weight() {
        let n = 2000;
        let x = gen_gmm_1d(n, 1.0, 2.0, 50.0, 1.5, 1.0, 4).unwrap();
        assert!((x.mean()[0] - 2.0).abs() < 4.0 * 1.5 / (n as f64).sqrt());
        assert!(gen_gmm_1d(10, 1.2, 0.0, 5.0, 1.0, 1.0, 4).is_err());
        assert_eq!(
            gen_gmm_1d(100, 0.7, 0.0, 5.0, 1.0, 1.0, 4),
            gen_gmm_1d(100, 0.7, 0.0, 5.0, 1.0, 1.0, 4)
        );
    }

    #[test]
    fn gmm_2d_component_means() {
        let x = anomaly_scenario(1).unwrap();
        for (j, m) in ANOMALY_MEANS.iter().enumerate() {
            let idx: Vec<usize> = (0..x.len()).filter(|&i| x.labels[i] == j).collect();
            assert_eq!(idx.len(), 200);
            let mean = x.cloud.select(&idx).unwrap().mean();
            for c in 0..2 {
                assert!((mean[c] - m[c]).abs() < 4.0 * ANOMALY_SD / 200f64.sqrt());
            }
        }
        assert!(gen_gmm_2d(&[vec![0.0, 0.0]], &[1.0, 2.0], &[10], 1).is_err());
    }

    #[test]
    fn planting_outliers() {
        let base = gen_gmm_2d(&[vec![0.0, 0.0]], &[1.0], &[20], 2).unwrap();
        assert_eq!(plant_outliers(base.clone(), &[]).unwrap(), base);
        let out = plant_outliers(base, &[vec![9.0, 9.0], vec![-9.0, 9.0]]).unwrap();
        assert_eq!(out.len(), 22);
        assert_eq!(out.outlier_indices(), vec![20, 21]);
        assert_eq!(out.structure_indices().len(), 20);
        let bad = gen_gmm_2d(&[vec![0.0, 0.0]], &[1.0], &[5], 2).unwrap();
        assert!(plant_outliers(bad, &[vec![1.0]]).is_err());
    }

    #[test]
    fn cases_have_documented_sizes() {
        for case in ClusterCase::ALL {
            let (n0, n1) = case.sizes();
            let c = case.generate(1).unwrap();
            assert_eq!(c.len(), n0 + n1);
            assert_eq!(c.structure_indices().len(), n0);
            assert_eq!(c.noise_label, Some(2));
            assert_eq!(ClusterCase::parse(case.name()), Some(case));
        }
    }
}
