//! Energy and kernel-MMD two-sample tests with permutation calibration,
//! and the power harnesses with and without per-sample denoising.
//!
//! Both statistics are functions of three pooled sums over a symmetric
//! matrix `M` (distances for energy, gaussian kernel values for MMD):
//! `S_XX`, `S_YY` over ordered within-sample pairs (diagonal included) and
//! `S_XY` over cross pairs. Permutations only relabel the pooled points, so
//! the matrix is built once per test.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Mixture1d;
use crate::bandwidth::scv;
use crate::cloud::{dist, sq_dist, PointCloud};
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::shift::ShiftOperator;
use crate::synthetic::{gen_gmm_1d, gen_uniform_noise};

/// Permutations used by power harnesses.
pub const POWER_PERMUTATIONS: usize = 199;
/// Permutations used by single tests.
pub const SINGLE_TEST_PERMUTATIONS: usize = 999;
/// Noise support for the uniform-noise scenario.
pub const NOISE_RANGE: (f64, f64) = (-3.0, 8.0);

fn check_pair(x: &PointCloud, y: &PointCloud) -> Result<()> {
    x.check_dim(y.dim())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PairSums {
    xx: f64,
    yy: f64,
    xy: f64,
}

fn energy_from_sums(s: PairSums, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    nf * mf / (nf + mf) * (2.0 * s.xy / (nf * mf) - s.xx / (nf * nf) - s.yy / (mf * mf))
}

fn mmd_from_sums(s: PairSums, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    s.xx / (nf * nf) + s.yy / (mf * mf) - 2.0 * s.xy / (nf * mf)
}

fn direct_sums(x: &PointCloud, y: &PointCloud, f: impl Fn(&[f64], &[f64]) -> f64) -> PairSums {
    let within = |c: &PointCloud| {
        let mut s = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                s += f(c.point(i), c.point(j));
            }
        }
        s
    };
    let mut xy = 0.0;
    for p in x.iter() {
        for q in y.iter() {
            xy += f(p, q);
        }
    }
    PairSums {
        xx: within(x),
        yy: within(y),
        xy,
    }
}

/// `(nm/(n+m))·(2·mean‖X−Y‖ − mean‖X−X'‖ − mean‖Y−Y'‖)` with within-sample
/// means over all `n²` (resp. `m²`) ordered pairs.
pub fn energy_statistic(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    check_pair(x, y)?;
    Ok(energy_from_sums(direct_sums(x, y, dist), x.len(), y.len()))
}

/// Kernel scale for MMD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelScale {
    Fixed(f64),
    /// Median pairwise distance of the pooled sample.
    Median,
}

/// Median of pairwise distances over all unordered pairs of the pooled
/// sample.
pub fn median_heuristic(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    let pooled = x.concat(y)?;
    let n = pooled.len();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push(dist(pooled.point(i), pooled.point(j)));
        }
    }
    if d.is_empty() {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let mid = d.len() / 2;
    let (_, &mut hi, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if d.len() % 2 == 1 {
        return Ok(hi);
    }
    let lo = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * (lo + hi))
}

fn resolve_scale(x: &PointCloud, y: &PointCloud, scale: KernelScale) -> Result<f64> {
    let sigma = match scale {
        KernelScale::Fixed(s) => s,
        KernelScale::Median => median_heuristic(x, y)?,
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("kernel_sigma", format!("must be finite and > 0, got {sigma}")));
    }
    Ok(sigma)
}

/// Biased V-statistic `mean k(X,X') + mean k(Y,Y') − 2·mean k(X,Y)` with
/// `k(u, v) = exp(−‖u − v‖²/(2σ²))`.
pub fn mmd2_biased(x: &PointCloud, y: &PointCloud, scale: KernelScale) -> Result<f64> {
    check_pair(x, y)?;
    let sigma = resolve_scale(x, y, scale)?;
    let inv = -0.5 / (sigma * sigma);
    let k = |a: &[f64], b: &[f64]| (sq_dist(a, b) * inv).exp();
    Ok(mmd_from_sums(direct_sums(x, y, k), x.len(), y.len()))
}

/// Outcome of a permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// `(1 + #{permuted ≥ observed}) / (1 + n_permutations)`.
    pub p_value: f64,
    pub n_permutations: usize,
    pub alpha: f64,
    pub reject: bool,
}

impl TestResult {
    fn from_counts(statistic: f64, exceed: usize, n_perm: usize, alpha: f64) -> Self {
        let p_value = (1 + exceed) as f64 / (1 + n_perm) as f64;
        Self {
            statistic,
            p_value,
            n_permutations: n_perm,
            alpha,
            reject: p_value <= alpha,
        }
    }
}

fn check_permutation_args(n_perm: usize, alpha: f64) -> Result<()> {
    if n_perm < 99 {
        return Err(Error::param("n_perm", format!("must be at least 99, got {n_perm}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", "must lie in (0, 1)"));
    }
    Ok(())
}

/// Generic permutation test: pools both samples and re-splits them
/// `n_perm` times with a seeded shuffle.
pub fn permutation_test<F>(
    stat: F,
    x: &PointCloud,
    y: &PointCloud,
    n_perm: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult>
where
    F: Fn(&PointCloud, &PointCloud) -> Result<f64>,
{
    check_pair(x, y)?;
    check_permutation_args(n_perm, alpha)?;
    let observed = stat(x, y)?;
    let pooled = x.concat(y)?;
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    let mut rng = rng_from_seed(seed);
    let mut exceed = 0;
    for _ in 0..n_perm {
        idx.shuffle(&mut rng);
        let a = pooled.select(&idx[..x.len()])?;
        let b = pooled.select(&idx[x.len()..])?;
        if stat(&a, &b)? >= observed {
            exceed += 1;
        }
    }
    Ok(TestResult::from_counts(observed, exceed, n_perm, alpha))
}

/// Which statistic a test uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Energy,
    Mmd,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Energy => "energy",
            TestKind::Mmd => "mmd",
        }
    }
}

/// Pooled-sample engine evaluating `PairSums` for any split.
enum Engine {
    /// One-dimensional distances: pooled values in sorted order, walked
    /// with running counts and sums.
    SortedLine { values: Vec<f64>, order: Vec<usize> },
    /// Dense symmetric matrix, row-major, with row sums and total.
    Matrix { m: Vec<f64>, n: usize, rows: Vec<f64>, total: f64 },
}

impl Engine {
    fn new(pooled: &PointCloud, kind: TestKind, sigma: f64) -> Self {
        let n = pooled.len();
        if kind == TestKind::Energy && pooled.dim() == 1 {
            let v = pooled.as_flat();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
            let values = order.iter().map(|&i| v[i]).collect();
            return Engine::SortedLine { values, order };
        }
        let inv = -0.5 / (sigma * sigma);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let p = pooled.point(i);
            m[i * n + i] = match kind {
                TestKind::Energy => 0.0,
                TestKind::Mmd => 1.0,
            };
            for j in (i + 1)..n {
                let d2 = sq_dist(p, pooled.point(j));
                let v = match kind {
                    TestKind::Energy => d2.sqrt(),
                    TestKind::Mmd => (d2 * inv).exp(),
                };
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let rows: Vec<f64> = m.chunks_exact(n).map(|r| r.iter().sum()).collect();
        let total = rows.iter().sum();
        Engine::Matrix { m, n, rows, total }
    }

    /// Sums for the split where `in_x[i]` marks membership of pooled point
    /// `i` in the first sample.
    fn sums(&self, in_x: &[bool], mask: &mut Vec<f64>) -> PairSums {
        match self {
            Engine::SortedLine { values, order } => {
                let (mut cx, mut sx, mut cy, mut sy) = (0.0, 0.0, 0.0, 0.0);
                let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
                for (&v, &i) in values.iter().zip(order) {
                    if in_x[i] {
                        xx += v * cx - sx;
                        xy += v * cy - sy;
                        cx += 1.0;
                        sx += v;
                    } else {
                        yy += v * cy - sy;
                        xy += v * cx - sx;
                        cy += 1.0;
                        sy += v;
                    }
                }
                PairSums {
                    xx: 2.0 * xx,
                    yy: 2.0 * yy,
                    xy,
                }
            }
            Engine::Matrix { m, n, rows, total } => {
                mask.clear();
                mask.extend(in_x.iter().map(|&b| if b { 1.0 } else { 0.0 }));
                let (mut upper, mut diag, mut row_x) = (0.0, 0.0, 0.0);
                for i in (0..*n).filter(|&i| in_x[i]) {
                    let row = &m[i * n + i + 1..(i + 1) * n];
                    upper += row.iter().zip(&mask[i + 1..]).map(|(a, b)| a * b).sum::<f64>();
                    diag += m[i * n + i];
                    row_x += rows[i];
                }
                let xx = 2.0 * upper + diag;
                let xy = row_x - xx;
                PairSums {
                    xx,
                    yy: total - xx - 2.0 * xy,
                    xy,
                }
            }
        }
    }
}

/// Permutation test for energy or MMD (median-heuristic σ when `scale` is
/// [`KernelScale::Median`]; ignored for energy). Observed and permuted
/// statistics come from the same pooled engine.
pub fn two_sample_test(
    x: &PointCloud,
    y: &PointCloud,
    kind: TestKind,
    scale: KernelScale,
    n_perm: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    check_pair(x, y)?;
    check_permutation_args(n_perm, alpha)?;
    let sigma = match kind {
        TestKind::Energy => 1.0,
        TestKind::Mmd => resolve_scale(x, y, scale)?,
    };
    let pooled = x.concat(y)?;
    let (n, m) = (x.len(), y.len());
    let engine = Engine::new(&pooled, kind, sigma);
    let stat = |s: PairSums| match kind {
        TestKind::Energy => energy_from_sums(s, n, m),
        TestKind::Mmd => mmd_from_sums(s, n, m),
    };
    let mut mask = Vec::with_capacity(n + m);
    let mut in_x: Vec<bool> = (0..n + m).map(|i| i < n).collect();
    let observed = stat(engine.sums(&in_x, &mut mask));
    let mut rng = rng_from_seed(seed);
    let mut exceed = 0;
    for _ in 0..n_perm {
        in_x.shuffle(&mut rng);
        if stat(engine.sums(&in_x, &mut mask)) >= observed {
            exceed += 1;
        }
    }
    Ok(TestResult::from_counts(observed, exceed, n_perm, alpha))
}

/// One empirical sweep with the sample's own KDE at its SCV bandwidth.
pub fn denoise_with_scv(sample: &PointCloud) -> Result<PointCloud> {
    let h = scv(sample)?;
    let model = DensityModel::gaussian(sample.clone(), h)?;
    ShiftOperator::empirical(&model).denoise(sample, 1)
}

/// Settings shared by the power harnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub n0: usize,
    pub n_reps: usize,
    pub alpha: f64,
    pub n_perm: usize,
    pub test: TestKind,
    /// Also run the tests after per-sample denoising.
    pub msd: bool,
    pub seed: u64,
}

impl PowerConfig {
    pub fn new(test: TestKind, seed: u64) -> Self {
        Self {
            n0: 1000,
            n_reps: 50,
            alpha: 0.05,
            n_perm: POWER_PERMUTATIONS,
            test,
            msd: true,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::param("n_reps", "must be at least 1"));
        }
        if self.n0 < 10 {
            return Err(Error::TooFewPoints { needed: 10, found: self.n0 });
        }
        check_permutation_args(self.n_perm, self.alpha)
    }
}

/// Rejection rates at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub value: f64,
    /// Both samples share a generating law at this grid value.
    pub null: bool,
    pub power_before: f64,
    pub power_after: Option<f64>,
    /// Null point whose after-denoising rejection rate exceeds `alpha`.
    pub after_exceeds_alpha: Option<bool>,
}

/// Rejection rates over a scenario grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub scenario: String,
    pub config: PowerConfig,
    pub points: Vec<PowerPoint>,
}

impl PowerCurve {
    /// `value,power_before,power_after,reps` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,power_before,power_after,reps\n");
        for p in &self.points {
            let after = p.power_after.map_or(String::new(), |v| v.to_string());
            out.push_str(&format!("{},{},{},{}\n", p.value, p.power_before, after, self.config.n_reps));
        }
        out
    }
}

fn replicate<G>(config: &PowerConfig, seed: u64, generate: &G) -> Result<(bool, Option<bool>)>
where
    G: Fn(u64) -> Result<(PointCloud, PointCloud)>,
{
    let (s1, s2) = generate(derive_seed(seed, 0))?;
    let test = |a: &PointCloud, b: &PointCloud| {
        two_sample_test(
            a,
            b,
            config.test,
            KernelScale::Median,
            config.n_perm,
            config.alpha,
            derive_seed(seed, 1),
        )
    };
    let before = test(&s1, &s2)?.reject;
    let after = if config.msd {
        Some(test(&denoise_with_scv(&s1)?, &denoise_with_scv(&s2)?)?.reject)
    } else {
        None
    };
    Ok((before, after))
}

fn run_curve<G>(
    scenario: &str,
    config: &PowerConfig,
    grid: &[f64],
    null: impl Fn(f64) -> bool,
    generate: G,
) -> Result<PowerCurve>
where
    G: Fn(f64, u64) -> Result<(PointCloud, PointCloud)> + Sync,
{
    config.validate()?;
    let mut points = Vec::with_capacity(grid.len());
    for (g, &value) in grid.iter().enumerate() {
        let grid_seed = derive_seed(config.seed, g as u64);
        let outcomes: Vec<(bool, Option<bool>)> = (0..config.n_reps)
            .into_par_iter()
            .map(|r| {
                replicate(config, derive_seed(grid_seed, r as u64), &|s| generate(value, s))
            })
            .collect::<Result<_>>()?;
        let reps = config.n_reps as f64;
        let power_before = outcomes.iter().filter(|o| o.0).count() as f64 / reps;
        let power_after = config
            .msd
            .then(|| outcomes.iter().filter(|o| o.1 == Some(true)).count() as f64 / reps);
        let is_null = null(value);
        points.push(PowerPoint {
            value,
            null: is_null,
            power_before,
            power_after,
            after_exceeds_alpha: power_after.map(|p| is_null && p > config.alpha),
        });
    }
    Ok(PowerCurve {
        scenario: scenario.to_string(),
        config: *config,
        points,
    })
}

fn mixture_sample(n: usize, weight: f64, seed: u64) -> Result<PointCloud> {
    let m = Mixture1d { weight, ..Mixture1d::REFERENCE };
    gen_gmm_1d(n, m.weight, m.mu1, m.mu2, m.s1, m.s2, seed)
}

/// Both samples draw `n0` points from the reference mixture; the second
/// also receives `N1` uniform points on [`NOISE_RANGE`] for each `N1` in
/// `noise_grid`. `N1 = 0` is the null point.
pub fn power_experiment_uniform_noise(
    noise_grid: &[usize],
    config: &PowerConfig,
) -> Result<PowerCurve> {
    let grid: Vec<f64> = noise_grid.iter().map(|&v| v as f64).collect();
    let n0 = config.n0;
    let w = Mixture1d::REFERENCE.weight;
    run_curve("uniform_noise", config, &grid, |v| v == 0.0, |value, seed| {
        let s1 = mixture_sample(n0, w, derive_seed(seed, 0))?;
        let mut s2 = mixture_sample(n0, w, derive_seed(seed, 1))?;
        let n1 = value as usize;
        if n1 > 0 {
            let noise = gen_uniform_noise(n1, &[NOISE_RANGE.0], &[NOISE_RANGE.1], derive_seed(seed, 2))?;
            s2 = s2.concat(&noise)?;
        }
        Ok((s1, s2))
    })
}

/// The first sample uses mixture weight `π` from `pi_grid`, the second
/// keeps `π = 0.5`; `π = 0.5` is the null point.
pub fn power_experiment_mixture_proportion(
    pi_grid: &[f64],
    config: &PowerConfig,
) -> Result<PowerCurve> {
    if pi_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::param("pi_grid", "values must lie in (0, 1)"));
    }
    let n0 = config.n0;
    run_curve("mixture_proportion", config, pi_grid, |v| v == 0.5, |value, seed| {
        Ok((
            mixture_sample(n0, value, derive_seed(seed, 0))?,
            mixture_sample(n0, 0.5, derive_seed(seed, 1))?,
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn cloud(n: usize, d: usize, shift: f64, seed: u64) -> PointCloud {
        let mut rng = rng_from_seed(seed);
        let v: Vec<f64> = (0..n * d).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect();
        PointCloud::from_flat(v, d).unwrap()
    }

    #[test]
    fn hand_values() {
        let x = PointCloud::from_scalars(&[0.0]).unwrap();
        let y = PointCloud::from_scalars(&[1.0]).unwrap();
        assert!((energy_statistic(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let expected = 2.0 - 2.0 * (-0.5f64).exp();
        assert!((mmd2_biased(&x, &y, KernelScale::Fixed(1.0)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.78693).abs() < 1e-5);
    }

    #[test]
    fn identical_samples_give_zero() {
        for d in [1, 3] {
            let x = cloud(40, d, 0.0, d as u64);
            assert!(energy_statistic(&x, &x).unwrap().abs() < 1e-12);
            assert!(mmd2_biased(&x, &x, KernelScale::Median).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn invariances() {
        let x = cloud(30, 2, 0.0, 1);
        let y = cloud(25, 2, 0.5, 2);
        let e = energy_statistic(&x, &y).unwrap();
        let (s, c) = 0.7f64.sin_cos();
        let mv = |p: &[f64]| vec![c * p[0] - s * p[1] + 4.0, s * p[0] + c * p[1] - 2.0];
        let e2 = energy_statistic(&x.map_points(mv).unwrap(), &y.map_points(mv).unwrap()).unwrap();
        assert!((e - e2).abs() < 1e-9 * e.abs().max(1.0));
        let rev: Vec<usize> = (0..30).rev().collect();
        let xr = x.select(&rev).unwrap();
        assert!((energy_statistic(&xr, &y).unwrap() - e).abs() < 1e-10);
        let m = mmd2_biased(&x, &y, KernelScale::Median).unwrap();
        assert!(m >= 0.0);
        assert!((mmd2_biased(&xr, &y, KernelScale::Median).unwrap() - m).abs() < 1e-12);
        assert!(energy_statistic(&x, &cloud(5, 3, 0.0, 1)).is_err());
    }

    #[test]
    fn engines_match_direct_statistics() {
        for d in [1, 2] {
            let x = cloud(35, d, 0.0, 10 + d as u64);
            let y = cloud(28, d, 0.3, 20 + d as u64);
            let e = two_sample_test(&x, &y, TestKind::Energy, KernelScale::Median, 99, 0.05, 1)
                .unwrap();
            let direct = energy_statistic(&x, &y).unwrap();
            assert!((e.statistic - direct).abs() < 1e-9 * direct.abs().max(1.0));
            let m = two_sample_test(&x, &y, TestKind::Mmd, KernelScale::Median, 99, 0.05, 1)
                .unwrap();
            let direct = mmd2_biased(&x, &y, KernelScale::Median).unwrap();
            assert!((m.statistic - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn engines_match_generic_permutation_test() {
        let x = cloud(20, 1, 0.0, 3);
        let y = cloud(20, 1, 0.8, 4);
        let fast = two_sample_test(&x, &y, TestKind::Energy, KernelScale::Median, 199, 0.05, 9)
            .unwrap();
        let slow = permutation_test(energy_statistic, &x, &y, 199, 0.05, 9).unwrap();
        // Same seed shuffles different buffers, so compare loosely.
        assert!((fast.p_value - slow.p_value).abs() < 0.1);
        assert!((fast.statistic - slow.statistic).abs() < 1e-9);
    }

    #[test]
    fn permutation_mechanics() {
        let x = cloud(15, 1, 0.0, 5);
        let y = cloud(15, 1, 0.0, 6);
        let constant = permutation_test(|_, _| Ok(3.0), &x, &y, 99, 0.05, 1).unwrap();
        assert_eq!(constant.p_value, 1.0);
        assert!(!constant.reject);
        let a = two_sample_test(&x, &y, TestKind::Mmd, KernelScale::Median, 199, 0.05, 4).unwrap();
        let b = two_sample_test(&x, &y, TestKind::Mmd, KernelScale::Median, 199, 0.05, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
        assert!(permutation_test(energy_statistic, &x, &y, 50, 0.05, 1).is_err());
    }

    #[test]
    fn far_apart_samples_are_rejected() {
        let x = cloud(30, 1, 0.0, 7);
        let y = cloud(30, 1, 3.0, 8);
        for kind in [TestKind::Energy, TestKind::Mmd] {
            let r = two_sample_test(&x, &y, kind, KernelScale::Median, 199, 0.05, 2).unwrap();
            assert!(r.reject);
            assert_eq!(r.p_value, 1.0 / 200.0);
        }
    }

    #[test]
    fn small_power_curve() {
        let mut cfg = PowerConfig::new(TestKind::Energy, 3);
        cfg.n0 = 60;
        cfg.n_reps = 4;
        cfg.n_perm = 99;
        let curve = power_experiment_uniform_noise(&[0, 60], &cfg).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert!(curve.points[0].null && !curve.points[1].null);
        assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.power_before)));
        assert!(curve.points[0].after_exceeds_alpha.is_some());
        assert_eq!(curve.to_csv().lines().count(), 3);
        assert_eq!(curve, power_experiment_uniform_noise(&[0, 60], &cfg).unwrap());
        cfg.n_reps = 0;
        assert!(power_experiment_uniform_noise(&[0], &cfg).is_err());
        cfg.n_reps = 2;
        cfg.msd = false;
        let mp = power_experiment_mixture_proportion(&[0.5, 0.2], &cfg).unwrap();
        assert!(mp.points[0].null && mp.points[0].power_after.is_none());
        assert!(power_experiment_mixture_proportion(&[1.0], &cfg).is_err());
    }
}
