//! Closed-form densities with known gradients, used as population sources.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync>;
pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A density `f` with gradient `∇f`, plus whatever reference facts are known
/// about it (critical points, a sampler, a 1-D cdf, a bound on `|∇∇f|`).
#[derive(Clone)]
pub struct AnalyticDensity {
    name: String,
    dim: usize,
    f: ScalarFn,
    grad: VectorFn,
    modes: Vec<Vec<f64>>,
    minima: Vec<Vec<f64>>,
    sampler: Option<SamplerFn>,
    cdf: Option<CdfFn>,
    hessian_bound: Option<f64>,
    support: Option<(Vec<f64>, Vec<f64>)>,
}

impl fmt::Debug for AnalyticDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticDensity")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("modes", &self.modes)
            .field("minima", &self.minima)
            .field("hessian_bound", &self.hessian_bound)
            .finish_non_exhaustive()
    }
}

impl AnalyticDensity {
    pub fn new(name: impl Into<String>, dim: usize, f: ScalarFn, grad: VectorFn) -> Self {
        Self {
            name: name.into(),
            dim,
            f,
            grad,
            modes: Vec::new(),
            minima: Vec::new(),
            sampler: None,
            cdf: None,
            hessian_bound: None,
            support: None,
        }
    }

    pub fn with_modes(mut self, modes: Vec<Vec<f64>>) -> Self {
        self.modes = modes;
        self
    }

    pub fn with_minima(mut self, minima: Vec<Vec<f64>>) -> Self {
        self.minima = minima;
        self
    }

    pub fn with_sampler(mut self, sampler: SamplerFn) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn with_cdf(mut self, cdf: CdfFn) -> Self {
        self.cdf = Some(cdf);
        self
    }

    /// Sup over the support of the max-entry Hessian norm, `‖f‖_{2,∞}`.
    pub fn with_hessian_bound(mut self, bound: f64) -> Self {
        self.hessian_bound = Some(bound);
        self
    }

    /// Box outside of which the density is negligible.
    pub fn with_support(mut self, low: Vec<f64>, high: Vec<f64>) -> Self {
        self.support = Some((low, high));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn minima(&self) -> &[Vec<f64>] {
        &self.minima
    }

    pub fn hessian_bound(&self) -> Option<f64> {
        self.hessian_bound
    }

    pub fn support(&self) -> Option<(&[f64], &[f64])> {
        self.support.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    pub fn cdf(&self, x: f64) -> Option<f64> {
        self.cdf.as_ref().map(|c| c(x))
    }

    pub fn has_cdf(&self) -> bool {
        self.cdf.is_some()
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let s = self
            .sampler
            .as_ref()
            .ok_or_else(|| Error::param("density", format!("{} has no sampler", self.name)))?;
        Ok(s(rng))
    }

    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<PointCloud> {
        let mut flat = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            flat.extend(self.draw(rng)?);
        }
        PointCloud::from_flat(flat, self.dim)
    }

    /// Largest relative disagreement between `∇f` and central differences
    /// of `f` over the probes.
    pub fn gradient_check(&self, probes: &PointCloud, step: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for x in probes.iter() {
            let g = self.gradient(x);
            let mut err = 0.0;
            let mut norm = 0.0;
            for j in 0..self.dim {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[j] += step;
                b[j] -= step;
                let fd = (self.value(&a) - self.value(&b)) / (2.0 * step);
                err += (fd - g[j]) * (fd - g[j]);
                norm += g[j] * g[j];
            }
            worst = worst.max(err.sqrt() / norm.sqrt().max(1e-8));
        }
        worst
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    INV_SQRT_2PI / sd * (-0.5 * z * z).exp()
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// `N(0, 1)` on the line.
pub fn standard_normal_1d() -> AnalyticDensity {
    AnalyticDensity::new(
        "standard_normal_1d",
        1,
        Arc::new(|x| normal_pdf(x[0], 0.0, 1.0)),
        Arc::new(|x| vec![-x[0] * normal_pdf(x[0], 0.0, 1.0)]),
    )
    .with_modes(vec![vec![0.0]])
    .with_sampler(Arc::new(|rng| vec![rng.sample::<f64, _>(StandardNormal)]))
    .with_cdf(Arc::new(|x| normal_cdf(x, 0.0, 1.0)))
    // |f''| = |x² − 1|·φ(x) peaks at x = 0.
    .with_hessian_bound(INV_SQRT_2PI)
    .with_support(vec![-9.0], vec![9.0])
}

/// Two-component mixture `π·N(μ1, s1²) + (1 − π)·N(μ2, s2²)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mixture1d {
    pub weight: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Mixture1d {
    /// The two-sample fixture: π = 0.7, μ = (0, 5), unit variances.
    pub const REFERENCE: Mixture1d = Mixture1d {
        weight: 0.7,
        mu1: 0.0,
        mu2: 5.0,
        s1: 1.0,
        s2: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::param("mix", "must lie in [0, 1]"));
        }
        if !(self.s1 > 0.0 && self.s2 > 0.0) {
            return Err(Error::param("sd", "component sds must be positive"));
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(Error::param("mean", "component means must be finite"));
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.weight * normal_pdf(x, self.mu1, self.s1)
            + (1.0 - self.weight) * normal_pdf(x, self.mu2, self.s2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.weight * normal_pdf(x, self.mu1, self.s1) * (x - self.mu1) / (self.s1 * self.s1)
            - (1.0 - self.weight) * normal_pdf(x, self.mu2, self.s2) * (x - self.mu2)
                / (self.s2 * self.s2)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let term = |w: f64, mu: f64, s: f64| {
            let z = (x - mu) / s;
            w * normal_pdf(x, mu, s) * (z * z - 1.0) / (s * s)
        };
        term(self.weight, self.mu1, self.s1) + term(1.0 - self.weight, self.mu2, self.s2)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.weight * normal_cdf(x, self.mu1, self.s1)
            + (1.0 - self.weight) * normal_cdf(x, self.mu2, self.s2)
    }

    fn range(&self) -> (f64, f64) {
        let lo = (self.mu1 - 8.0 * self.s1).min(self.mu2 - 8.0 * self.s2);
        let hi = (self.mu1 + 8.0 * self.s1).max(self.mu2 + 8.0 * self.s2);
        (lo, hi)
    }

    /// Critical points `(modes, minima)` located by sign changes of `f'` on a
    /// fine grid, refined by bisection.
    pub fn critical_points(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.range();
        let roots = sign_change_roots(|x| self.derivative(x), lo, hi, 20_000);
        let mut modes = Vec::new();
        let mut minima = Vec::new();
        for r in roots {
            if self.second_derivative(r) < 0.0 {
                modes.push(r);
            } else {
                minima.push(r);
            }
        }
        (modes, minima)
    }

    pub fn hessian_bound(&self) -> f64 {
        let (lo, hi) = self.range();
        let steps = 40_000;
        let dx = (hi - lo) / steps as f64;
        (0..=steps)
            .map(|i| self.second_derivative(lo + i as f64 * dx).abs())
            .fold(0.0, f64::max)
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        if rng.random::<f64>() < self.weight {
            self.mu1 + self.s1 * z
        } else {
            self.mu2 + self.s2 * z
        }
    }

    pub fn to_density(self) -> Result<AnalyticDensity> {
        self.validate()?;
        let (modes, minima) = self.critical_points();
        let (lo, hi) = self.range();
        let m = self;
        Ok(AnalyticDensity::new(
            format!(
                "mixture_1d(pi={}, mu=({}, {}), sd=({}, {}))",
                m.weight, m.mu1, m.mu2, m.s1, m.s2
            ),
            1,
            Arc::new(move |x| m.pdf(x[0])),
            Arc::new(move |x| vec![m.derivative(x[0])]),
        )
        .with_modes(modes.into_iter().map(|v| vec![v]).collect())
        .with_minima(minima.into_iter().map(|v| vec![v]).collect())
        .with_sampler(Arc::new(move |rng| vec![m.draw(rng)]))
        .with_cdf(Arc::new(move |x| m.cdf(x)))
        .with_hessian_bound(m.hessian_bound())
        .with_support(vec![lo], vec![hi]))
    }
}

/// Roots of `g` on `[lo, hi]` found by scanning `steps` cells for sign
/// changes and bisecting each to machine precision.
pub fn sign_change_roots<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let dx = (hi - lo) / steps as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut ga = g(a);
    for i in 1..=steps {
        let b = lo + i as f64 * dx;
        let gb = g(b);
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            roots.push(bisect(&g, a, b, ga));
        }
        a = b;
        ga = gb;
    }
    roots
}

pub(crate) fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn reference_mixture_has_two_modes_and_one_valley() {
        let d = Mixture1d::REFERENCE.to_density().unwrap();
        assert_eq!(d.modes().len(), 2);
        assert_eq!(d.minima().len(), 1);
        let valley = d.minima()[0][0];
        assert!(valley > 2.0 && valley < 4.5);
        assert!(d.gradient(&[valley])[0].abs() < 1e-12);
        for m in d.modes() {
            assert!(d.gradient(m)[0].abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let probes = PointCloud::from_scalars(&[-2.0, -0.3, 0.7, 2.5, 4.1, 6.0]).unwrap();
        for d in [standard_normal_1d(), Mixture1d::REFERENCE.to_density().unwrap()] {
            assert!(d.gradient_check(&probes, 1e-5) < 1e-6, "{}", d.name());
        }
    }

    #[test]
    fn cdf_is_consistent_with_pdf() {
        let m = Mixture1d::REFERENCE;
        let (a, b) = (-1.0, 2.0);
        let steps = 2000;
        let dx = (b - a) / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| m.pdf(a + (i as f64 + 0.5) * dx) * dx)
            .sum();
        assert!((integral - (m.cdf(b) - m.cdf(a))).abs() < 1e-7);
    }

    #[test]
    fn mixture_sampler_mean() {
        let m = Mixture1d {
            weight: 1.0,
            mu1: 2.0,
            mu2: -4.0,
            s1: 1.5,
            s2: 1.0,
        };
        let mut rng = rng_from_seed(4);
        let n = 4000;
        let mean = (0..n).map(|_| m.draw(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 4.0 * 1.5 / (n as f64).sqrt());
    }

    #[test]
    fn invalid_mixture_rejected() {
        let bad = Mixture1d {
            weight: 1.2,
            ..Mixture1d::REFERENCE
        };
        assert!(bad.to_density().is_err());
        let bad = Mixture1d {
            s2: 0.0,
            ..Mixture1d::REFERENCE
        };
        assert!(bad.validate().is_err());
    }
}
