//! Scalar bandwidth selectors.
//!
//! [`scv`] minimizes the smoothed cross-validation estimate of the mean
//! integrated squared error for an isotropic gaussian KDE, `H = h²·I`, with
//! a gaussian pilot `G = g²·I` set by the normal-scale rule:
//!
//! ```text
//! SCV(h) = 1/(n h^d (4π)^(d/2))
//!        + 1/n² Σ_i Σ_j [ φ(2h²+2g²) − 2 φ(h²+2g²) + φ(2g²) ](X_i − X_j)
//! ```
//!
//! where `φ(v)` is the centered isotropic normal density with per-coordinate
//! variance `v`. The sum runs over all ordered pairs, diagonal included.
//! The minimizer is located on a 25-point logarithmic grid spanning
//! `[h_NS/10, 10·h_NS]` and refined by golden-section search in `log h`
//! between the grid neighbours of the best grid point.

use crate::cloud::{sq_dist, PointCloud};
use crate::error::{Error, Result};

const GRID_POINTS: usize = 25;
const LOG_TOLERANCE: f64 = 1e-4;

fn check_variance(data: &PointCloud) -> Result<()> {
    if let Some(coordinate) = data.std_dev().iter().position(|&s| s <= 0.0) {
        return Err(Error::ZeroVariance { coordinate });
    }
    Ok(())
}

/// Normal-scale rule `h = (4/(d+2))^(1/(d+4)) · n^(−1/(d+4)) · σ̂`, with σ̂ the
/// mean of the per-coordinate sample standard deviations.
pub fn normal_scale(data: &PointCloud) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    check_variance(data)?;
    let d = data.dim() as f64;
    let sigma = data.mean_std_dev();
    Ok((4.0 / (d + 2.0)).powf(1.0 / (d + 4.0)) * (n as f64).powf(-1.0 / (d + 4.0)) * sigma)
}

/// The SCV objective for one dataset, with pairwise distances cached.
pub struct ScvObjective {
    n: usize,
    dim: usize,
    pilot: f64,
    pair_sq_dists: Vec<f64>,
    pilot_term: f64,
}

impl ScvObjective {
    pub fn new(data: &PointCloud) -> Result<Self> {
        let n = data.len();
        if n < 10 {
            return Err(Error::TooFewPoints { needed: 10, found: n });
        }
        let pilot = normal_scale(data)?;
        let mut pair_sq_dists = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            let a = data.point(i);
            for j in (i + 1)..n {
                pair_sq_dists.push(sq_dist(a, data.point(j)));
            }
        }
        let mut obj = Self {
            n,
            dim: data.dim(),
            pilot,
            pair_sq_dists,
            pilot_term: 0.0,
        };
        obj.pilot_term = obj.pair_sum(2.0 * pilot * pilot, None);
        Ok(obj)
    }

    pub fn pilot(&self) -> f64 {
        self.pilot
    }

    fn normal_const(&self, var: f64) -> f64 {
        (2.0 * std::f64::consts::PI * var).powf(-(self.dim as f64) / 2.0)
    }

    /// `Σ_i Σ_j φ(var_a)(X_i − X_j) − 2 φ(var_b)(X_i − X_j)` over ordered pairs;
    /// with `var_b = None` only the first term.
    fn pair_sum(&self, var_a: f64, var_b: Option<f64>) -> f64 {
        let ca = self.normal_const(var_a);
        let ia = -0.5 / var_a;
        match var_b {
            None => {
                let off: f64 = self.pair_sq_dists.iter().map(|&d2| (d2 * ia).exp()).sum();
                ca * (self.n as f64 + 2.0 * off)
            }
            Some(var_b) => {
                let cb = self.normal_const(var_b);
                let ib = -0.5 / var_b;
                let off: f64 = self
                    .pair_sq_dists
                    .iter()
                    .map(|&d2| ca * (d2 * ia).exp() - 2.0 * cb * (d2 * ib).exp())
                    .sum();
                (ca - 2.0 * cb) * self.n as f64 + 2.0 * off
            }
        }
    }

    pub fn value(&self, h: f64) -> f64 {
        let n = self.n as f64;
        let d = self.dim as f64;
        let g2 = self.pilot * self.pilot;
        let h2 = h * h;
        let roughness = 1.0 / (n * h.powf(d) * (4.0 * std::f64::consts::PI).powf(d / 2.0));
        let smoothed = self.pair_sum(2.0 * h2 + 2.0 * g2, Some(h2 + 2.0 * g2));
        roughness + (smoothed + self.pilot_term) / (n * n)
    }

    /// Minimizer over `[pilot/10, 10·pilot]`.
    pub fn minimize(&self) -> f64 {
        let lo = (self.pilot / 10.0).ln();
        let hi = (self.pilot * 10.0).ln();
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + i as f64 * step).collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.value(t.exp())).collect();
        let best = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(GRID_POINTS - 1)];
        let t = golden_section(|t| self.value(t.exp()), a, b, LOG_TOLERANCE);
        // Golden-section may settle on an endpoint worse than the grid point.
        if self.value(t.exp()) <= values[best] {
            t.exp()
        } else {
            grid[best].exp()
        }
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Smoothed cross-validation bandwidth (see module docs). Needs `n >= 10`.
pub fn scv(data: &PointCloud) -> Result<f64> {
    Ok(ScvObjective::new(data)?.minimize())
}

/// How a command obtains its bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    Fixed(f64),
    Scv,
    NormalScale,
}

impl BandwidthRule {
    pub fn select(&self, data: &PointCloud) -> Result<f64> {
        match *self {
            BandwidthRule::Fixed(h) if h.is_finite() && h > 0.0 => Ok(h),
            BandwidthRule::Fixed(h) => Err(Error::InvalidBandwidth(h)),
            BandwidthRule::Scv => scv(data),
            BandwidthRule::NormalScale => normal_scale(data),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::standardize;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = rng_from_seed(seed);
        let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        PointCloud::from_flat(v, d).unwrap()
    }

    #[test]
    fn normal_scale_closed_form() {
        let (x, _) = standardize(&normal_cloud(100, 1, 1)).unwrap();
        let h = normal_scale(&x).unwrap();
        let expected = (4.0f64 / 3.0).powf(0.2) * 100f64.powf(-0.2);
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 0.4217).abs() < 1e-4);
    }

    #[test]
    fn normal_scale_preconditions() {
        let one = PointCloud::from_rows(&[[0.0, 1.0]]).unwrap();
        assert_eq!(
            normal_scale(&one).unwrap_err(),
            Error::TooFewPoints { needed: 2, found: 1 }
        );
        let flat = PointCloud::from_rows(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(normal_scale(&flat).unwrap_err(), Error::ZeroVariance { coordinate: 1 });
    }

    #[test]
    fn selectors_are_scale_equivariant() {
        let x = normal_cloud(60, 2, 4);
        let scaled = x.map_points(|p| p.iter().map(|v| 10.0 * v).collect()).unwrap();
        let a = normal_scale(&x).unwrap();
        let b = normal_scale(&scaled).unwrap();
        assert!((b / a - 10.0).abs() < 1e-10);
        let a = scv(&x).unwrap();
        let b = scv(&scaled).unwrap();
        assert!((b / a / 10.0 - 1.0).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn scv_near_normal_scale_for_gaussian_data() {
        let x = normal_cloud(500, 1, 2);
        let h = scv(&x).unwrap();
        let ns = normal_scale(&x).unwrap();
        assert!(h > ns / 2.0 && h < ns * 2.0, "scv {h} vs ns {ns}");
    }

    #[test]
    fn scv_is_minimum_of_objective() {
        let x = normal_cloud(80, 2, 3);
        let obj = ScvObjective::new(&x).unwrap();
        let h = obj.minimize();
        let v = obj.value(h);
        for f in [0.9, 0.95, 1.05, 1.1] {
            assert!(obj.value(h * f) >= v - 1e-15);
        }
    }

    #[test]
    fn scv_preconditions() {
        let x = normal_cloud(9, 1, 3);
        assert_eq!(scv(&x).unwrap_err(), Error::TooFewPoints { needed: 10, found: 9 });
        let rows: Vec<[f64; 2]> = (0..12).map(|i| [i as f64, 3.0]).collect();
        let flat = PointCloud::from_rows(&rows).unwrap();
        assert_eq!(scv(&flat).unwrap_err(), Error::ZeroVariance { coordinate: 1 });
    }
}
