//! Kernel density estimation with analytic gradients.
//!
//! Evaluation is a plain O(n) sum per query in a fixed order, so results are
//! bit-identical regardless of how batch queries are scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{sq_dist, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
}

/// A radially symmetric kernel together with its mean-shift constant `c`.
///
/// `c` is the factor for which the weighted-mean update equals
/// `x + c·h²·∇p̂(x)/p̂(x)`; it is 1 for the gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    c: f64,
}

impl KernelSpec {
    pub fn gaussian() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            c: 1.0,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Unnormalized profile `k(‖u‖²)`; for the gaussian `exp(-‖u‖²/2)`.
    #[inline]
    pub fn profile(&self, sq_norm: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-0.5 * sq_norm).exp(),
        }
    }

    /// Normalizing constant in dimension `dim`; `(2π)^(-d/2)` for the gaussian.
    pub fn normalizer(&self, dim: usize) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0),
        }
    }

    /// `K(u)` for a vector with squared norm `sq_norm`.
    pub fn value(&self, sq_norm: f64, dim: usize) -> f64 {
        self.normalizer(dim) * self.profile(sq_norm)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::gaussian()
    }
}

/// Raw kernel sums at a query point: `Σ k_i` and `Σ k_i·X_i` with
/// `k_i = k(‖(x − X_i)/h‖²)` (unnormalized profile).
#[derive(Debug, Clone)]
pub struct KernelSums {
    pub weight: f64,
    pub weighted_points: Vec<f64>,
}

/// A fitted kernel density estimate
/// `p̂(x) = 1/(n·h^d) Σ K((x − X_i)/h)`.
#[derive(Debug, Clone)]
pub struct DensityModel {
    data: PointCloud,
    h: f64,
    kernel: KernelSpec,
    // 1 / (n h^d) times the kernel normalizer.
    density_scale: f64,
}

impl DensityModel {
    pub fn fit(data: PointCloud, h: f64, kernel: KernelSpec) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidBandwidth(h));
        }
        let n = data.len() as f64;
        let d = data.dim();
        let density_scale = kernel.normalizer(d) / (n * h.powi(d as i32));
        Ok(Self {
            data,
            h,
            kernel,
            density_scale,
        })
    }

    pub fn gaussian(data: PointCloud, h: f64) -> Result<Self> {
        Self::fit(data, h, KernelSpec::gaussian())
    }

    pub fn data(&self) -> &PointCloud {
        &self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn kernel_sums(&self, x: &[f64]) -> Result<KernelSums> {
        self.data.check_dim(x.len())?;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut weight = 0.0;
        let mut weighted_points = vec![0.0; x.len()];
        for p in self.data.iter() {
            let k = self.kernel.profile(sq_dist(x, p) * inv_h2);
            weight += k;
            for (acc, v) in weighted_points.iter_mut().zip(p) {
                *acc += k * v;
            }
        }
        Ok(KernelSums {
            weight,
            weighted_points,
        })
    }

    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        self.data.check_dim(x.len())?;
        let inv_h2 = 1.0 / (self.h * self.h);
        let s: f64 = self
            .data
            .iter()
            .map(|p| self.kernel.profile(sq_dist(x, p) * inv_h2))
            .sum();
        Ok(s * self.density_scale)
    }

    /// `∇p̂(x) = 1/(n·h^(d+2)) Σ (X_i − x)·K((x − X_i)/h)` (gaussian kernel).
    pub fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.density_and_gradient(x)?.1)
    }

    pub fn density_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let sums = self.kernel_sums(x)?;
        let inv_h2 = 1.0 / (self.h * self.h);
        let density = sums.weight * self.density_scale;
        let grad = sums
            .weighted_points
            .iter()
            .zip(x)
            .map(|(wp, xi)| (wp - sums.weight * xi) * self.density_scale * inv_h2)
            .collect();
        Ok((density, grad))
    }

    /// Kernel-weighted mean `Σ X_i k_i / Σ k_j`; the classical mean shift update.
    pub fn weighted_mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        let sums = self.kernel_sums(x)?;
        if !(sums.weight > 0.0 && sums.weight.is_finite()) {
            return Err(Error::ZeroDensity {
                value: sums.weight * self.density_scale,
            });
        }
        Ok(sums
            .weighted_points
            .iter()
            .map(|v| v / sums.weight)
            .collect())
    }

    /// Density at every point of `queries`, in order.
    pub fn density_batch(&self, queries: &PointCloud) -> Result<Vec<f64>> {
        self.data.check_dim(queries.dim())?;
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.density_at(queries.point(i)))
            .collect()
    }

    pub fn gradient_batch(&self, queries: &PointCloud) -> Result<Vec<Vec<f64>>> {
        self.data.check_dim(queries.dim())?;
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.gradient_at(queries.point(i)))
            .collect()
    }
}
