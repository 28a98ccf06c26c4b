//! The sample container shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points in `d` dimensions, stored row-major.
///
/// Invariants: `n >= 1`, `d >= 1`, every coordinate finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    /// Builds a cloud from row vectors.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("point cloud"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim)
    }

    /// Builds a cloud from a row-major buffer.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if data.is_empty() {
            return Err(Error::Empty("point cloud"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                column: pos % dim,
            });
        }
        Ok(Self { data, dim })
    }

    /// One-dimensional cloud from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false for a constructed cloud; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Cloud made of the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self::from_flat(data, self.dim)
    }

    /// Concatenation of `self` followed by `other`.
    pub fn concat(&self, other: &PointCloud) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::from_flat(data, self.dim)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Per-coordinate sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for p in self.iter() {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        let n = self.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Per-coordinate sample standard deviation (n − 1 divisor).
    /// Zero for a single point.
    pub fn std_dev(&self) -> Vec<f64> {
        let n = self.len();
        if n < 2 {
            return vec![0.0; self.dim];
        }
        let mean = self.mean();
        let mut acc = vec![0.0; self.dim];
        for p in self.iter() {
            for ((a, v), m) in acc.iter_mut().zip(p).zip(&mean) {
                *a += (v - m) * (v - m);
            }
        }
        acc.iter().map(|s| (s / (n as f64 - 1.0)).sqrt()).collect()
    }

    /// Average of the per-coordinate standard deviations.
    pub fn mean_std_dev(&self) -> f64 {
        let sd = self.std_dev();
        sd.iter().sum::<f64>() / sd.len() as f64
    }

    /// Applies `f` to every point.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.iter() {
            let q = f(p);
            if q.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: q.len(),
                });
            }
            data.extend(q);
        }
        Self::from_flat(data, self.dim)
    }
}

/// Per-coordinate affine map recorded by [`standardize`]:
/// `z = (x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl AffineTransform {
    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.check_dim(self.mean.len())?;
        cloud.map_points(|p| {
            p.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .map(|((x, m), s)| (x - m) / s)
                .collect()
        })
    }

    pub fn inverse(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.check_dim(self.mean.len())?;
        cloud.map_points(|p| {
            p.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .map(|((z, m), s)| z * s + m)
                .collect()
        })
    }
}

/// Centers every coordinate to mean 0 and scales it to sample sd 1
/// (n − 1 divisor).
pub fn standardize(data: &PointCloud) -> Result<(PointCloud, AffineTransform)> {
    if data.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: data.len(),
        });
    }
    let mean = data.mean();
    let scale = data.std_dev();
    if let Some(coordinate) = scale.iter().position(|&s| s <= 0.0) {
        return Err(Error::ZeroVariance { coordinate });
    }
    let transform = AffineTransform { mean, scale };
    let out = transform.apply(data)?;
    Ok((out, transform))
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            PointCloud::from_rows::<Vec<f64>>(&[]),
            Err(Error::Empty("point cloud"))
        );
        assert!(matches!(
            PointCloud::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert_eq!(
            PointCloud::from_rows(&[vec![1.0, 2.0], vec![3.0, f64::NAN]]),
            Err(Error::NonFinite { row: 1, column: 1 })
        );
    }

    #[test]
    fn standardize_two_points() {
        let x = PointCloud::from_scalars(&[0.0, 2.0]).unwrap();
        let (z, t) = standardize(&x).unwrap();
        // sd with n-1 divisor of {0, 2} is sqrt(2).
        let s = 2f64.sqrt();
        assert!((z.point(0)[0] + 1.0 / s).abs() < 1e-15);
        assert!((z.point(1)[0] - 1.0 / s).abs() < 1e-15);
        assert_eq!(t.mean, vec![1.0]);
        assert!((t.scale[0] - s).abs() < 1e-15);
    }

    #[test]
    fn standardize_is_idempotent_and_invertible() {
        let x = PointCloud::from_rows(&[
            vec![1.0, 10.0],
            vec![2.0, -3.0],
            vec![4.5, 7.0],
            vec![-1.0, 0.5],
        ])
        .unwrap();
        let (z, t) = standardize(&x).unwrap();
        let sd = z.std_dev();
        let mean = z.mean();
        for j in 0..2 {
            assert!(mean[j].abs() < 1e-12);
            assert!((sd[j] - 1.0).abs() < 1e-12);
        }
        let (z2, _) = standardize(&z).unwrap();
        for (a, b) in z.as_flat().iter().zip(z2.as_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = t.inverse(&z).unwrap();
        for (a, b) in x.as_flat().iter().zip(back.as_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let x = PointCloud::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(standardize(&x).unwrap_err(), Error::ZeroVariance { coordinate: 1 });
    }
}
