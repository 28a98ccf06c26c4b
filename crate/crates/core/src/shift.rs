//! Mean shift operators.
//!
//! A [`ShiftOperator`] is the generalized update
//! `M(x) = x + c·τ²·∇f(x)/f(x)` for any source of `(f, ∇f)`. Operators
//! built with [`ShiftOperator::empirical`] use the equivalent kernel-weighted
//! mean form instead of the ratio, which avoids dividing two tiny numbers.
//!
//! The source is never refit: [`ShiftOperator::denoise`] applies the same
//! operator to every point for every sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticDensity;
use crate::cloud::{dist, PointCloud};
use crate::density::DensityModel;
use crate::error::{Error, Result};

/// Anything that can evaluate a density and its gradient.
pub trait DensitySource: Send + Sync {
    fn dim(&self) -> usize;
    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
    fn value(&self, x: &[f64]) -> Result<f64>;
}

impl DensitySource for DensityModel {
    fn dim(&self) -> usize {
        DensityModel::dim(self)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.density_and_gradient(x)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.density_at(x)
    }
}

impl DensitySource for AnalyticDensity {
    fn dim(&self) -> usize {
        AnalyticDensity::dim(self)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok((self.value(x), self.gradient(x)))
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(AnalyticDensity::value(self, x))
    }
}

#[derive(Clone, Copy)]
enum StepForm<'a> {
    Ratio,
    WeightedMean(&'a DensityModel),
}

/// The map `x ↦ x + c·τ²·∇f(x)/f(x)`.
#[derive(Clone, Copy)]
pub struct ShiftOperator<'a> {
    source: &'a dyn DensitySource,
    tau: f64,
    c: f64,
    form: StepForm<'a>,
}

impl std::fmt::Debug for ShiftOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftOperator")
            .field("tau", &self.tau)
            .field("c", &self.c)
            .field("weighted_mean", &matches!(self.form, StepForm::WeightedMean(_)))
            .finish()
    }
}

impl<'a> ShiftOperator<'a> {
    /// Generalized operator evaluated in ratio form.
    pub fn new(source: &'a dyn DensitySource, tau: f64, c: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {tau}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("c", format!("must be finite and > 0, got {c}")));
        }
        Ok(Self {
            source,
            tau,
            c,
            form: StepForm::Ratio,
        })
    }

    /// Empirical mean shift: `τ = h`, `c` from the kernel, weighted-mean form.
    pub fn empirical(model: &'a DensityModel) -> Self {
        Self {
            source: model,
            tau: model.bandwidth(),
            c: model.kernel().c(),
            form: StepForm::WeightedMean(model),
        }
    }

    /// Population mean shift on an analytic density with `τ = h`, `c = 1`.
    pub fn population(density: &'a AnalyticDensity, h: f64) -> Result<Self> {
        Self::new(density, h, 1.0)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn source(&self) -> &'a dyn DensitySource {
        self.source
    }

    /// `x + c·τ²·∇f(x)/f(x)`, regardless of the operator's preferred form.
    pub fn ratio_step(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (f, grad) = self.source.value_and_gradient(x)?;
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::ZeroDensity { value: f });
        }
        let scale = self.c * self.tau * self.tau / f;
        let out: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + scale * gi).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::ZeroDensity { value: f });
        }
        Ok(out)
    }

    /// One application of the operator.
    pub fn shift_step(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.form {
            StepForm::Ratio => self.ratio_step(x),
            StepForm::WeightedMean(model) => model.weighted_mean(x),
        }
    }

    /// Iterates [`Self::shift_step`] until a step shorter than `tol` or
    /// `max_iter` steps. Hitting the cap is reported through
    /// `converged = false`, not as an error.
    pub fn shift_until_converged(&self, x: &[f64], criteria: Convergence) -> Result<ShiftTrace> {
        if x.len() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: x.len(),
            });
        }
        let mut trace = ShiftTrace::start(x.to_vec());
        let mut current = x.to_vec();
        for _ in 0..criteria.max_iter {
            let next = self.shift_step(&current)?;
            let len = dist(&current, &next);
            trace.push(next.clone(), len);
            current = next;
            if len < criteria.tol {
                trace.converged = true;
                break;
            }
        }
        Ok(trace)
    }

    /// Applies the operator `sweeps` times to every point of `data`.
    pub fn denoise(&self, data: &PointCloud, sweeps: usize) -> Result<PointCloud> {
        if sweeps == 0 {
            return Err(Error::param("sweeps", "must be at least 1"));
        }
        if data.dim() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: data.dim(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..data.len())
            .into_par_iter()
            .map(|i| {
                let mut x = data.point(i).to_vec();
                for _ in 0..sweeps {
                    x = self.shift_step(&x).map_err(|e| Error::at_point(i, e))?;
                }
                Ok(x)
            })
            .collect::<Result<_>>()?;
        PointCloud::from_rows(&rows)
    }
}

/// The classical update `Σ X_i K((x−X_i)/h) / Σ K((x−X_j)/h)`.
pub fn empirical_step_weighted_mean(model: &DensityModel, x: &[f64]) -> Result<Vec<f64>> {
    model.weighted_mean(x)
}

/// Stopping rule for iterated shifting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub tol: f64,
    pub max_iter: usize,
}

impl Convergence {
    pub const DEFAULT_MAX_ITER: usize = 500;

    /// `tol = 1e-7 × mean per-coordinate sd` of `data` (1e-7 when that sd is
    /// zero), `max_iter = 500`.
    pub fn for_data(data: &PointCloud) -> Self {
        let sd = data.mean_std_dev();
        let scale = if sd > 0.0 { sd } else { 1.0 };
        Self {
            tol: 1e-7 * scale,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

/// Path of one point under repeated shifting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrace {
    pub path: Vec<Vec<f64>>,
    pub step_lengths: Vec<f64>,
    pub total_length: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ShiftTrace {
    fn start(x: Vec<f64>) -> Self {
        Self {
            path: vec![x],
            step_lengths: Vec::new(),
            total_length: 0.0,
            converged: false,
            iterations: 0,
        }
    }

    fn push(&mut self, x: Vec<f64>, len: f64) {
        self.path.push(x);
        self.step_lengths.push(len);
        self.total_length += len;
        self.iterations += 1;
    }

    pub fn end(&self) -> &[f64] {
        self.path.last().expect("trace always holds its start point")
    }
}
