//! Mean shift denoising.
//!
//! Kernel density estimation with analytic gradients, mean shift operators
//! that move a whole sample toward high-density regions, and the tools built
//! on top of them: clustering before and after denoising, permutation
//! two-sample tests, path-length anomaly scores and a Monte Carlo lab that
//! measures how the shifted distribution concentrates.

pub mod analytic;
pub mod anomaly;
pub mod bandwidth;
pub mod cloud;
pub mod clustering;
pub mod density;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod shift;
pub mod synthetic;
pub mod theory_lab;
pub mod twosample;

pub use analytic::{AnalyticDensity, Mixture1d};
pub use bandwidth::BandwidthRule;
pub use cloud::{standardize, AffineTransform, PointCloud};
pub use density::{DensityModel, KernelFamily, KernelSpec};
pub use error::{Error, Result};
pub use shift::{Convergence, DensitySource, ShiftOperator, ShiftTrace};
