//! Monte Carlo and quadrature checks of how mean shift concentrates a
//! distribution.
//!
//! Every estimate here compares a distribution before and after shifting.
//! Monte Carlo estimates reuse the same draws on both sides (common random
//! numbers), so the noise in a difference comes only from points whose
//! membership actually changes. One-dimensional shifted masses are computed
//! exactly by [`shifted_mass_1d`]: the preimage of the target set under the
//! map is located on a grid, its endpoints refined by bisection, and the
//! mass summed from the CDF.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::gamma;

use crate::analytic::{bisect, normal_pdf, sign_change_roots, AnalyticDensity, Mixture1d};
use crate::cloud::{sq_dist, PointCloud};
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::shift::{Convergence, ShiftOperator};

/// Upper level set `{x : f(x) ≥ λ}` with optional 1-D boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub level: f64,
    /// Boundary points (1-D only).
    pub boundary: Vec<f64>,
    /// Smallest `|f'|` over the boundary.
    pub g0: Option<f64>,
}

impl LevelSetSpec {
    pub fn new(level: f64) -> Result<Self> {
        if !(level.is_finite() && level > 0.0) {
            return Err(Error::param("level", "must be finite and > 0"));
        }
        Ok(Self {
            level,
            boundary: Vec::new(),
            g0: None,
        })
    }

    /// Level set of a 1-D density with boundary points found as roots of
    /// `f − λ` over the declared support.
    pub fn from_density_1d(density: &AnalyticDensity, level: f64) -> Result<Self> {
        let mut spec = Self::new(level)?;
        let (lo, hi) = support_1d(density)?;
        spec.boundary = sign_change_roots(|x| density.value(&[x]) - level, lo, hi, 40_000);
        spec.g0 = spec
            .boundary
            .iter()
            .map(|&b| density.gradient(&[b])[0].abs())
            .reduce(f64::min);
        Ok(spec)
    }

    pub fn contains(&self, density: &AnalyticDensity, x: &[f64]) -> bool {
        density.value(x) >= self.level
    }
}

fn support_1d(density: &AnalyticDensity) -> Result<(f64, f64)> {
    if density.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: density.dim(),
        });
    }
    density
        .support()
        .map(|(l, h)| (l[0], h[0]))
        .ok_or_else(|| Error::param("density", "needs a declared support"))
}

/// Fraction of sample points inside the level set.
pub fn level_set_mass(sample: &PointCloud, density: &AnalyticDensity, spec: &LevelSetSpec) -> Result<f64> {
    sample.check_dim(density.dim())?;
    let inside = sample.iter().filter(|p| spec.contains(density, p)).count();
    Ok(inside as f64 / sample.len() as f64)
}

/// Log–log least-squares fit `log y = a + b·log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    /// `None` when a value is not positive or fewer than two points exist.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// 95% half-width from the residual variance (needs three points).
    pub half_width: Option<f64>,
}

impl ScalingReport {
    pub fn fit(params: Vec<f64>, values: Vec<f64>) -> Self {
        let mut report = Self {
            params,
            values,
            slope: None,
            intercept: None,
            half_width: None,
        };
        let k = report.params.len();
        if k < 2
            || k != report.values.len()
            || report.values.iter().chain(&report.params).any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return report;
        }
        let lx: Vec<f64> = report.params.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = report.values.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / k as f64;
        let my = ly.iter().sum::<f64>() / k as f64;
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx <= 0.0 {
            return report;
        }
        let b = sxy / sxx;
        let a = my - b * mx;
        report.slope = Some(b);
        report.intercept = Some(a);
        if k > 2 {
            let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - a - b * x).powi(2)).sum();
            let se = (rss / (k - 2) as f64 / sxx).sqrt();
            let t = StudentsT::new(0.0, 1.0, (k - 2) as f64)
                .map(|d| d.inverse_cdf(0.975))
                .unwrap_or(f64::NAN);
            report.half_width = Some(t * se);
        }
        report
    }

    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope.is_some_and(|s| (lo..=hi).contains(&s))
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty(name));
    }
    if grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(name, "must be positive and strictly increasing"));
    }
    Ok(())
}

/// Largest admissible `h` for the level-set mass check:
/// `h² ≤ min{3√2·λ/(c·‖f‖₂,∞), √2·λ²/(c·g0²)}`.
pub fn level_set_max_bandwidth(level: f64, c: f64, hessian_bound: f64, g0: f64) -> f64 {
    let a = 3.0 * std::f64::consts::SQRT_2 * level / (c * hessian_bound);
    let b = std::f64::consts::SQRT_2 * level * level / (c * g0 * g0);
    a.min(b).sqrt()
}

/// Largest admissible `h` for the density ratio at a critical point `m`:
/// `h² < f(m)/(c·‖f‖₂,max)`.
pub fn critical_point_max_bandwidth(value_at_point: f64, c: f64, hessian_bound: f64) -> f64 {
    (value_at_point / (c * hessian_bound)).sqrt()
}

fn draw(density: &AnalyticDensity, n: usize, seed: u64) -> Result<PointCloud> {
    density.sample(n, &mut rng_from_seed(seed))
}

/// Level-set mass before and after one population shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassIncreaseReport {
    pub density: String,
    pub level_set: LevelSetSpec,
    pub n_mc: usize,
    pub h_grid: Vec<f64>,
    pub mass_before: Vec<f64>,
    pub mass_after: Vec<f64>,
    pub delta_q: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `ΔQ ≥ −3·SE` at every h.
    pub nonnegative_within_noise: bool,
    /// `c·h²·g0·Vol/(6√2·λ)` for every h.
    pub bound_displayed: Vec<f64>,
    /// `c·h²·g0·Vol/(6√2)`, the level-set bound with `ρ0 = λ/2`.
    pub bound_specialized: Vec<f64>,
    pub bound_displayed_holds: Vec<bool>,
    pub bound_specialized_holds: Vec<bool>,
    pub scaling: ScalingReport,
}

/// For each `h`, draws `n_mc` points, shifts them once with the population
/// operator (`τ = h`, `c = 1`) and records the change in level-set mass.
/// Rejects grids outside [`level_set_max_bandwidth`].
pub fn mass_increase_curve(
    density: &AnalyticDensity,
    spec: &LevelSetSpec,
    h_grid: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<MassIncreaseReport> {
    check_grid("h_grid", h_grid)?;
    if n_mc < 100 {
        return Err(Error::TooFewPoints { needed: 100, found: n_mc });
    }
    let g0 = spec.g0.ok_or_else(|| Error::param("level_set", "needs g0"))?;
    let hess = density
        .hessian_bound()
        .ok_or_else(|| Error::param("density", "needs a Hessian bound"))?;
    let c = 1.0;
    let bound = level_set_max_bandwidth(spec.level, c, hess, g0);
    if let Some(&h) = h_grid.iter().find(|&&h| h > bound) {
        return Err(Error::InadmissibleBandwidth { h, bound });
    }
    let vol = spec.boundary.len() as f64;
    let k = 6.0 * std::f64::consts::SQRT_2;
    let mut r = MassIncreaseReport {
        density: density.name().to_string(),
        level_set: spec.clone(),
        n_mc,
        h_grid: h_grid.to_vec(),
        mass_before: vec![],
        mass_after: vec![],
        delta_q: vec![],
        std_error: vec![],
        nonnegative_within_noise: true,
        bound_displayed: vec![],
        bound_specialized: vec![],
        bound_displayed_holds: vec![],
        bound_specialized_holds: vec![],
        scaling: ScalingReport::fit(vec![], vec![]),
    };
    for (i, &h) in h_grid.iter().enumerate() {
        let x = draw(density, n_mc, derive_seed(seed, i as u64))?;
        let y = ShiftOperator::population(density, h)?.denoise(&x, 1)?;
        let before: Vec<f64> = x.iter().map(|p| spec.contains(density, p) as u8 as f64).collect();
        let after: Vec<f64> = y.iter().map(|p| spec.contains(density, p) as u8 as f64).collect();
        let n = n_mc as f64;
        let diffs: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        r.mass_before.push(before.iter().sum::<f64>() / n);
        r.mass_after.push(after.iter().sum::<f64>() / n);
        r.delta_q.push(mean);
        r.std_error.push(se);
        r.nonnegative_within_noise &= mean >= -3.0 * se;
        let specialized = c * h * h * g0 * vol / k;
        let displayed = specialized / spec.level;
        r.bound_displayed.push(displayed);
        r.bound_specialized.push(specialized);
        r.bound_displayed_holds.push(mean >= displayed);
        r.bound_specialized_holds.push(mean >= specialized);
    }
    r.scaling = ScalingReport::fit(h_grid.to_vec(), r.delta_q.clone());
    Ok(r)
}

fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

/// Ball-count density: points within `radius` of `x`, divided by
/// `n·v_d·radius^d`.
pub fn geometric_density_at(sample: &PointCloud, x: &[f64], radius: f64) -> Result<f64> {
    sample.check_dim(x.len())?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param("radius", "must be finite and > 0"));
    }
    let r2 = radius * radius;
    let count = sample.iter().filter(|p| sq_dist(p, x) <= r2).count();
    let d = sample.dim();
    Ok(count as f64 / (sample.len() as f64 * unit_ball_volume(d) * radius.powi(d as i32)))
}

/// Kind of critical point probed by [`mode_density_ratio_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Mode,
    Minimum,
}

/// Density ratio `q(m)/p(m)` after one population shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRatioReport {
    pub density: String,
    pub point: Vec<f64>,
    pub kind: CriticalKind,
    pub radius: f64,
    pub n_mc: usize,
    pub h_grid: Vec<f64>,
    pub ratio: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `ratio − 1` at a mode, `1 − ratio` at a minimum.
    pub gap: Vec<f64>,
    /// Every gap is positive.
    pub direction_holds: bool,
    pub scaling: ScalingReport,
}

/// For each `h`, compares ball-count densities at `point` before and after
/// one population shift of the same `n_mc` draws. `point` must be a
/// critical point of the density (‖∇f‖ < 1e−8) and every `h` must satisfy
/// [`critical_point_max_bandwidth`].
pub fn mode_density_ratio_curve(
    density: &AnalyticDensity,
    point: &[f64],
    h_grid: &[f64],
    radius: f64,
    n_mc: usize,
    seed: u64,
) -> Result<ModeRatioReport> {
    check_grid("h_grid", h_grid)?;
    if point.len() != density.dim() {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            found: point.len(),
        });
    }
    let grad_norm = density.gradient(point).iter().map(|g| g * g).sum::<f64>().sqrt();
    if grad_norm >= 1e-8 {
        return Err(Error::param("point", format!("not a critical point (|grad| = {grad_norm:e})")));
    }
    let hess = density
        .hessian_bound()
        .ok_or_else(|| Error::param("density", "needs a Hessian bound"))?;
    let bound = critical_point_max_bandwidth(density.value(point), 1.0, hess);
    if let Some(&h) = h_grid.iter().find(|&&h| h >= bound) {
        return Err(Error::InadmissibleBandwidth { h, bound });
    }
    let kind = if density.modes().iter().any(|m| sq_dist(m, point) < 1e-12) {
        CriticalKind::Mode
    } else if density.minima().iter().any(|m| sq_dist(m, point) < 1e-12) {
        CriticalKind::Minimum
    } else {
        return Err(Error::param("point", "not a declared mode or minimum"));
    };
    let r2 = radius * radius;
    let mut ratio = Vec::new();
    let mut std_error = Vec::new();
    let mut gap = Vec::new();
    for (i, &h) in h_grid.iter().enumerate() {
        let x = draw(density, n_mc, derive_seed(seed, i as u64))?;
        let y = ShiftOperator::population(density, h)?.denoise(&x, 1)?;
        let inside = |c: &PointCloud| -> Vec<f64> {
            c.iter().map(|p| (sq_dist(p, point) <= r2) as u8 as f64).collect()
        };
        let (a, b) = (inside(&x), inside(&y));
        let pre: f64 = a.iter().sum();
        if pre == 0.0 {
            return Err(Error::param("radius", "ball around the point is empty"));
        }
        let post: f64 = b.iter().sum();
        let n = n_mc as f64;
        let d: Vec<f64> = b.iter().zip(&a).map(|(u, v)| u - v).collect();
        let md = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|v| (v - md).powi(2)).sum::<f64>() / (n - 1.0);
        let rho = post / pre;
        ratio.push(rho);
        std_error.push((var * n).sqrt() / pre);
        gap.push(match kind {
            CriticalKind::Mode => rho - 1.0,
            CriticalKind::Minimum => 1.0 - rho,
        });
    }
    Ok(ModeRatioReport {
        density: density.name().to_string(),
        point: point.to_vec(),
        kind,
        radius,
        n_mc,
        h_grid: h_grid.to_vec(),
        direction_holds: gap.iter().all(|g| *g > 0.0),
        scaling: ScalingReport::fit(h_grid.to_vec(), gap.clone()),
        ratio,
        std_error,
        gap,
    })
}

/// Mass `P(M⁻¹(A))` of the preimage of `A` under a 1-D map `M`.
///
/// `in_target(M(x))` is scanned on `steps` cells of `[lo, hi]`; each change
/// of membership is refined by bisection and the mass of every run summed
/// with `cdf`. Points where `map` fails count as outside `A`. Runs shorter
/// than one cell can be missed, so `steps` must resolve the preimage.
pub fn shifted_mass_1d<M, T, C>(map: M, in_target: T, cdf: C, lo: f64, hi: f64, steps: usize) -> f64
where
    M: Fn(f64) -> Option<f64> + Sync,
    T: Fn(f64) -> bool + Sync,
    C: Fn(f64) -> f64,
{
    let member = |x: f64| map(x).is_some_and(&in_target);
    let dx = (hi - lo) / steps as f64;
    let flags: Vec<bool> = (0..=steps).into_par_iter().map(|i| member(lo + i as f64 * dx)).collect();
    let indicator = |x: f64| if member(x) { 1.0 } else { -1.0 };
    let mut mass = 0.0;
    let mut start = if flags[0] { Some(lo) } else { None };
    for i in 1..=steps {
        if flags[i] == flags[i - 1] {
            continue;
        }
        let a = lo + (i - 1) as f64 * dx;
        let b = lo + i as f64 * dx;
        let edge = bisect(&indicator, a, b, indicator(a));
        match start.take() {
            Some(s) => mass += cdf(edge) - cdf(s),
            None => start = Some(edge),
        }
    }
    if let Some(s) = start {
        mass += cdf(hi) - cdf(s);
    }
    mass
}

/// Population mass of the level set pulled back through a density's shift
/// map, `S_{f,τ,P}(L_λ)`.
fn pullback_mass<F, G>(value: F, grad: G, tau: f64, cdf: &dyn Fn(f64) -> f64, target: &(dyn Fn(f64) -> bool + Sync), range: (f64, f64), steps: usize) -> f64
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let map = |x: f64| {
        let f = value(x);
        (f > 0.0).then(|| x + tau * tau * grad(x) / f)
    };
    shifted_mass_1d(map, target, cdf, range.0, range.1, steps)
}

/// `|Q̂_n(A) − Q̄_n(A)|` against sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub density: String,
    pub level_set: LevelSetSpec,
    pub h: f64,
    pub n_reps: usize,
    pub n_grid: Vec<f64>,
    pub mean_abs_gap: Vec<f64>,
    pub sd_abs_gap: Vec<f64>,
    pub scaling: ScalingReport,
}

const QUADRATURE_STEP: f64 = 0.005;

/// For each `n`, draws `n_reps` samples of size `n`, builds the empirical
/// operator of each, and compares the shifted sample's level-set fraction
/// `Q̂_n(A)` with the population mass `Q̄_n(A)` of the preimage of `A` under
/// the same operator (computed by [`shifted_mass_1d`]). 1-D densities with a
/// CDF only.
pub fn empirical_population_gap(
    density: &AnalyticDensity,
    spec: &LevelSetSpec,
    n_grid: &[usize],
    h: f64,
    n_reps: usize,
    seed: u64,
) -> Result<GapReport> {
    let grid: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_grid("n_grid", &grid)?;
    if n_grid[0] < 100 {
        return Err(Error::TooFewPoints { needed: 100, found: n_grid[0] });
    }
    if n_reps == 0 {
        return Err(Error::param("n_reps", "must be at least 1"));
    }
    if !density.has_cdf() {
        return Err(Error::param("density", "needs a CDF"));
    }
    let (lo, hi) = support_1d(density)?;
    let steps = ((hi - lo) / QUADRATURE_STEP).ceil() as usize;
    let cdf = |x: f64| density.cdf(x).expect("checked above");
    let mut mean_abs_gap = Vec::new();
    let mut sd_abs_gap = Vec::new();
    for (g, &n) in n_grid.iter().enumerate() {
        let gaps: Vec<f64> = (0..n_reps)
            .map(|r| {
                let sample = draw(density, n, derive_seed(derive_seed(seed, g as u64), r as u64))?;
                let model = DensityModel::gaussian(sample.clone(), h)?;
                let op = ShiftOperator::empirical(&model);
                let shifted = op.denoise(&sample, 1)?;
                let q_hat = level_set_mass(&shifted, density, spec)?;
                let map = |x: f64| model.weighted_mean(&[x]).ok().map(|v| v[0]);
                let target = |y: f64| density.value(&[y]) >= spec.level;
                let q_bar = shifted_mass_1d(map, target, cdf, lo, hi, steps);
                Ok((q_hat - q_bar).abs())
            })
            .collect::<Result<_>>()?;
        let m = gaps.iter().sum::<f64>() / n_reps as f64;
        let sd = if n_reps > 1 {
            (gaps.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n_reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        mean_abs_gap.push(m);
        sd_abs_gap.push(sd);
    }
    Ok(GapReport {
        density: density.name().to_string(),
        level_set: spec.clone(),
        h,
        n_reps,
        scaling: ScalingReport::fit(grid.clone(), mean_abs_gap.clone()),
        n_grid: grid,
        mean_abs_gap,
        sd_abs_gap,
    })
}

/// Ball density at a KDE mode across repeated sweeps of a fixed operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSweepReport {
    pub source_size: usize,
    pub population_size: usize,
    pub h: f64,
    pub mode: Vec<f64>,
    pub radius: f64,
    /// Ball density after `N = 0, 1, …, sweeps` applications.
    pub densities: Vec<f64>,
    /// `densities[1..]` strictly increasing.
    pub strictly_increasing: bool,
    /// Largest `c1` with `density_N ≥ density_0·(1 + c1·h²)^N` for every N.
    pub c1: f64,
}

/// Builds the empirical operator from `source_size` draws with bandwidth
/// `h`, locates the KDE mode reached from `start`, then applies the fixed
/// operator `sweeps` times to `population_size` fresh draws, recording the
/// ball density at that mode after each sweep.
#[allow(clippy::too_many_arguments)]
pub fn multi_sweep_mode_density(
    density: &AnalyticDensity,
    source_size: usize,
    h: f64,
    start: &[f64],
    population_size: usize,
    sweeps: usize,
    radius: f64,
    seed: u64,
) -> Result<MultiSweepReport> {
    if sweeps == 0 {
        return Err(Error::param("sweeps", "must be at least 1"));
    }
    let source = draw(density, source_size, derive_seed(seed, 0))?;
    let model = DensityModel::gaussian(source.clone(), h)?;
    let op = ShiftOperator::empirical(&model);
    let crit = Convergence {
        tol: 1e-10 * source.mean_std_dev(),
        max_iter: 100_000,
    };
    let trace = op.shift_until_converged(start, crit)?;
    if !trace.converged {
        return Err(Error::param("start", "mean shift did not converge to a mode"));
    }
    let mode = trace.end().to_vec();
    let mut cloud = draw(density, population_size, derive_seed(seed, 1))?;
    let mut densities = vec![geometric_density_at(&cloud, &mode, radius)?];
    for _ in 0..sweeps {
        cloud = op.denoise(&cloud, 1)?;
        densities.push(geometric_density_at(&cloud, &mode, radius)?);
    }
    let strictly_increasing = densities[1..].windows(2).all(|w| w[1] > w[0]);
    let base = densities[0];
    let c1 = (1..densities.len())
        .map(|n| ((densities[n] / base).powf(1.0 / n as f64) - 1.0) / (h * h))
        .fold(f64::INFINITY, f64::min);
    Ok(MultiSweepReport {
        source_size,
        population_size,
        h,
        mode,
        radius,
        densities,
        strictly_increasing,
        c1,
    })
}

/// Which ingredient of the shifted distribution is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Situation {
    /// `f_n = f + Δ·φ(x − a)`, perturbation size `max(‖f_n − f‖∞, ‖f_n' − f'‖∞)`.
    Density,
    /// `τ_n = τ + δ`, perturbation size `δ`.
    StepScale,
    /// `P_n = (1 − ε)·P + ε·R`, perturbation size `|P_n(A) − P(A)|`.
    Sampling,
}

/// Response of `S_{f,τ,P}(A)` to a perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub situation: Situation,
    pub tau: f64,
    pub level: f64,
    pub base_mass: f64,
    pub amounts: Vec<f64>,
    pub perturbation_size: Vec<f64>,
    pub response: Vec<f64>,
    pub scaling: ScalingReport,
}

/// Perturbation fixture on a 1-D mixture: level set `A = L_λ` of `f`, a
/// bump or tilt component `N(center, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSetup {
    pub mixture: Mixture1d,
    pub level: f64,
    pub tau: f64,
    pub center: f64,
}

impl PerturbationSetup {
    pub fn reference() -> Self {
        Self {
            mixture: Mixture1d::REFERENCE,
            level: reference_level(&Mixture1d::REFERENCE),
            tau: 0.3,
            center: 2.5,
        }
    }

    fn range(&self) -> (f64, f64) {
        let m = &self.mixture;
        ((m.mu1 - 8.0 * m.s1).min(m.mu2 - 8.0 * m.s2), (m.mu1 + 8.0 * m.s1).max(m.mu2 + 8.0 * m.s2))
    }

    fn steps(&self) -> usize {
        let (lo, hi) = self.range();
        ((hi - lo) / 1e-3).ceil() as usize
    }

    fn mass(&self, value: &(dyn Fn(f64) -> f64 + Sync), grad: &(dyn Fn(f64) -> f64 + Sync), tau: f64, cdf: &dyn Fn(f64) -> f64) -> f64 {
        let m = self.mixture;
        let level = self.level;
        let target = move |y: f64| m.pdf(y) >= level;
        pullback_mass(value, grad, tau, cdf, &target, self.range(), self.steps())
    }

    fn base(&self) -> f64 {
        let m = self.mixture;
        self.mass(&|x| m.pdf(x), &|x| m.derivative(x), self.tau, &|x| m.cdf(x))
    }
}

/// Half the height of the lower of a mixture's two modes.
pub fn reference_level(m: &Mixture1d) -> f64 {
    let (modes, _) = m.critical_points();
    0.5 * modes.iter().map(|&x| m.pdf(x)).fold(f64::INFINITY, f64::min)
}

/// Measures `|S_perturbed(A) − S(A)|` for each perturbation amount.
pub fn perturbation_response(
    setup: &PerturbationSetup,
    situation: Situation,
    amounts: &[f64],
) -> Result<PerturbationReport> {
    check_grid("amounts", amounts)?;
    setup.mixture.validate()?;
    let m = setup.mixture;
    let base = setup.base();
    let center = setup.center;
    let level = setup.level;
    let bump = move |x: f64| normal_pdf(x, center, 1.0);
    let bump_grad = move |x: f64| -(x - center) * normal_pdf(x, center, 1.0);
    // sup φ = φ(0), sup |φ'| = φ(1).
    let bump_sup = normal_pdf(0.0, 0.0, 1.0).max(normal_pdf(1.0, 0.0, 1.0));
    let mut size = Vec::new();
    let mut response = Vec::new();
    for &amt in amounts {
        let (s, p) = match situation {
            Situation::Density => {
                let v = move |x: f64| m.pdf(x) + amt * bump(x);
                let g = move |x: f64| m.derivative(x) + amt * bump_grad(x);
                (setup.mass(&v, &g, setup.tau, &|x| m.cdf(x)), amt * bump_sup)
            }
            Situation::StepScale => (
                setup.mass(&|x| m.pdf(x), &|x| m.derivative(x), setup.tau + amt, &|x| m.cdf(x)),
                amt,
            ),
            Situation::Sampling => {
                if amt >= 1.0 {
                    return Err(Error::param("amounts", "mixture tilt must be below 1"));
                }
                let tilted = move |x: f64| {
                    (1.0 - amt) * m.cdf(x) + amt * crate::analytic::normal_cdf(x, center, 1.0)
                };
                let (lo, hi) = setup.range();
                let target = move |y: f64| m.pdf(y) >= level;
                let identity = |x: f64| Some(x);
                let p_a = shifted_mass_1d(identity, target, |x| m.cdf(x), lo, hi, setup.steps());
                let pn_a = shifted_mass_1d(identity, target, tilted, lo, hi, setup.steps());
                (
                    setup.mass(&|x| m.pdf(x), &|x| m.derivative(x), setup.tau, &tilted),
                    (pn_a - p_a).abs(),
                )
            }
        };
        size.push(p);
        response.push((s - base).abs());
    }
    Ok(PerturbationReport {
        situation,
        tau: setup.tau,
        level,
        base_mass: base,
        amounts: amounts.to_vec(),
        scaling: ScalingReport::fit(size.clone(), response.clone()),
        perturbation_size: size,
        response,
    })
}

/// Response to the pure rescaling `f_n = (1 + Δ)·f`, which leaves `∇f/f`
/// and therefore the shifted distribution unchanged.
pub fn scaling_response(setup: &PerturbationSetup, delta: f64) -> f64 {
    let m = setup.mixture;
    let s = 1.0 + delta;
    let scaled = setup.mass(&|x| s * m.pdf(x), &|x| s * m.derivative(x), setup.tau, &|x| m.cdf(x));
    (scaled - setup.base()).abs()
}

/// Outcome of a monotone-ascent audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentAudit {
    pub evaluations: usize,
    pub violations: usize,
    /// Largest `p̂(x) − p̂(M(x))` seen (negative when every probe ascended).
    pub worst_drop: f64,
}

const ASCENT_SLACK: f64 = 1e-12;

/// Counts probes where one empirical step lowers the KDE by more than
/// `1e−12`.
pub fn monotone_ascent_audit(model: &DensityModel, probes: &PointCloud) -> Result<AscentAudit> {
    probes.check_dim(model.dim())?;
    let op = ShiftOperator::empirical(model);
    let drops: Vec<f64> = (0..probes.len())
        .into_par_iter()
        .map(|i| {
            let x = probes.point(i);
            let before = model.density_at(x)?;
            let after = model.density_at(&op.shift_step(x)?)?;
            Ok(before - after)
        })
        .collect::<Result<_>>()
        .map_err(|e: Error| e)?;
    Ok(AscentAudit {
        evaluations: drops.len(),
        violations: drops.iter().filter(|d| **d > ASCENT_SLACK).count(),
        worst_drop: drops.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Audit over `n_models` random gaussian KDEs (1–3 dimensions, 5–60 points,
/// `h` in `[0.2, 1.5]`) with `probes_per_model` probes drawn uniformly
/// from the data's bounding box widened by `3h`.
pub fn random_ascent_audit(n_models: usize, probes_per_model: usize, seed: u64) -> Result<AscentAudit> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let audits: Vec<AscentAudit> = (0..n_models)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            let d = rng.random_range(1..=3);
            let n = rng.random_range(5..=60);
            let h = rng.random_range(0.2..1.5);
            let data: Vec<f64> = (0..n * d)
                .map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let cloud = PointCloud::from_flat(data, d)?;
            let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
            for p in cloud.iter() {
                for j in 0..d {
                    lo[j] = lo[j].min(p[j] - 3.0 * h);
                    hi[j] = hi[j].max(p[j] + 3.0 * h);
                }
            }
            let probes: Vec<f64> = (0..probes_per_model * d)
                .map(|k| rng.random_range(lo[k % d]..hi[k % d]))
                .collect();
            let model = DensityModel::gaussian(cloud, h)?;
            monotone_ascent_audit(&model, &PointCloud::from_flat(probes, d)?)
        })
        .collect::<Result<_>>()?;
    Ok(AscentAudit {
        evaluations: audits.iter().map(|a| a.evaluations).sum(),
        violations: audits.iter().map(|a| a.violations).sum(),
        worst_drop: audits.iter().map(|a| a.worst_drop).fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Reference mixture as an analytic density, shared by the checks.
pub fn reference_mixture() -> Arc<AnalyticDensity> {
    Arc::new(Mixture1d::REFERENCE.to_density().expect("reference mixture is valid"))
}
