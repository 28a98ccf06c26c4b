//! Path-length anomaly scores: each point climbs the fixed KDE until it
//! converges, and the total distance travelled is its score.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::scv;
use crate::cloud::PointCloud;
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::shift::{Convergence, ShiftOperator, ShiftTrace};

/// Scores, ranking and convergence flags for every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub scores: Vec<f64>,
    /// Indices by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
    pub bandwidth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<ShiftTrace>>,
}

impl AnomalyReport {
    /// First `k` entries of the ranking.
    pub fn top_k(&self, k: usize) -> Result<Vec<usize>> {
        if k > self.ranking.len() {
            return Err(Error::param(
                "k",
                format!("must not exceed the number of points ({})", self.ranking.len()),
            ));
        }
        Ok(self.ranking[..k].to_vec())
    }

    pub fn non_converged(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }
}

/// Indices sorted by descending score, ties broken by lower index.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Runs every point of `data` to convergence under the empirical operator
/// of `model`. Points hitting `criteria.max_iter` keep their partial path
/// length and are flagged in `converged`.
pub fn anomaly_scores(
    data: &PointCloud,
    model: &DensityModel,
    criteria: Convergence,
    keep_traces: bool,
) -> Result<AnomalyReport> {
    data.check_dim(model.dim())?;
    let op = ShiftOperator::empirical(model);
    let traces: Vec<ShiftTrace> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            op.shift_until_converged(data.point(i), criteria)
                .map_err(|e| Error::at_point(i, e))
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = traces.iter().map(|t| t.total_length).collect();
    Ok(AnomalyReport {
        ranking: rank_descending(&scores),
        converged: traces.iter().map(|t| t.converged).collect(),
        iterations: traces.iter().map(|t| t.iterations).collect(),
        bandwidth: model.bandwidth(),
        scores,
        traces: keep_traces.then_some(traces),
    })
}

/// Fits the KDE on `data` itself with the SCV bandwidth and default
/// convergence settings, then scores every point.
pub fn score_with_scv(data: &PointCloud, keep_traces: bool) -> Result<AnomalyReport> {
    let model = DensityModel::gaussian(data.clone(), scv(data)?)?;
    anomaly_scores(data, &model, Convergence::for_data(data), keep_traces)
}

/// Top-`k` indices of a report (see [`AnomalyReport::top_k`]).
pub fn top_k(report: &AnomalyReport, k: usize) -> Result<Vec<usize>> {
    report.top_k(k)
}
