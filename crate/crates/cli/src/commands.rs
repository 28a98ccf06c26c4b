use std::path::Path;

use msdenoise::analytic::{standard_normal_1d, Mixture1d};
use msdenoise::anomaly::{anomaly_scores, AnomalyReport};
use msdenoise::clustering::{AffinityScale, Algorithm, Linkage, SpectralConfig};
use msdenoise::experiments::{cluster_eval as run_case, cluster_eval_dataset, ClusterEvalConfig};
use msdenoise::synthetic::{anomaly_scenario, ClusterCase, LabeledCloud};
use msdenoise::theory_lab::{
    empirical_population_gap, mass_increase_curve, mode_density_ratio_curve,
    multi_sweep_mode_density, perturbation_response, random_ascent_audit, reference_level,
    reference_mixture, scaling_response, LevelSetSpec, PerturbationSetup, Situation,
};
use msdenoise::twosample::{
    power_experiment_mixture_proportion, power_experiment_uniform_noise, PowerConfig, TestKind,
};
use msdenoise::{BandwidthRule, Convergence, DensityModel, ShiftOperator};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::io::{load_dataset, read_table, write_cloud, write_text};
use crate::report::Report;
use crate::{
    Algo, AnomalyArgs, Check, ClusterEvalArgs, DenoiseArgs, GenerateArgs, LinkageArg, Scenario,
    TestArg, TheoryArgs, TwosampleArgs,
};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Serialize)]
struct DenoiseSummary {
    rows: usize,
    dim: usize,
    bandwidth: f64,
    mean_density_before: f64,
    mean_density_after: f64,
}

pub fn denoise(a: &DenoiseArgs) -> Result<bool> {
    let table = read_table(&a.input)?;
    let data = table.cloud()?;
    let h = a.h.select(&data)?;
    let model = DensityModel::gaussian(data.clone(), h)?;
    let out = ShiftOperator::empirical(&model).denoise(&data, a.sweeps)?;
    write_cloud(&a.output, table.header.as_deref(), &out, None)?;
    let summary = DenoiseSummary {
        rows: data.len(),
        dim: data.dim(),
        bandwidth: h,
        mean_density_before: mean(&model.density_batch(&data)?),
        mean_density_after: mean(&model.density_batch(&out)?),
    };
    let increased = summary.mean_density_after >= summary.mean_density_before;
    let report = Report::new("denoise", a, summary).check("mean_density_increased", increased);
    write_text(a.report.as_deref(), &report.to_json()?)?;
    Ok(true)
}

fn parse_case(name: &str) -> Result<ClusterCase> {
    ClusterCase::parse(name).ok_or_else(|| {
        let known: Vec<&str> = ClusterCase::ALL.iter().map(|c| c.name()).collect();
        CliError::Usage(format!("unknown case {name:?}; expected one of {}", known.join(", ")))
    })
}

pub fn cluster_eval(a: &ClusterEvalArgs) -> Result<bool> {
    let algorithm = match a.algo {
        Algo::Kmeans => Algorithm::Kmeans,
        Algo::Spectral => Algorithm::Spectral,
        Algo::Hier => Algorithm::Hierarchical,
    };
    let linkage = match a.linkage {
        LinkageArg::Single => Linkage::Single,
        LinkageArg::Complete => Linkage::Complete,
        LinkageArg::Average => Linkage::Average,
        LinkageArg::Ward => Linkage::Ward,
    };
    let configure = |k: usize, default_h: BandwidthRule| ClusterEvalConfig {
        bandwidth: a.h.unwrap_or(default_h),
        sweeps: a.sweeps,
        msd: a.msd.on(),
        linkage,
        spectral: SpectralConfig {
            scale: AffinityScale::BandwidthScaled(a.sigma_factor),
            knn: a.knn,
        },
        ..ClusterEvalConfig::new(algorithm, k)
    };
    let report = match (&a.case, &a.input) {
        (Some(name), _) => {
            let case = parse_case(name)?;
            let config = configure(a.k.unwrap_or(case.clusters()), BandwidthRule::Scv);
            run_case(case, &config, a.reps, a.seed)?
        }
        (None, Some(path)) => {
            let (cloud, labels, name, k, h) = match a.dataset {
                Some(d) => {
                    let loaded = load_dataset(d, path, a.raw)?;
                    let labels = loaded.labels.ok_or_else(|| {
                        CliError::Usage(format!("{}: no class-label column to score against", path.display()))
                    })?;
                    let h = BandwidthRule::Fixed(d.default_bandwidth());
                    (loaded.cloud, labels, d.name().to_string(), d.default_k(), h)
                }
                None => {
                    let (c, l) = read_table(path)?.cloud_with_labels()?;
                    let classes = l.iter().max().map_or(0, |m| m + 1);
                    (c, l, path.display().to_string(), classes, BandwidthRule::Scv)
                }
            };
            let config = configure(a.k.unwrap_or(k), h);
            cluster_eval_dataset(&name, &cloud, &labels, &config, a.reps, a.seed)?
        }
        (None, None) => return Err(CliError::Usage("one of --case or --input is required".into())),
    };
    let improved = report.after_mean.map(|m| m > report.before_mean);
    let mut out = Report::new("cluster-eval", a, &report);
    if let Some(improved) = improved {
        out = out.check("after_mean_exceeds_before", improved);
    }
    write_text(a.output.as_deref(), &out.to_json()?)?;
    Ok(true)
}

pub fn twosample(a: &TwosampleArgs) -> Result<bool> {
    let config = PowerConfig {
        n0: a.n0,
        n_reps: a.reps,
        alpha: a.alpha,
        n_perm: a.permutations,
        test: match a.test {
            TestArg::Energy => TestKind::Energy,
            TestArg::Mmd => TestKind::Mmd,
        },
        msd: a.msd.on(),
        seed: a.seed,
    };
    let curve = match a.scenario {
        Scenario::UniformNoise => {
            let grid: Vec<usize> = match &a.grid {
                Some(g) => g
                    .iter()
                    .map(|&v| {
                        if v >= 0.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(CliError::Usage(format!("noise grid values must be counts, got {v}")))
                        }
                    })
                    .collect::<Result<_>>()?,
                None => (0..=5).map(|i| i * 100).collect(),
            };
            power_experiment_uniform_noise(&grid, &config)?
        }
        Scenario::MixtureProportion => {
            let grid = a
                .grid
                .clone()
                .unwrap_or_else(|| (0..=6).map(|i| (50 - 5 * i) as f64 / 100.0).collect());
            power_experiment_mixture_proportion(&grid, &config)?
        }
    };
    if let Some(path) = &a.csv {
        write_text(Some(path), &curve.to_csv())?;
    }
    let mut report = Report::new("twosample", a, &curve);
    for p in curve.points.iter().filter(|p| p.null) {
        if let Some(flag) = p.after_exceeds_alpha {
            report = report.check(&format!("null_{}_after_msd_within_alpha", p.value), !flag);
        }
    }
    write_text(a.output.as_deref(), &report.to_json()?)?;
    Ok(true)
}

#[derive(Serialize)]
struct AnomalySummary<'a> {
    rows: usize,
    top_k: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_in_top_k: Option<usize>,
    non_converged: usize,
    report: &'a AnomalyReport,
}

/// `point,step,x1,..,xd` rows for every visited position.
fn traces_csv(report: &AnomalyReport, dim: usize) -> String {
    let mut out = String::from("point,step");
    for j in 1..=dim {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for (i, t) in report.traces.iter().flatten().enumerate() {
        for (s, p) in t.path.iter().enumerate() {
            out.push_str(&format!("{i},{s}"));
            for v in p {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
    }
    out
}

pub fn anomaly(a: &AnomalyArgs) -> Result<bool> {
    let (cloud, planted) = match &a.input {
        Some(path) => (read_table(path)?.cloud()?, None),
        None => {
            let s: LabeledCloud = anomaly_scenario(a.seed)?;
            let planted = s.outlier_indices();
            (s.cloud, Some(planted))
        }
    };
    let model = DensityModel::gaussian(cloud.clone(), a.h.select(&cloud)?)?;
    let criteria = Convergence {
        tol: a.tol.unwrap_or(Convergence::for_data(&cloud).tol),
        max_iter: a.max_iter,
    };
    let mut scores = anomaly_scores(&cloud, &model, criteria, a.traces.is_some())?;
    if let Some(path) = &a.traces {
        write_text(Some(path), &traces_csv(&scores, cloud.dim()))?;
    }
    scores.traces = None;
    let top = scores.top_k(a.k)?;
    let hits = planted.as_ref().map(|p| p.iter().filter(|i| top.contains(i)).count());
    let summary = AnomalySummary {
        rows: cloud.len(),
        top_k: top,
        planted_in_top_k: hits,
        planted: planted.clone(),
        non_converged: scores.non_converged(),
        report: &scores,
    };
    let mut report = Report::new("anomaly", a, summary);
    if let (Some(h), Some(p)) = (hits, &planted) {
        report = report.check("all_planted_in_top_k", h == p.len());
    }
    write_text(a.output.as_deref(), &report.to_json()?)?;
    Ok(true)
}

fn reference_level_set() -> Result<LevelSetSpec> {
    Ok(LevelSetSpec::from_density_1d(
        &reference_mixture(),
        reference_level(&Mixture1d::REFERENCE),
    )?)
}

pub fn theory(a: &TheoryArgs) -> Result<bool> {
    let gmm = reference_mixture();
    let seed = a.seed;
    let report = match a.check {
        Check::T1 => {
            let r = mass_increase_curve(&gmm, &reference_level_set()?, &[0.05, 0.1, 0.2, 0.4], 200_000, seed)?;
            let specialized = r.bound_specialized_holds.iter().all(|&b| b);
            Report::new("theory", a, json!(r))
                .check("nonnegative_within_3se", r.nonnegative_within_noise)
                .check("slope_in_1.7_2.3", r.scaling.slope_within(1.7, 2.3))
                .check("level_set_bound_holds", specialized)
        }
        Check::T2 => {
            let normal = standard_normal_1d();
            let mode = mode_density_ratio_curve(&normal, &[0.0], &[0.1, 0.2, 0.4], 0.05, 4_000_000, seed)?;
            let minimum = gmm.minima()[0].clone();
            let valley = mode_density_ratio_curve(&gmm, &minimum, &[0.05, 0.1, 0.2], 0.025, 4_000_000, seed + 1)?;
            Report::new("theory", a, json!({ "mode": mode, "minimum": valley }))
                .check("mode_ratio_above_1", mode.direction_holds)
                .check("mode_slope_in_1.6_2.4", mode.scaling.slope_within(1.6, 2.4))
                .check("minimum_ratio_below_1", valley.direction_holds)
                .check("minimum_slope_in_1.6_2.4", valley.scaling.slope_within(1.6, 2.4))
        }
        Check::T4 => {
            let r = empirical_population_gap(&gmm, &reference_level_set()?, &[200, 800, 3200], 0.3, 50, seed)?;
            let slope = r.scaling.slope_within(-0.75, -0.25);
            Report::new("theory", a, json!(r)).check("slope_in_-0.75_-0.25", slope)
        }
        Check::T5 => {
            let r = multi_sweep_mode_density(&gmm, 500, 0.3, &[0.0], 20_000, 5, 0.15, seed)?;
            Report::new("theory", a, json!(r))
                .check("strictly_increasing", r.strictly_increasing)
                .check("geometric_rate_positive", r.c1 > 0.0)
        }
        Check::T6 => {
            let setup = PerturbationSetup::reference();
            let grid = [0.01, 0.02, 0.04, 0.08];
            let density = perturbation_response(&setup, Situation::Density, &[0.0025, 0.005, 0.01, 0.02])?;
            let step = perturbation_response(&setup, Situation::StepScale, &grid)?;
            let sampling = perturbation_response(&setup, Situation::Sampling, &grid)?;
            let scaling = scaling_response(&setup, 0.1);
            let linear = |r: &msdenoise::theory_lab::PerturbationReport| r.scaling.slope_within(0.7, 1.3);
            Report::new(
                "theory",
                a,
                json!({
                    "density": density,
                    "step_scale": step,
                    "sampling": sampling,
                    "pure_scaling_response": scaling,
                }),
            )
            .check("density_linear_response", linear(&density))
            .check("step_scale_linear_response", linear(&step))
            .check("sampling_linear_response", linear(&sampling))
            .check("pure_scaling_no_response", scaling < 1e-12)
        }
        Check::Ascent => {
            let r = random_ascent_audit(100, 100, seed)?;
            let ok = r.violations == 0;
            Report::new("theory", a, json!(r)).check("no_violations", ok)
        }
    };
    write_text(a.output.as_deref(), &report.to_json()?)?;
    Ok(report.passed())
}

pub fn generate(a: &GenerateArgs) -> Result<bool> {
    let data = if a.case == "anomaly" {
        anomaly_scenario(a.seed)?
    } else {
        parse_case(&a.case)?.generate(a.seed)?
    };
    let mut header: Vec<String> = (1..=data.cloud.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    write_cloud(Path::new(&a.output), Some(&header), &data.cloud, Some(&data.labels))?;
    Ok(true)
}

