use proptest::prelude::*;

use msdenoise::anomaly::rank_descending;
use msdenoise::clustering::{ari, kmeans_with_trace, LabelSet};
use msdenoise::shift::empirical_step_weighted_mean;
use msdenoise::synthetic::{gen_bullseye, gen_spiral};
use msdenoise::twosample::{energy_statistic, mmd2_biased, KernelScale};
use msdenoise::{standardize, Convergence, DensityModel, PointCloud, ShiftOperator};

fn cloud(max_n: usize, dim: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), 1..max_n)
        .prop_map(|rows| PointCloud::from_rows(&rows).unwrap())
}

fn model_and_probe() -> impl Strategy<Value = (DensityModel, Vec<f64>)> {
    (1usize..4).prop_flat_map(|d| {
        (cloud(25, d), 0.2f64..2.0, prop::collection::vec(-4.0f64..4.0, d))
            .prop_map(|(c, h, p)| (DensityModel::gaussian(c, h).unwrap(), p))
    })
}

fn labels(n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (
        prop::collection::vec(0usize..4, n),
        prop::collection::vec(0usize..5, n),
    )
}

fn density_scale(model: &DensityModel) -> f64 {
    model.density_at(model.data().point(0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_step_never_decreases_density((model, x) in model_and_probe()) {
        let op = ShiftOperator::empirical(&model);
        let before = model.density_at(&x).unwrap();
        prop_assume!(before > 1e-200);
        let next = op.shift_step(&x).unwrap();
        let after = model.density_at(&next).unwrap();
        prop_assert!(after >= before - 1e-12 * density_scale(&model), "{before} -> {after}");
    }

    #[test]
    fn update_forms_agree((model, x) in model_and_probe()) {
        prop_assume!(model.density_at(&x).unwrap() > 1e-100);
        let ratio = ShiftOperator::empirical(&model).ratio_step(&x).unwrap();
        let mean = empirical_step_weighted_mean(&model, &x).unwrap();
        for (r, m) in ratio.iter().zip(&mean) {
            prop_assert!((r - m).abs() <= 1e-9 * (1.0 + m.abs()), "{r} vs {m}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences((model, x) in model_and_probe()) {
        let (f, g) = model.density_and_gradient(&x).unwrap();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(f > 1e-50 && norm > 1e-3 * f / model.bandwidth());
        let eps = 1e-5 * model.bandwidth();
        let mut err2 = 0.0;
        for k in 0..x.len() {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[k] += eps;
            down[k] -= eps;
            let fd = (model.density_at(&up).unwrap() - model.density_at(&down).unwrap()) / (2.0 * eps);
            err2 += (g[k] - fd).powi(2);
        }
        prop_assert!(err2.sqrt() / norm < 1e-5);
    }

    #[test]
    fn density_is_nonnegative_and_deterministic((model, x) in model_and_probe()) {
        let a = model.density_and_gradient(&x).unwrap();
        let b = model.density_and_gradient(&x).unwrap();
        prop_assert!(a.0 >= 0.0);
        prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
    }

    #[test]
    fn sweeps_compose(c in cloud(20, 2), h in 0.3f64..1.5, a in 1usize..3, b in 1usize..3) {
        let model = DensityModel::gaussian(c.clone(), h).unwrap();
        let op = ShiftOperator::empirical(&model);
        let stepwise = op.denoise(&op.denoise(&c, a).unwrap(), b).unwrap();
        prop_assert_eq!(stepwise, op.denoise(&c, a + b).unwrap());
    }

    #[test]
    fn trace_length_invariant_under_rigid_motion(
        c in cloud(20, 2),
        start in prop::collection::vec(-3.0f64..3.0, 2),
        angle in 0.0f64..std::f64::consts::TAU,
        shift in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        let (s, co) = angle.sin_cos();
        let motion = |p: &[f64]| vec![co * p[0] - s * p[1] + shift[0], s * p[0] + co * p[1] + shift[1]];
        let crit = Convergence { tol: 1e-9, max_iter: 200 };
        let model = DensityModel::gaussian(c.clone(), 0.8).unwrap();
        prop_assume!(model.density_at(&start).unwrap() > 1e-100);
        let moved = DensityModel::gaussian(c.map_points(motion).unwrap(), 0.8).unwrap();
        let a = ShiftOperator::empirical(&model).shift_until_converged(&start, crit).unwrap();
        let b = ShiftOperator::empirical(&moved).shift_until_converged(&motion(&start), crit).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert!((a.total_length - b.total_length).abs() < 1e-8 * (1.0 + a.total_length));
    }

    #[test]
    fn ari_is_symmetric_and_relabel_invariant(
        (a, b) in (2usize..30).prop_flat_map(labels),
        perm in Just([3usize, 0, 4, 1, 2]),
    ) {
        let la = LabelSet::from_raw(&a);
        let lb = LabelSet::from_raw(&b);
        let ab = ari(&la, &lb).unwrap();
        prop_assert_eq!(ab, ari(&lb, &la).unwrap());
        let relabelled: Vec<usize> = b.iter().map(|&v| perm[v] + 10).collect();
        let r = ari(&la, &LabelSet::from_raw(&relabelled)).unwrap();
        prop_assert!((ab - r).abs() < 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
        prop_assert_eq!(ari(&la, &la).unwrap(), 1.0);
    }

    #[test]
    fn kmeans_objective_never_increases(c in cloud(40, 2), k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(c.len() >= k);
        let fit = kmeans_with_trace(&c, k, seed, 1).unwrap();
        for w in fit.history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]));
        }
        prop_assert_eq!(fit.clone(), kmeans_with_trace(&c, k, seed, 1).unwrap());
    }

    #[test]
    fn statistics_vanish_on_identical_samples_and_ignore_order(
        x in cloud(30, 2),
        y in cloud(30, 2),
        rot in any::<prop::sample::Index>(),
    ) {
        prop_assert!(energy_statistic(&x, &x).unwrap().abs() <= 1e-12);
        prop_assert!(mmd2_biased(&x, &x, KernelScale::Fixed(1.0)).unwrap().abs() <= 1e-12);
        let k = rot.index(x.len());
        let order: Vec<usize> = (0..x.len()).map(|i| (i + k) % x.len()).collect();
        let xp = x.select(&order).unwrap();
        let e = energy_statistic(&x, &y).unwrap();
        let m = mmd2_biased(&x, &y, KernelScale::Fixed(1.0)).unwrap();
        prop_assert!((e - energy_statistic(&xp, &y).unwrap()).abs() <= 1e-10 * (1.0 + e));
        prop_assert!((m - mmd2_biased(&xp, &y, KernelScale::Fixed(1.0)).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn ranking_is_a_descending_permutation(scores in prop::collection::vec(0.0f64..5.0, 0..50)) {
        let r = rank_descending(&scores);
        let mut sorted = r.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..scores.len()).collect::<Vec<_>>());
        for w in r.windows(2) {
            prop_assert!(scores[w[0]] > scores[w[1]] || (scores[w[0]] == scores[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn generators_are_seeded_and_keep_counts(n0 in 2usize..200, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let a = gen_bullseye(n0, 5.0, frac, 0.3, seed).unwrap();
        prop_assert_eq!(&a, &gen_bullseye(n0, 5.0, frac, 0.3, seed).unwrap());
        let eye = a.labels.iter().filter(|&&l| l == 0).count();
        prop_assert_eq!(eye, (frac * n0 as f64).round() as usize);
        prop_assert_eq!(a.len(), n0);
        let even = 2 * (n0 / 2);
        let s = gen_spiral(even, 0.02, seed).unwrap();
        prop_assert_eq!(&s, &gen_spiral(even, 0.02, seed).unwrap());
        prop_assert_eq!(s.len(), even);
    }

    #[test]
    fn standardize_round_trips(c in cloud(20, 3)) {
        prop_assume!(c.len() >= 2 && c.std_dev().iter().all(|&s| s > 1e-6));
        let (z, t) = standardize(&c).unwrap();
        let back = t.inverse(&z).unwrap();
        for (u, v) in back.as_flat().iter().zip(c.as_flat()) {
            prop_assert!((u - v).abs() < 1e-9);
        }
        for m in z.mean() {
            prop_assert!(m.abs() < 1e-9);
        }
    }
}
