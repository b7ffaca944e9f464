//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line. Run with `--nocapture` to see the lines.

mod common;

use common::{enumerate_rademacher, grid_lipschitz_sup, l2, linf, report, tv_unit_normals_trapezoid};
use hetlearn_core::complexity::{lipschitz_ball, lipschitz_sup, rademacher_l1, rademacher_l2, DEFAULT_DRAWS};
use hetlearn_core::mixtures::{gamma_radius, hyperplane_gamma, pinsker_gamma_bound, tv_distance_1d, two_component_mixture, HeterogeneityMethod};
use hetlearn_core::optim::{project_intersection, ConstraintSet, Primitive};
use hetlearn_core::rates::{critical_for_class, gamma_threshold, solve_critical, ClassTag};
use hetlearn_core::verify::{check_bias_mgf, check_norm_tail, check_wbar, default_norm_tail_cases, default_t_grid, default_verify_cases};
use hetlearn_core::{derive_stream, CriticalEq, GaussianComponent};
use hetlearn_harness::check::{expected_slope, MIN_COVERAGE, MIN_R2};
use hetlearn_harness::{fit_rate_exponent, run_heterogeneity_sweep, run_hyperplane_sweep, run_rate_sweep, run_sweep, SweepConfig, Table};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

const LINEAR_GRID: &str = "[128, 256, 512, 1024, 2048, 4096]";
const NONPARAMETRIC_GRID: &str = "[64, 128, 256, 512, 1024, 2048]";

fn config(experiment: &str, grid: &str, class: &str, extra: &str) -> SweepConfig {
    let src = format!("experiment = \"{experiment}\"\nn_grid = {grid}\nreplicates = 50\nseed = 20240917\nzeta = 1.0\n{extra}\n[class_tag]\n{class}\n");
    SweepConfig::from_toml_str(&src, None).unwrap()
}

fn classes() -> [(&'static str, &'static str, &'static str); 3] {
    [
        ("linear", LINEAR_GRID, "kind = \"linear\"\nd = 8"),
        ("lipschitz", NONPARAMETRIC_GRID, "kind = \"lipschitz\"\nl = 1.0"),
        ("convex_lipschitz", NONPARAMETRIC_GRID, "kind = \"convex_lipschitz\""),
    ]
}

#[test]
fn criterion_1_rate_exponents() {
    let mut parts = vec![];
    for (name, grid, class) in classes() {
        let cfg = config("rate_sweep", grid, class, "gamma_grid = [0.0]");
        let table = run_rate_sweep(&cfg).unwrap();
        let fit = fit_rate_exponent(&table, "n", "median_error").unwrap();
        let (target, tol) = expected_slope(cfg.class_tag.unwrap());
        let ok = (fit.slope - target).abs() <= tol && fit.r2 >= MIN_R2;
        parts.push((ok, format!("{name} slope {:.4} (target {target:.4} ± {tol}) r2 {:.4}", fit.slope, fit.r2)));
    }
    assert!(report(1, "rate exponents", &parts));
}

#[test]
fn criterion_2_heterogeneity_thresholds() {
    let mut parts = vec![];
    for (name, grid, class) in classes() {
        let cfg = config("heterogeneity_sweep", grid, class, "gamma_grid = [0.0]\n[mixture]\ngamma_at_threshold = true");
        let table = run_heterogeneity_sweep(&cfg).unwrap();
        let zero = table.filter_eq("at_threshold", 0.0).unwrap().column("ratio").unwrap();
        let at = table.filter_eq("at_threshold", 1.0).unwrap();
        let ratios = at.column("ratio").unwrap();
        let gammas = at.column("gamma").unwrap();
        let n = at.column("n").unwrap();
        for ((&g, &nn), class_n) in gammas.iter().zip(&n).zip(0..) {
            let expected = gamma_threshold(cfg.class_tag.unwrap().into(), 1.0, nn as usize).unwrap();
            assert_eq!(g, expected, "row {class_n}");
        }
        let worst = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ok = ratios.len() == 6 && ratios.iter().all(|&r| r <= 4.0) && zero.iter().all(|&r| r == 1.0);
        parts.push((ok, format!("{name} max ratio at threshold {worst:.3}, ratios at gamma=0 {:?}", zero.iter().map(|r| *r == 1.0).all(|b| b))));
    }
    assert!(report(2, "heterogeneity thresholds", &parts));
}

#[test]
fn criterion_3_mixed_hyperplanes() {
    let cfg = SweepConfig::from_toml_str(
        "experiment = \"hyperplane_sweep\"\nn_grid = [256, 512, 1024, 2048, 4096, 8192]\ndelta_w_grid = [0.0, 1.0, 2.0]\nreplicates = 200\nseed = 20240918\nzeta = 1.0\n[hyperplane]\nd = 4\nnu = 1.0\nfail_prob = 0.05\n[constants]\ncnoise = 4.0\ncbias = 16.0\n",
        None,
    )
    .unwrap();
    let table = run_hyperplane_sweep(&cfg).unwrap();
    let mut parts = vec![];
    for dw in [0.0, 1.0, 2.0] {
        let rows = table.filter_eq("delta_w", dw).unwrap();
        let fit = fit_rate_exponent(&rows, "n", "excess_risk_median").unwrap();
        parts.push(((fit.slope + 1.0).abs() <= 0.2, format!("delta_w={dw} slope {:.4}", fit.slope)));
        if dw <= 1.0 {
            let ratio = rows.column("ratio").unwrap();
            let worst = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            parts.push((ratio.iter().all(|&r| r <= 4.0), format!("delta_w={dw} max ratio {worst:.3}")));
        }
        let cov = rows.column("coverage").unwrap();
        let worst = cov.iter().copied().fold(f64::INFINITY, f64::min);
        parts.push((cov.iter().all(|&c| c >= MIN_COVERAGE), format!("delta_w={dw} min coverage {worst:.3}")));
    }
    assert!(report(3, "mixed hyperplanes", &parts));
}

fn random_matrix(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = derive_stream(seed, 77).rng();
    DMatrix::from_fn(n, d, |_, _| r.random_range(-2.0..2.0))
}

#[test]
fn criterion_4_complexity_estimators() {
    let mut parts = vec![];
    let mut worst_z: f64 = 0.0;
    for n in 1..=12 {
        let x = random_matrix(n, 3, 500 + n as u64);
        let e2 = rademacher_l2(&x, 1.0, DEFAULT_DRAWS, derive_stream(41, n as u64)).unwrap();
        let e1 = rademacher_l1(&x, 1.0, DEFAULT_DRAWS, derive_stream(42, n as u64)).unwrap();
        for (e, exact) in [(e2, enumerate_rademacher(&x, 1.0, l2)), (e1, enumerate_rademacher(&x, 1.0, linf))] {
            // Exact agreement up to rounding counts as z = 0 (zero-variance cases).
            let gap = ((e.value - exact).abs() - 1e-12).max(0.0);
            worst_z = worst_z.max(if gap == 0.0 { 0.0 } else { gap / e.std_error });
        }
    }
    parts.push((worst_z <= 3.0, format!("MC vs enumeration max |z| {worst_z:.3} for n <= 12")));

    let mut violations = 0;
    for s in 0..1000u64 {
        let mut r = derive_stream(43, s).rng();
        let (n, d) = (r.random_range(1..40), r.random_range(1..6));
        let x = random_matrix(n, d, 2000 + s);
        let e = rademacher_l2(&x, 1.0, 200, derive_stream(44, s)).unwrap();
        let rmax = (0..n).map(|i| x.row(i).norm()).fold(0.0, f64::max);
        if e.value > rmax / (n as f64).sqrt() + 1e-12 {
            violations += 1;
        }
    }
    parts.push((violations == 0, format!("l2 bound violations {violations}/1000")));

    let cases: [(&[f64], f64, f64); 5] =
        [(&[1.0], 1.0, 0.5), (&[0.5, 1.0], 1.0, 0.6), (&[0.2, 0.3], 2.0, 0.3), (&[0.3, 0.5, 0.9], 1.0, 0.25), (&[0.1, 0.6, 0.7], 1.5, 0.4)];
    let mut worst: f64 = 0.0;
    for (c, &(x, l, delta)) in cases.iter().enumerate() {
        let set = lipschitz_ball(x, l, delta).unwrap();
        for s in 0..2u64 {
            let mut r = derive_stream(45, 10 * c as u64 + s).rng();
            let u: Vec<f64> = x.iter().map(|_| r.sample(StandardNormal)).collect();
            let solved = lipschitz_sup(&set, &u, 1e-10).unwrap();
            worst = worst.max((solved - grid_lipschitz_sup(x, l, delta, &u)).abs());
        }
    }
    parts.push((worst <= 1e-3, format!("lipschitz per-draw vs grid max diff {worst:.2e}")));
    assert!(report(4, "complexity estimators", &parts));
}

#[test]
fn criterion_5_critical_solver() {
    let mut parts = vec![];
    let mut worst: f64 = 0.0;
    for s in 0..10_000u64 {
        let mut r = derive_stream(51, s).rng();
        let a = 10f64.powf(r.random_range(-6.0..1.0));
        let p = r.random_range(0.01..1.98);
        let b = if r.random::<f64>() < 0.2 { 0.0 } else { r.random_range(0.0..5.0) };
        let res = solve_critical(&CriticalEq::new(a, p, b).unwrap()).unwrap();
        let d = res.delta_star;
        let scale = (d * d).max(a * d.powf(p)).max(b * d);
        worst = worst.max((d * d - a * d.powf(p) - b * d).abs() / scale.max(1.0));
    }
    parts.push((worst <= 1e-10, format!("max residual {worst:.2e} over 1e4 instances")));

    let mut closed: f64 = 0.0;
    for a in [1e-4, 0.01, 0.3, 1.0, 2.5, 9.0] {
        let d1 = solve_critical(&CriticalEq::new(a, 1.0, 0.0).unwrap()).unwrap().delta_star;
        let dh = solve_critical(&CriticalEq::new(a, 0.5, 0.0).unwrap()).unwrap().delta_star;
        closed = closed.max((d1 - a).abs()).max((dh - a.powf(2.0 / 3.0)).abs());
    }
    parts.push((closed <= 1e-12, format!("closed forms max error {closed:.2e}")));

    let mut identical = true;
    for n in [16usize, 64, 100, 1000, 4096] {
        for gamma in [0.0, 0.01, 0.2] {
            for zeta in [0.5, 1.0, 3.0] {
                let h1 = critical_for_class(ClassTag::Holder { alpha: 1.0 }, zeta, n, gamma).unwrap();
                let lip = critical_for_class(ClassTag::Lipschitz { l: 1.0 }, zeta, n, gamma).unwrap();
                let h2 = critical_for_class(ClassTag::Holder { alpha: 2.0 }, zeta, n, gamma).unwrap();
                let cvx = critical_for_class(ClassTag::ConvexLipschitz, zeta, n, gamma).unwrap();
                identical &= h1.delta_star.to_bits() == lip.delta_star.to_bits() && h2.delta_star.to_bits() == cvx.delta_star.to_bits();
                let t = |c| gamma_threshold(c, zeta, n).unwrap().to_bits();
                identical &= t(ClassTag::Holder { alpha: 1.0 }) == t(ClassTag::Lipschitz { l: 1.0 });
                identical &= t(ClassTag::Holder { alpha: 2.0 }) == t(ClassTag::ConvexLipschitz);
            }
        }
    }
    parts.push((identical, format!("Hölder specializations bit-identical: {identical}")));
    assert!(report(5, "critical-equation solver", &parts));
}

#[test]
fn criterion_6_heterogeneity_measures() {
    let mut parts = vec![];
    let p = GaussianComponent::univariate(0.0, 1.0).unwrap();
    let q = GaussianComponent::univariate(2.0, 1.0).unwrap();
    let tv = tv_distance_1d(&p, &q, 1e-10).unwrap();
    let oracle = tv_unit_normals_trapezoid(0.0, 2.0, 2_000_000);
    let ok = (tv - oracle).abs() <= 1e-6 && (tv - 0.682689).abs() <= 1e-6;
    parts.push((ok, format!("TV N(0,1)/N(2,1) = {tv:.9} (oracle {oracle:.9})")));

    let mut worst: f64 = 0.0;
    for (mu, s, gap) in [(0.0, 1.0, 2.0), (0.5, 0.25, 0.3), (-1.0, 2.0, 0.7), (3.0, 0.5, 5.0)] {
        let base = GaussianComponent::univariate(mu, s).unwrap();
        let m = two_component_mixture(&base, gap);
        let rep = gamma_radius(&m, HeterogeneityMethod::Quadrature1d, 0, derive_stream(61, 0)).unwrap();
        let pair = tv_distance_1d(&m.components[0], &m.components[1], 1e-12).unwrap();
        worst = worst.max((rep.gamma - 0.5 * pair).abs());
    }
    parts.push((worst <= 2e-8, format!("gamma vs half pairwise TV max diff {worst:.2e}")));

    let mut slack_min = f64::INFINITY;
    for (k, case) in default_verify_cases().iter().enumerate() {
        let bound = pinsker_gamma_bound(&case.mixture).unwrap();
        let est = hyperplane_gamma(&case.mixture, 200_000, derive_stream(62, k as u64)).unwrap();
        slack_min = slack_min.min(bound - (est.gamma - 3.0 * est.std_error));
    }
    parts.push((slack_min >= 0.0, format!("Pinsker bound minus (MC gamma - 3se), min {slack_min:.4}")));
    assert!(report(6, "heterogeneity measures", &parts));
}

#[test]
fn criterion_7_concentration_lemmas() {
    const REPLICATES: usize = 100_000;
    let mut parts = vec![];
    let grid = default_t_grid();
    let mut tail = 0;
    for (k, (v2, alpha, d)) in default_norm_tail_cases().into_iter().enumerate() {
        tail += check_norm_tail(v2, alpha, d, &grid, REPLICATES, derive_stream(71, k as u64)).unwrap().violations;
    }
    parts.push((tail == 0, format!("norm tail violations {tail}")));
    let (mut mgf, mut wbar) = (0, 0);
    for (k, case) in default_verify_cases().iter().enumerate() {
        mgf += check_bias_mgf(&case.mixture, case.n, 8, REPLICATES, derive_stream(72, k as u64)).unwrap().violations;
        wbar += check_wbar(&case.mixture, case.n, 0.05, REPLICATES, derive_stream(73, k as u64)).unwrap().violations;
    }
    parts.push((mgf == 0, format!("bias MGF violations {mgf}")));
    parts.push((wbar == 0, format!("wbar violations {wbar}")));

    let mut worst = f64::NEG_INFINITY;
    for s in 0..10_000u64 {
        let mut r = derive_stream(74, s).rng();
        let mut u = |lo: f64, hi: f64| r.random_range(lo..hi);
        let center: Vec<f64> = (0..3).map(|_| u(-1.0, 1.0)).collect();
        let radius = u(0.5, 2.0) + 1.8;
        let half: Vec<f64> = (0..3).map(|_| u(0.1, 1.5)).collect();
        let normal: Vec<f64> = (0..3).map(|_| u(-1.0, 1.0)).collect();
        let offset = u(0.0, 0.5);
        let v: Vec<f64> = (0..3).map(|_| u(-5.0, 5.0)).collect();
        let w: Vec<f64> = (0..3).map(|_| u(-1.0, 1.0)).collect();
        let lower: Vec<f64> = half.iter().map(|h| -h).collect();
        let mut sets = vec![Primitive::norm_ball(center, radius).unwrap(), Primitive::box_set(lower, half).unwrap()];
        if let Ok(h) = Primitive::half_space(&normal, offset) {
            sets.push(h);
        }
        let set = ConstraintSet::new(sets);
        // The origin is feasible, so shrinking w toward it lands in the set.
        let mut inside = w;
        for _ in 0..60 {
            if set.max_violation(&inside) == 0.0 {
                break;
            }
            inside.iter_mut().for_each(|x| *x *= 0.8);
        }
        if set.max_violation(&inside) != 0.0 {
            inside = vec![0.0; 3];
        }
        let p = project_intersection(&v, &set, 1e-12, 100_000).unwrap();
        let ip: f64 = (0..3).map(|i| (v[i] - p[i]) * (inside[i] - p[i])).sum();
        worst = worst.max(ip);
    }
    parts.push((worst <= 1e-9, format!("obtuse-angle max inner product {worst:.2e} over 1e4 pairs")));
    assert!(report(7, "concentration lemmas", &parts));
}

fn csv_of(src: &str) -> String {
    let cfg = SweepConfig::from_toml_str(src, None).unwrap();
    run_sweep(&cfg).unwrap().to_csv_string()
}

#[test]
fn criterion_8_reproducibility() {
    let configs = [
        "experiment = \"rate_sweep\"\nn_grid = [64, 128]\ngamma_grid = [0.0, 0.2]\nreplicates = 8\nseed = 5\nzeta = 1.0\n[class_tag]\nkind = \"convex_lipschitz\"\n",
        "experiment = \"heterogeneity_sweep\"\nn_grid = [64, 128]\nreplicates = 8\nseed = 5\nzeta = 1.0\n[mixture]\ngamma_at_threshold = true\n[class_tag]\nkind = \"lipschitz\"\nl = 1.0\n",
        "experiment = \"hyperplane_sweep\"\nn_grid = [200, 400]\ndelta_w_grid = [0.0, 2.0]\nreplicates = 8\nseed = 5\nzeta = 1.0\n",
        "experiment = \"complexity_sweep\"\nn_grid = [8, 16]\nreplicates = 1\nseed = 5\nzeta = 1.0\n[class_tag]\nkind = \"linear\"\nd = 3\n",
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut parts = vec![];
    for (k, src) in configs.iter().enumerate() {
        let a = csv_of(src);
        let b = csv_of(src);
        let path = dir.path().join(format!("run{k}.csv"));
        hetlearn_harness::emit_csv(&Table::read_csv(a.as_bytes()).unwrap(), &path).unwrap();
        let rewritten = std::fs::read_to_string(&path).unwrap();
        let ok = a == b && a == rewritten;
        parts.push((ok, format!("config {k}: {} bytes identical across runs and rewrite", a.len())));
    }
    assert!(report(8, "reproducibility", &parts));
}
