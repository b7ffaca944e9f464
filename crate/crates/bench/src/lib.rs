//! Seeded inputs shared by the benchmarks.

use hetlearn_core::optim::{ConstraintSet, Primitive};
use hetlearn_core::{derive_stream, Dataset};
use hetlearn_harness::SweepConfig;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// `n` sorted design points in `[0, 1]` with labels `x(1 - x) + N(0, 1)`.
pub fn univariate_dataset(n: usize, seed: u64) -> Dataset {
    let mut r = derive_stream(seed, 0).rng();
    let mut xs: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    let ys: Vec<f64> = xs.iter().map(|x| x * (1.0 - x) + r.sample::<f64, _>(StandardNormal)).collect();
    Dataset::univariate(&xs, &ys).expect("finite data")
}

pub fn gaussian_design(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = derive_stream(seed, 1).rng();
    DMatrix::from_fn(n, d, |_, _| r.sample(StandardNormal))
}

/// Ball ∩ box ∩ half-space in three dimensions.
pub fn small_constraint_set() -> ConstraintSet {
    ConstraintSet::new(vec![
        Primitive::norm_ball(vec![0.2, -0.1, 0.3], 1.5).expect("positive radius"),
        Primitive::box_set(vec![-1.0; 3], vec![1.0; 3]).expect("ordered box"),
        Primitive::half_space(&[1.0, 1.0, 0.5], 0.4).expect("nonzero normal"),
    ])
}

/// A rate sweep small enough to run many times per second.
pub fn small_rate_sweep(kind: &str) -> SweepConfig {
    let class = match kind {
        "linear" => "kind = \"linear\"\nd = 8",
        "convex" => "kind = \"convex_lipschitz\"",
        _ => "kind = \"lipschitz\"\nl = 1.0",
    };
    let grid = if kind == "linear" { "[128, 256]" } else { "[64, 128]" };
    let src = format!("experiment = \"rate_sweep\"\nn_grid = {grid}\nreplicates = 8\nseed = 1\nzeta = 1.0\n[class_tag]\n{class}\n");
    SweepConfig::from_toml_str(&src, None).expect("valid bench config")
}
