//! Small summary statistics shared by the estimators and sweeps.

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::{RngStream, StreamRng};

/// Sample mean and its standard error (sample standard deviation / √n).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    // Shifted by the first value, so constant samples give exactly zero.
    let shift = values[0];
    let (s1, s2) = values.iter().fold((0.0, 0.0), |(a, b), v| (a + (v - shift), b + (v - shift).powi(2)));
    let var = ((s2 - s1 * s1 / n as f64) / (n - 1) as f64).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Order statistic at `floor((n - 1) p)`; for p = 0.5 this is the lower median.
pub fn lower_quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let v = sorted(values);
    let idx = ((v.len() - 1) as f64 * p.clamp(0.0, 1.0)).floor() as usize;
    v[idx]
}

pub fn lower_median(values: &[f64]) -> f64 {
    lower_quantile(values, 0.5)
}

/// Interquartile range with the same lower order-statistic convention.
pub fn iqr(values: &[f64]) -> f64 {
    lower_quantile(values, 0.75) - lower_quantile(values, 0.25)
}

/// Evaluates `f` once per replicate on its own derived stream, in parallel.
/// The output order follows the replicate index, so results do not depend on
/// scheduling.
pub fn par_replicates<T, F>(count: usize, rng: RngStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    (0..count as u64).into_par_iter().map(|r| f(&mut rng.replicate(r).rng())).collect()
}
