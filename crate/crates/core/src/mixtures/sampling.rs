use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::truncated_mass;
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamRng};
use crate::types::{validate_mixture, Dataset, HyperplaneMixture, MixtureModel};

// Sub-stream tags. Assignments, covariate values and label noise come from
// separate streams, so two models that differ only in their mixing produce
// the same covariates wherever their components coincide.
pub(crate) const ASSIGN_STREAM: u64 = 0;
pub(crate) const VALUE_STREAM: u64 = 1;
pub(crate) const NOISE_STREAM: u64 = 2;

const MIN_ACCEPTANCE: f64 = 1e-6;

pub(crate) fn categorical(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    // Rounding left u above the last cumulative weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    Ok(())
}

/// Draws `n` covariates from the mixture; `y` is left at zero and the
/// assignment records each row's component.
pub fn sample_covariates(m: &MixtureModel, n: usize, rng: RngStream) -> Result<Dataset> {
    validate_mixture(m)?;
    check_n(n)?;
    let d = m.dim();
    let mut arng = rng.child(ASSIGN_STREAM).rng();
    let mut vrng = rng.child(VALUE_STREAM).rng();
    let mut x = DMatrix::zeros(n, d);
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let j = categorical(&m.weights, arng.random());
        let c = &m.components[j];
        for k in 0..d {
            let z: f64 = vrng.sample(StandardNormal);
            x[(i, k)] = c.mean[k] + c.scale * z;
        }
        assignment.push(j);
    }
    Dataset::new(x, DVector::zeros(n), Some(assignment))
}

/// Like [`sample_covariates`] with every component truncated to the box
/// `[lo, hi]^d` by rejection.
pub fn sample_covariates_truncated(m: &MixtureModel, n: usize, lo: f64, hi: f64, rng: RngStream) -> Result<Dataset> {
    validate_mixture(m)?;
    check_n(n)?;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty truncation interval [{lo}, {hi}]")));
    }
    for (c, &a) in m.components.iter().zip(&m.weights) {
        let accept: f64 = (0..c.dim())
            .map(|k| {
                let ck = crate::types::GaussianComponent { mean: DVector::from_element(1, c.mean[k]), scale: c.scale };
                truncated_mass(&ck, lo, hi)
            })
            .product();
        if a > 0.0 && accept < MIN_ACCEPTANCE {
            return Err(Error::InvalidParameter(format!("component puts mass {accept:e} on the truncation box")));
        }
    }
    let d = m.dim();
    let mut arng = rng.child(ASSIGN_STREAM).rng();
    let mut vrng = rng.child(VALUE_STREAM).rng();
    let mut x = DMatrix::zeros(n, d);
    let mut assignment = Vec::with_capacity(n);
    let mut row = vec![0.0; d];
    for i in 0..n {
        let j = categorical(&m.weights, arng.random());
        let c = &m.components[j];
        loop {
            for (k, r) in row.iter_mut().enumerate() {
                let z: f64 = vrng.sample(StandardNormal);
                *r = c.mean[k] + c.scale * z;
            }
            if row.iter().all(|v| (lo..=hi).contains(v)) {
                break;
            }
        }
        for (k, r) in row.iter().enumerate() {
            x[(i, k)] = *r;
        }
        assignment.push(j);
    }
    Dataset::new(x, DVector::zeros(n), Some(assignment))
}

pub(crate) fn gaussian_rows(n: usize, d: usize, scale: f64, rng: &mut StreamRng) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            x[(i, k)] = scale * z;
        }
    }
    x
}

/// Samples `(x_i, y_i)` from the mixture of hyperplanes.
pub fn sample_hyperplane_data(h: &HyperplaneMixture, n: usize, rng: RngStream) -> Result<Dataset> {
    h.validate()?;
    check_n(n)?;
    let d = h.dim();
    let mut arng = rng.child(ASSIGN_STREAM).rng();
    let mut vrng = rng.child(VALUE_STREAM).rng();
    let mut nrng = rng.child(NOISE_STREAM).rng();
    let x = gaussian_rows(n, d, h.nu, &mut vrng);
    let mut y = DVector::zeros(n);
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let j = categorical(&h.weights, arng.random());
        let w = &h.regressors[j];
        let signal: f64 = (0..d).map(|k| w[k] * x[(i, k)]).sum();
        let xi: f64 = nrng.sample(StandardNormal);
        y[i] = signal + h.zeta * xi;
        assignment.push(j);
    }
    Dataset::new(x, y, Some(assignment))
}
