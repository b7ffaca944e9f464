//! Least-squares estimators over linear, Lipschitz and convex-Lipschitz
//! classes, and the global ERM for mixtures of hyperplanes.

mod convex;
mod lipschitz;


pub use convex::fit_convex_lipschitz;
pub use lipschitz::fit_lipschitz;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::types::{Dataset, FittedFn, HyperplaneMixture};

/// Least-squares solution with the minimum norm, through a thin SVD.
fn min_norm_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = smax * f64::EPSILON * x.nrows().max(x.ncols()) as f64;
    if smax == 0.0 {
        return DVector::zeros(x.ncols());
    }
    svd.solve(y, eps).expect("both singular vector sets computed")
}

/// Ordinary least squares; rank-deficient designs get the minimum-norm solution.
pub fn fit_linear_ls(data: &Dataset) -> FittedFn {
    FittedFn::Linear { theta: min_norm_ls(&data.x, &data.y) }
}

/// `‖f̂ - f*‖²_n` over the rows of `x`.
pub fn insample_error<F: Fn(&[f64]) -> f64>(fit: &FittedFn, fstar: F, x: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    if n == 0 {
        return f64::NAN;
    }
    let mut row = vec![0.0; x.ncols()];
    let mut sum = 0.0;
    for i in 0..n {
        for (j, r) in row.iter_mut().enumerate() {
            *r = x[(i, j)];
        }
        sum += (fit.eval(&row) - fstar(&row)).powi(2);
    }
    sum / n as f64
}

/// One-dimensional design grouped by distinct covariate: knots strictly
/// increasing, with the count and mean label at each.
pub(crate) struct Grouped {
    pub knots: Vec<f64>,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
}

pub(crate) fn group_design(data: &Dataset) -> Result<Grouped> {
    if data.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: data.dim() });
    }
    let mut pairs: Vec<(f64, f64)> = (0..data.n()).map(|i| (data.x[(i, 0)], data.y[i])).collect();
    if let Some(&(x, _)) = pairs.iter().find(|(x, _)| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidParameter(format!("covariate {x} outside [0, 1]")));
    }
    if let Some(&(_, y)) = pairs.iter().find(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidParameter(format!("label {y} is not finite")));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut g = Grouped { knots: vec![], weights: vec![], means: vec![] };
    for (x, y) in pairs {
        if g.knots.last() == Some(&x) {
            let k = g.knots.len() - 1;
            g.weights[k] += 1.0;
            g.means[k] += (y - g.means[k]) / g.weights[k];
        } else {
            g.knots.push(x);
            g.weights.push(1.0);
            g.means.push(y);
        }
    }
    Ok(g)
}

/// Drops a group sitting at the anchor, whose value is pinned to 0.
pub(crate) fn strip_anchor(g: &mut Grouped) {
    if g.knots.first() == Some(&0.0) {
        g.knots.remove(0);
        g.weights.remove(0);
        g.means.remove(0);
    }
}

pub(crate) fn anchored(knots: &[f64], values: &[f64]) -> Result<FittedFn> {
    let mut k = Vec::with_capacity(knots.len() + 1);
    let mut v = Vec::with_capacity(knots.len() + 1);
    k.push(0.0);
    v.push(0.0);
    k.extend_from_slice(knots);
    v.extend_from_slice(values);
    FittedFn::piecewise(k, v)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneFit {
    pub w_hat: DVector<f64>,
    /// Smallest eigenvalue of `(1/n) Σ xᵢxᵢᵀ`.
    pub gram_min_eig: f64,
    pub n: usize,
}

/// Global least-squares fit of a single hyperplane to mixture data.
pub fn fit_hyperplane_erm(data: &Dataset) -> HyperplaneFit {
    let n = data.n();
    let gram = data.x.tr_mul(&data.x) / n as f64;
    let gram_min_eig = gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    HyperplaneFit { w_hat: min_norm_ls(&data.x, &data.y), gram_min_eig, n }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub excess_risk: f64,
    pub w_star: DVector<f64>,
    pub population_floor: f64,
}

/// Excess population risk `(ν²/2)‖ŵ - w*‖²` with `w* = Σ aⱼw*ⱼ`, and the
/// risk floor `(ν²/2) Σ aⱼ‖w* - w*ⱼ‖²`.
pub fn excess_risk_hyperplane(w_hat: &DVector<f64>, h: &HyperplaneMixture) -> Result<RiskReport> {
    h.validate()?;
    if w_hat.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: w_hat.len() });
    }
    let w_star = h.mean_regressor();
    let half_nu2 = 0.5 * h.nu * h.nu;
    let excess_risk = half_nu2 * (w_hat - &w_star).norm_squared();
    let population_floor = half_nu2 * h.regressors.iter().zip(&h.weights).map(|(w, a)| a * (&w_star - w).norm_squared()).sum::<f64>();
    Ok(RiskReport { excess_risk, w_star, population_floor })
}
