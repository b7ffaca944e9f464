//! Empirical Rademacher complexity, local Gaussian complexity, and the
//! mixture bounds built on them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::optim::{solve_qp, ConstraintSet, Primitive, DEFAULT_MAX_ITER};
use crate::rng::{RngStream, StreamRng};
use crate::stats::{mean_se, par_replicates};


pub const DEFAULT_DRAWS: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityKind {
    RademacherL2,
    RademacherL1,
    RademacherBounded,
    GaussianLinear,
    GaussianLipschitz,
}

impl ComplexityKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RademacherL2 => "rademacher_l2",
            Self::RademacherL1 => "rademacher_l1",
            Self::RademacherBounded => "rademacher_bounded",
            Self::GaussianLinear => "gaussian_linear",
            Self::GaussianLipschitz => "gaussian_lipschitz",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: usize,
    pub kind: ComplexityKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

fn check_draws(draws: usize) -> Result<()> {
    if draws == 0 {
        return Err(Error::Empty("draws"));
    }
    Ok(())
}

fn estimate(values: Vec<f64>, kind: ComplexityKind) -> ComplexityEstimate {
    let (value, std_error) = mean_se(&values);
    ComplexityEstimate { value: value.max(0.0), std_error, draws: values.len(), kind }
}

fn rademacher_sum(x: &DMatrix<f64>, rng: &mut StreamRng, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..x.nrows() {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for (k, o) in out.iter_mut().enumerate() {
            *o += s * x[(i, k)];
        }
    }
}

fn rademacher_mc(
    x: &DMatrix<f64>,
    scale: f64,
    draws: usize,
    rng: RngStream,
    norm: fn(&[f64]) -> f64,
    kind: ComplexityKind,
) -> Result<ComplexityEstimate> {
    if x.nrows() == 0 {
        return Err(Error::Empty("data"));
    }
    check_draws(draws)?;
    let coef = scale / x.nrows() as f64;
    let values = par_replicates(draws, rng, |r| {
        let mut s = vec![0.0; x.ncols()];
        rademacher_sum(x, r, &mut s);
        Ok(coef * norm(&s))
    })?;
    Ok(estimate(values, kind))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Rademacher complexity of `{x ↦ ⟨w, x⟩ : ‖w‖₂ ≤ W2}` on the rows of `x`.
/// The supremum for each sign vector is `(W2/n)‖Σσᵢxᵢ‖₂`.
pub fn rademacher_l2(x: &DMatrix<f64>, w2: f64, draws: usize, rng: RngStream) -> Result<ComplexityEstimate> {
    positive("W2", w2)?;
    rademacher_mc(x, w2, draws, rng, l2, ComplexityKind::RademacherL2)
}

/// Same for the ℓ1 ball of radius `W1`; the supremum is `(W1/n)‖Σσᵢxᵢ‖_∞`.
pub fn rademacher_l1(x: &DMatrix<f64>, w1: f64, draws: usize, rng: RngStream) -> Result<ComplexityEstimate> {
    positive("W1", w1)?;
    rademacher_mc(x, w1, draws, rng, linf, ComplexityKind::RademacherL1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RademacherCase {
    L2 { w2: f64, r: f64 },
    L1 { w1: f64, x_inf: f64, d: usize },
    Bounded { b: f64 },
}

/// Closed-form bound `B(n)` for the three hypothesis classes.
pub fn rademacher_bound(case: RademacherCase, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    let n = n as f64;
    match case {
        RademacherCase::L2 { w2, r } => {
            positive("W2", w2)?;
            nonnegative("R", r)?;
            Ok(w2 * r / n.sqrt())
        }
        RademacherCase::L1 { w1, x_inf, d } => {
            positive("W1", w1)?;
            nonnegative("X_inf", x_inf)?;
            if d == 0 {
                return Err(Error::Empty("dimension"));
            }
            Ok(x_inf * w1 * (2.0 * (d as f64).ln() / n).sqrt())
        }
        RademacherCase::Bounded { b } => {
            nonnegative("b", b)?;
            Ok(b)
        }
    }
}

fn min_penalized(base: &[f64], gammas: &[f64], coef: f64) -> Result<f64> {
    if base.len() != gammas.len() {
        return Err(Error::DimensionMismatch { expected: base.len(), found: gammas.len() });
    }
    if base.is_empty() {
        return Err(Error::Empty("components"));
    }
    for &b in base {
        nonnegative("base complexity", b)?;
    }
    for &g in gammas {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1], got {g}")));
        }
    }
    Ok(base.iter().zip(gammas).map(|(b, g)| b + coef * g).fold(f64::INFINITY, f64::min))
}

/// Population Rademacher bound `min_j (R_j + 2γ_j B(n))`.
pub fn mixture_rademacher_bound(base: &[f64], gammas: &[f64], bn: f64) -> Result<f64> {
    nonnegative("B(n)", bn)?;
    min_penalized(base, gammas, 2.0 * bn)
}

/// Deviation bound `2R_j + 4B(n)γ_j + dev`.
pub fn generalization_bound(rj: f64, bn: f64, gamma_j: f64, dev: f64) -> Result<f64> {
    for (name, v) in [("R_j", rj), ("B(n)", bn), ("gamma", gamma_j), ("dev", dev)] {
        nonnegative(name, v)?;
    }
    Ok(2.0 * rj + 4.0 * bn * gamma_j + dev)
}

/// Whether heterogeneity is small enough for the bound to keep the
/// component's order: `γ_j <= R_j / (2B(n))`.
pub fn heterogeneity_negligible(rj: f64, bn: f64, gamma_j: f64) -> Result<bool> {
    if bn == 0.0 {
        return Err(Error::ZeroBn);
    }
    nonnegative("B(n)", bn)?;
    Ok(gamma_j <= rj / (2.0 * bn))
}

/// Local Gaussian complexity bound `min_j (G_j + 2ζδγ_j)`.
pub fn mixture_gc_bound(base: &[f64], gammas: &[f64], zeta: f64, delta: f64) -> Result<f64> {
    nonnegative("zeta", zeta)?;
    nonnegative("delta", delta)?;
    min_penalized(base, gammas, 2.0 * zeta * delta)
}

/// Orthonormal basis of the column space of `x`, as rows of the result.
fn column_space_basis(x: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = x.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = smax * f64::EPSILON * x.nrows().max(x.ncols()) as f64;
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > cut && smax > 0.0).collect();
    DMatrix::from_fn(keep.len(), x.nrows(), |r, i| u[(i, keep[r])])
}

/// Local Gaussian complexity of the linear class over the design `x`:
/// mean over `u ~ N(0, I_n)` of `(δ/√n)‖Π u‖`, with `Π` the projection onto
/// the column space of `x`.
pub fn local_gc_linear(x: &DMatrix<f64>, delta: f64, draws: usize, rng: RngStream) -> Result<ComplexityEstimate> {
    nonnegative("delta", delta)?;
    check_draws(draws)?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::Empty("data"));
    }
    let basis = column_space_basis(x);
    let coef = delta / (n as f64).sqrt();
    let values = par_replicates(draws, rng, |r| {
        let u = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
        Ok(coef * (&basis * u).norm())
    })?;
    Ok(estimate(values, ComplexityKind::GaussianLinear))
}

fn check_design(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty("data"));
    }
    let mut prev = 0.0;
    for &xi in x {
        if !(0.0..=1.0).contains(&xi) || xi < prev {
            return Err(Error::InvalidParameter(format!("design points must be sorted in [0, 1], got {xi} after {prev}")));
        }
        prev = xi;
    }
    Ok(())
}

/// Feasible set of the Lipschitz local class at sorted design points `x`:
/// coordinate 0 is the anchor `g(0) = 0`, coordinates `1..=n` the values.
pub fn lipschitz_ball(x: &[f64], l: f64, delta: f64) -> Result<ConstraintSet> {
    positive("L", l)?;
    positive("delta", delta)?;
    check_design(x)?;
    let n = x.len();
    let mut set = ConstraintSet::new(vec![Primitive::fixed(0, 0.0)]);
    let mut prev = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let bound = l * (xi - prev);
        set.push(Primitive::half_space_sparse(vec![(i, -1.0), (i + 1, 1.0)], bound)?);
        set.push(Primitive::half_space_sparse(vec![(i, 1.0), (i + 1, -1.0)], bound)?);
        prev = xi;
    }
    set.push(Primitive::norm_ball(vec![0.0; n + 1], delta * (n as f64).sqrt())?);
    Ok(set)
}

/// Supremum of `(1/n)|Σ uᵢ gᵢ|` over the Lipschitz local class, for one
/// Gaussian vector `u`.
pub fn lipschitz_sup(set: &ConstraintSet, u: &[f64], tol: f64) -> Result<f64> {
    let n = u.len();
    let q = DMatrix::zeros(n + 1, n + 1);
    let mut best: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let mut c = vec![0.0; n + 1];
        for i in 0..n {
            c[i + 1] = -sign * u[i] / n as f64;
        }
        let report = solve_qp(&q, &c, set, tol, DEFAULT_MAX_ITER)?;
        best = best.max(-report.objective);
    }
    Ok(best)
}

/// Local Gaussian complexity of the L-Lipschitz class anchored at 0, each
/// inner supremum solved as a convex program.
pub fn local_gc_lipschitz(x: &[f64], l: f64, delta: f64, draws: usize, rng: RngStream, tol: f64) -> Result<ComplexityEstimate> {
    check_draws(draws)?;
    positive("L", l)?;
    nonnegative("delta", delta)?;
    check_design(x)?;
    if delta == 0.0 {
        return Ok(ComplexityEstimate { value: 0.0, std_error: 0.0, draws, kind: ComplexityKind::GaussianLipschitz });
    }
    let set = lipschitz_ball(x, l, delta)?;
    let n = x.len();
    let values = par_replicates(draws, rng, |r| {
        let u: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        lipschitz_sup(&set, &u, tol)
    })?;
    Ok(estimate(values, ComplexityKind::GaussianLipschitz))
}
