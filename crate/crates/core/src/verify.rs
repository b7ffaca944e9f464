//! Monte Carlo checks of the concentration inequalities behind the
//! mixed-hyperplane bound.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::mixtures::delta_w;
use crate::rng::{RngStream, StreamRng};
use crate::stats::{mean_se, par_replicates};
use crate::types::HyperplaneMixture;

/// Empirical values against bounds on a grid. For tail checks `empirical`
/// holds frequencies; for the MGF check it holds MGF estimates and `grid`
/// the norms of the test directions.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckReport {
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub bound: Vec<f64>,
    /// Three-sigma allowance added to the bound before flagging.
    pub slack: Vec<f64>,
    pub violations: usize,
    pub replicates: usize,
}

impl TailCheckReport {
    fn build(grid: Vec<f64>, empirical: Vec<f64>, bound: Vec<f64>, slack: Vec<f64>, replicates: usize) -> Self {
        let violations = (0..grid.len()).filter(|&i| empirical[i] > bound[i] + slack[i]).count();
        Self { grid, empirical, bound, slack, violations, replicates }
    }
}

fn binomial_slack(p: f64, replicates: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / replicates as f64).sqrt()
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicates, got {replicates}")));
    }
    Ok(())
}

/// Laplace scale whose coordinates are `(v², α)` sub-exponential:
/// Laplace(b) has MGF `1/(1 - b²λ²) <= exp(2b²λ²)` for `|λ| <= 1/(2b)`.
pub fn laplace_scale(v2: f64, alpha: f64) -> f64 {
    f64::min(v2.sqrt() / 2.0, alpha / 2.0)
}

/// `exp(-¼ min{t²/(2v²d), t/(αd)})`.
pub fn norm_tail_bound(v2: f64, alpha: f64, d: usize, t: f64) -> f64 {
    let d = d as f64;
    (-0.25 * f64::min(t * t / (2.0 * v2 * d), t / (alpha * d))).exp()
}

/// Empirical `P(‖Z‖ >= t)` for `Z` with i.i.d. Laplace coordinates scaled to
/// be `(v², α)` sub-exponential, against the norm concentration bound.
pub fn check_norm_tail(v2: f64, alpha: f64, d: usize, t_grid: &[f64], replicates: usize, rng: RngStream) -> Result<TailCheckReport> {
    if !(v2 > 0.0 && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("need v2, alpha > 0 (got {v2}, {alpha})")));
    }
    if d == 0 {
        return Err(Error::Empty("dimension"));
    }
    check_replicates(replicates)?;
    let b = laplace_scale(v2, alpha);
    let norms = par_replicates(replicates, rng, |r| {
        let sq: f64 = (0..d)
            .map(|_| {
                let e: f64 = r.sample(Exp1);
                let z = if r.random::<bool>() { b * e } else { -b * e };
                z * z
            })
            .sum();
        Ok(sq.sqrt())
    })?;
    let empirical: Vec<f64> = t_grid.iter().map(|&t| norms.iter().filter(|&&z| z >= t).count() as f64 / replicates as f64).collect();
    let bound: Vec<f64> = t_grid.iter().map(|&t| norm_tail_bound(v2, alpha, d, t)).collect();
    let slack = bound.iter().map(|&p| binomial_slack(p, replicates)).collect();
    Ok(TailCheckReport::build(t_grid.to_vec(), empirical, bound, slack, replicates))
}

fn draw_assignment(h: &HyperplaneMixture, r: &mut StreamRng) -> usize {
    crate::mixtures::categorical(&h.weights, r.random())
}

/// Largest admissible test direction norm `1/(4νΔ_w)`.
pub fn mgf_cap(h: &HyperplaneMixture) -> Result<f64> {
    let dw = delta_w(h);
    if dw == 0.0 {
        return Err(Error::DegenerateMixture);
    }
    Ok(1.0 / (4.0 * h.nu * dw))
}

/// Empirical `E exp(⟨u, Z - nνw̄⟩)` for the given directions, with
/// `Z = (1/ν) Σ xᵢxᵢᵀ(w*_{jᵢ} - w*)` and `xᵢ ~ N(0, ν²I)`, against
/// `exp(2nν²Δ_w²‖u‖²)`. All directions share the same replicates.
pub fn check_bias_mgf_at(h: &HyperplaneMixture, n: usize, directions: &[DVector<f64>], replicates: usize, rng: RngStream) -> Result<TailCheckReport> {
    h.validate()?;
    let cap = mgf_cap(h)?;
    check_replicates(replicates)?;
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    let d = h.dim();
    for u in directions {
        if u.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u.len() });
        }
        if u.norm() > cap * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("direction norm {} exceeds the cap {cap}", u.norm())));
        }
    }
    let w_star = h.mean_regressor();
    let centered: Vec<DVector<f64>> = h.regressors.iter().map(|w| w - &w_star).collect();
    let nu = h.nu;
    let samples = par_replicates(replicates, rng, |r| {
        let mut acc = DVector::zeros(d);
        let mut x = DVector::zeros(d);
        for _ in 0..n {
            let wi = &centered[draw_assignment(h, r)];
            for k in 0..d {
                x[k] = nu * r.sample::<f64, _>(StandardNormal);
            }
            let proj = x.dot(wi) / nu;
            acc.axpy(proj, &x, 1.0);
            acc.axpy(-nu, wi, 1.0);
        }
        Ok(acc)
    })?;
    let dw = delta_w(h);
    let mut grid = Vec::with_capacity(directions.len());
    let mut empirical = Vec::with_capacity(directions.len());
    let mut bound = Vec::with_capacity(directions.len());
    let mut slack = Vec::with_capacity(directions.len());
    for u in directions {
        let vals: Vec<f64> = samples.iter().map(|z| u.dot(z).exp()).collect();
        let (m, se) = mean_se(&vals);
        let un = u.norm();
        grid.push(un);
        empirical.push(m);
        bound.push((2.0 * n as f64 * nu * nu * dw * dw * un * un).exp());
        slack.push(3.0 * se);
    }
    Ok(TailCheckReport::build(grid, empirical, bound, slack, replicates))
}

/// [`check_bias_mgf_at`] on `u_samples` directions drawn uniformly from the
/// ball of radius `1/(4νΔ_w)`.
pub fn check_bias_mgf(h: &HyperplaneMixture, n: usize, u_samples: usize, replicates: usize, rng: RngStream) -> Result<TailCheckReport> {
    h.validate()?;
    let cap = mgf_cap(h)?;
    let d = h.dim();
    let mut r = rng.child(0).rng();
    let directions: Vec<DVector<f64>> = (0..u_samples)
        .map(|_| {
            let g = DVector::from_fn(d, |_, _| r.sample::<f64, _>(StandardNormal));
            let radius = cap * r.random::<f64>().powf(1.0 / d as f64);
            let norm = g.norm();
            if norm == 0.0 {
                g
            } else {
                g * (radius / norm)
            }
        })
        .collect();
    check_bias_mgf_at(h, n, &directions, replicates, rng.child(1))
}

/// `(dΔ_w²/2n) log(8/δ)`.
pub fn wbar_bound(d: usize, delta_w: f64, n: usize, fail_prob: f64) -> f64 {
    d as f64 * delta_w * delta_w / (2.0 * n as f64) * (8.0 / fail_prob).ln()
}

/// Frequency with which `‖w̄‖² = ‖(1/n)Σ w*_{jᵢ} - w*‖²` exceeds its bound,
/// against the allowed failure rate `fail_prob/8`.
pub fn check_wbar(h: &HyperplaneMixture, n: usize, fail_prob: f64, replicates: usize, rng: RngStream) -> Result<TailCheckReport> {
    h.validate()?;
    check_replicates(replicates)?;
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability must lie in (0, 1), got {fail_prob}")));
    }
    let m = h.regressors.len();
    let w_star = h.mean_regressor();
    let threshold = wbar_bound(h.dim(), delta_w(h), n, fail_prob);
    let exceed = par_replicates(replicates, rng, |r| {
        let mut counts = vec![0usize; m];
        for _ in 0..n {
            counts[draw_assignment(h, r)] += 1;
        }
        let mut wbar = -w_star.clone();
        for (j, &c) in counts.iter().enumerate() {
            wbar.axpy(c as f64 / n as f64, &h.regressors[j], 1.0);
        }
        Ok(wbar.norm_squared() > threshold)
    })?;
    let freq = exceed.iter().filter(|&&e| e).count() as f64 / replicates as f64;
    let allowed = fail_prob / 8.0;
    Ok(TailCheckReport::build(vec![threshold], vec![freq], vec![allowed], vec![binomial_slack(allowed, replicates)], replicates))
}

/// One configuration of the default verification matrix.
#[derive(Debug, Clone)]
pub struct VerifyCase {
    pub d: usize,
    pub n: usize,
    pub mixture: HyperplaneMixture,
}

/// Equal-weight mixtures with `m` in {2, 3}, `d` in {1, 4} and `n` in
/// {10, 100}; regressors `±e₁` plus `e₂` (or 0 when d = 1) for the third.
pub fn default_verify_cases() -> Vec<VerifyCase> {
    let mut out = Vec::new();
    for d in [1usize, 4] {
        for n in [10usize, 100] {
            for m in [2usize, 3] {
                let e = |k: usize, s: f64| {
                    let mut v = DVector::zeros(d);
                    if k < d {
                        v[k] = s;
                    }
                    v
                };
                let mut regs = vec![e(0, 1.0), e(0, -1.0)];
                if m == 3 {
                    regs.push(e(1, 1.0));
                }
                let mixture = HyperplaneMixture::new(1.0, regs, vec![1.0 / m as f64; m], 1.0).expect("valid default mixture");
                out.push(VerifyCase { d, n, mixture });
            }
        }
    }
    out
}

/// Default norm-tail matrix: `(v², α, d)` triples.
pub fn default_norm_tail_cases() -> Vec<(f64, f64, usize)> {
    vec![(1.0, 1.0, 1), (1.0, 1.0, 4), (4.0, 0.5, 1), (0.25, 2.0, 4)]
}

/// Thresholds from 0 to well into the tail.
pub fn default_t_grid() -> Vec<f64> {
    (0..=40).map(|k| k as f64 * 0.5).collect()
}
