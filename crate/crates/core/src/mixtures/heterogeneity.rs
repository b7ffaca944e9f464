use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::density::{Truncated, TruncatedMixture};
use super::sampling::categorical;
use super::tv::{tv_distance_1d, tv_gaussian_equal_scale, DEFAULT_ABS_TOL};
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamRng};
use crate::types::{log_sum_exp, validate_mixture, GaussianComponent, HyperplaneMixture, MixtureModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeterogeneityMethod {
    ClosedForm1d,
    Quadrature1d,
    MonteCarlo,
}

impl HeterogeneityMethod {
    pub fn name(&self) -> &'static str {
        match self {
            HeterogeneityMethod::ClosedForm1d => "closed_form_1d",
            HeterogeneityMethod::Quadrature1d => "quadrature_1d",
            HeterogeneityMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// TV radius of every component to the mixture, and the pairwise diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityReport {
    pub gamma_per_component: Vec<f64>,
    pub gamma: f64,
    pub pairwise_diameter: f64,
    pub method: HeterogeneityMethod,
    pub std_error: f64,
}

impl HeterogeneityReport {
    fn deterministic(gamma_per_component: Vec<f64>, pairwise_diameter: f64, method: HeterogeneityMethod) -> Self {
        let gamma = gamma_per_component.iter().copied().fold(0.0, f64::max);
        Self { gamma_per_component, gamma, pairwise_diameter, method, std_error: 0.0 }
    }
}

pub const DEFAULT_MC_BUDGET: usize = 1_000_000;
const MC_CHUNK: usize = 16_384;

/// Component densities that the Monte Carlo estimator can sample from
/// (through the mixture) and evaluate up to a shared additive constant.
trait ComponentFamily: Sync {
    fn weights(&self) -> &[f64];
    fn point_len(&self) -> usize;
    fn draw(&self, j: usize, rng: &mut StreamRng, point: &mut [f64]);
    fn ln_pdfs(&self, point: &[f64], out: &mut [f64]);
}

impl ComponentFamily for MixtureModel {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn point_len(&self) -> usize {
        self.dim()
    }
    fn draw(&self, j: usize, rng: &mut StreamRng, point: &mut [f64]) {
        let c = &self.components[j];
        for (k, p) in point.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *p = c.mean[k] + c.scale * z;
        }
    }
    fn ln_pdfs(&self, point: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.ln_pdf(point);
        }
    }
}

/// Joint law of `(x, y)`; the covariate density is common to all components
/// and drops out of every ratio, so only `y | x` is evaluated.
impl ComponentFamily for HyperplaneMixture {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn point_len(&self) -> usize {
        self.dim() + 1
    }
    fn draw(&self, j: usize, rng: &mut StreamRng, point: &mut [f64]) {
        let d = self.dim();
        let w = &self.regressors[j];
        let mut signal = 0.0;
        for k in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            point[k] = self.nu * z;
            signal += w[k] * point[k];
        }
        let xi: f64 = rng.sample(StandardNormal);
        point[d] = signal + self.zeta * xi;
    }
    fn ln_pdfs(&self, point: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let s2 = self.zeta * self.zeta;
        for (o, w) in out.iter_mut().zip(&self.regressors) {
            let mean: f64 = (0..d).map(|k| w[k] * point[k]).sum();
            let r = point[d] - mean;
            *o = -0.5 * r * r / s2;
        }
    }
}

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self { sum: vec![0.0; k], sum_sq: vec![0.0; k], count: 0 }
    }
    fn merge(mut self, other: &Moments) -> Self {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.count += other.count;
        self
    }
    fn mean_se(&self, i: usize) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.sum[i] / n;
        let var = ((self.sum_sq[i] / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

fn monte_carlo<F: ComponentFamily>(family: &F, budget: usize, rng: RngStream) -> Result<HeterogeneityReport> {
    if budget < 2 {
        return Err(Error::InvalidParameter("Monte Carlo budget must be at least 2".into()));
    }
    let w = family.weights();
    let m = w.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j + 1..m).map(move |k| (j, k))).collect();
    let stats = m + pairs.len();
    let ln_w: Vec<f64> = w.iter().map(|a| a.ln()).collect();
    let chunks = budget.div_ceil(MC_CHUNK);

    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let draws = MC_CHUNK.min(budget - c * MC_CHUNK);
            let mut r = rng.replicate(c as u64).rng();
            let mut acc = Moments::new(stats);
            let mut point = vec![0.0; family.point_len()];
            let mut lp = vec![0.0; m];
            let mut terms = vec![0.0; m];
            let mut ratio = vec![0.0; m];
            for _ in 0..draws {
                let j = categorical(w, r.random());
                family.draw(j, &mut r, &mut point);
                family.ln_pdfs(&point, &mut lp);
                for i in 0..m {
                    terms[i] = ln_w[i] + lp[i];
                }
                let ln_mix = log_sum_exp(&terms);
                for i in 0..m {
                    ratio[i] = (lp[i] - ln_mix).exp();
                }
                let mut push = |i: usize, v: f64| {
                    acc.sum[i] += v;
                    acc.sum_sq[i] += v * v;
                };
                for i in 0..m {
                    push(i, 0.5 * (ratio[i] - 1.0).abs());
                }
                for (p, &(a, b)) in pairs.iter().enumerate() {
                    push(m + p, 0.5 * (ratio[a] - ratio[b]).abs());
                }
                acc.count += 1;
            }
            acc
        })
        .collect();
    let total = partial.iter().fold(Moments::new(stats), |a, b| a.merge(b));

    let mut se_max: f64 = 0.0;
    let mut gammas = Vec::with_capacity(m);
    for i in 0..m {
        let (g, se) = total.mean_se(i);
        gammas.push(g.clamp(0.0, 1.0));
        se_max = se_max.max(se);
    }
    let mut diameter: f64 = 0.0;
    for p in 0..pairs.len() {
        let (t, se) = total.mean_se(m + p);
        if t > diameter {
            diameter = t;
        }
        se_max = se_max.max(se);
    }
    let gamma = gammas.iter().copied().fold(0.0, f64::max);
    Ok(HeterogeneityReport {
        gamma_per_component: gammas,
        gamma,
        pairwise_diameter: diameter.min(1.0),
        method: HeterogeneityMethod::MonteCarlo,
        std_error: se_max,
    })
}

/// Heterogeneity radius `γ_j = ‖D_j - D̃‖_TV` of every component.
///
/// `closed_form_1d` needs d = 1, at most two components and a shared scale;
/// `quadrature_1d` needs d = 1; `monte_carlo` works in any dimension and uses
/// `budget` draws from the mixture.
pub fn gamma_radius(m: &MixtureModel, method: HeterogeneityMethod, budget: usize, rng: RngStream) -> Result<HeterogeneityReport> {
    validate_mixture(m)?;
    let k = m.len();
    if k == 1 {
        return Ok(HeterogeneityReport::deterministic(vec![0.0], 0.0, method));
    }
    match method {
        HeterogeneityMethod::ClosedForm1d => {
            let (c1, c2) = (&m.components[0], &m.components[1]);
            if m.dim() != 1 || k != 2 || c1.scale != c2.scale {
                return Err(Error::UnsupportedMethod(method.name()));
            }
            let tv = tv_gaussian_equal_scale(c1.mean[0], c2.mean[0], c1.scale);
            let gammas = vec![m.weights[1] * tv, m.weights[0] * tv];
            Ok(HeterogeneityReport::deterministic(gammas, tv, method))
        }
        HeterogeneityMethod::Quadrature1d => {
            if m.dim() != 1 {
                return Err(Error::UnsupportedMethod(method.name()));
            }
            let gammas = m
                .components
                .iter()
                .map(|c| tv_distance_1d(c, m, DEFAULT_ABS_TOL))
                .collect::<Result<Vec<_>>>()?;
            let mut diameter: f64 = 0.0;
            for j in 0..k {
                for l in j + 1..k {
                    diameter = diameter.max(tv_distance_1d(&m.components[j], &m.components[l], DEFAULT_ABS_TOL)?);
                }
            }
            Ok(HeterogeneityReport::deterministic(gammas, diameter, method))
        }
        HeterogeneityMethod::MonteCarlo => monte_carlo(m, budget, rng),
    }
}

/// Monte Carlo TV radius of the joint `(x, y)` laws of a hyperplane mixture
/// with Gaussian label noise.
pub fn hyperplane_gamma(h: &HyperplaneMixture, budget: usize, rng: RngStream) -> Result<HeterogeneityReport> {
    h.validate()?;
    if h.zeta == 0.0 {
        return Err(Error::ZeroNoise);
    }
    if h.regressors.len() == 1 {
        return Ok(HeterogeneityReport::deterministic(vec![0.0], 0.0, HeterogeneityMethod::MonteCarlo));
    }
    monte_carlo(h, budget, rng)
}

/// `Δ_w = max_{j,j'} ‖w_j - w_j'‖`.
pub fn delta_w(h: &HyperplaneMixture) -> f64 {
    let mut best: f64 = 0.0;
    for (j, a) in h.regressors.iter().enumerate() {
        for b in &h.regressors[j + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// Upper bound `ν Δ_w / (√2 ζ)` on the TV heterogeneity of a hyperplane
/// mixture with Gaussian noise.
pub fn pinsker_gamma_bound(h: &HyperplaneMixture) -> Result<f64> {
    h.validate()?;
    if h.zeta == 0.0 {
        return Err(Error::ZeroNoise);
    }
    Ok(h.nu * delta_w(h) / (std::f64::consts::SQRT_2 * h.zeta))
}

/// `E_x[KL(D_j ‖ D_k | x)] = ν² ‖w_j - w_k‖² / (2ζ²)`.
pub fn expected_conditional_kl(h: &HyperplaneMixture, j: usize, k: usize) -> Result<f64> {
    h.validate()?;
    if h.zeta == 0.0 {
        return Err(Error::ZeroNoise);
    }
    let diff = &h.regressors[j] - &h.regressors[k];
    Ok(h.nu * h.nu * diff.norm_squared() / (2.0 * h.zeta * h.zeta))
}

/// Sample mean and standard error of `<x, w_j - w_k>² / (2ζ²)` over
/// `x ~ N(0, ν² I)`.
pub fn conditional_kl_mc(h: &HyperplaneMixture, j: usize, k: usize, draws: usize, rng: RngStream) -> Result<(f64, f64)> {
    h.validate()?;
    if h.zeta == 0.0 {
        return Err(Error::ZeroNoise);
    }
    let diff: DVector<f64> = &h.regressors[j] - &h.regressors[k];
    let mut r = rng.rng();
    let mut acc = Moments::new(1);
    for _ in 0..draws {
        let mut ip = 0.0;
        for dk in diff.iter() {
            let z: f64 = r.sample(StandardNormal);
            ip += h.nu * z * dk;
        }
        let v = ip * ip / (2.0 * h.zeta * h.zeta);
        acc.sum[0] += v;
        acc.sum_sq[0] += v * v;
        acc.count += 1;
    }
    Ok(acc.mean_se(0))
}

/// `{base, base + gap}` with equal weights.
pub fn two_component_mixture(base: &GaussianComponent, gap: f64) -> MixtureModel {
    let mut shifted = base.clone();
    shifted.mean[0] += gap;
    MixtureModel { components: vec![base.clone(), shifted], weights: vec![0.5, 0.5] }
}

/// Heterogeneity `γ_1` of the equal-weight pair `{base, base + gap}`, whose
/// components are optionally truncated to `[lo, hi]`.
pub fn pair_gamma(base: &GaussianComponent, gap: f64, truncation: Option<(f64, f64)>) -> Result<f64> {
    let shifted = two_component_mixture(base, gap).components.remove(1);
    match truncation {
        None => {
            if base.dim() == 1 {
                Ok(0.5 * tv_distance_1d(base, &shifted, DEFAULT_ABS_TOL)?)
            } else {
                // Equal-scale isotropic Gaussians: TV depends only on the
                // mean separation along one axis.
                Ok(0.5 * tv_gaussian_equal_scale(0.0, gap, base.scale))
            }
        }
        Some((lo, hi)) => {
            if base.dim() != 1 {
                return Err(Error::UnsupportedMethod("truncated pair in d > 1"));
            }
            let p = Truncated::gaussian(base.clone(), lo, hi);
            let q = Truncated::gaussian(shifted, lo, hi);
            let mix = TruncatedMixture { parts: vec![p.clone(), q], weights: vec![0.5, 0.5] };
            tv_distance_1d(&p, &mix, DEFAULT_ABS_TOL)
        }
    }
}

/// Mean gap at which the equal-weight pair reaches heterogeneity `target`,
/// by bisection on `[0, max_gap]` to within `tol` in γ.
pub fn calibrate_gap(base: &GaussianComponent, target: f64, truncation: Option<(f64, f64)>, max_gap: f64, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidParameter(format!("target gamma {target} outside [0, 1]")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let top = pair_gamma(base, max_gap, truncation)?;
    if top < target - tol {
        return Err(Error::InvalidParameter(format!("gamma {target} unreachable: maximum {top} at gap {max_gap}")));
    }
    let (mut lo, mut hi) = (0.0, max_gap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = pair_gamma(base, mid, truncation)?;
        if (g - target).abs() <= tol * 1e-2 || hi - lo < 1e-14 {
            return Ok(mid);
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
