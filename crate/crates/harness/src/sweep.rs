//! The four sweep experiments.
//!
//! Replicate `r` draws from the `r`-th replicate stream of the config seed at
//! every grid point, so the sample of size `2n` extends the sample of size
//! `n` (common random numbers across the grid). Arms that are compared
//! against each other (mixture vs base covariates, mixture vs single
//! hyperplane, different γ at one n) share their noise as well.

use hetlearn_core::complexity::{
    local_gc_linear, local_gc_lipschitz, rademacher_bound, rademacher_l1, rademacher_l2, ComplexityEstimate, RademacherCase,
};
use hetlearn_core::mixtures::{calibrate_gap, pair_gamma, sample_covariates, sample_covariates_truncated, sample_hyperplane_data, two_component_mixture};
use hetlearn_core::optim::DEFAULT_TOL;
use hetlearn_core::rates::{gamma_threshold, hyperplane_error_bound, ClassTag};
use hetlearn_core::regress::{excess_risk_hyperplane, fit_convex_lipschitz, fit_hyperplane_erm, fit_linear_ls, fit_lipschitz, insample_error};
use hetlearn_core::stats::{iqr, lower_median};
use hetlearn_core::{derive_stream, Dataset, Error, FittedFn, HyperplaneMixture, MixtureModel, RngStream};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{ClassSpec, Covariates, Experiment, SweepConfig};
use crate::error::Result;
use crate::table::{Cell, Table};

/// Label-noise sub-stream of a replicate; disjoint from the covariate streams.
const NOISE_TAG: u64 = 0x6e6f_6973;
const DESIGN_TAG: u64 = 0x6465_7369;

pub const RATE_COLUMNS: [&str; 5] = ["n", "gamma", "median_error", "iqr", "replicates"];
pub const HETEROGENEITY_COLUMNS: [&str; 6] = ["n", "gamma", "error_mixture", "error_base", "ratio", "at_threshold"];
pub const HYPERPLANE_COLUMNS: [&str; 7] = ["n", "delta_w", "excess_risk_median", "bound", "base_excess_median", "ratio", "coverage"];
pub const COMPLEXITY_COLUMNS: [&str; 5] = ["n", "kind", "value", "std_error", "reference"];

pub fn run_sweep(cfg: &SweepConfig) -> Result<Table> {
    match cfg.experiment {
        Experiment::RateSweep => run_rate_sweep(cfg),
        Experiment::HeterogeneitySweep => run_heterogeneity_sweep(cfg),
        Experiment::HyperplaneSweep => run_hyperplane_sweep(cfg),
        Experiment::ComplexitySweep => run_complexity_sweep(cfg),
    }
}

#[derive(Debug, Clone, Copy)]
enum Estimator {
    Linear,
    Lipschitz(f64),
    Convex,
}

fn estimator(class: ClassSpec) -> Result<Estimator> {
    Ok(match class {
        ClassSpec::Linear { .. } => Estimator::Linear,
        ClassSpec::Lipschitz { l } => Estimator::Lipschitz(l),
        ClassSpec::ConvexLipschitz => Estimator::Convex,
        ClassSpec::Holder { alpha } if alpha == 1.0 => Estimator::Lipschitz(1.0),
        ClassSpec::Holder { alpha } if alpha == 2.0 => Estimator::Convex,
        ClassSpec::Holder { .. } => return Err(Error::UnsupportedMethod("Hölder sweeps other than alpha = 1 or 2").into()),
    })
}

/// In-class regression function used by every sweep of `class`:
/// `⟨1/√d, x⟩` (linear), `L·x(1 - x)` (Lipschitz, slope L at 0),
/// `x²/2` (convex-Lipschitz).
pub fn fixture(class: ClassSpec) -> impl Fn(&[f64]) -> f64 + Sync + Copy {
    let (kind, c) = match class {
        ClassSpec::Linear { d } => (0, 1.0 / (d as f64).sqrt()),
        ClassSpec::Lipschitz { l } => (1, l),
        ClassSpec::Holder { alpha } if alpha == 1.0 => (1, 1.0),
        ClassSpec::ConvexLipschitz | ClassSpec::Holder { .. } => (2, 1.0),
    };
    move |x: &[f64]| match kind {
        0 => c * x.iter().sum::<f64>(),
        1 => c * x[0] * (1.0 - x[0]),
        _ => 0.5 * x[0] * x[0],
    }
}

fn sample(cov: &Covariates, m: &MixtureModel, n: usize, rng: RngStream) -> Result<Dataset> {
    Ok(match cov.truncation {
        Some((lo, hi)) => sample_covariates_truncated(m, n, lo, hi, rng)?,
        None => sample_covariates(m, n, rng)?,
    })
}

/// Least-squares fit over `class`.
pub fn fit_class(class: ClassSpec, data: &Dataset, tol: f64) -> Result<FittedFn> {
    Ok(match estimator(class)? {
        Estimator::Linear => fit_linear_ls(data),
        Estimator::Lipschitz(l) => fit_lipschitz(data, l, tol)?,
        Estimator::Convex => fit_convex_lipschitz(data, tol)?,
    })
}

/// Covariates from `m` with labels `f*(x) + ζ·N(0, 1)`, `f*` the fixture of
/// `class`.
pub fn sample_regression(class: ClassSpec, cov: &Covariates, m: &MixtureModel, zeta: f64, n: usize, rng: RngStream) -> Result<Dataset> {
    let fstar = fixture(class);
    let mut data = sample(cov, m, n, rng)?;
    let mut noise = rng.child(NOISE_TAG).rng();
    let mut row = vec![0.0; data.dim()];
    for i in 0..n {
        for (k, r) in row.iter_mut().enumerate() {
            *r = data.x[(i, k)];
        }
        let z: f64 = noise.sample(StandardNormal);
        data.y[i] = fstar(&row) + zeta * z;
    }
    Ok(data)
}

/// `‖f̂ - f*‖²_n` for one replicate.
fn replicate_error(cfg: &SweepConfig, cov: &Covariates, m: &MixtureModel, n: usize, rng: RngStream) -> Result<f64> {
    let class = cfg.class()?;
    let data = sample_regression(class, cov, m, cfg.zeta, n, rng)?;
    let f = fit_class(class, &data, cfg.constants.fit_tol)?;
    Ok(insample_error(&f, fixture(class), &data.x))
}

fn replicate_errors(cfg: &SweepConfig, cov: &Covariates, m: &MixtureModel, n: usize) -> Result<Vec<f64>> {
    let stream = derive_stream(cfg.seed, 0);
    (0..cfg.replicates as u64).into_par_iter().map(|r| replicate_error(cfg, cov, m, n, stream.replicate(r))).collect()
}

/// Equal-weight pair at heterogeneity `gamma`, or `None` when the
/// covariate family cannot reach it.
pub fn calibrated_mixture(cov: &Covariates, gamma: f64) -> Result<Option<MixtureModel>> {
    if gamma == 0.0 {
        return Ok(Some(two_component_mixture(&cov.base, 0.0)));
    }
    let top = pair_gamma(&cov.base, cov.max_gap, cov.truncation)?;
    if top < gamma - cov.calibration_tol {
        return Ok(None);
    }
    let gap = calibrate_gap(&cov.base, gamma, cov.truncation, cov.max_gap, cov.calibration_tol)?;
    Ok(Some(two_component_mixture(&cov.base, gap)))
}

fn gamma_grid(cfg: &SweepConfig) -> Vec<f64> {
    cfg.gamma_grid.clone().unwrap_or_else(|| if cfg.mixture.gamma_at_threshold { vec![] } else { vec![0.0] })
}

/// Rows `(n, gamma, median_error, iqr, replicates)`; unreachable γ gives NaN errors.
pub fn run_rate_sweep(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let cov = cfg.covariates()?;
    let mut table = Table::new(&RATE_COLUMNS);
    for &n in &cfg.n_grid {
        for gamma in gamma_grid(cfg) {
            let (med, spread) = match calibrated_mixture(&cov, gamma)? {
                Some(m) => {
                    let errs = replicate_errors(cfg, &cov, &m, n)?;
                    (lower_median(&errs), iqr(&errs))
                }
                None => (f64::NAN, f64::NAN),
            };
            table.push(vec![n.into(), gamma.into(), med.into(), spread.into(), cfg.replicates.into()]);
        }
    }
    Ok(table)
}

fn error_ratio(mixture: f64, base: f64) -> f64 {
    if mixture == base {
        1.0
    } else {
        mixture / base
    }
}

/// Rows `(n, gamma, error_mixture, error_base, ratio, at_threshold)`.
///
/// Errors are lower medians over replicates; `ratio` is their quotient. The
/// mixture arm draws covariates from `{base, base + gap}`, the base arm from
/// `base` alone, with the same replicate streams.
pub fn run_heterogeneity_sweep(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let cov = cfg.covariates()?;
    let class = ClassTag::from(cfg.class()?);
    let base = MixtureModel::single(cov.base.clone());
    let mut table = Table::new(&HETEROGENEITY_COLUMNS);
    for &n in &cfg.n_grid {
        let mut gammas: Vec<(f64, bool)> = gamma_grid(cfg).into_iter().map(|g| (g, false)).collect();
        if cfg.mixture.gamma_at_threshold {
            gammas.push((gamma_threshold(class, cfg.zeta.max(f64::MIN_POSITIVE), n)?.min(1.0), true));
        }
        let base_err = lower_median(&replicate_errors(cfg, &cov, &base, n)?);
        for (gamma, at_threshold) in gammas {
            let mix_err = match calibrated_mixture(&cov, gamma)? {
                Some(m) => lower_median(&replicate_errors(cfg, &cov, &m, n)?),
                None => f64::NAN,
            };
            table.push(vec![
                n.into(),
                gamma.into(),
                mix_err.into(),
                base_err.into(),
                error_ratio(mix_err, base_err).into(),
                Cell::Num(if at_threshold { 1.0 } else { 0.0 }),
            ]);
        }
    }
    Ok(table)
}

/// Two symmetric regressors `±(Δ_w/2)e₁` in dimension `d`, equal weights.
pub fn symmetric_hyperplanes(d: usize, nu: f64, delta_w: f64, zeta: f64) -> Result<HyperplaneMixture> {
    let mut w = DVector::zeros(d);
    w[0] = 0.5 * delta_w;
    Ok(HyperplaneMixture::new(nu, vec![w.clone(), -w], vec![0.5, 0.5], zeta)?)
}

/// Rows `(n, delta_w, excess_risk_median, bound, base_excess_median, ratio,
/// coverage)`.
///
/// The base run fits data from the single hyperplane `w*` with the same
/// covariates and noise. `coverage` is the fraction of replicates whose
/// excess risk is at most `bound`; both are NaN below the sample-size
/// requirement of the bound.
pub fn run_hyperplane_sweep(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let hp = &cfg.hyperplane;
    let c = &cfg.constants;
    let grid = cfg.delta_w_grid.clone().unwrap_or_else(|| vec![0.0]);
    let mut table = Table::new(&HYPERPLANE_COLUMNS);
    for &n in &cfg.n_grid {
        let stream = derive_stream(cfg.seed, 0);
        for &dw in &grid {
            let h = symmetric_hyperplanes(hp.d, hp.nu, dw, cfg.zeta)?;
            let single = HyperplaneMixture::new(hp.nu, vec![h.mean_regressor()], vec![1.0], cfg.zeta)?;
            let pairs: Vec<(f64, f64)> = (0..cfg.replicates as u64)
                .into_par_iter()
                .map(|r| -> Result<(f64, f64)> {
                    let rng = stream.replicate(r);
                    let mix = fit_hyperplane_erm(&sample_hyperplane_data(&h, n, rng)?);
                    let one = fit_hyperplane_erm(&sample_hyperplane_data(&single, n, rng)?);
                    Ok((excess_risk_hyperplane(&mix.w_hat, &h)?.excess_risk, excess_risk_hyperplane(&one.w_hat, &single)?.excess_risk))
                })
                .collect::<Result<_>>()?;
            let (mix, one): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let bound = match hyperplane_error_bound(cfg.zeta, hp.d, n, hp.fail_prob, hp.nu, dw, c.cnoise, c.cbias) {
                Ok(b) => b,
                Err(Error::SampleTooSmall { .. }) => f64::NAN,
                Err(e) => return Err(e.into()),
            };
            let coverage = if bound.is_nan() { f64::NAN } else { mix.iter().filter(|&&e| e <= bound).count() as f64 / mix.len() as f64 };
            let (mm, om) = (lower_median(&mix), lower_median(&one));
            table.push(vec![n.into(), dw.into(), mm.into(), bound.into(), om.into(), error_ratio(mm, om).into(), coverage.into()]);
        }
    }
    Ok(table)
}

fn complexity_row(table: &mut Table, n: usize, est: &ComplexityEstimate, reference: f64) {
    table.push(vec![n.into(), est.kind.name().into(), est.value.into(), est.std_error.into(), reference.into()]);
}

/// Rows `(n, kind, value, std_error, reference)` on one design per n.
///
/// Linear classes report the ℓ2 and ℓ1 Rademacher estimates (unit radius)
/// with their closed-form bounds, and the local Gaussian complexity at
/// radius `constants.delta` against `δ√(d/n)`. The Lipschitz class reports
/// the local Gaussian complexity against the order `√(Lδ/n)`.
pub fn run_complexity_sweep(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let cov = cfg.covariates()?;
    let class = cfg.class()?;
    let draws = cfg.constants.draws;
    let delta = cfg.constants.delta;
    let base = MixtureModel::single(cov.base.clone());
    let mut table = Table::new(&COMPLEXITY_COLUMNS);
    for &n in &cfg.n_grid {
        let stream = derive_stream(cfg.seed, 0);
        let data = sample(&cov, &base, n, stream.child(DESIGN_TAG))?;
        match class {
            ClassSpec::Linear { d } => {
                let r = (0..n).map(|i| data.x.row(i).norm()).fold(0.0, f64::max);
                let x_inf = data.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let l2 = rademacher_l2(&data.x, 1.0, draws, stream.child(1))?;
                complexity_row(&mut table, n, &l2, rademacher_bound(RademacherCase::L2 { w2: 1.0, r }, n)?);
                let l1 = rademacher_l1(&data.x, 1.0, draws, stream.child(2))?;
                complexity_row(&mut table, n, &l1, rademacher_bound(RademacherCase::L1 { w1: 1.0, x_inf, d }, n)?);
                let g = local_gc_linear(&data.x, delta, draws, stream.child(3))?;
                complexity_row(&mut table, n, &g, delta * (d as f64 / n as f64).sqrt());
            }
            ClassSpec::Lipschitz { l } => {
                let mut xs = data.column(0);
                xs.sort_by(f64::total_cmp);
                let g = local_gc_lipschitz(&xs, l, delta, draws, stream.child(3), DEFAULT_TOL)?;
                complexity_row(&mut table, n, &g, (l * delta / n as f64).sqrt());
            }
            _ => return Err(Error::UnsupportedMethod("complexity sweep for this class").into()),
        }
    }
    Ok(table)
}
