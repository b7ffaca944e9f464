//! Critical-equation solver and closed-form rate and threshold calculators.

#[cfg(test)]
mod tests;

use crate::error::{Error, Result};
use crate::types::CriticalEq;

/// Function class whose critical equation is being solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassTag {
    Linear { d: usize },
    Lipschitz { l: f64 },
    ConvexLipschitz,
    Holder { alpha: f64 },
}

impl ClassTag {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Lipschitz { .. } => "lipschitz",
            Self::ConvexLipschitz => "convex_lipschitz",
            Self::Holder { .. } => "holder",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { d } if d == 0 => Err(Error::Empty("dimension")),
            Self::Lipschitz { l } if !(l > 0.0 && l.is_finite()) => Err(Error::InvalidParameter(format!("L must be positive, got {l}"))),
            Self::Holder { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub delta_star: f64,
    /// `δ*²`.
    pub rate: f64,
    /// `δ*² - aδ*^p - bδ*`.
    pub residual: f64,
    pub class_tag: Option<ClassTag>,
}

impl RateResult {
    /// The rate with an explicit order constant applied.
    pub fn scaled(&self, multiplier: f64) -> f64 {
        multiplier * self.rate
    }
}

fn residual(eq: &CriticalEq, d: f64) -> f64 {
    d * d - eq.a * d.powf(eq.p) - eq.b * d
}

const MAX_BISECTIONS: usize = 4_000;

/// Unique positive root of `δ² = aδ^p + bδ`.
///
/// Bisection runs on a rescaled form of the equation that is increasing in
/// `δ`: `δ - aδ^(p-1) - b` for `p <= 1` and `δ^(2-p) - a - bδ^(1-p)` above.
/// The midpoint is geometric while the bracket spans more than a factor 4,
/// so roots far below 1 cost no more than roots near it, and the iteration
/// stops when the bracket cannot be split further.
pub fn solve_critical(eq: &CriticalEq) -> Result<RateResult> {
    eq.validate().map_err(|e| match e {
        Error::Degenerate { .. } => Error::Degenerate { a: eq.a, b: eq.b },
        other => other,
    })?;
    let done = |d: f64| RateResult { delta_star: d, rate: d * d, residual: residual(eq, d), class_tag: None };
    if eq.p == 1.0 {
        return Ok(done(eq.a + eq.b));
    }
    if eq.a == 0.0 {
        return Ok(done(eq.b));
    }
    let (a, p, b) = (eq.a, eq.p, eq.b);
    let h = |d: f64| if p <= 1.0 { d - a * d.powf(p - 1.0) - b } else { d.powf(2.0 - p) - a - b * d.powf(1.0 - p) };
    let mut lo = 1e-300;
    let mut hi = a + b + 1.0;
    while h(hi) <= 0.0 && hi.is_finite() {
        lo = hi;
        hi *= 2.0;
    }
    if !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("critical equation root exceeds the float range (a = {a}, p = {p})")));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { lo + 0.5 * (hi - lo) };
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = if residual(eq, lo).abs() <= residual(eq, hi).abs() { lo } else { hi };
    let r = done(d);
    if !r.rate.is_finite() {
        return Err(Error::InvalidParameter(format!("root {d:e} of the critical equation overflows its square")));
    }
    Ok(r)
}

fn check_common(zeta: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!("zeta must be positive, got {zeta}")));
    }
    Ok(())
}

/// Critical equation of `class` at noise level `zeta`, sample size `n` and
/// heterogeneity `gamma`.
pub fn critical_eq_for_class(class: ClassTag, zeta: f64, n: usize, gamma: f64) -> Result<CriticalEq> {
    check_common(zeta, n)?;
    class.validate()?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let root_n = (n as f64).sqrt();
    // a = ζ·scale/√n in every case, so Hölder(1) and Hölder(2) coincide
    // bit for bit with Lipschitz(1) and convex-Lipschitz.
    let (scale, p) = match class {
        ClassTag::Linear { d } => ((d as f64).sqrt(), 1.0),
        ClassTag::Lipschitz { l } => (l.sqrt(), 0.5),
        ClassTag::ConvexLipschitz => (1.0, 0.75),
        ClassTag::Holder { alpha } => (1.0, 1.0 - 1.0 / (2.0 * alpha)),
    };
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1/2 for a positive exponent, got p = {p}")));
    }
    CriticalEq::new(zeta * scale / root_n, p, 2.0 * zeta * gamma)
}

pub fn critical_for_class(class: ClassTag, zeta: f64, n: usize, gamma: f64) -> Result<RateResult> {
    let eq = critical_eq_for_class(class, zeta, n, gamma)?;
    let mut r = solve_critical(&eq)?;
    r.class_tag = Some(class);
    Ok(r)
}

fn holder_threshold(zeta: f64, n: usize, alpha: f64) -> f64 {
    let denom = 1.0 + 2.0 * alpha;
    (1.0 / zeta).powf(1.0 / denom) * (1.0 / n as f64).powf(alpha / denom)
}

/// Largest heterogeneity at which the class keeps its homogeneous rate order.
pub fn gamma_threshold(class: ClassTag, zeta: f64, n: usize) -> Result<f64> {
    check_common(zeta, n)?;
    class.validate()?;
    Ok(match class {
        ClassTag::Linear { d } => (d as f64 / n as f64).sqrt(),
        ClassTag::Lipschitz { l } => holder_threshold(zeta / l, n, 1.0),
        ClassTag::ConvexLipschitz => holder_threshold(zeta, n, 2.0),
        ClassTag::Holder { alpha } => holder_threshold(zeta, n, alpha),
    })
}

fn check_fail_prob(fail_prob: f64) -> Result<()> {
    if !(fail_prob > 0.0 && fail_prob.is_finite()) {
        return Err(Error::InvalidParameter(format!("failure probability must be positive, got {fail_prob}")));
    }
    Ok(())
}

fn log_term(d: usize, fail_prob: f64) -> f64 {
    (d as f64).ln() + (6.0 / fail_prob).ln()
}

/// `ρ' = √(4d(log d + log(6/δ))/n) + 2d(log d + log(6/δ))/(3n)`.
pub fn rho_prime(d: usize, n: usize, fail_prob: f64) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::Empty(if n == 0 { "sample size" } else { "dimension" }));
    }
    check_fail_prob(fail_prob)?;
    let (d, n) = (d as f64, n as f64);
    let l = log_term(d as usize, fail_prob);
    Ok((4.0 * d * l / n).sqrt() + 2.0 * d * l / (3.0 * n))
}

/// Smallest `n` with `n >= 6d(log d + log(6/δ))`.
pub fn sample_requirement(d: usize, fail_prob: f64) -> Result<usize> {
    if d == 0 {
        return Err(Error::Empty("dimension"));
    }
    check_fail_prob(fail_prob)?;
    Ok((6.0 * d as f64 * log_term(d, fail_prob)).max(0.0).ceil() as usize)
}

/// Out-of-sample excess-risk bound for the global least-squares hyperplane
/// on mixture data: a noise term and a heterogeneity (bias) term, each with
/// its own explicit constant.
#[allow(clippy::too_many_arguments)]
pub fn hyperplane_error_bound(zeta: f64, d: usize, n: usize, fail_prob: f64, nu: f64, delta_w: f64, cnoise: f64, cbias: f64) -> Result<f64> {
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability must lie in (0, 1), got {fail_prob}")));
    }
    for (name, v) in [("zeta", zeta), ("nu", nu), ("delta_w", delta_w), ("cnoise", cnoise), ("cbias", cbias)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
        }
    }
    let rho = rho_prime(d, n, fail_prob)?;
    if rho >= 1.0 || n < sample_requirement(d, fail_prob)? {
        return Err(Error::SampleTooSmall { rho });
    }
    let (df, nf) = (d as f64, n as f64);
    let l6 = (6.0 / fail_prob).ln();
    let noise = cnoise * zeta * zeta * (df + 2.0 * (df * l6).sqrt() + 2.0 * l6) / ((1.0 - rho) * nf);
    let bias = cbias * (df * nu * nu * delta_w * delta_w / nf) * (1.0 / fail_prob).ln();
    Ok(noise + bias)
}

/// Heterogeneity level `ζ/ν` below which the global hyperplane fit is no
/// worse, order-wise, than a fit on one component.
pub fn delta_w_threshold(zeta: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    Ok(zeta / nu)
}
