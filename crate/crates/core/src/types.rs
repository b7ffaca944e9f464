//! Domain types shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Isotropic Gaussian `N(mean, scale² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub mean: DVector<f64>,
    pub scale: f64,
}

impl GaussianComponent {
    pub fn new(mean: DVector<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("component scale must be positive, got {scale}")));
        }
        if mean.is_empty() {
            return Err(Error::Empty("component mean"));
        }
        Ok(Self { mean, scale })
    }

    /// One-dimensional component.
    pub fn univariate(mean: f64, scale: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), scale)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log density at `x`.
    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let s2 = self.scale * self.scale;
        let sq: f64 = x.iter().zip(self.mean.iter()).map(|(a, m)| (a - m) * (a - m)).sum();
        -0.5 * sq / s2 - 0.5 * d * (2.0 * std::f64::consts::PI * s2).ln()
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    for (index, &weight) in weights.iter().enumerate() {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::NegativeWeight { index, weight });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightSum { sum });
    }
    Ok(())
}

/// Weighted mixture `Σ a_j D_j` of isotropic Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub components: Vec<GaussianComponent>,
    pub weights: Vec<f64>,
}

impl MixtureModel {
    pub fn new(components: Vec<GaussianComponent>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { components, weights };
        validate_mixture(&m)?;
        Ok(m)
    }

    /// Single-component model.
    pub fn single(component: GaussianComponent) -> Self {
        Self { components: vec![component], weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, GaussianComponent::dim)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Log density of the mixture, computed with log-sum-exp.
    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(&self.weights)
            .filter(|(_, &a)| a > 0.0)
            .map(|(c, a)| a.ln() + c.ln_pdf(x))
            .collect();
        log_sum_exp(&terms)
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Checks every [`MixtureModel`] invariant.
pub fn validate_mixture(m: &MixtureModel) -> Result<()> {
    if m.components.is_empty() {
        return Err(Error::Empty("mixture components"));
    }
    if m.weights.len() != m.components.len() {
        return Err(Error::DimensionMismatch { expected: m.components.len(), found: m.weights.len() });
    }
    let d = m.components[0].dim();
    for c in &m.components {
        if c.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: c.dim() });
        }
        if !(c.scale > 0.0) {
            return Err(Error::InvalidParameter(format!("component scale must be positive, got {}", c.scale)));
        }
    }
    check_weights(&m.weights)
}

/// Mixture of hyperplanes: `x ~ N(0, ν² I_d)`, `y = <w_j, x> + ξ` with `j ~ a`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneMixture {
    pub nu: f64,
    pub regressors: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub zeta: f64,
}

impl HyperplaneMixture {
    pub fn new(nu: f64, regressors: Vec<DVector<f64>>, weights: Vec<f64>, zeta: f64) -> Result<Self> {
        let h = Self { nu, regressors, weights, zeta };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::InvalidParameter(format!("zeta must be nonnegative, got {}", self.zeta)));
        }
        let first = self.regressors.first().ok_or(Error::Empty("regressors"))?;
        if first.is_empty() {
            return Err(Error::Empty("regressor dimension"));
        }
        for w in &self.regressors {
            if w.len() != first.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), found: w.len() });
            }
        }
        if self.weights.len() != self.regressors.len() {
            return Err(Error::DimensionMismatch { expected: self.regressors.len(), found: self.weights.len() });
        }
        check_weights(&self.weights)
    }

    pub fn dim(&self) -> usize {
        self.regressors[0].len()
    }

    /// Population minimizer `w* = Σ a_j w*_j`.
    pub fn mean_regressor(&self) -> DVector<f64> {
        let mut w = DVector::zeros(self.dim());
        for (wj, a) in self.regressors.iter().zip(&self.weights) {
            w.axpy(*a, wj, 1.0);
        }
        w
    }
}

/// Design matrix, labels and (optionally) the component that generated each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub assignment: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, assignment: Option<Vec<usize>>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Empty("dataset rows"));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.len() });
        }
        if let Some(a) = &assignment {
            if a.len() != x.nrows() {
                return Err(Error::DimensionMismatch { expected: x.nrows(), found: a.len() });
            }
        }
        Ok(Self { x, y, assignment })
    }

    /// One-dimensional covariates `xs` with labels `ys`.
    pub fn univariate(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(xs.len(), 1, xs), DVector::from_column_slice(ys), None)
    }

    /// Assignment indices must lie in `[0, m)`.
    pub fn check_assignment(&self, m: usize) -> Result<()> {
        if let Some(a) = &self.assignment {
            if let Some(&bad) = a.iter().find(|&&j| j >= m) {
                return Err(Error::InvalidParameter(format!("assignment {bad} outside [0, {m})")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// First covariate column, for one-dimensional designs.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.column(j).iter().copied().collect()
    }
}

/// A fitted regressor.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedFn {
    Linear { theta: DVector<f64> },
    /// Knots are strictly increasing, start at 0 and carry value 0 there.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
}

impl FittedFn {
    pub fn piecewise(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: knots.len(), found: values.len() });
        }
        if knots.first() != Some(&0.0) || values[0] != 0.0 {
            return Err(Error::InvalidParameter("piecewise fit must be anchored at (0, 0)".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        Ok(FittedFn::PiecewiseLinear { knots, values })
    }

    /// Evaluates at one covariate row. Piecewise fits read `x[0]`, interpolate
    /// linearly between knots and extend constantly beyond them.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FittedFn::Linear { theta } => theta.iter().zip(x).map(|(t, v)| t * v).sum(),
            FittedFn::PiecewiseLinear { knots, values } => {
                let t = x[0];
                let last = knots.len() - 1;
                if t <= knots[0] {
                    return values[0];
                }
                if t >= knots[last] {
                    return values[last];
                }
                let k = knots.partition_point(|&k| k <= t);
                let (x0, x1) = (knots[k - 1], knots[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// Values at every row of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let mut row = vec![0.0; x.ncols()];
        (0..x.nrows())
            .map(|i| {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = x[(i, j)];
                }
                self.eval(&row)
            })
            .collect()
    }
}

/// `a·δ^p + b·δ = δ²`, the shape shared by every critical equation here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEq {
    pub a: f64,
    pub p: f64,
    pub b: f64,
}

impl CriticalEq {
    pub fn new(a: f64, p: f64, b: f64) -> Result<Self> {
        let eq = Self { a, p, b };
        eq.validate()?;
        Ok(eq)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.b >= 0.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!("need a, b >= 0 (a = {}, b = {})", self.a, self.b)));
        }
        if !(self.p > 0.0 && self.p < 2.0) {
            return Err(Error::InvalidParameter(format!("exponent p must lie in (0, 2), got {}", self.p)));
        }
        if self.a + self.b <= 0.0 {
            return Err(Error::Degenerate { a: self.a, b: self.b });
        }
        Ok(())
    }
}
