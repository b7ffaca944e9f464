use statrs::function::erf::erf;

use crate::types::{GaussianComponent, MixtureModel};

/// A one-dimensional density with an effective support outside of which
/// it is negligible (below 1e-20 relative mass) or exactly zero.
pub trait Density1d {
    fn pdf(&self, x: f64) -> f64;
    fn support(&self) -> (f64, f64);
    /// Points where the density may be discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

const TAIL_SIGMAS: f64 = 10.0;

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

impl Density1d for GaussianComponent {
    fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean[0]) / self.scale;
        (-0.5 * z * z).exp() / (self.scale * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn support(&self) -> (f64, f64) {
        (self.mean[0] - TAIL_SIGMAS * self.scale, self.mean[0] + TAIL_SIGMAS * self.scale)
    }
}

impl Density1d for MixtureModel {
    fn pdf(&self, x: f64) -> f64 {
        self.components.iter().zip(&self.weights).map(|(c, a)| a * c.pdf(x)).sum()
    }

    fn support(&self) -> (f64, f64) {
        self.components
            .iter()
            .map(Density1d::support)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)))
    }
}

/// `inner` restricted to `[lo, hi]` and renormalized.
#[derive(Debug, Clone)]
pub struct Truncated<D> {
    pub inner: D,
    pub lo: f64,
    pub hi: f64,
    mass: f64,
}

impl Truncated<GaussianComponent> {
    pub fn gaussian(inner: GaussianComponent, lo: f64, hi: f64) -> Self {
        let mass = truncated_mass(&inner, lo, hi);
        Self { inner, lo, hi, mass }
    }
}

/// Probability a 1-d Gaussian component puts on `[lo, hi]`.
pub fn truncated_mass(c: &GaussianComponent, lo: f64, hi: f64) -> f64 {
    let (m, s) = (c.mean[0], c.scale);
    std_normal_cdf((hi - m) / s) - std_normal_cdf((lo - m) / s)
}

impl<D: Density1d> Density1d for Truncated<D> {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            self.inner.pdf(x) / self.mass
        }
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.inner.support();
        (a.max(self.lo), b.min(self.hi))
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.lo, self.hi]
    }
}

/// Equal-weight mixture of truncated components.
#[derive(Debug, Clone)]
pub struct TruncatedMixture {
    pub parts: Vec<Truncated<GaussianComponent>>,
    pub weights: Vec<f64>,
}

impl Density1d for TruncatedMixture {
    fn pdf(&self, x: f64) -> f64 {
        self.parts.iter().zip(&self.weights).map(|(p, a)| a * p.pdf(x)).sum()
    }

    fn support(&self) -> (f64, f64) {
        self.parts
            .iter()
            .map(Density1d::support)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.parts.iter().flat_map(Density1d::breakpoints).collect()
    }
}

impl<T: Density1d + ?Sized> Density1d for &T {
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}
