//! Sweep configuration, read from TOML.
//!
//! ```toml
//! experiment = "rate_sweep"
//! n_grid = [64, 128, 256]
//! replicates = 50
//! seed = 7
//! zeta = 1.0
//!
//! [class_tag]
//! kind = "lipschitz"
//! l = 1.0
//! ```

use std::path::Path;

use hetlearn_core::rates::ClassTag;
use hetlearn_core::GaussianComponent;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RateSweep,
    HeterogeneitySweep,
    HyperplaneSweep,
    ComplexitySweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RateSweep => "rate_sweep",
            Self::HeterogeneitySweep => "heterogeneity_sweep",
            Self::HyperplaneSweep => "hyperplane_sweep",
            Self::ComplexitySweep => "complexity_sweep",
        }
    }
}

/// Function class, as written in the config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    Linear { d: usize },
    Lipschitz { l: f64 },
    ConvexLipschitz,
    Holder { alpha: f64 },
}

impl From<ClassSpec> for ClassTag {
    fn from(c: ClassSpec) -> Self {
        match c {
            ClassSpec::Linear { d } => ClassTag::Linear { d },
            ClassSpec::Lipschitz { l } => ClassTag::Lipschitz { l },
            ClassSpec::ConvexLipschitz => ClassTag::ConvexLipschitz,
            ClassSpec::Holder { alpha } => ClassTag::Holder { alpha },
        }
    }
}

impl ClassSpec {
    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Linear { .. })
    }
}

/// Covariate mixture for the rate and heterogeneity sweeps. Unset fields
/// take class-dependent defaults: `N(0, 1)` per coordinate for the linear
/// class, `N(0.5, 0.25²)` truncated to `[0, 1]` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub base_mean: Option<f64>,
    pub base_scale: Option<f64>,
    pub truncation: Option<[f64; 2]>,
    /// Largest mean gap tried when calibrating γ.
    pub max_gap: Option<f64>,
    #[serde(default = "default_calibration_tol")]
    pub calibration_tol: f64,
    /// Add a row at the class threshold `γ(n)` for every n.
    #[serde(default)]
    pub gamma_at_threshold: bool,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            base_mean: None,
            base_scale: None,
            truncation: None,
            max_gap: None,
            calibration_tol: default_calibration_tol(),
            gamma_at_threshold: false,
        }
    }
}

/// Scale of the truncated base component for non-parametric classes.
pub const DEFAULT_SCALE: f64 = 0.25;

fn default_calibration_tol() -> f64 {
    1e-4
}

/// Resolved covariate model: base component and truncation box.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    pub base: GaussianComponent,
    pub truncation: Option<(f64, f64)>,
    pub max_gap: f64,
    pub calibration_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneSpec {
    #[serde(default = "default_hyperplane_d")]
    pub d: usize,
    #[serde(default = "one")]
    pub nu: f64,
    #[serde(default = "default_fail_prob")]
    pub fail_prob: f64,
}

impl Default for HyperplaneSpec {
    fn default() -> Self {
        Self { d: default_hyperplane_d(), nu: 1.0, fail_prob: default_fail_prob() }
    }
}

fn default_hyperplane_d() -> usize {
    4
}

fn default_fail_prob() -> f64 {
    0.05
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "default_cnoise")]
    pub cnoise: f64,
    #[serde(default = "default_cbias")]
    pub cbias: f64,
    /// Optimality tolerance handed to the class estimators.
    #[serde(default = "default_fit_tol")]
    pub fit_tol: f64,
    /// Monte Carlo draws per complexity estimate.
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Localization radius for the Gaussian complexity rows.
    #[serde(default = "one")]
    pub delta: f64,
    /// Ratio cap used by `--check` on heterogeneity and hyperplane sweeps.
    #[serde(default = "default_ratio_cap")]
    pub ratio_cap: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            cnoise: default_cnoise(),
            cbias: default_cbias(),
            fit_tol: default_fit_tol(),
            draws: default_draws(),
            delta: 1.0,
            ratio_cap: default_ratio_cap(),
        }
    }
}

fn default_cnoise() -> f64 {
    4.0
}

fn default_cbias() -> f64 {
    16.0
}

fn default_fit_tol() -> f64 {
    1e-10
}

fn default_draws() -> usize {
    200
}

fn default_ratio_cap() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    /// Required by every experiment except `hyperplane_sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_tag: Option<ClassSpec>,
    pub n_grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_w_grid: Option<Vec<f64>>,
    pub replicates: usize,
    pub seed: u64,
    pub zeta: f64,
    #[serde(default)]
    pub mixture: MixtureSpec,
    #[serde(default)]
    pub hyperplane: HyperplaneSpec,
    #[serde(default)]
    pub constants: Constants,
}

impl SweepConfig {
    /// Parses and validates a config document. `path` only decorates errors.
    pub fn from_toml_str(src: &str, path: Option<&Path>) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(src).map_err(|e| parse_error(src, path, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::config("n_grid", "must not be empty"));
        }
        if self.n_grid[0] == 0 {
            return Err(HarnessError::config("n_grid", "sample sizes must be positive"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::config("n_grid", "must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(HarnessError::config("replicates", "must be at least 1"));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(HarnessError::config("zeta", format!("must be nonnegative and finite, got {}", self.zeta)));
        }
        if self.class_tag.is_none() && self.experiment != Experiment::HyperplaneSweep {
            return Err(HarnessError::config("class_tag", format!("required for {}", self.experiment.name())));
        }
        match self.class_tag.unwrap_or(ClassSpec::ConvexLipschitz) {
            ClassSpec::Linear { d } if d == 0 => return Err(HarnessError::config("class_tag", "d must be positive")),
            ClassSpec::Lipschitz { l } if !(l > 0.0 && l.is_finite()) => {
                return Err(HarnessError::config("class_tag", format!("l must be positive, got {l}")))
            }
            ClassSpec::Holder { alpha } if !(alpha > 0.5 && alpha.is_finite()) => {
                return Err(HarnessError::config("class_tag", format!("alpha must exceed 1/2, got {alpha}")))
            }
            _ => {}
        }
        if let Some(g) = &self.gamma_grid {
            if let Some(v) = g.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(HarnessError::config("gamma_grid", format!("entries must lie in [0, 1], got {v}")));
            }
        }
        if let Some(g) = &self.delta_w_grid {
            if let Some(v) = g.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(HarnessError::config("delta_w_grid", format!("entries must be nonnegative, got {v}")));
            }
        }
        let m = &self.mixture;
        if let Some(s) = m.base_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(HarnessError::config("mixture", format!("base_scale must be positive, got {s}")));
            }
        }
        if let Some([lo, hi]) = m.truncation {
            if !(lo < hi) {
                return Err(HarnessError::config("mixture", format!("empty truncation [{lo}, {hi}]")));
            }
        }
        if !(m.calibration_tol > 0.0) {
            return Err(HarnessError::config("mixture", "calibration_tol must be positive"));
        }
        let h = &self.hyperplane;
        if h.d == 0 || !(h.nu > 0.0) || !(h.fail_prob > 0.0 && h.fail_prob < 1.0) {
            return Err(HarnessError::config("hyperplane", "need d >= 1, nu > 0 and fail_prob in (0, 1)"));
        }
        let c = &self.constants;
        if !(c.cnoise >= 0.0 && c.cbias >= 0.0 && c.fit_tol > 0.0 && c.delta >= 0.0 && c.ratio_cap > 0.0) || c.draws == 0 {
            return Err(HarnessError::config("constants", "multipliers must be nonnegative, fit_tol, draws and ratio_cap positive"));
        }
        Ok(())
    }

    pub fn class(&self) -> Result<ClassSpec> {
        self.class_tag.ok_or_else(|| HarnessError::config("class_tag", format!("required for {}", self.experiment.name())))
    }

    /// Covariate model after applying the class defaults.
    pub fn covariates(&self) -> Result<Covariates> {
        self.mixture.resolve(self.class()?)
    }
}

impl MixtureSpec {
    /// Fills unset fields with the defaults of `class`.
    pub fn resolve(&self, class: ClassSpec) -> Result<Covariates> {
        let (mean, scale, truncation) = match class {
            ClassSpec::Linear { .. } => (self.base_mean.unwrap_or(0.0), self.base_scale.unwrap_or(1.0), self.truncation),
            _ => (self.base_mean.unwrap_or(0.5), self.base_scale.unwrap_or(DEFAULT_SCALE), Some(self.truncation.unwrap_or([0.0, 1.0]))),
        };
        let d = match class {
            ClassSpec::Linear { d } => d,
            _ => 1,
        };
        let base = GaussianComponent::new(nalgebra::DVector::from_element(d, mean), scale)?;
        Ok(Covariates {
            base,
            truncation: truncation.map(|[lo, hi]| (lo, hi)),
            max_gap: self.max_gap.unwrap_or(if truncation.is_some() { 1.0 } else { 20.0 * scale }),
            calibration_tol: self.calibration_tol,
        })
    }
}

/// Reads and validates a config file.
pub fn read_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    SweepConfig::from_toml_str(&src, Some(path))
}

fn parse_error(src: &str, path: Option<&Path>, e: &toml::de::Error) -> HarnessError {
    let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
    let message = e.message().to_string();
    let field = message.split('`').nth(1).map(str::to_string);
    HarnessError::Parse { path: path.map(Path::to_path_buf), line, field, message }
}
