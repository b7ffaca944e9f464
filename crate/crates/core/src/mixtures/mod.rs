//! Sampling from Gaussian mixtures and mixtures of hyperplanes, and their
//! heterogeneity: TV radius, pairwise diameter, `Δ_w` and the Pinsker bound.

mod density;
mod heterogeneity;
mod sampling;
mod tv;

pub use density::{truncated_mass, Density1d, Truncated, TruncatedMixture};
pub use heterogeneity::{
    calibrate_gap, conditional_kl_mc, delta_w, expected_conditional_kl, gamma_radius, hyperplane_gamma, pair_gamma,
    pinsker_gamma_bound, two_component_mixture, HeterogeneityMethod, HeterogeneityReport, DEFAULT_MC_BUDGET,
};
pub use sampling::{sample_covariates, sample_covariates_truncated, sample_hyperplane_data};
pub use tv::{tv_distance_1d, tv_gaussian_equal_scale, DEFAULT_ABS_TOL};

pub(crate) use sampling::categorical;
