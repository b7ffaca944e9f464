//! Pass/fail checks applied to sweep tables (`--check` mode).

use crate::config::{ClassSpec, Experiment, SweepConfig};
use crate::error::Result;
use crate::fit::fit_rate_exponent;
use crate::table::Table;

pub const MIN_R2: f64 = 0.98;
pub const MIN_COVERAGE: f64 = 0.95;
pub const HYPERPLANE_SLOPE_TOL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Expected log-log slope of the in-sample error and its tolerance.
pub fn expected_slope(class: ClassSpec) -> (f64, f64) {
    match class {
        ClassSpec::Linear { .. } => (-1.0, 0.15),
        ClassSpec::Lipschitz { .. } => (-2.0 / 3.0, 0.15),
        ClassSpec::ConvexLipschitz => (-0.8, 0.2),
        ClassSpec::Holder { alpha } => (-2.0 * alpha / (2.0 * alpha + 1.0), 0.2),
    }
}

fn distinct(values: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = vec![];
    for v in values {
        if !out.iter().any(|o| o.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

fn slope_check(name: String, rows: &Table, y: &str, target: f64, tol: f64, min_r2: Option<f64>) -> CheckOutcome {
    match fit_rate_exponent(rows, "n", y) {
        Ok(f) => {
            let ok = (f.slope - target).abs() <= tol && min_r2.map_or(true, |m| f.r2 >= m);
            let r2_req = min_r2.map(|m| format!(", r2 >= {m}")).unwrap_or_default();
            CheckOutcome::new(name, ok, format!("slope {:.4} (target {target:.4} ± {tol}), r2 {:.4}{r2_req}", f.slope, f.r2))
        }
        Err(e) => CheckOutcome::new(name, false, e.to_string()),
    }
}

pub fn check_table(cfg: &SweepConfig, table: &Table) -> Result<Vec<CheckOutcome>> {
    let cap = cfg.constants.ratio_cap;
    let mut out = vec![];
    match cfg.experiment {
        Experiment::RateSweep => {
            let class = cfg.class()?;
            let (target, tol) = expected_slope(class);
            for g in distinct(table.column("gamma")?) {
                let rows = table.filter_eq("gamma", g)?;
                out.push(slope_check(format!("rate slope at gamma={g}"), &rows, "median_error", target, tol, Some(MIN_R2)));
            }
        }
        Experiment::HeterogeneitySweep => {
            let gamma = table.column("gamma")?;
            let ratio = table.column("ratio")?;
            let thr = table.column("at_threshold")?;
            let zero: Vec<f64> = ratio.iter().zip(&gamma).filter(|(_, g)| **g == 0.0).map(|(r, _)| *r).collect();
            if !zero.is_empty() {
                let ok = zero.iter().all(|&r| r == 1.0);
                out.push(CheckOutcome::new("ratio at gamma=0", ok, format!("ratios {zero:?} (expected exactly 1)")));
            }
            let at: Vec<f64> = ratio.iter().zip(&thr).filter(|(_, t)| **t == 1.0).map(|(r, _)| *r).collect();
            if !at.is_empty() {
                let worst = at.iter().copied().fold(f64::NEG_INFINITY, |m, r| if r.is_nan() { f64::NAN } else { m.max(r) });
                let ok = at.iter().all(|&r| r <= cap);
                out.push(CheckOutcome::new("ratio at gamma threshold", ok, format!("max ratio {worst:.4} (cap {cap})")));
            }
        }
        Experiment::HyperplaneSweep => {
            let threshold = cfg.zeta / cfg.hyperplane.nu;
            for dw in distinct(table.column("delta_w")?) {
                let rows = table.filter_eq("delta_w", dw)?;
                out.push(slope_check(format!("excess risk slope at delta_w={dw}"), &rows, "excess_risk_median", -1.0, HYPERPLANE_SLOPE_TOL, None));
                if dw <= threshold {
                    let ratio = rows.column("ratio")?;
                    let worst = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let ok = ratio.iter().all(|&r| r <= cap);
                    out.push(CheckOutcome::new(format!("mixture/single ratio at delta_w={dw}"), ok, format!("max ratio {worst:.4} (cap {cap})")));
                }
                let cov: Vec<f64> = rows.column("coverage")?.into_iter().filter(|c| !c.is_nan()).collect();
                if !cov.is_empty() {
                    let worst = cov.iter().copied().fold(f64::INFINITY, f64::min);
                    out.push(CheckOutcome::new(
                        format!("bound coverage at delta_w={dw}"),
                        worst >= MIN_COVERAGE,
                        format!("min coverage {worst:.4} (need {MIN_COVERAGE})"),
                    ));
                }
            }
        }
        Experiment::ComplexitySweep => {
            let l2 = table.filter_text("kind", "rademacher_l2")?;
            if !l2.is_empty() {
                let (v, se, b) = (l2.column("value")?, l2.column("std_error")?, l2.column("reference")?);
                let ok = (0..v.len()).all(|i| v[i] <= b[i] + 3.0 * se[i]);
                out.push(CheckOutcome::new("rademacher_l2 within bound", ok, format!("{} rows", v.len())));
            }
        }
    }
    Ok(out)
}
