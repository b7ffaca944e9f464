use crate::error::{HarnessError, Result};
use crate::table::Table;

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

pub fn fit_rate_exponent(rows: &Table, x_col: &str, y_col: &str) -> Result<RateFit> {
    let xs = rows.column(x_col)?;
    let ys = rows.column(y_col)?;
    fit_log_log(&xs, &ys, x_col, y_col)
}

pub fn fit_log_log(xs: &[f64], ys: &[f64], x_name: &str, y_name: &str) -> Result<RateFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(HarnessError::TooFewPoints(n));
    }
    for (name, col) in [(x_name, xs), (y_name, ys)] {
        if let Some(&v) = col.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(HarnessError::NonPositiveValue { column: name.to_string(), value: v });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r2, points: n })
}
