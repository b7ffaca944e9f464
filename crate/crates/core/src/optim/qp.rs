use nalgebra::{DMatrix, DVector};

use super::{dykstra, ConstraintSet};
use crate::error::{Error, Result};

/// Result of [`solve_qp_report`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub objective: f64,
    /// Infinity norm of the gradient mapping `(z - P(z - t∇f(z))) / t`.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every projected step.
    pub objective_trace: Vec<f64>,
}

const POWER_ITERS: usize = 300;
const PROBE_MAX_ITER: usize = 10_000;
const PROBE_TOL: f64 = 1e-4;

fn objective(q: &DMatrix<f64>, c: &[f64], z: &[f64]) -> f64 {
    let zv = DVector::from_column_slice(z);
    0.5 * zv.dot(&(q * &zv)) + c.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
}

/// Largest eigenvalue of a symmetric matrix by power iteration, started from
/// a fixed non-degenerate vector.
fn power_max(q: &DMatrix<f64>) -> f64 {
    let d = q.nrows();
    let mut v = DVector::from_fn(d, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    v /= v.norm();
    for _ in 0..POWER_ITERS {
        let w = q * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    v.dot(&(q * &v))
}

/// Most negative curvature, via power iteration on `shift·I - Q`.
fn min_curvature(q: &DMatrix<f64>, shift: f64) -> f64 {
    let d = q.nrows();
    let shifted = DMatrix::identity(d, d) * shift - q;
    shift - power_max(&shifted)
}

fn check_inputs(q: &DMatrix<f64>, c: &[f64], set: &ConstraintSet) -> Result<f64> {
    let d = c.len();
    if q.nrows() != d || q.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.nrows() });
    }
    set.check_dim(d)?;
    let scale = q.amax().max(1.0);
    for i in 0..d {
        if q[(i, i)] < -1e-12 * scale {
            return Err(Error::NonPsd { curvature: q[(i, i)] });
        }
        for j in 0..i {
            if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter("Q must be symmetric".into()));
            }
        }
    }
    let lmax = power_max(q).max(0.0);
    if d > 1 && lmax > 0.0 {
        let lmin = min_curvature(q, lmax);
        if lmin < -1e-9 * lmax {
            return Err(Error::NonPsd { curvature: lmin });
        }
    }
    Ok(lmax)
}

/// Minimizes `½ zᵀQz + cᵀz` over `C` by projected gradient with step
/// `1/λ_max(Q)`; projections onto `C` use Dykstra's algorithm. Always returns
/// a report; `converged` tells whether `kkt_residual <= tol` was reached.
pub fn solve_qp_report(q: &DMatrix<f64>, c: &[f64], set: &ConstraintSet, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let lmax = check_inputs(q, c, set)?;
    let d = c.len();

    // Feasibility probe from the origin.
    let probe = dykstra(&vec![0.0; d], set, PROBE_TOL * 1e-2, PROBE_MAX_ITER);
    if probe.violation > PROBE_TOL {
        return Err(Error::NoConvergence { iterations: probe.sweeps, residual: probe.violation });
    }

    let cnorm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    // Power iteration may underestimate λ_max slightly; 1% headroom keeps
    // the step inside the monotone regime.
    let step = if lmax > 1e-14 * cnorm.max(1.0) {
        1.0 / (lmax * 1.01)
    } else if cnorm > 0.0 {
        set.diameter_hint().unwrap_or(1.0) / cnorm
    } else {
        1.0
    };
    let inner_tol = (tol * step * 1e-2).max(f64::EPSILON);
    let inner_iter = max_iter.max(1);

    let mut z = probe.point;
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    let mut y = vec![0.0; d];
    for iter in 1..=max_iter {
        let zv = DVector::from_column_slice(&z);
        let grad = q * &zv;
        for i in 0..d {
            y[i] = z[i] - step * (grad[i] + c[i]);
        }
        let next = dykstra(&y, set, inner_tol, inner_iter).point;
        residual = z.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / step;

        let dir = DVector::from_fn(d, |i, _| next[i] - z[i]);
        let dsq = dir.norm_squared();
        if dsq > 0.0 && dir.dot(&(q * &dir)) < -1e-9 * lmax.max(1.0) * dsq {
            return Err(Error::NonPsd { curvature: dir.dot(&(q * &dir)) / dsq });
        }

        if residual <= tol {
            let objective = objective(q, c, &z);
            trace.push(objective);
            return Ok(SolveReport { solution: z, objective, kkt_residual: residual, iterations: iter, converged: true, objective_trace: trace });
        }
        z = next;
        trace.push(objective(q, c, &z));
    }
    let objective = objective(q, c, &z);
    Ok(SolveReport { solution: z, objective, kkt_residual: residual, iterations: max_iter, converged: false, objective_trace: trace })
}

/// [`solve_qp_report`] that fails with `NoConvergence` instead of returning
/// an unconverged report.
pub fn solve_qp(q: &DMatrix<f64>, c: &[f64], set: &ConstraintSet, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let report = solve_qp_report(q, c, set, tol, max_iter)?;
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence { iterations: report.iterations, residual: report.kkt_residual })
    }
}
