//! Projections onto simple convex sets, Dykstra's alternating projections for
//! their intersections, and a projected-gradient solver for convex quadratics.

mod qp;
mod sets;

pub use qp::{solve_qp, solve_qp_report, SolveReport};
pub use sets::{ConstraintSet, Primitive};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200_000;

/// Euclidean projection of `v` onto the ball `‖z - center‖ <= radius`.
pub fn project_norm_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    debug_assert!(radius > 0.0);
    let mut z = v.to_vec();
    Primitive::NormBall { center: center.to_vec(), radius }.project(&mut z);
    z
}

#[derive(Debug, Clone)]
enum Increment {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Dykstra iteration state; `run` returns the number of sweeps used.
struct Dykstra<'a> {
    set: &'a ConstraintSet,
    increments: Vec<Increment>,
}

impl<'a> Dykstra<'a> {
    fn new(set: &'a ConstraintSet, d: usize) -> Self {
        let increments = set
            .sets
            .iter()
            .map(|p| match p {
                Primitive::HalfSpace { .. } | Primitive::FixedCoordinate { .. } => Increment::Scalar(0.0),
                Primitive::NormBall { .. } | Primitive::Box { .. } => Increment::Vector(vec![0.0; d]),
            })
            .collect();
        Self { set, increments }
    }

    /// One cyclic pass; returns the largest change of any increment.
    fn sweep(&mut self, z: &mut [f64], scratch: &mut [f64]) -> f64 {
        let mut moved = 0.0f64;
        for (p, inc) in self.set.sets.iter().zip(self.increments.iter_mut()) {
            match (p, inc) {
                (Primitive::HalfSpace { normal, offset }, Increment::Scalar(s)) => {
                    // y = z + s·a; z' = P(y); new increment t·a with t >= 0.
                    let (dot_z, nsq) = sets::sparse_dot(normal, z);
                    let dot_y = dot_z + *s * nsq;
                    let t = ((dot_y - offset) / nsq).max(0.0);
                    let shift = *s - t;
                    if shift != 0.0 {
                        for &(i, a) in normal {
                            z[i] += shift * a;
                        }
                    }
                    moved = moved.max(shift.abs() * nsq.sqrt());
                    *s = t;
                }
                (Primitive::FixedCoordinate { index, value }, Increment::Scalar(s)) => {
                    let y = z[*index] + *s;
                    z[*index] = *value;
                    moved = moved.max((y - value - *s).abs());
                    *s = y - value;
                }
                (prim, Increment::Vector(inc)) => {
                    for ((y, zi), pi) in scratch.iter_mut().zip(z.iter()).zip(inc.iter()) {
                        *y = zi + pi;
                    }
                    z.copy_from_slice(scratch);
                    prim.project(z);
                    for ((pi, y), zi) in inc.iter_mut().zip(scratch.iter()).zip(z.iter()) {
                        moved = moved.max((y - zi - *pi).abs());
                        *pi = y - zi;
                    }
                }
                _ => unreachable!("increment kind fixed at construction"),
            }
        }
        moved
    }
}

/// Outcome of an alternating-projection run.
#[derive(Debug, Clone)]
pub(crate) struct ProjectionOutcome {
    pub point: Vec<f64>,
    pub violation: f64,
    pub sweeps: usize,
    pub converged: bool,
}

pub(crate) fn dykstra(v: &[f64], set: &ConstraintSet, tol: f64, max_iter: usize) -> ProjectionOutcome {
    let d = v.len();
    let mut z = v.to_vec();
    match set.sets.len() {
        0 => return ProjectionOutcome { point: z, violation: 0.0, sweeps: 0, converged: true },
        1 => {
            set.sets[0].project(&mut z);
            let violation = set.max_violation(&z);
            return ProjectionOutcome { point: z, violation, sweeps: 1, converged: true };
        }
        _ => {}
    }
    let mut state = Dykstra::new(set, d);
    let mut scratch = vec![0.0; d];
    let mut prev = z.clone();
    let mut violation = f64::INFINITY;
    for sweep in 1..=max_iter {
        prev.copy_from_slice(&z);
        let moved = state.sweep(&mut z, &mut scratch);
        let change = z.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(moved, f64::max);
        if change <= tol {
            violation = set.max_violation(&z);
            if violation <= tol {
                return ProjectionOutcome { point: z, violation, sweeps: sweep, converged: true };
            }
        }
    }
    if violation.is_infinite() {
        violation = set.max_violation(&z);
    }
    ProjectionOutcome { point: z, violation, sweeps: max_iter, converged: false }
}

/// Projection of `v` onto the intersection `C` by Dykstra's algorithm.
///
/// Fails with `NoConvergence` when `max_iter` sweeps leave a constraint
/// violated by more than `tol`, which is what an empty intersection produces.
pub fn project_intersection(v: &[f64], set: &ConstraintSet, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    set.check_dim(v.len())?;
    let out = dykstra(v, set, tol, max_iter);
    if out.converged {
        Ok(out.point)
    } else {
        Err(Error::NoConvergence { iterations: out.sweeps, residual: out.violation })
    }
}
