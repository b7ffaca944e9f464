use crate::error::{Error, Result};

/// One closed convex set with a closed-form projection.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    NormBall { center: Vec<f64>, radius: f64 },
    /// `{z : <normal, z> <= offset}`; the normal is stored sparsely.
    HalfSpace { normal: Vec<(usize, f64)>, offset: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    FixedCoordinate { index: usize, value: f64 },
}

impl Primitive {
    pub fn norm_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Primitive::NormBall { center, radius })
    }

    pub fn half_space(normal: &[f64], offset: f64) -> Result<Self> {
        let sparse = normal.iter().copied().enumerate().filter(|&(_, a)| a != 0.0).collect();
        Self::half_space_sparse(sparse, offset)
    }

    pub fn half_space_sparse(normal: Vec<(usize, f64)>, offset: f64) -> Result<Self> {
        if normal.iter().all(|&(_, a)| a == 0.0) {
            return Err(Error::InvalidParameter("half-space normal is zero".into()));
        }
        Ok(Primitive::HalfSpace { normal, offset })
    }

    pub fn box_set(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidParameter("box needs lower <= upper".into()));
        }
        Ok(Primitive::Box { lower, upper })
    }

    pub fn fixed(index: usize, value: f64) -> Self {
        Primitive::FixedCoordinate { index, value }
    }

    /// Largest coordinate index touched, plus one.
    fn extent(&self) -> usize {
        match self {
            Primitive::NormBall { center, .. } => center.len(),
            Primitive::HalfSpace { normal, .. } => normal.iter().map(|&(i, _)| i + 1).max().unwrap_or(0),
            Primitive::Box { lower, .. } => lower.len(),
            Primitive::FixedCoordinate { index, .. } => index + 1,
        }
    }

    fn exact_dim(&self) -> Option<usize> {
        match self {
            Primitive::NormBall { center, .. } => Some(center.len()),
            Primitive::Box { lower, .. } => Some(lower.len()),
            _ => None,
        }
    }

    /// Euclidean distance-like violation of the constraint at `z`.
    pub fn violation(&self, z: &[f64]) -> f64 {
        match self {
            Primitive::NormBall { center, radius } => (dist(z, center) - radius).max(0.0),
            Primitive::HalfSpace { normal, offset } => {
                let (dot, nsq) = sparse_dot(normal, z);
                ((dot - offset) / nsq.sqrt()).max(0.0)
            }
            Primitive::Box { lower, upper } => z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
                .fold(0.0, f64::max),
            Primitive::FixedCoordinate { index, value } => (z[*index] - value).abs(),
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.violation(z) <= tol
    }

    /// Projects `z` onto the set in place.
    pub fn project(&self, z: &mut [f64]) {
        match self {
            Primitive::NormBall { center, radius } => {
                let r = dist(z, center);
                if r > *radius {
                    let s = radius / r;
                    for (v, c) in z.iter_mut().zip(center) {
                        *v = c + (*v - c) * s;
                    }
                }
            }
            Primitive::HalfSpace { normal, offset } => {
                let (dot, nsq) = sparse_dot(normal, z);
                if dot > *offset {
                    let t = (dot - offset) / nsq;
                    for &(i, a) in normal {
                        z[i] -= t * a;
                    }
                }
            }
            Primitive::Box { lower, upper } => {
                for (v, (l, u)) in z.iter_mut().zip(lower.iter().zip(upper)) {
                    *v = v.clamp(*l, *u);
                }
            }
            Primitive::FixedCoordinate { index, value } => z[*index] = *value,
        }
    }
}

pub(crate) fn sparse_dot(normal: &[(usize, f64)], z: &[f64]) -> (f64, f64) {
    normal.iter().fold((0.0, 0.0), |(d, n), &(i, a)| (d + a * z[i], n + a * a))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Intersection of primitive sets. An empty list is all of `R^d`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    pub sets: Vec<Primitive>,
}

impl ConstraintSet {
    pub fn new(sets: Vec<Primitive>) -> Self {
        Self { sets }
    }

    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: Primitive) -> &mut Self {
        self.sets.push(p);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Rejects primitives that do not fit in dimension `d`.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        for s in &self.sets {
            if let Some(k) = s.exact_dim() {
                if k != d {
                    return Err(Error::DimensionMismatch { expected: d, found: k });
                }
            } else if s.extent() > d {
                return Err(Error::DimensionMismatch { expected: d, found: s.extent() });
            }
        }
        Ok(())
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        self.sets.iter().map(|s| s.violation(z)).fold(0.0, f64::max)
    }

    /// Twice the largest ball radius, if any ball is present.
    pub(crate) fn diameter_hint(&self) -> Option<f64> {
        self.sets
            .iter()
            .filter_map(|s| match s {
                Primitive::NormBall { radius, .. } => Some(2.0 * radius),
                _ => None,
            })
            .reduce(f64::min)
    }
}
