use super::{anchored, check_tol, group_design, strip_anchor};
use crate::error::{Error, Result};
use crate::types::{Dataset, FittedFn};

/// One linear piece of a derivative: `v0 + slope·(θ - x0)` on `[x0, x1]`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    x0: f64,
    x1: f64,
    v0: f64,
    slope: f64,
}

impl Piece {
    fn at(&self, t: f64) -> f64 {
        self.v0 + self.slope * (t - self.x0)
    }
}

/// Minimizer of a convex function on `[pieces[0].x0, last.x1]` whose
/// (nondecreasing, possibly jumping) derivative is given piecewise.
fn argmin(pieces: &[Piece]) -> f64 {
    let first = pieces[0];
    if first.v0 >= 0.0 {
        return first.x0;
    }
    for p in pieces {
        if p.v0 >= 0.0 {
            // Jump across zero at the left end of this piece.
            return p.x0;
        }
        let end = p.at(p.x1);
        if end >= 0.0 {
            return if p.slope > 0.0 { (p.x0 - p.v0 / p.slope).clamp(p.x0, p.x1) } else { p.x1 };
        }
    }
    pieces[pieces.len() - 1].x1
}

/// Exact L-Lipschitz least squares anchored at `θ(0) = 0`.
///
/// With `F_k(θ)` the best cost of the first `k` knots ending at value `θ`,
/// `F_k = min_{|s| <= c_k} F_{k-1}(θ - s) + w_k(θ - ȳ_k)²`. The derivative of
/// every `F_k` is piecewise linear and is carried forward exactly, so the
/// whole fit costs O(K²) for K distinct covariates.
pub fn fit_lipschitz(data: &Dataset, l: f64, tol: f64) -> Result<FittedFn> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lipschitz constant must be positive, got {l}")));
    }
    check_tol(tol)?;
    let mut g = group_design(data)?;
    strip_anchor(&mut g);
    let k = g.knots.len();
    if k == 0 {
        return anchored(&[], &[]);
    }
    let caps: Vec<f64> = (0..k).map(|i| l * (g.knots[i] - if i == 0 { 0.0 } else { g.knots[i - 1] })).collect();

    let quad = |i: usize, p: &mut Piece| {
        p.v0 += 2.0 * g.weights[i] * (p.x0 - g.means[i]);
        p.slope += 2.0 * g.weights[i];
    };
    let mut pieces = vec![Piece { x0: -caps[0], x1: caps[0], v0: 0.0, slope: 0.0 }];
    quad(0, &mut pieces[0]);
    let mut minima = Vec::with_capacity(k);
    for i in 1..k {
        let m = argmin(&pieces);
        minima.push(m);
        let c = caps[i];
        let mut next = Vec::with_capacity(pieces.len() + 2);
        for p in &pieces {
            if p.x1 <= m {
                next.push(Piece { x0: p.x0 - c, x1: p.x1 - c, ..*p });
            } else if p.x0 >= m {
                next.push(Piece { x0: p.x0 + c, x1: p.x1 + c, ..*p });
            } else {
                next.push(Piece { x0: p.x0 - c, x1: m - c, ..*p });
                next.push(Piece { x0: m + c, x1: p.x1 + c, v0: p.at(m), slope: p.slope });
            }
        }
        // Flat stretch where the previous minimum is reachable.
        let at = next.partition_point(|p| p.x1 <= m - c);
        next.insert(at, Piece { x0: m - c, x1: m + c, v0: 0.0, slope: 0.0 });
        next.retain(|p| p.x1 > p.x0);
        for p in next.iter_mut() {
            quad(i, p);
        }
        pieces = next;
    }
    let mut values = vec![0.0; k];
    values[k - 1] = argmin(&pieces);
    for i in (0..k - 1).rev() {
        values[i] = minima[i].clamp(values[i + 1] - caps[i + 1], values[i + 1] + caps[i + 1]);
    }
    anchored(&g.knots, &values)
}
