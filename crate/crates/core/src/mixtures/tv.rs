//! Total-variation distance between one-dimensional densities.

use super::density::{std_normal_cdf, Density1d};
use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-8;
const MAX_EVALUATIONS: usize = 20_000_000;
const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: u32 = 60;

/// Integrand values: (|p - q|, p + q).
type Pair = (f64, f64);

struct Panel {
    a: f64,
    b: f64,
    fa: Pair,
    fm: Pair,
    fb: Pair,
    whole: Pair,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: Pair, fm: Pair, fb: Pair) -> Pair {
    let h = (b - a) / 6.0;
    (h * (fa.0 + 4.0 * fm.0 + fb.0), h * (fa.1 + 4.0 * fm.1 + fb.1))
}

/// `½∫|p - q|` by adaptive Simpson quadrature.
///
/// `|p - q|` and `p + q` are integrated on the same nodes and the result is
/// their ratio, so identical densities give exactly 0 and disjoint ones
/// exactly 1 regardless of truncation of the tails.
pub fn tv_distance_1d<P: Density1d, Q: Density1d>(p: &P, q: &Q, abs_tol: f64) -> Result<f64> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("abs_tol must be positive, got {abs_tol}")));
    }
    let (pa, pb) = p.support();
    let (qa, qb) = q.support();
    let (lo, hi) = (pa.min(qa), pb.max(qb));
    let mut cuts: Vec<f64> = p.breakpoints().into_iter().chain(q.breakpoints()).filter(|&c| c > lo && c < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let f = |x: f64| {
        let (u, v) = (p.pdf(x), q.pdf(x));
        ((u - v).abs(), u + v)
    };
    let width = hi - lo;
    let mut evals = 0usize;
    let mut stack = Vec::new();
    for seg in cuts.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let panels = ((INITIAL_PANELS as f64 * (s1 - s0) / width).ceil() as usize).max(1);
        let h = (s1 - s0) / panels as f64;
        for k in 0..panels {
            let a = if k == 0 { s0 } else { s0 + k as f64 * h };
            let b = if k + 1 == panels { s1 } else { s0 + (k + 1) as f64 * h };
            // Segment ends are sampled just inside so a jump at a breakpoint
            // is seen from the correct side.
            let nudge = 1e-14 * (s1 - s0);
            let fa = if k == 0 { f(a + nudge) } else { f(a) };
            let fb = if k + 1 == panels { f(b - nudge) } else { f(b) };
            let fm = f(0.5 * (a + b));
            evals += 3;
            stack.push(Panel { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb), tol: abs_tol * (b - a) / width, depth: 0 });
        }
    }

    let (mut abs_sum, mut tot_sum) = (0.0, 0.0);
    while let Some(pn) = stack.pop() {
        let m = 0.5 * (pn.a + pn.b);
        let (lm, rm) = (0.5 * (pn.a + m), 0.5 * (m + pn.b));
        let (flm, frm) = (f(lm), f(rm));
        evals += 2;
        if evals > MAX_EVALUATIONS {
            return Err(Error::QuadratureFailure { abs_tol, evaluations: evals });
        }
        let left = simpson(pn.a, m, pn.fa, flm, pn.fm);
        let right = simpson(m, pn.b, pn.fm, frm, pn.fb);
        let refined = (left.0 + right.0, left.1 + right.1);
        let err = (refined.0 - pn.whole.0).abs().max((refined.1 - pn.whole.1).abs());
        if err <= 15.0 * pn.tol || pn.b - pn.a < 1e-13 * width.max(1.0) {
            abs_sum += refined.0 + (refined.0 - pn.whole.0) / 15.0;
            tot_sum += refined.1 + (refined.1 - pn.whole.1) / 15.0;
            continue;
        }
        if pn.depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { abs_tol, evaluations: evals });
        }
        let tol = 0.5 * pn.tol;
        let depth = pn.depth + 1;
        stack.push(Panel { a: pn.a, b: m, fa: pn.fa, fm: flm, fb: pn.fm, whole: left, tol, depth });
        stack.push(Panel { a: m, b: pn.b, fa: pn.fm, fm: frm, fb: pn.fb, whole: right, tol, depth });
    }
    if !(tot_sum > 0.0) {
        return Err(Error::InvalidParameter("densities integrate to zero on their support".into()));
    }
    Ok((abs_sum.max(0.0) / tot_sum).clamp(0.0, 1.0))
}

/// Closed form `2Φ(|Δμ| / 2σ) - 1` for two Gaussians with one common scale.
pub fn tv_gaussian_equal_scale(mu1: f64, mu2: f64, scale: f64) -> f64 {
    2.0 * std_normal_cdf((mu1 - mu2).abs() / (2.0 * scale)) - 1.0
}
