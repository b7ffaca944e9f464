use nalgebra::{DMatrix, DVector};

use super::{anchored, check_tol, group_design, strip_anchor};
use crate::error::{Error, Result};
use crate::types::{Dataset, FittedFn};

/// Suffix sums over knots `k >= i` used to form Gram entries and gradients of
/// the hinge basis in O(1) each.
struct Suffix {
    w: Vec<f64>,
    wt: Vec<f64>,
    wtt: Vec<f64>,
}

impl Suffix {
    fn new(t: &[f64], w: &[f64]) -> Self {
        let k = t.len();
        let mut s = Suffix { w: vec![0.0; k + 1], wt: vec![0.0; k + 1], wtt: vec![0.0; k + 1] };
        for i in (0..k).rev() {
            s.w[i] = s.w[i + 1] + w[i];
            s.wt[i] = s.wt[i + 1] + w[i] * t[i];
            s.wtt[i] = s.wtt[i + 1] + w[i] * t[i] * t[i];
        }
        s
    }
}

/// Convex, 1-Lipschitz least squares anchored at `θ(0) = 0`.
///
/// The fit is written as `θ(x) = -x + Σⱼ βⱼ (x - hⱼ)₊` with hinges `hⱼ` at 0
/// and at every knot but the last. Convexity is `β >= 0` and the slope cap is
/// `Σβ <= 2`; the resulting small quadratic program is solved by a primal
/// active-set method.
pub fn fit_convex_lipschitz(data: &Dataset, tol: f64) -> Result<FittedFn> {
    check_tol(tol)?;
    let mut g = group_design(data)?;
    strip_anchor(&mut g);
    let k = g.knots.len();
    if k == 0 {
        return anchored(&[], &[]);
    }
    let t = &g.knots;
    let w = &g.weights;
    // Residual target after removing the fixed -x part.
    let z: Vec<f64> = (0..k).map(|i| g.means[i] + t[i]).collect();
    let hinge: Vec<f64> = (0..k).map(|j| if j == 0 { 0.0 } else { t[j - 1] }).collect();
    let sfx = Suffix::new(t, w);
    // Hinge j is positive exactly on knots i >= j.
    let gram = |a: usize, b: usize| {
        let s = a.max(b);
        let (ha, hb) = (hinge[a], hinge[b]);
        sfx.wtt[s] - (ha + hb) * sfx.wt[s] + ha * hb * sfx.w[s]
    };
    let wz: Vec<f64> = (0..k).map(|i| w[i] * z[i]).collect();
    let wzt: Vec<f64> = (0..k).map(|i| w[i] * z[i] * t[i]).collect();
    let (mut sz, mut szt) = (vec![0.0; k + 1], vec![0.0; k + 1]);
    for i in (0..k).rev() {
        sz[i] = sz[i + 1] + wz[i];
        szt[i] = szt[i + 1] + wzt[i];
    }
    let rhs: Vec<f64> = (0..k).map(|j| szt[j] - hinge[j] * sz[j]).collect();
    let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let fitted = |beta: &[f64]| -> Vec<f64> {
        // Walk the knots accumulating the slope increments.
        let mut out = vec![0.0; k];
        let (mut slope, mut prev_t, mut val) = (0.0, 0.0, 0.0);
        for i in 0..k {
            slope += beta[i];
            val += slope * (t[i] - prev_t);
            prev_t = t[i];
            out[i] = val;
        }
        out
    };
    // Gradient of ½βᵀGβ - rhsᵀβ for every hinge.
    let gradient = |beta: &[f64]| -> Vec<f64> {
        let f = fitted(beta);
        let (mut sr, mut srt) = (0.0, 0.0);
        let mut grad = vec![0.0; k];
        for j in (0..k).rev() {
            sr += w[j] * f[j];
            srt += w[j] * f[j] * t[j];
            grad[j] = srt - hinge[j] * sr - rhs[j];
        }
        grad
    };

    let cap = 2.0;
    let mut beta = vec![0.0; k];
    let mut free: Vec<usize> = Vec::new();
    let mut sum_active = false;
    let max_iter = 10 * k + 200;
    for _ in 0..max_iter {
        let (cand, lambda) = solve_subproblem(&free, sum_active, cap, &gram, &rhs);
        let sum_beta: f64 = beta.iter().sum();
        let cand_sum: f64 = cand.iter().sum();
        let blocked_bound = cand.iter().any(|&c| c < 0.0);
        let blocked_sum = !sum_active && cand_sum > cap;
        if !blocked_bound && !blocked_sum {
            for (p, &j) in free.iter().enumerate() {
                beta[j] = cand[p];
            }
            let grad = gradient(&beta);
            if sum_active && lambda < -tol * scale {
                sum_active = false;
                continue;
            }
            let lam = if sum_active { lambda.max(0.0) } else { 0.0 };
            let entering = (0..k)
                .filter(|j| !free.contains(j))
                .map(|j| (j, grad[j] + lam))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match entering {
                Some((j, nu)) if nu < -tol * scale => free.push(j),
                _ => {
                    let values: Vec<f64> = fitted(&beta).iter().zip(t).map(|(f, x)| f - x).collect();
                    return anchored(t, &values);
                }
            }
            continue;
        }
        // Step towards the candidate until the first constraint blocks.
        let mut alpha = 1.0;
        let mut block: Option<usize> = None;
        for (p, &j) in free.iter().enumerate() {
            if cand[p] < 0.0 {
                let a = beta[j] / (beta[j] - cand[p]);
                if a < alpha {
                    alpha = a;
                    block = Some(p);
                }
            }
        }
        let mut hits_sum = false;
        if blocked_sum {
            let a = (cap - sum_beta) / (cand_sum - sum_beta);
            if a < alpha {
                alpha = a;
                block = None;
                hits_sum = true;
            }
        }
        for (p, &j) in free.iter().enumerate() {
            beta[j] += alpha * (cand[p] - beta[j]);
        }
        if hits_sum {
            sum_active = true;
        } else if let Some(p) = block {
            beta[free[p]] = 0.0;
            free.remove(p);
        }
        free.retain(|&j| beta[j] > 0.0);
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: f64::NAN })
}

/// Minimizes `½βᵀGβ - rhsᵀβ` over the free hinges (others held at 0),
/// optionally with `Σβ = cap`. Returns the free values and the multiplier of
/// the sum constraint.
fn solve_subproblem<G: Fn(usize, usize) -> f64>(free: &[usize], sum_active: bool, cap: f64, gram: &G, rhs: &[f64]) -> (Vec<f64>, f64) {
    let p = free.len();
    if p == 0 {
        return (vec![], 0.0);
    }
    let g = DMatrix::from_fn(p, p, |a, b| gram(free[a], free[b]));
    let b = DVector::from_fn(p, |a, _| rhs[free[a]]);
    let ones = DVector::from_element(p, 1.0);
    let solve = |v: &DVector<f64>| -> DVector<f64> {
        match g.clone().cholesky() {
            Some(ch) => ch.solve(v),
            None => g.clone().svd(true, true).solve(v, f64::EPSILON).expect("singular vectors computed"),
        }
    };
    let gb = solve(&b);
    if !sum_active {
        return (gb.iter().copied().collect(), 0.0);
    }
    let g1 = solve(&ones);
    let lambda = (gb.sum() - cap) / g1.sum();
    let beta = gb - g1 * lambda;
    (beta.iter().copied().collect(), lambda)
}
