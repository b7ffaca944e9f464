#![allow(dead_code)]

use nalgebra::DMatrix;

/// Exact Rademacher average over all `2ⁿ` sign vectors of
/// `(scale/n)·norm(Σσᵢxᵢ)`.
pub fn enumerate_rademacher(x: &DMatrix<f64>, scale: f64, norm: fn(&[f64]) -> f64) -> f64 {
    let n = x.nrows();
    let mut vals: Vec<f64> = (0u32..1 << n)
        .map(|mask| {
            let s: Vec<f64> = (0..x.ncols())
                .map(|k| (0..n).map(|i| if mask >> i & 1 == 1 { x[(i, k)] } else { -x[(i, k)] }).sum())
                .collect();
            scale / n as f64 * norm(&s)
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.iter().sum::<f64>() / vals.len() as f64
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Maximum of `(1/n)|⟨u, g⟩|` over `{g : g(0) = 0, L-Lipschitz on x, ‖g‖_n ≤ δ}`
/// by grid search, refined around the incumbent down to step 1e-5.
pub fn grid_lipschitz_sup(x: &[f64], l: f64, delta: f64, u: &[f64]) -> f64 {
    let n = x.len();
    let radius = delta * (n as f64).sqrt();
    let feasible = |g: &[f64]| {
        let mut prev = (0.0, 0.0);
        for i in 0..n {
            if (g[i] - prev.1).abs() > l * (x[i] - prev.0) + 1e-12 {
                return false;
            }
            prev = (x[i], g[i]);
        }
        g.iter().map(|v| v * v).sum::<f64>() <= radius * radius + 1e-12
    };
    let value = |g: &[f64]| g.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().abs() / n as f64;
    let mut center = vec![0.0; n];
    let mut half = radius.min(l);
    let mut best = 0.0;
    for step in [1e-2, 1e-3, 1e-4, 1e-5] {
        let k = (half / step).ceil() as i64;
        let mut idx = vec![-k; n];
        let mut next = center.clone();
        'grid: loop {
            let g: Vec<f64> = (0..n).map(|i| center[i] + idx[i] as f64 * step).collect();
            if feasible(&g) {
                let v = value(&g);
                if v > best {
                    best = v;
                    next = g;
                }
            }
            for i in 0..n {
                idx[i] += 1;
                if idx[i] <= k {
                    continue 'grid;
                }
                idx[i] = -k;
            }
            break;
        }
        center = next;
        half = 3.0 * step;
    }
    best
}

/// `½∫|p - q|` for two unit-variance normals by the composite trapezoid
/// rule on [-12, 14] with the kink at the midpoint as a grid node.
pub fn tv_unit_normals_trapezoid(mu1: f64, mu2: f64, steps: usize) -> f64 {
    let pdf = |x: f64, m: f64| (-(x - m) * (x - m) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mid = 0.5 * (mu1 + mu2);
    let (lo, hi) = (mid - 13.0, mid + 13.0);
    let h = (hi - lo) / steps as f64;
    let f = |x: f64| (pdf(x, mu1) - pdf(x, mu2)).abs();
    let mut s = 0.5 * (f(lo) + f(hi));
    for k in 1..steps {
        s += f(lo + k as f64 * h);
    }
    0.5 * s * h
}

/// Prints one PASS/FAIL line for a criterion and returns whether it passed.
pub fn report(id: u32, name: &str, parts: &[(bool, String)]) -> bool {
    let passed = parts.iter().all(|(ok, _)| *ok);
    let detail: Vec<String> = parts.iter().map(|(ok, d)| if *ok { d.clone() } else { format!("[failed] {d}") }).collect();
    println!("{} criterion {id} ({name}): {}", if passed { "PASS" } else { "FAIL" }, detail.join("; "));
    passed
}
