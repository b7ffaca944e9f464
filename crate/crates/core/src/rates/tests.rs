use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::rng::derive_stream;

fn eq(a: f64, p: f64, b: f64) -> CriticalEq {
    CriticalEq::new(a, p, b).unwrap()
}

/// Plain arithmetic bisection on `δ² - aδ^p - bδ` from a wide bracket.
fn oracle_root(a: f64, p: f64, b: f64) -> f64 {
    let g = |d: f64| d * d - a * d.powf(p) - b * d;
    let (mut lo, mut hi) = (1e-12, 1e6);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn critical_examples() {
    assert_eq!(solve_critical(&eq(0.2, 1.0, 0.0)).unwrap().delta_star, 0.2);
    let a = 1.0 / 1000f64.sqrt();
    let r = solve_critical(&eq(a, 0.5, 0.0)).unwrap();
    assert_abs_diff_eq!(r.delta_star, 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(r.delta_star, a.powf(2.0 / 3.0), epsilon = 1e-12);
    let oracle = oracle_root(a, 0.5, 0.1);
    assert_abs_diff_eq!(oracle, 0.1755, epsilon = 1e-3);
    let r = solve_critical(&eq(a, 0.5, 0.1)).unwrap();
    assert_abs_diff_eq!(r.delta_star, oracle, epsilon = 1e-12);
    assert_eq!(solve_critical(&eq(0.0, 0.5, 0.3)).unwrap().delta_star, 0.3);
    assert!(matches!(CriticalEq::new(0.0, 0.5, 0.0), Err(Error::Degenerate { .. })));
}

#[test]
fn residual_small_on_random_instances() {
    let mut r = derive_stream(31, 0).rng();
    // Roots stay below 1e100 on this domain, so δ*² is representable.
    for _ in 0..10_000 {
        let a = 10f64.powf(r.random_range(-6.0..1.0));
        let b = if r.random::<f64>() < 0.2 { 0.0 } else { 10f64.powf(r.random_range(-6.0..1.0)) };
        let p = r.random_range(0.01..1.98);
        let res = solve_critical(&eq(a, p, b)).unwrap();
        assert!(res.delta_star > 0.0);
        assert!(res.residual.abs() <= 1e-10 * res.rate.max(1.0), "a={a} p={p} b={b}: {res:?}");
    }
}

#[test]
fn large_exponent_with_large_coefficient() {
    // The initial bracket a + b + 1 is too small here and must grow.
    let r = solve_critical(&eq(100.0, 1.9, 0.0)).unwrap();
    assert_relative_eq!(r.delta_star, 100f64.powf(10.0), max_relative = 1e-12);
    assert!(solve_critical(&eq(1e3, 1.999, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone_in_coefficients(a in 1e-4f64..10.0, b in 0.0f64..2.0, p in 0.05f64..1.95, da in 0.0f64..1.0, db in 0.0f64..1.0) {
        let base = solve_critical(&eq(a, p, b)).unwrap().delta_star;
        prop_assert!(solve_critical(&eq(a + da, p, b)).unwrap().delta_star >= base);
        prop_assert!(solve_critical(&eq(a, p, b + db)).unwrap().delta_star >= base);
    }

    // δ^p falls with p when δ < 1 and rises when δ > 1; the root lies
    // below 1 exactly when a + b <= 1.
    #[test]
    fn monotone_in_exponent(a in 1e-4f64..3.0, b in 0.0f64..2.0, p in 0.05f64..1.9, dp in 0.0f64..0.09) {
        let before = solve_critical(&eq(a, p, b)).unwrap().delta_star;
        let after = solve_critical(&eq(a, p + dp, b)).unwrap().delta_star;
        if a + b <= 1.0 {
            prop_assert!(after <= before * (1.0 + 1e-14), "{before} < {after}");
        } else {
            prop_assert!(after >= before * (1.0 - 1e-14), "{before} > {after}");
        }
    }
}

#[test]
fn class_examples() {
    let r = critical_for_class(ClassTag::Linear { d: 4 }, 1.0, 100, 0.0).unwrap();
    assert_eq!(r.delta_star, 0.2);
    assert_abs_diff_eq!(r.rate, 0.04, epsilon = 1e-15);
    let r = critical_for_class(ClassTag::Lipschitz { l: 1.0 }, 1.0, 1000, 0.0).unwrap();
    assert_abs_diff_eq!(r.rate, 0.01, epsilon = 1e-12);
    assert_eq!(r.class_tag, Some(ClassTag::Lipschitz { l: 1.0 }));
}

#[test]
fn homogeneous_rates_match_orders() {
    let zeta = 1.7;
    for n in [10usize, 1000, 123_456] {
        let nf = n as f64;
        let z2n = zeta * zeta / nf;
        let lin = critical_for_class(ClassTag::Linear { d: 5 }, zeta, n, 0.0).unwrap().rate;
        assert_relative_eq!(lin, z2n * 5.0, max_relative = 1e-12);
        let lip = critical_for_class(ClassTag::Lipschitz { l: 2.5 }, zeta, n, 0.0).unwrap().rate;
        assert_relative_eq!(lip, (2.5 * z2n).powf(2.0 / 3.0), max_relative = 1e-12);
        let cvx = critical_for_class(ClassTag::ConvexLipschitz, zeta, n, 0.0).unwrap().rate;
        assert_relative_eq!(cvx, z2n.powf(0.8), max_relative = 1e-12);
        let hol = critical_for_class(ClassTag::Holder { alpha: 3.0 }, zeta, n, 0.0).unwrap().rate;
        assert_relative_eq!(hol, z2n.powf(6.0 / 7.0), max_relative = 1e-12);
    }
}

#[test]
fn holder_specializations_are_bit_identical() {
    for zeta in [0.3, 1.0, 2.9] {
        for n in [7usize, 64, 1000, 99_999] {
            for gamma in [0.0, 0.01, 0.4] {
                let h1 = critical_for_class(ClassTag::Holder { alpha: 1.0 }, zeta, n, gamma).unwrap();
                let lip = critical_for_class(ClassTag::Lipschitz { l: 1.0 }, zeta, n, gamma).unwrap();
                assert_eq!(h1.delta_star.to_bits(), lip.delta_star.to_bits());
                let h2 = critical_for_class(ClassTag::Holder { alpha: 2.0 }, zeta, n, gamma).unwrap();
                let cvx = critical_for_class(ClassTag::ConvexLipschitz, zeta, n, gamma).unwrap();
                assert_eq!(h2.delta_star.to_bits(), cvx.delta_star.to_bits());
            }
            let t = |c| gamma_threshold(c, zeta, n).unwrap().to_bits();
            assert_eq!(t(ClassTag::Holder { alpha: 1.0 }), t(ClassTag::Lipschitz { l: 1.0 }));
            assert_eq!(t(ClassTag::Holder { alpha: 2.0 }), t(ClassTag::ConvexLipschitz));
        }
    }
}

#[test]
fn threshold_examples() {
    assert_abs_diff_eq!(gamma_threshold(ClassTag::Linear { d: 4 }, 1.0, 100).unwrap(), 0.2, epsilon = 1e-15);
    assert_abs_diff_eq!(gamma_threshold(ClassTag::Lipschitz { l: 1.0 }, 1.0, 1000).unwrap(), 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(gamma_threshold(ClassTag::ConvexLipschitz, 1.0, 100_000).unwrap(), 0.01, epsilon = 1e-12);
    // (L/(ζn))^(1/3) written out directly.
    assert_relative_eq!(gamma_threshold(ClassTag::Lipschitz { l: 3.0 }, 2.0, 500).unwrap(), (3.0f64 / 1000.0).cbrt(), max_relative = 1e-12);
}

#[test]
fn threshold_keeps_rate_within_factor_nine() {
    let classes = [ClassTag::Linear { d: 8 }, ClassTag::Lipschitz { l: 1.0 }, ClassTag::ConvexLipschitz, ClassTag::Holder { alpha: 1.5 }];
    for class in classes {
        for zeta in [0.5, 1.0, 2.0] {
            for n in [16usize, 256, 4096, 1 << 20] {
                let g = gamma_threshold(class, zeta, n).unwrap().min(1.0);
                let at = critical_for_class(class, zeta, n, g).unwrap().rate;
                let base = critical_for_class(class, zeta, n, 0.0).unwrap().rate;
                assert!(at <= 9.0 * base, "{class:?} ζ={zeta} n={n}: {at} vs {base}");
            }
        }
    }
}

#[test]
fn hyperplane_constants() {
    let rho = rho_prime(1, 1000, 0.06).unwrap();
    let l = 100f64.ln();
    assert_abs_diff_eq!(rho, (4.0 * l / 1000.0).sqrt() + 2.0 * l / 3000.0, epsilon = 1e-15);
    assert_abs_diff_eq!(rho, 0.138793, epsilon = 1e-6);
    assert!(rho_prime(1, 10_000, 0.06).unwrap() < rho);
    assert_eq!(rho_prime(1, 10, 6.0).unwrap(), 0.0);
    assert_eq!(sample_requirement(1, 0.06).unwrap(), 28);
    assert_eq!(sample_requirement(1, 5.999_999).unwrap(), 1);
    assert!(sample_requirement(8, 0.05).unwrap() > 2 * sample_requirement(4, 0.05).unwrap());

    let noise_only = hyperplane_error_bound(1.0, 1, 1000, 0.06, 1.0, 0.0, 1.0, 1.0).unwrap();
    let expect = (1.0 + 2.0 * l.sqrt() + 2.0 * l) / ((1.0 - rho) * 1000.0);
    assert_abs_diff_eq!(noise_only, expect, epsilon = 1e-15);
    assert_eq!(hyperplane_error_bound(0.0, 1, 1000, 0.06, 1.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
    let with_bias = hyperplane_error_bound(1.0, 1, 1000, 0.06, 2.0, 0.5, 1.0, 3.0).unwrap();
    assert_abs_diff_eq!(with_bias - noise_only, 3.0 * (4.0 * 0.25 / 1000.0) * (1.0 / 0.06f64).ln(), epsilon = 1e-15);
    assert!(matches!(hyperplane_error_bound(1.0, 4, 20, 0.05, 1.0, 0.0, 1.0, 1.0), Err(Error::SampleTooSmall { .. })));

    assert_eq!(delta_w_threshold(1.0, 1.0).unwrap(), 1.0);
    assert_eq!(delta_w_threshold(2.0, 4.0).unwrap(), 0.5);
    assert!(delta_w_threshold(1.0, 1e300).unwrap() < 1e-299);
}
