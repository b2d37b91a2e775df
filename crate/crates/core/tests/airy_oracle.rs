use multicritical::airy_oracle::fredholm::{airy_kernel, det_airy, tw_moments, MIN_NODES};
use multicritical::airy_oracle::{airy_ai, fredholm_det_airy};
use multicritical::painleve::hastings_mcleod;
use multicritical::quadrature::composite_rule;
use multicritical::Error;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

#[test]
fn values_at_zero_from_gamma() {
    let a = airy_ai(0.0);
    let ai0 = 1.0 / (3f64.powf(2.0 / 3.0) * gamma(2.0 / 3.0));
    let aip0 = -1.0 / (3f64.powf(1.0 / 3.0) * gamma(1.0 / 3.0));
    assert!((a.ai - ai0).abs() < 1e-15);
    assert!((a.ai_prime - aip0).abs() < 1e-15);
}

#[test]
fn integral_over_half_line_is_one_third() {
    let edges: Vec<f64> = (0..=120).map(|i| i as f64 * 0.25).collect();
    let (x, w) = composite_rule::<f64>(&edges, 12);
    let total: f64 = x.iter().zip(&w).map(|(&x, &w)| w * airy_ai(x).ai).sum();
    assert!((total - 1.0 / 3.0).abs() < 1e-13, "{total}");
}

proptest! {
    // Ai'' = x Ai by central differences of Ai', on both sides of the series/asymptotic switch
    #[test]
    fn airy_equation(x in -12.0f64..12.0) {
        let h = 1e-5;
        let d2 = (airy_ai(x + h).ai_prime - airy_ai(x - h).ai_prime) / (2.0 * h);
        let rhs = x * airy_ai(x).ai;
        prop_assert!((d2 - rhs).abs() < 1e-8 * (1.0 + rhs.abs()), "x={} {} vs {}", x, d2, rhs);
    }

    #[test]
    fn kernel_is_symmetric(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assert!((airy_kernel(x, y) - airy_kernel(y, x)).abs() < 1e-14);
    }
}

#[test]
fn kernel_diagonal_limit() {
    // K(x, x) = Ai'(x)^2 - x Ai(x)^2
    for x in [-3.0, -0.5, 0.0, 1.2, 4.0] {
        let a = airy_ai(x);
        let diag = a.ai_prime * a.ai_prime - x * a.ai * a.ai;
        assert!((airy_kernel(x, x) - diag).abs() < 1e-12, "x={x}");
        assert!((airy_kernel(x, x + 1e-7) - diag).abs() < 1e-6);
    }
}

#[test]
fn determinant_agrees_with_painleve_route() {
    // log F2(s) = -∫_s^∞ (x - s) q(x)^2 dx with the Hastings-McLeod q
    let hm = hastings_mcleod(-12.0, 8.0, 400).unwrap();
    for s in [-6.0, -4.0, -2.5, -1.0, 0.0, 1.0, 3.0] {
        let f = fredholm_det_airy(s, 60).unwrap();
        let g = hm.tw_logcdf(s).unwrap().exp();
        assert!((f.f2 - g).abs() < 1e-9, "s={s}: {} vs {g}", f.f2);
        assert!(f.self_error < 1e-10);
    }
}

#[test]
fn determinant_is_a_distribution_function() {
    let mut prev = 0.0;
    for i in 0..=40 {
        let s = -8.0 + 0.3 * i as f64;
        let f = det_airy(s, 40).unwrap();
        // rounding leaves |F2| at the 1e-16 level where the true value underflows
        assert!((-1e-14..=1.0 + 1e-14).contains(&f));
        assert!(f >= prev - 1e-14, "not monotone at {s}");
        prev = f;
    }
    assert!(det_airy(-12.0, 60).unwrap().abs() < 1e-14);
}

#[test]
fn too_few_nodes() {
    assert!(matches!(det_airy(0.0, MIN_NODES - 1), Err(Error::NodeCountTooSmall { .. })));
}

#[test]
fn moments_are_stable_under_node_doubling() {
    let (m1, v1) = tw_moments(-10.0, 6.0, 48, 60).unwrap();
    let (m2, v2) = tw_moments(-10.0, 6.0, 48, 120).unwrap();
    assert!((m1 - m2).abs() < 1e-10 && (v1 - v2).abs() < 1e-10);
    // mean and variance from the Painlevé route, ∫ σ q-density, as an independent check
    let hm = hastings_mcleod(-12.0, 8.0, 400).unwrap();
    let edges: Vec<f64> = (0..=76).map(|i| -11.0 + 0.25 * i as f64).collect();
    let (x, w) = composite_rule::<f64>(&edges, 10);
    let f: Vec<f64> = x.iter().map(|&s| hm.tw_logcdf(s).unwrap().exp()).collect();
    // ∫ σ dF = [σF] - ∫F on [a, b]
    let (a, b) = (edges[0], *edges.last().unwrap());
    let (fa, fb) = (hm.tw_logcdf(a).unwrap().exp(), hm.tw_logcdf(b).unwrap().exp());
    let i0: f64 = w.iter().zip(&f).map(|(w, f)| w * f).sum();
    let i1: f64 = w.iter().zip(&f).zip(&x).map(|((w, f), x)| w * f * x).sum();
    let mean = (b * fb - a * fa - i0) / (fb - fa);
    let var = (b * b * fb - a * a * fa - 2.0 * i1) / (fb - fa) - mean * mean;
    assert!((mean - m1).abs() < 1e-7, "{mean} vs {m1}");
    assert!((var - v1).abs() < 1e-7, "{var} vs {v1}");
}
