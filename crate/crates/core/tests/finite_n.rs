use multicritical::finite_n::{
    build_lax_matrices_and_check, direct_quadrature_oracle, gap_cdf_finite_n, gap_probability_finite_n, gap_ratio,
    gaussian_suite, gram_tolerance, gue_sample_maxeig, stieltjes_recurrence, verify_recurrence_identities,
    BandedMatrix, EmpiricalCdf, Potential, ScalingMap, DEFAULT_PRECISION_BITS,
};
use multicritical::Error;
use proptest::prelude::*;
use statrs::function::erf::erf;

const BITS: u32 = DEFAULT_PRECISION_BITS;

#[test]
fn single_eigenvalue_is_an_error_function() {
    // N = 1: P(λ < y) = (1 + erf(sqrt(α̂) y)) / 2
    for alpha in [0.5, 1.0, 3.0] {
        let pot = Potential::gaussian(alpha);
        for y in [-2.0, -0.7, 0.0, 0.3, 1.0, 2.5] {
            let p = gap_probability_finite_n(&pot, 1, y).unwrap().p;
            let exact = 0.5 * (1.0 + erf(alpha.sqrt() * y));
            assert!((p - exact).abs() < 1e-10, "alpha={alpha} y={y}: {p} vs {exact}");
        }
    }
}

#[test]
fn small_n_matches_direct_integration() {
    let pots = [Potential::gaussian(1.0), "quartic:g2=-1,g4=1,alpha=3".parse().unwrap()];
    for pot in &pots {
        for n in 1..=3 {
            for y in [-0.5, 0.5, 1.5] {
                let p = gap_probability_finite_n(pot, n, y).unwrap().p;
                let d = direct_quadrature_oracle(pot, n, y).unwrap();
                assert!((p - d).abs() < 1e-8, "{pot} N={n} y={y}: {p} vs {d}");
            }
        }
    }
    assert!(direct_quadrature_oracle(&pots[0], 4, 0.0).is_err());
}

#[test]
fn untruncated_gaussian_is_hermite() {
    // monic Hermite for e^{-α̂λ²}: r_n = n/(2α̂), s_n = 0, h_0 = sqrt(π/α̂)
    for alpha in [0.5, 2.0] {
        let sys = stieltjes_recurrence(&Potential::gaussian(alpha), f64::INFINITY, 30, BITS).unwrap();
        assert!((sys.log_h[0] - (std::f64::consts::PI / alpha).sqrt().ln()).abs() < 1e-12);
        for n in 1..=30 {
            let r = n as f64 / (2.0 * alpha);
            assert!((sys.r[n] / r - 1.0).abs() < 1e-10, "n={n}");
            assert!(sys.s[n].abs() < 1e-10 * r.sqrt());
        }
        assert!(sys.gram_residual < gram_tolerance(BITS));
    }
}

#[test]
fn gaussian_suite_passes() {
    for c in gaussian_suite(&[0.5, 1.0, 2.0], 30, BITS).unwrap() {
        assert!(c.pass, "{} = {:e} outside [{}, {}]", c.name, c.value, c.lo, c.hi);
    }
}

#[test]
fn quartic_lax_identities() {
    let pot: Potential = "quartic:g2=-1,g4=1,alpha=3".parse().unwrap();
    let rep = build_lax_matrices_and_check(&pot, 1.0, 30, 1e-4, BITS).unwrap();
    for (name, v) in [("string", rep.string), ("hexp", rep.hexp), ("aid", rep.a_subdiagonal), ("canonical", rep.canonical)] {
        assert!(v < 1e-7, "{name} = {v:e}");
    }
    assert!(rep.flow < 1e-6, "flow = {:e}", rep.flow);
    assert!(rep.p_antisymmetry < 1e-12 && rep.h_antisymmetry < 1e-12);
    let sys = stieltjes_recurrence(&pot, f64::INFINITY, 30, BITS).unwrap();
    let ids = verify_recurrence_identities(&pot, &sys, 1e-2, 1e-2).unwrap();
    for name in ["znorm", "zinfstr_offdiag", "zinfstr_diag"] {
        let e = ids.get(name).unwrap();
        assert!(e.residual.abs() < 1e-8, "{name} = {:e}", e.residual);
    }
    assert!(matches!(build_lax_matrices_and_check(&pot, f64::INFINITY, 30, 1e-4, BITS), Err(Error::Invalid(_))));
}

#[test]
fn odd_potential_has_no_untruncated_normalisation() {
    let pot: Potential = "poly:g3=-1,g1=0.5".parse().unwrap();
    assert!(!pot.integrable_above() && pot.integrable_below());
    assert!(matches!(gap_probability_finite_n(&pot, 4, 0.0), Err(Error::NonIntegrableWeight(_))));
    // finite walls still compare
    let lr = gap_ratio(&pot, 4, 0.0, 1.0, BITS).unwrap();
    assert!(lr < 0.0 && lr.is_finite());
}

#[test]
fn gap_is_a_distribution_function_in_y() {
    let pot = Potential::gaussian(1.0);
    // edge at y = 4
    let ys: Vec<f64> = (0..=32).map(|i| -1.0 + 0.25 * i as f64).collect();
    let vals = gap_cdf_finite_n(&pot, 8, &ys, BITS).unwrap();
    assert!(vals.windows(2).all(|w| w[0].p <= w[1].p));
    assert!(vals[0].p < 1e-12 && (vals.last().unwrap().p - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_inputs() {
    assert!(Potential::new(vec![0.0, 2.0], 0.0).is_err());
    assert!(Potential::new(vec![0.0, 0.0], 1.0).is_err());
    assert!("gauss:g4=1".parse::<Potential>().is_err());
    assert!("nope".parse::<Potential>().is_err());
    assert!(gap_probability_finite_n(&Potential::gaussian(1.0), 0, 0.0).is_err());
    assert!(gue_sample_maxeig(0, 10, 1, 1.0).is_err());
    assert!(gue_sample_maxeig(4, 10, 1, -1.0).is_err());
}

fn potential() -> impl Strategy<Value = Potential> {
    (prop::collection::vec(-3.0f64..3.0, 0..5), 0.1f64..5.0, 0.5f64..3.0).prop_map(|(mut g, top, alpha)| {
        // even leading degree with positive coefficient
        g.resize(g.len() | 1, 0.0);
        g.push(top);
        Potential::new(g, alpha).unwrap()
    })
}

fn dense(n: usize, vals: &[f64], width: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i.abs_diff(j) <= width { vals[(i * n + j) % vals.len()] } else { 0.0 }).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_text_round_trip(p in potential()) {
        let back: Potential = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn banded_product_matches_dense(n in 2usize..12, vals in prop::collection::vec(-2.0f64..2.0, 1..40), wa in 0usize..3, wb in 0usize..3) {
        let (da, db) = (dense(n, &vals, wa), dense(n, &vals.iter().rev().copied().collect::<Vec<_>>(), wb));
        let prod = BandedMatrix::from_dense(&da).mul(&BandedMatrix::from_dense(&db));
        for i in 0..n {
            for j in 0..n {
                let exact: f64 = (0..n).map(|k| da[i][k] * db[k][j]).sum();
                prop_assert!((prod.get(i, j) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn merge_is_order_independent(a in prop::collection::vec(-5.0f64..5.0, 0..30), b in prop::collection::vec(-5.0f64..5.0, 0..30), c in prop::collection::vec(-5.0f64..5.0, 0..30)) {
        let (a, b, c) = (EmpiricalCdf::new(a), EmpiricalCdf::new(b), EmpiricalCdf::new(c));
        prop_assert_eq!(a.merge(&b), b.merge(&a));
        prop_assert_eq!(a.merge(&b).merge(&c), a.merge(&b.merge(&c)));
        let all: Vec<f64> = a.maxima.iter().chain(&b.maxima).chain(&c.maxima).copied().collect();
        prop_assert_eq!(a.merge(&b).merge(&c), EmpiricalCdf::new(all));
    }

    // squared norms and r_n stay positive, and the two forms of log Z agree
    #[test]
    fn gram_data_is_positive(p in potential(), y in -1.0f64..2.0) {
        let sys = stieltjes_recurrence(&p, y, 12, BITS).unwrap();
        prop_assert!(sys.h.iter().all(|&h| h > 0.0));
        prop_assert!(sys.r[1..].iter().all(|&r| r > 0.0));
        let (a, b) = (sys.log_z(13).unwrap(), sys.log_z_product(13).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn gap_is_monotone_and_ratio_consistent(p in potential(), y1 in -1.0f64..1.5, dy in 0.01f64..1.0, n in 1usize..8) {
        let y2 = y1 + dy;
        let (a, b) = (gap_probability_finite_n(&p, n, y1).unwrap(), gap_probability_finite_n(&p, n, y2).unwrap());
        prop_assert!(a.log_p <= b.log_p + 1e-12);
        let r = gap_ratio(&p, n, y1, y2, BITS).unwrap();
        prop_assert!((r - (a.log_p - b.log_p)).abs() <= 1e-9 * (1.0 + r.abs()));
    }
}

#[test]
fn sampler_agrees_with_recurrence_at_large_alpha() {
    // N = 10, α̂ = 5: edge at y_c = 2
    let (n, alpha) = (10, 5.0);
    assert!((ScalingMap::new(n, alpha).y_c() - 2.0).abs() < 1e-14);
    let emp = gue_sample_maxeig(n, 40_000, 42, alpha).unwrap();
    let pot = Potential::gaussian(alpha);
    for y in [1.5, 2.0, 2.5] {
        let p = gap_probability_finite_n(&pot, n, y).unwrap().p;
        let se = emp.standard_error(p);
        assert!((emp.cdf(y) - p).abs() < 3.0 * se, "y={y}: {} vs {p} (se {se:e})", emp.cdf(y));
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let a = gue_sample_maxeig(12, 2000, 3, 1.0).unwrap();
    assert_eq!(a, gue_sample_maxeig(12, 2000, 3, 1.0).unwrap());
    assert_ne!(a, gue_sample_maxeig(12, 2000, 4, 1.0).unwrap());
    assert_eq!(a.len(), 2000);
}
