use multicritical::airy_oracle::{airy_ai, fredholm_det_airy};
use multicritical::backlund::{
    chain_from_solution, compare_with_hastings_mcleod, first_integral, shifted_transcendent, ChainOptions,
};
use multicritical::painleve::{
    far_field_jet, flow_consistency, gap_curve, gap_integrals, hastings_mcleod, p34_continuation, p34_solve, setup,
    HierarchySpec, P34Config,
};
use multicritical::Error;

/// `σ = 2^{2/3} s` for the first-order curve.
fn sigma(s: f64) -> f64 {
    s * 2f64.powf(2.0 / 3.0)
}

#[test]
fn hastings_mcleod_profile() {
    let hm = hastings_mcleod(-12.0, 8.0, 400).unwrap();
    assert!(hm.midpoint_residual() < 1e-9);
    let q = hm.eval(-12.0, 0).unwrap()[0];
    assert!((q / (6.0f64).sqrt() - 1.0).abs() < 1e-3, "left end {q}");
    let right = hm.eval(8.0, 1).unwrap();
    let a = airy_ai(8.0);
    assert!((right[0] / a.ai - 1.0).abs() < 1e-6);
    // q ~ Ai well before the right end too
    let mid = hm.eval(5.0, 0).unwrap()[0];
    assert!((mid / airy_ai(5.0).ai - 1.0).abs() < 1e-4);
}

#[test]
fn first_order_curve_matches_fredholm() {
    let cfg = P34Config::for_k(1);
    let (spec, bg) = setup(1, &cfg).unwrap();
    let s: Vec<f64> = (0..=40).map(|i| 1.2 - 0.05 * i as f64).collect();
    let (curve, grids) = gap_curve(&spec, &bg, &s, &cfg, 1e-5).unwrap();
    assert_eq!(curve.s.len(), 41);
    assert!(curve.s.windows(2).all(|w| w[0] < w[1]));
    for p in &curve.points {
        let f2 = fredholm_det_airy(sigma(p.s), 60).unwrap().f2;
        assert!((p.log_p.exp() - f2).abs() < 1e-9, "s={}: {} vs {f2}", p.s, p.log_p.exp());
        assert!(p.equation_residual < 1e-9);
    }
    // neighbouring profiles obey the flow equation to O(ds^2)
    for w in grids.windows(2) {
        assert!(flow_consistency(&spec, &w[0], &w[1]).unwrap() < 1e-3);
    }
    let pdf_mass: f64 = curve.pdf.iter().sum::<f64>() * 0.05;
    assert!(pdf_mass > 0.0 && pdf_mass < 1.0);
}

#[test]
fn flow_consistency_is_second_order() {
    let cfg = P34Config::for_k(1);
    let (spec, bg) = setup(1, &cfg).unwrap();
    let g = p34_continuation(&spec, &bg, &[0.5, 0.0, -0.01, -0.02], &cfg).unwrap();
    let coarse = flow_consistency(&spec, &g[1], &g[3]).unwrap();
    let fine = flow_consistency(&spec, &g[1], &g[2]).unwrap();
    let order = (coarse / fine).log2();
    assert!((1.7..2.3).contains(&order), "order {order} ({coarse:e}, {fine:e})");
}

#[test]
fn refinement_leaves_log_p_unchanged() {
    let cfg = P34Config::for_k(1);
    let fine = cfg.refined();
    let (spec, bg) = setup(1, &cfg).unwrap();
    let (_, bgf) = setup(1, &fine).unwrap();
    let a = p34_continuation(&spec, &bg, &[1.0, -1.0], &cfg).unwrap();
    let b = p34_continuation(&spec, &bgf, &[1.0, -1.0], &fine).unwrap();
    let la = gap_integrals(&spec, &a[1], &bg).unwrap().0;
    let lb = gap_integrals(&spec, &b[1], &bgf).unwrap().0;
    assert!((la - lb).abs() < 1e-10, "{la} vs {lb}");
}

#[test]
fn cross_check_failure_is_reported() {
    let cfg = P34Config::for_k(1);
    let (spec, bg) = setup(1, &cfg).unwrap();
    let r = gap_curve(&spec, &bg, &[0.0, 0.5, 1.0], &cfg, 1e-14);
    assert!(matches!(r, Err(Error::CrossCheckFailed(_))));
    assert!(matches!(gap_curve(&spec, &bg, &[0.0], &cfg, 1.0), Err(Error::Invalid(_))));
    assert!(matches!(p34_continuation(&spec, &bg, &[0.0, 1.0], &cfg), Err(Error::Invalid(_))));
}

#[test]
fn even_order_has_no_real_background() {
    let cfg = P34Config::for_k(2);
    assert!(matches!(setup(2, &cfg), Err(Error::NoRealBranch(_))));
    let spec = HierarchySpec::new(4).unwrap();
    assert!(matches!(far_field_jet(&spec, -10.0, 3), Err(Error::NoRealBranch(_))));
    assert!(HierarchySpec::new(0).is_err());
}

#[test]
fn third_order_far_field_root() {
    // L_3[u] = x/2 with β_3 = 10 gives u ~ (x/20)^{1/3}
    let spec = HierarchySpec::new(3).unwrap();
    for x in [-60.0, -30.0, 40.0] {
        let jet = far_field_jet(&spec, x, 2).unwrap();
        let lead = (x / 20.0f64).cbrt();
        assert!((jet[0] / lead - 1.0).abs() < 1e-2, "x={x}");
    }
}

#[test]
fn first_order_chain() {
    let cfg = P34Config::for_k(1);
    let (spec, bg) = setup(1, &cfg).unwrap();
    let g = p34_continuation(&spec, &bg, &[1.0, 0.0], &cfg).unwrap().pop().unwrap();
    let chain = chain_from_solution(&spec, &g, &ChainOptions::default()).unwrap();
    assert!(chain.imaginary);
    assert!(chain.residual_schrodinger < 1e-10);
    assert!(chain.residual_weqn < 1e-8);
    assert!(chain.first_integral_relative() < 1e-12);
    let fi = first_integral(&spec, &g).unwrap();
    assert_eq!(fi.len(), g.mesh.len());
    let hm = hastings_mcleod(-12.0, 8.0, 400).unwrap();
    let (dev, used) = compare_with_hastings_mcleod(&chain, &hm).unwrap();
    assert!(used > 50 && dev < 1e-5, "{dev} on {used} nodes");
    let q = shifted_transcendent(&spec, &g, &chain).unwrap();
    let p2 = q.iter().map(|v| (v[3] - 2.0 * v[1].powi(3) - v[0] * v[1] + 0.5).abs()).fold(0.0, f64::max);
    assert!(p2 < 1e-8, "{p2}");
    let strict = ChainOptions { allow_imaginary: false, ..ChainOptions::default() };
    assert!(matches!(chain_from_solution(&spec, &g, &strict), Err(Error::NegativeRadicand { .. })));
}

#[test]
fn third_order_short_run() {
    let cfg = P34Config::for_k(3);
    let (spec, bg) = setup(3, &cfg).unwrap();
    let g = p34_continuation(&spec, &bg, &[1.0, 0.98], &cfg).unwrap();
    for grid in &g {
        assert!(grid.converged);
        assert!(grid.midpoint_residual() < 1e-7);
        let chain = chain_from_solution(&spec, grid, &ChainOptions::default()).unwrap();
        assert!(chain.residual_schrodinger < 1e-5 && chain.residual_weqn < 1e-5);
        assert!(chain.first_integral_relative() < 1e-6);
    }
    assert!(flow_consistency(&spec, &g[0], &g[1]).unwrap() < 1e-2);
    // a cold solve lands on the same profile as the continued one
    let cold = p34_solve(&spec, 0.98, &bg, None, &cfg).unwrap();
    let d = cold.values().iter().zip(g[1].values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-8, "{d}");
}
