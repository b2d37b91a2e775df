//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
//! Run with `cargo test -p multicritical --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use multicritical::airy_oracle::fredholm::tw_moments;
use multicritical::airy_oracle::fredholm_det_airy;
use multicritical::backlund::{chain_from_solution, ChainOptions};
use multicritical::finite_n::{
    direct_quadrature_oracle, gap_cdf_finite_n, gap_probability_finite_n, gaussian_suite, gue_sample_maxeig, Potential,
    ScalingMap, DEFAULT_PRECISION_BITS,
};
use multicritical::lenard::symbolic_suite;
use multicritical::painleve::{flow_consistency, gap_curve, gap_integrals, p34_continuation, setup, P34Config};
use statrs::function::erf::erf;

const BITS: u32 = DEFAULT_PRECISION_BITS;

// criterion 3
const ERF_TOL: f64 = 1e-10;
const DIRECT_TOL: f64 = 1e-8;
// criterion 4
const MC_N: usize = 10;
const MC_SAMPLES: usize = 100_000;
const MC_SEED: u64 = 42;
const MC_SIGMAS: [f64; 3] = [-2.0, -1.0, 0.0];
const MC_SE: f64 = 3.0;
// criterion 5
const TW_STEP: f64 = 0.05;
const TW_SUP_TOL: f64 = 1e-6;
const TW_ROUTE_TOL: f64 = 1e-5;
const TW_MOMENT_TOL: f64 = 1e-4;
// criterion 6
const CONV_TOL: f64 = 0.03;
// criterion 7
const EQ_TOL: f64 = 1e-7;
const FIRST_INTEGRAL_TOL: f64 = 1e-6;
const CHAIN_TOL: f64 = 1e-5;
const REFINE_TOL: f64 = 1e-4;
/// Observed order of the flow residual under halving of the continuation step.
const FLOW_MIN_ORDER: f64 = 1.7;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn timed(budget: Duration, f: impl FnOnce() -> Result<Verdict, String>) -> Verdict {
    let t = Instant::now();
    let v = f().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
    let dt = t.elapsed();
    let pass = v.pass && dt < budget;
    verdict(pass, format!("{} [{:.1}s of {}s]", v.detail, dt.as_secs_f64(), budget.as_secs()))
}

fn sup(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn c1_symbolic() -> Result<Verdict, String> {
    let checks = symbolic_suite(6).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    Ok(verdict(failed.is_empty(), format!("{} checks, failed: {failed:?}", checks.len())))
}

fn c2_gaussian() -> Result<Verdict, String> {
    let checks = gaussian_suite(&[0.5, 1.0, 2.0], 30, BITS).map_err(|e| e.to_string())?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:e}", c.name, c.value)).collect();
    Ok(verdict(failed.is_empty(), format!("{} checks, failed: {failed:?}", checks.len())))
}

fn c3_oracles() -> Result<Verdict, String> {
    let pot = Potential::gaussian(1.0);
    let mut erf_err: f64 = 0.0;
    for i in 0..=40 {
        let y = -3.0 + 0.15 * i as f64;
        let p = gap_probability_finite_n(&pot, 1, y).map_err(|e| e.to_string())?.p;
        erf_err = erf_err.max((p - 0.5 * (1.0 + erf(y))).abs());
    }
    let mut direct_err: f64 = 0.0;
    for n in 2..=3 {
        for y in [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5] {
            let p = gap_probability_finite_n(&pot, n, y).map_err(|e| e.to_string())?.p;
            let d = direct_quadrature_oracle(&pot, n, y).map_err(|e| e.to_string())?;
            direct_err = direct_err.max((p - d).abs());
        }
    }
    Ok(verdict(
        erf_err < ERF_TOL && direct_err < DIRECT_TOL,
        format!("N=1 vs erf {erf_err:.2e} (< {ERF_TOL:e}), N=2,3 vs direct {direct_err:.2e} (< {DIRECT_TOL:e})"),
    ))
}

fn c4_monte_carlo() -> Result<Verdict, String> {
    let map = ScalingMap::new(MC_N, 1.0);
    let pot = Potential::gaussian(1.0);
    let emp = gue_sample_maxeig(MC_N, MC_SAMPLES, MC_SEED, 1.0).map_err(|e| e.to_string())?;
    let again = gue_sample_maxeig(MC_N, MC_SAMPLES, MC_SEED, 1.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for sigma in MC_SIGMAS {
        let y = map.y_of_sigma(sigma);
        let p = gap_probability_finite_n(&pot, MC_N, y).map_err(|e| e.to_string())?.p;
        worst = worst.max((emp.cdf(y) - p).abs() / emp.standard_error(p));
    }
    let same = emp == again;
    Ok(verdict(worst < MC_SE && same, format!("max |emp - P|/SE = {worst:.2} (< {MC_SE}), reproducible: {same}")))
}

/// Composite Simpson on an odd number of equispaced points.
fn simpson(h: f64, f: &[f64]) -> f64 {
    let n = f.len() - 1;
    assert!(n % 2 == 0);
    let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f[i] } else { 2.0 * f[i] }).sum();
    h / 3.0 * (f[0] + f[n] + inner)
}

fn c5_tracy_widom() -> Result<Verdict, String> {
    let cfg = P34Config::for_k(1);
    let (spec, bg) = setup(1, &cfg).map_err(|e| e.to_string())?;
    let sigma: Vec<f64> = (0..=240).map(|i| -8.0 + TW_STEP * i as f64).collect();
    let c = ScalingMap::painleve_s(1.0);
    let s: Vec<f64> = sigma.iter().map(|x| c * x).collect();
    let (curve, _) = gap_curve(&spec, &bg, &s, &cfg, f64::INFINITY).map_err(|e| e.to_string())?;
    let mut dev: f64 = 0.0;
    for (x, lp) in sigma.iter().zip(&curve.log_p) {
        let f2 = fredholm_det_airy(*x, 60).map_err(|e| e.to_string())?.f2;
        dev = dev.max((lp.exp() - f2).abs());
    }
    let route = curve.route_discrepancy() * c;
    // densities in σ
    let pdf: Vec<f64> = curve.pdf.iter().map(|p| p * c).collect();
    let mass = simpson(TW_STEP, &pdf);
    let m1 = simpson(TW_STEP, &pdf.iter().zip(&sigma).map(|(p, x)| p * x).collect::<Vec<_>>()) / mass;
    let m2 = simpson(TW_STEP, &pdf.iter().zip(&sigma).map(|(p, x)| p * x * x).collect::<Vec<_>>()) / mass;
    let var = m2 - m1 * m1;
    let (om, ov) = tw_moments(-8.0, 4.0, 48, 60).map_err(|e| e.to_string())?;
    let (om2, ov2) = tw_moments(-8.0, 4.0, 48, 120).map_err(|e| e.to_string())?;
    let oracle_err = (om - om2).abs().max((ov - ov2).abs());
    let (em, ev) = ((m1 - om).abs(), (var - ov).abs());
    let pass = dev < TW_SUP_TOL && route < TW_ROUTE_TOL && em < TW_MOMENT_TOL && ev < TW_MOMENT_TOL && oracle_err < 1e-8;
    Ok(verdict(
        pass,
        format!(
            "sup|P-F2| {dev:.2e}, routes {route:.2e}, mean {m1:.6} vs {om:.6}, var {var:.6} vs {ov:.6} (oracle node-doubling {oracle_err:.1e})"
        ),
    ))
}

fn c6_convergence() -> Result<Verdict, String> {
    let pot = Potential::gaussian(1.0);
    let sigma: Vec<f64> = (0..=100).map(|i| -6.0 + 0.1 * i as f64).collect();
    let f2: Vec<f64> =
        sigma.iter().map(|&x| fredholm_det_airy(x, 60).map(|r| r.f2)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut errs = Vec::new();
    for n in [20, 50] {
        let map = ScalingMap::new(n, 1.0);
        let ys: Vec<f64> = sigma.iter().map(|&x| map.y_of_sigma(x)).collect();
        let vals = gap_cdf_finite_n(&pot, n, &ys, BITS).map_err(|e| e.to_string())?;
        errs.push(sup(vals.iter().zip(&f2).map(|(v, f)| (v.p - f).abs())));
    }
    let pass = errs.iter().all(|&e| e < CONV_TOL) && errs[1] < errs[0];
    Ok(verdict(pass, format!("sup error N=20 {:.4}, N=50 {:.4} (< {CONV_TOL}, decreasing)", errs[0], errs[1])))
}

/// Property suite for order `k` on `s_grid` (descending continuation from its top).
fn property_suite(k: usize, s_grid: &[f64]) -> Result<Verdict, String> {
    let err = |e: multicritical::Error| e.to_string();
    let cfg = P34Config::for_k(k);
    let (spec, bg) = setup(k, &cfg).map_err(err)?;
    let grids = p34_continuation(&spec, &bg, s_grid, &cfg).map_err(err)?;
    let converged = grids.iter().all(|g| g.converged);
    let eq = sup(grids.iter().map(|g| g.midpoint_residual()));
    let mut fi: f64 = 0.0;
    let mut chain_res: f64 = 0.0;
    for g in &grids {
        let chain = chain_from_solution(&spec, g, &ChainOptions::default()).map_err(err)?;
        fi = fi.max(chain.first_integral_relative());
        chain_res = chain_res.max(chain.residual_schrodinger).max(chain.residual_weqn);
    }
    // flow residual at two continuation steps from the middle of the range
    let mid = s_grid[s_grid.len() / 2];
    let ds = 0.02;
    let g = p34_continuation(&spec, &bg, &[s_grid[0], mid, mid - ds / 2.0, mid - ds], &cfg).map_err(err)?;
    let coarse = flow_consistency(&spec, &g[1], &g[3]).map_err(err)?;
    let fine = flow_consistency(&spec, &g[1], &g[2]).map_err(err)?;
    let order = (coarse / fine).log2();
    // grid refinement of log P at both ends of the range
    let fine_cfg = cfg.refined();
    let (_, bgf) = setup(k, &fine_cfg).map_err(err)?;
    let ends = [s_grid[0], *s_grid.last().unwrap()];
    let a = p34_continuation(&spec, &bg, &ends, &cfg).map_err(err)?;
    let b = p34_continuation(&spec, &bgf, &ends, &fine_cfg).map_err(err)?;
    let mut refine: f64 = 0.0;
    for (ga, gb) in a.iter().zip(&b) {
        let la = gap_integrals(&spec, ga, &bg).map_err(err)?.0;
        let lb = gap_integrals(&spec, gb, &bgf).map_err(err)?.0;
        refine = refine.max((la - lb).abs());
    }
    let pass = converged
        && eq < EQ_TOL
        && fi < FIRST_INTEGRAL_TOL
        && order > FLOW_MIN_ORDER
        && chain_res < CHAIN_TOL
        && refine < REFINE_TOL;
    Ok(verdict(
        pass,
        format!(
            "converged {converged}, equation {eq:.1e}, first integral {fi:.1e}, flow {coarse:.1e}/{fine:.1e} order {order:.2}, chain {chain_res:.1e}, refinement {refine:.1e}"
        ),
    ))
}

fn descending(hi: f64, lo: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| hi - step * i as f64).collect()
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Verdict>)> = vec![
        ("1 symbolic suite", Box::new(move || timed(secs(10), c1_symbolic))),
        ("2 finite-N Gaussian identities", Box::new(move || timed(secs(60), c2_gaussian))),
        ("3 gap-probability oracles", Box::new(move || timed(secs(60), c3_oracles))),
        ("4 Monte-Carlo cross-check", Box::new(move || timed(secs(300), c4_monte_carlo))),
        ("5 Tracy-Widom k=1", Box::new(move || timed(secs(600), c5_tracy_widom))),
        ("6 finite-N to Tracy-Widom", Box::new(move || timed(secs(600), c6_convergence))),
        ("7 k=2 property suite", Box::new(move || timed(secs(900), || property_suite(2, &descending(4.0, 0.0, 0.25))))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let v = run();
        failed += usize::from(!v.pass);
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    // same property suite at the lowest order with a real background; reported, not counted
    let v = timed(secs(900), || property_suite(3, &descending(1.0, -0.5, 0.25)));
    println!("INFO k=3 property suite: {} {}", if v.pass { "pass" } else { "fail" }, v.detail);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
