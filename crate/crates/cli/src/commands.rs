use serde_json::{json, Value};

use multicritical::airy_oracle::{airy_ai, fredholm::tw_moments, fredholm_det_airy};
use multicritical::backlund::{chain_from_solution, compare_with_hastings_mcleod, shifted_transcendent, ChainOptions};
use multicritical::finite_n::{
    build_lax_matrices_and_check, direct_quadrature_oracle_with_tol, gap_probability_finite_n_with, gap_ratio,
    gaussian_suite, gue_sample_maxeig, stieltjes_recurrence, verify_recurrence_identities, Potential, ScalingMap,
};
use multicritical::lenard::{build_table, symbolic_suite};
use multicritical::painleve::{
    gap_curve, gap_integrals, hastings_mcleod, p34_continuation, setup, BackgroundSolution, HierarchySpec, P34Config,
    SolutionGrid,
};

use crate::output::{Body, Outcome};
use crate::{
    BacklundArgs, Cli, CliError, Command, FiniteNCommand, GapArgs, GueCommand, LenardArgs, OracleCommand, P34Args,
    PotentialArgs, SolverArgs, TwArgs, VerifyAllArgs,
};

type Result<T> = std::result::Result<T, CliError>;

/// Largest grid accepted by the sweeping commands.
const MAX_POINTS: usize = 100_000;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

/// `lo, lo + step, ..., <= hi`, with the last point snapped onto `hi` when within rounding.
fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    positive("step", step)?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(usage(format!("grid bounds must be finite with min <= max, got [{lo}, {hi}]")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_POINTS {
        return Err(usage(format!("grid has {count} points, limit is {MAX_POINTS}")));
    }
    // snap to 1e-12 so that e.g. 3.9000000000000004 prints as 3.9
    Ok((0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).map(|v| if (v - hi).abs() < 1e-9 { hi } else { v }).collect())
}

fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let bits = cli.global.precision_bits;
    if !(1..=106).contains(&bits) {
        return Err(usage(format!("--precision-bits must be in 1..=106, got {bits}")));
    }
    match &cli.command {
        Command::Lenard(a) => lenard(a),
        Command::Tw(a) => tw(a),
        Command::P34(a) => p34(a),
        Command::Gap(a) => gap(a),
        Command::Backlund(a) => backlund(a),
        Command::FiniteN(c) => finite_n(c, bits),
        Command::Gue(c) => gue(c),
        Command::Oracle(c) => oracle(c),
        Command::VerifyAll(a) => verify_all(a, bits),
    }
}

fn lenard(a: &LenardArgs) -> Result<Outcome> {
    if a.kmax > 12 {
        return Err(usage(format!("--kmax must be at most 12, got {}", a.kmax)));
    }
    let table = build_table(a.kmax)?;
    let text = if a.print { table.to_text_with_primes() } else { table.to_text() };
    let json: Value = serde_json::from_str(&table.to_json()).expect("table json");
    let terms: usize = table.entries.iter().map(|e| e.len()).sum();
    Ok(Outcome::new(Body::Text { text, json }).residual("terms", terms as f64))
}

fn solver_config(k: usize, a: &SolverArgs) -> Result<P34Config> {
    if k == 0 || k > 6 {
        return Err(usage(format!("--k must be in 1..=6, got {k}")));
    }
    let mut cfg = P34Config::for_k(k);
    if let Some(h) = a.h {
        cfg.h = positive("h", h)?;
    }
    if let Some(l) = a.left {
        cfg.left = positive("left", l)?;
    }
    if let Some(r) = a.right {
        cfg.right = positive("right", r)?;
    }
    if let Some(t) = a.tol {
        cfg.tol = positive("tol", t)?;
    }
    Ok(cfg)
}

/// First continuation target: the profile is solved cold here and carried down in `s`.
fn cold_start(k: usize) -> f64 {
    if k == 1 {
        1.5
    } else {
        1.0
    }
}

/// Background plus the profile at `s`, reached by continuation from the cold start.
fn solve_at(k: usize, s: f64, cfg: &P34Config) -> Result<(HierarchySpec, BackgroundSolution, SolutionGrid)> {
    if !s.is_finite() {
        return Err(usage(format!("--s must be finite, got {s}")));
    }
    let (spec, bg) = setup(k, cfg)?;
    let start = cold_start(k);
    let targets = if s < start { vec![start, s] } else { vec![s] };
    let mut grids = p34_continuation(&spec, &bg, &targets, cfg)?;
    let grid = grids.pop().expect("one grid per target");
    Ok((spec, bg, grid))
}

fn tw(a: &TwArgs) -> Result<Outcome> {
    let cfg = solver_config(a.k, &a.solver)?;
    positive("cross-tol", a.cross_tol)?;
    let xs = grid(a.smin, a.smax, a.step)?;
    if xs.len() < 2 {
        return Err(usage("the grid needs at least two points"));
    }
    // k = 1 runs in the Tracy-Widom variable σ, with s = 2^{-2/3} σ
    let c = if a.k == 1 { ScalingMap::painleve_s(1.0) } else { 1.0 };
    let s: Vec<f64> = xs.iter().map(|x| c * x).collect();
    let (spec, bg) = setup(a.k, &cfg)?;
    let (curve, _) = gap_curve(&spec, &bg, &s, &cfg, a.cross_tol)?;
    let rows: Vec<Vec<f64>> = curve
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                xs[i],
                p.log_p.exp(),
                curve.pdf[i] * c,
                curve.dlog_p[i] * c,
                curve.dlog_p_fd[i] * c,
                p.newton_residual,
                p.equation_residual,
                p.tail_bound,
            ]
        })
        .collect();
    Ok(Outcome::new(Body::Table {
        columns: vec!["s", "cdf", "pdf", "dlogp_i", "dlogp_ii", "newton_residual", "equation_residual", "tail_bound"],
        rows,
    })
    .residual("route_discrepancy", curve.route_discrepancy() * c)
    .residual("equation_residual", sup(curve.points.iter().map(|p| p.equation_residual)))
    .residual("newton_residual", sup(curve.points.iter().map(|p| p.newton_residual)))
    .residual("tail_bound", sup(curve.points.iter().map(|p| p.tail_bound))))
}

fn p34(a: &P34Args) -> Result<Outcome> {
    let cfg = solver_config(a.k, &a.solver)?;
    let (_, _, g) = solve_at(a.k, a.s, &cfg)?;
    let eq = g.midpoint_residual();
    let mut data = json!({
        "k": g.k,
        "s": g.s,
        "converged": g.converged,
        "newton_residual": g.newton_residual,
        "equation_residual": eq,
        "iterations": g.sol.iterations,
        "nodes": g.mesh.len(),
        "domain": [g.mesh[0], g.mesh[g.mesh.len() - 1]],
        "config": cfg,
    });
    if a.dump_grid {
        data["grid"] = json!({ "x": g.mesh, "jets": g.jets });
    }
    Ok(Outcome::new(Body::Json(data)).residual("newton_residual", g.newton_residual).residual("equation_residual", eq))
}

fn gap(a: &GapArgs) -> Result<Outcome> {
    let cfg = solver_config(a.k, &a.solver)?;
    let (spec, bg, g) = solve_at(a.k, a.s, &cfg)?;
    let (log_p, dlog_p, tail) = gap_integrals(&spec, &g, &bg)?;
    let eq = g.midpoint_residual();
    let data = json!({ "k": a.k, "s": a.s, "log_p": log_p, "p": log_p.exp(), "dlog_p": dlog_p, "tail_bound": tail });
    Ok(Outcome::new(Body::Json(data)).residual("equation_residual", eq).residual("tail_bound", tail))
}

fn backlund(a: &BacklundArgs) -> Result<Outcome> {
    let cfg = solver_config(a.k, &a.solver)?;
    positive("k-floor", a.k_floor)?;
    let (spec, _, g) = solve_at(a.k, a.s, &cfg)?;
    let chain = chain_from_solution(&spec, &g, &ChainOptions { k_floor: a.k_floor, allow_imaginary: true })?;
    let mut data = json!({
        "k": chain.k,
        "s": chain.s,
        "imaginary_psi": chain.imaginary,
        "nodes": chain.x_grid.len(),
        "x_range": [chain.x_grid.first(), chain.x_grid.last()],
        "residual_schrodinger": chain.residual_schrodinger,
        "residual_weqn": chain.residual_weqn,
        "residual_first_integral": chain.residual_first_integral,
        "first_integral_relative": chain.first_integral_relative(),
        "k_sup": chain.k_sup,
        "residual_u_relation": chain.residual_u_relation,
        "equation_residual": g.midpoint_residual(),
    });
    let mut out = Outcome::new(Body::Json(Value::Null))
        .residual("schrodinger", chain.residual_schrodinger)
        .residual("weqn", chain.residual_weqn)
        .residual("first_integral_relative", chain.first_integral_relative());
    if a.k == 1 {
        let hm = hastings_mcleod(-12.0, 8.0, 400)?;
        let (w_vs_hm, used) = compare_with_hastings_mcleod(&chain, &hm)?;
        let q = shifted_transcendent(&spec, &g, &chain)?;
        let p2 = sup(q.iter().map(|v| v[3] - 2.0 * v[1].powi(3) - v[0] * v[1] + 0.5));
        data["hastings_mcleod_deviation"] = json!(w_vs_hm);
        data["hastings_mcleod_nodes"] = json!(used);
        data["painleve_ii_residual"] = json!(p2);
        out = out.residual("hastings_mcleod", w_vs_hm).residual("painleve_ii", p2);
    }
    out.body = Body::Json(data);
    Ok(out)
}

fn potential(a: &PotentialArgs) -> Result<Potential> {
    let pot: Potential = a.potential.parse()?;
    Ok(match a.alpha {
        Some(alpha) => pot.with_alpha(alpha)?,
        None => pot,
    })
}

fn finite_n(c: &FiniteNCommand, bits: u32) -> Result<Outcome> {
    match c {
        FiniteNCommand::Verify { potential: pa, y, nmax, dy, dalpha } => {
            let pot = potential(pa)?;
            let sys = stieltjes_recurrence(&pot, *y, *nmax, bits)?;
            let rep = verify_recurrence_identities(&pot, &sys, *dy, *dalpha)?;
            let mut out = Outcome::new(Body::Json(Value::Null)).residual("gram", sys.gram_residual);
            for e in &rep.entries {
                out = out.residual(&e.name, e.residual);
            }
            let lax = if *nmax >= 20 { Some(build_lax_matrices_and_check(&pot, *y, *nmax, 1e-4, bits)?) } else { None };
            if let Some(l) = &lax {
                out = out
                    .residual("lax_string", l.string)
                    .residual("lax_flow", l.flow)
                    .residual("lax_hexp", l.hexp)
                    .residual("lax_aid", l.a_subdiagonal)
                    .residual("lax_canonical", l.canonical);
            }
            let orders: serde_json::Map<String, Value> =
                rep.entries.iter().filter_map(|e| e.observed_order().map(|o| (e.name.clone(), json!(o)))).collect();
            out.body = Body::Json(json!({
                "potential": pot.to_string(),
                "identities": rep,
                "observed_order": orders,
                "lax": lax,
                "gram_residual": sys.gram_residual,
                "cutoff": sys.cutoff,
            }));
            Ok(out)
        }
        FiniteNCommand::Gap { potential: pa, n, y, y2 } => {
            let pot = potential(pa)?;
            let log_p = match y2 {
                Some(y2) => gap_ratio(&pot, *n, *y, *y2, bits)?,
                None => gap_probability_finite_n_with(&pot, *n, *y, bits)?.log_p,
            };
            Ok(Outcome::new(Body::Table { columns: vec!["y", "log_p", "p"], rows: vec![vec![*y, log_p, log_p.exp()]] }))
        }
        FiniteNCommand::Lax { potential: pa, y, nmax, dy } => {
            let pot = potential(pa)?;
            positive("dy", *dy)?;
            let l = build_lax_matrices_and_check(&pot, *y, *nmax, *dy, bits)?;
            let out = Outcome::new(Body::Json(json!(l)))
                .residual("string", l.string)
                .residual("flow", l.flow)
                .residual("hexp", l.hexp)
                .residual("aid", l.a_subdiagonal)
                .residual("canonical", l.canonical);
            Ok(out)
        }
        FiniteNCommand::Recurrence { potential: pa, y, nmax } => {
            let pot = potential(pa)?;
            let sys = stieltjes_recurrence(&pot, *y, *nmax, bits)?;
            let rows = (0..=*nmax).map(|n| vec![n as f64, sys.r[n], sys.s[n], sys.log_h[n]]).collect();
            Ok(Outcome::new(Body::Table { columns: vec!["n", "r", "s", "log_h"], rows }).residual("gram", sys.gram_residual))
        }
    }
}

fn gue(c: &GueCommand) -> Result<Outcome> {
    let GueCommand::Sample { n, samples, seed, alpha, ymin, ymax, step } = c;
    positive("alpha", *alpha)?;
    if *n == 0 {
        return Err(usage("--n must be positive"));
    }
    let map = ScalingMap::new(*n, *alpha);
    let lo = ymin.unwrap_or_else(|| map.y_of_sigma(-6.0));
    let hi = ymax.unwrap_or_else(|| map.y_of_sigma(4.0));
    let ys = grid(lo, hi, step.unwrap_or(0.25 * map.width()))?;
    let cdf = gue_sample_maxeig(*n, *samples, *seed, *alpha)?;
    let rows = ys
        .iter()
        .map(|&y| {
            let p = cdf.cdf(y);
            vec![y, p, cdf.standard_error(p), map.sigma_of_y(y)]
        })
        .collect();
    Ok(Outcome::new(Body::Table { columns: vec!["y", "cdf", "stderr", "sigma"], rows }).residual("samples", *samples as f64))
}

fn oracle(c: &OracleCommand) -> Result<Outcome> {
    match c {
        OracleCommand::Airy { xmin, xmax, step } => {
            let rows: Vec<Vec<f64>> = grid(*xmin, *xmax, *step)?
                .into_iter()
                .map(|x| {
                    let v = airy_ai(x);
                    vec![x, v.ai, v.ai_prime, v.est_abs_error]
                })
                .collect();
            let worst = sup(rows.iter().map(|r| r[3]));
            Ok(Outcome::new(Body::Table { columns: vec!["x", "ai", "ai_prime", "est_abs_error"], rows })
                .residual("est_abs_error", worst))
        }
        OracleCommand::Fredholm { smin, smax, step, nodes } => {
            let rows = grid(*smin, *smax, *step)?
                .into_iter()
                .map(|s| fredholm_det_airy(s, *nodes).map(|r| vec![s, r.f2, r.self_error]))
                .collect::<multicritical::Result<Vec<_>>>()?;
            let worst = sup(rows.iter().map(|r| r[2]));
            Ok(Outcome::new(Body::Table { columns: vec!["s", "F2", "self_error"], rows }).residual("self_error", worst))
        }
        OracleCommand::Direct { potential: pa, n, y, tol } => {
            let pot = potential(pa)?;
            positive("tol", *tol)?;
            let p = direct_quadrature_oracle_with_tol(&pot, *n, *y, *tol)?;
            Ok(Outcome::new(Body::Table { columns: vec!["y", "p"], rows: vec![vec![*y, p]] }))
        }
        OracleCommand::Moments { a, b, panels, nodes } => {
            if !(a < b) || *panels == 0 {
                return Err(usage("need a < b and at least one panel"));
            }
            let (mean, var) = tw_moments(*a, *b, *panels, *nodes)?;
            let (mean2, var2) = tw_moments(*a, *b, *panels, 2 * nodes)?;
            let self_error = (mean - mean2).abs().max((var - var2).abs());
            Ok(Outcome::new(Body::Json(json!({ "a": a, "b": b, "mean": mean, "variance": var, "self_error": self_error })))
                .residual("self_error", self_error))
        }
    }
}

/// Thresholds of the full (non-quick) extra checks.
const ORACLE_TOL: f64 = 1e-8;
const TW_SPOT_TOL: f64 = 1e-6;
const ROUTE_TOL: f64 = 1e-5;

fn verify_all(a: &VerifyAllArgs, bits: u32) -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut checks = Vec::new();
    let mut failures = 0usize;
    let mut record = |name: String, pass: bool, detail: String, lines: &mut Vec<String>, checks: &mut Vec<Value>| {
        if !pass {
            failures += 1;
        }
        lines.push(format!("{} {name} {detail}", if pass { "PASS" } else { "FAIL" }));
        checks.push(json!({ "name": name, "pass": pass, "detail": detail }));
    };
    for c in symbolic_suite(6)? {
        record(format!("symbolic.{}", c.name), c.pass, c.detail, &mut lines, &mut checks);
    }
    for c in gaussian_suite(&[0.5, 1.0, 2.0], 30, bits)? {
        let detail = format!("{:e} in [{:e}, {:e}]", c.value, c.lo, c.hi);
        record(format!("finite_n.{}", c.name), c.pass, detail, &mut lines, &mut checks);
    }
    if !a.quick {
        let pot = Potential::gaussian(1.0);
        for n in 1..=3 {
            for y in [-0.5, 0.5, 1.5] {
                let ours = gap_probability_finite_n_with(&pot, n, y, bits)?.p;
                let direct = direct_quadrature_oracle_with_tol(&pot, n, y, 1e-12)?;
                let d = (ours - direct).abs();
                record(format!("oracle.direct@N={n},y={y}"), d < ORACLE_TOL, format!("{d:e} < {ORACLE_TOL:e}"), &mut lines, &mut checks);
            }
        }
        let cfg = P34Config::for_k(1);
        let (spec, bg) = setup(1, &cfg)?;
        let c = ScalingMap::painleve_s(1.0);
        let sigma: Vec<f64> = (0..=80).map(|i| 2.0 - 0.05 * i as f64).collect();
        let s: Vec<f64> = sigma.iter().map(|x| c * x).collect();
        let (curve, _) = gap_curve(&spec, &bg, &s, &cfg, ROUTE_TOL)?;
        for p in &curve.points {
            let sg = p.s / c;
            if (sg - sg.round()).abs() > 1e-9 {
                continue;
            }
            let f2 = fredholm_det_airy(sg.round(), 60)?.f2;
            let d = (p.log_p.exp() - f2).abs();
            record(format!("tw.fredholm@sigma={sg}"), d < TW_SPOT_TOL, format!("{d:e} < {TW_SPOT_TOL:e}"), &mut lines, &mut checks);
        }
    }
    let total = checks.len();
    lines.push(format!("{} of {total} checks passed", total - failures));
    let mut out = Outcome::new(Body::Text { text: lines.join("\n"), json: json!({ "checks": checks }) })
        .residual("checks", total as f64)
        .residual("failures", failures as f64);
    out.failed = failures > 0;
    Ok(out)
}
