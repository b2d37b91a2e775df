//! `log P(s) = -∫_{-∞}^0 (x/2)(u - u_inf) dx` and its `s`-derivative
//! `-∫_{-∞}^0 (𝓛_k[u] - x/2) dx`, plus the finite-difference cross-check.

use serde::{Deserialize, Serialize};

use crate::bvp::HermiteRule;
use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};

use super::{p34_continuation, BackgroundSolution, HierarchySpec, P34Config, SolutionGrid};

const QUAD_DEPTH: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    pub log_p: f64,
    /// Integral route for `d/ds log P`.
    pub dlog_p: f64,
    /// Bound on the neglected contribution from `x < -left`.
    pub tail_bound: f64,
    pub newton_residual: f64,
    pub equation_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub k: usize,
    /// Ascending.
    pub s: Vec<f64>,
    pub log_p: Vec<f64>,
    /// `d/ds log P` by the integral formula.
    pub dlog_p: Vec<f64>,
    /// `d/ds log P` by finite differences of `log_p`.
    pub dlog_p_fd: Vec<f64>,
    pub pdf: Vec<f64>,
    pub points: Vec<GapPoint>,
}

impl GapCurve {
    pub fn route_discrepancy(&self) -> f64 {
        self.dlog_p.iter().zip(&self.dlog_p_fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.log_p.iter().map(|v| v.exp()).collect()
    }
}

/// `(log P, d/ds log P, tail bound)` for one solved profile.
pub fn gap_integrals(spec: &HierarchySpec, grid: &SolutionGrid, bg: &BackgroundSolution) -> Result<(f64, f64, f64)> {
    let zero = grid
        .mesh
        .iter()
        .position(|&x| x == 0.0)
        .ok_or_else(|| Error::Invalid("solution mesh lacks the node x = 0".into()))?;
    let rule = HermiteRule::new(QUAD_DEPTH);
    let lk_derivs: Vec<DiffPoly> = (0..QUAD_DEPTH).map(|j| spec.lk().nth_derivative(j)).collect();
    let mut f_jets = Vec::with_capacity(zero + 1);
    let mut g_jets = Vec::with_capacity(zero + 1);
    for i in 0..=zero {
        let x = grid.mesh[i];
        let u = &grid.jets[i];
        let b = &bg.jets[grid.offset + i];
        let delta: Vec<f64> = (0..QUAD_DEPTH).map(|j| u[j] - b[j]).collect();
        let f: Vec<f64> = (0..QUAD_DEPTH)
            .map(|j| 0.5 * x * delta[j] + if j > 0 { 0.5 * j as f64 * delta[j - 1] } else { 0.0 })
            .collect();
        let mut g = Vec::with_capacity(QUAD_DEPTH);
        for (j, p) in lk_derivs.iter().enumerate() {
            let v = p.eval_jet(u)?;
            g.push(match j {
                0 => v - 0.5 * x,
                1 => v - 0.5,
                _ => v,
            });
        }
        f_jets.push(f);
        g_jets.push(g);
    }
    let mesh = &grid.mesh[..=zero];
    let log_p = -rule.integrate(mesh, &f_jets);
    let dlog_p = -rule.integrate(mesh, &g_jets);
    // outer tenth of the domain bounds what lies beyond
    let x0 = mesh[0];
    let window = mesh.iter().take_while(|&&x| x <= 0.9 * x0).count().max(2);
    let tail_bound = (0..window).map(|i| f_jets[i][0].abs() + g_jets[i][0].abs()).fold(0.0, f64::max) * 0.1 * (-x0);
    Ok((log_p, dlog_p, tail_bound))
}

/// Derivative at `xs[i]` of the interpolating polynomial through up to five neighbours.
pub fn stencil_derivative(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    let width = 5.min(n);
    let start = i.saturating_sub(width / 2).min(n - width);
    let idx: Vec<usize> = (start..start + width).collect();
    let x0 = xs[i];
    let mut d = 0.0;
    for &a in &idx {
        // ℓ_a'(x0)
        let mut deriv = 0.0;
        for &b in &idx {
            if b == a {
                continue;
            }
            let mut term = 1.0 / (xs[a] - xs[b]);
            for &c in &idx {
                if c != a && c != b {
                    term *= (x0 - xs[c]) / (xs[a] - xs[c]);
                }
            }
            deriv += term;
        }
        d += ys[a] * deriv;
    }
    d
}

/// Gap curve on `s_grid` (any order; solved in descending order by continuation).
/// Fails with `CrossCheckFailed` when the two derivative routes differ by more than `cross_tol`.
pub fn gap_curve(
    spec: &HierarchySpec,
    bg: &BackgroundSolution,
    s_grid: &[f64],
    cfg: &P34Config,
    cross_tol: f64,
) -> Result<(GapCurve, Vec<SolutionGrid>)> {
    let mut desc = s_grid.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    desc.dedup();
    if desc.len() < 2 {
        return Err(Error::Invalid("gap curve needs at least two s values".into()));
    }
    let grids = p34_continuation(spec, bg, &desc, cfg)?;
    let mut points = Vec::with_capacity(grids.len());
    for g in grids.iter().rev() {
        let (log_p, dlog_p, tail_bound) = gap_integrals(spec, g, bg)?;
        points.push(GapPoint {
            s: g.s,
            log_p,
            dlog_p,
            tail_bound,
            newton_residual: g.newton_residual,
            equation_residual: g.midpoint_residual(),
        });
    }
    let s: Vec<f64> = points.iter().map(|p| p.s).collect();
    let log_p: Vec<f64> = points.iter().map(|p| p.log_p).collect();
    let dlog_p: Vec<f64> = points.iter().map(|p| p.dlog_p).collect();
    let dlog_p_fd: Vec<f64> = (0..s.len()).map(|i| stencil_derivative(&s, &log_p, i)).collect();
    let pdf = log_p.iter().zip(&dlog_p).map(|(l, d)| l.exp() * d).collect();
    let curve = GapCurve { k: spec.k, s, log_p, dlog_p, dlog_p_fd, pdf, points };
    let gap = curve.route_discrepancy();
    if gap > cross_tol {
        return Err(Error::CrossCheckFailed(format!(
            "integral and finite-difference d/ds log P differ by {gap:e} (tolerance {cross_tol:e})"
        )));
    }
    let mut grids = grids;
    grids.reverse();
    Ok((curve, grids))
}

/// Nodes this close to the right end are left out of the flow check: the truncation
/// conditions there hold for each `s` separately, not along the flow.
pub const FLOW_EDGE_LAYER: f64 = 8.0;

/// Largest `|(u(s_a) - u(s_b))/(s_a - s_b) - ∂_x(x - 2𝓛_k[u])|` over shared nodes up to
/// `FLOW_EDGE_LAYER` before the right end, with the right side averaged over both profiles.
pub fn flow_consistency(spec: &HierarchySpec, a: &SolutionGrid, b: &SolutionGrid) -> Result<f64> {
    if a.mesh != b.mesh {
        return Err(Error::Invalid("profiles on different meshes".into()));
    }
    let lkp = &spec.lenard.primes[spec.k];
    let ds = a.s - b.s;
    let last = a.mesh[a.mesh.len() - 1] - FLOW_EDGE_LAYER;
    let mut worst = 0.0f64;
    for i in (0..a.mesh.len()).take_while(|&i| a.mesh[i] <= last) {
        let lhs = (a.jets[i][0] - b.jets[i][0]) / ds;
        let ra = 1.0 - 2.0 * lkp.eval_jet(&a.jets[i])?;
        let rb = 1.0 - 2.0 * lkp.eval_jet(&b.jets[i])?;
        worst = worst.max((lhs - 0.5 * (ra + rb)).abs());
    }
    Ok(worst)
}
