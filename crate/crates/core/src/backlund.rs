//! Bäcklund chain on solved P34 profiles: `K = 2𝓛_k[u] - x = 2ψ²`, `ψ'' + (u - s)ψ = 0`,
//! `W = -ψ'/ψ` and the equation `(d + 2W)𝓛_k[W' - W² + s] = xW + 1/2`.
//!
//! On the physical solutions `K < 0`, so `ψ = iφ` with real `φ = sqrt(-K/2)`. Every relation
//! checked here is linear or logarithmic in `ψ`, hence holds for `φ` unchanged, and `W` is real.

use serde::{Deserialize, Serialize};

use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::painleve::{HierarchySpec, HmProfile, SolutionGrid};
use crate::taylor::{eval_diffpoly, Taylor};

pub use crate::lenard::{beta_scale, tau_profile};

#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    /// Nodes with `|K| < k_floor · max|K|` are left out: `ψ` is exponentially small there and
    /// ratios such as `ψ''/ψ` lose all digits.
    pub k_floor: f64,
    /// Accept `K < 0` by working with `ψ = iφ`. When false, `K < 0` is an error.
    pub allow_imaginary: bool,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { k_floor: 1e-6, allow_imaginary: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacklundChain {
    pub k: usize,
    pub s: f64,
    pub x_grid: Vec<f64>,
    /// `|ψ|`; `ψ` itself is `i·psi` when `imaginary`.
    pub psi: Vec<f64>,
    pub imaginary: bool,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub residual_schrodinger: f64,
    pub residual_weqn: f64,
    /// Sup of `|K K'' - K'^2/2 + 2(u - s)K^2|` over all nodes.
    pub residual_first_integral: f64,
    pub k_sup: f64,
    /// `U''/U - (q' + q^2)` with `U = -ψ`, `q = -W` at the shifted argument.
    pub residual_u_relation: f64,
}

impl BacklundChain {
    /// First-integral residual scaled by `1 + ‖K‖²`.
    pub fn first_integral_relative(&self) -> f64 {
        self.residual_first_integral / (1.0 + self.k_sup * self.k_sup)
    }
}

/// Taylor series of `K = 2𝓛_k[u] - x` at `x` from a `u` jet.
fn k_series(lk: &DiffPoly, x: f64, jet: &[f64]) -> Taylor {
    let u = Taylor::from_derivatives(jet);
    let l = eval_diffpoly(lk, &u);
    &l.scale(2.0) - &Taylor::variable(x, l.order())
}

/// `K K'' - K'^2/2 + 2(u - s)K^2` at every node.
pub fn first_integral(spec: &HierarchySpec, grid: &SolutionGrid) -> Result<Vec<f64>> {
    let lk = spec.lk();
    let need = 2 * spec.k;
    let jets = grid.node_jets(need);
    jets.iter()
        .zip(&grid.mesh)
        .map(|(jet, &x)| {
            let kd = k_series(lk, x, jet).derivatives();
            Ok(kd[0] * kd[2] - 0.5 * kd[1] * kd[1] + 2.0 * (jet[0] - grid.s) * kd[0] * kd[0])
        })
        .collect()
}

/// Builds the chain on the nodes of a solved profile.
pub fn chain_from_solution(spec: &HierarchySpec, grid: &SolutionGrid, opts: &ChainOptions) -> Result<BacklundChain> {
    let k = spec.k;
    if grid.k != k || !grid.converged {
        return Err(Error::Invalid("chain needs a converged profile of the same order".into()));
    }
    let lk = spec.lk();
    // K to order 2k+1 needs u to order 4k-1
    let jets = grid.node_jets(4 * k - 1);
    let series: Vec<Taylor> = jets.iter().zip(&grid.mesh).map(|(j, &x)| k_series(lk, x, j)).collect();
    let k_sup = series.iter().map(|t| t.value().abs()).fold(0.0, f64::max);
    let fi = first_integral(spec, grid)?;
    let residual_first_integral = fi.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let keep: Vec<usize> = (0..series.len()).filter(|&i| series[i].value().abs() >= opts.k_floor * k_sup).collect();
    if keep.is_empty() {
        return Err(Error::Invalid("K vanishes on the whole grid".into()));
    }
    let sign = series[keep[0]].value().signum();
    for w in keep.windows(2) {
        let (a, b) = (series[w[0]].value(), series[w[1]].value());
        if a.signum() != b.signum() {
            return Err(Error::PoleOfW { x: 0.5 * (grid.mesh[w[0]] + grid.mesh[w[1]]) });
        }
    }
    if sign < 0.0 && !opts.allow_imaginary {
        return Err(Error::NegativeRadicand { from: grid.mesh[keep[0]], to: grid.mesh[*keep.last().expect("nonempty")] });
    }

    let mut x_grid = Vec::with_capacity(keep.len());
    let mut psi = Vec::with_capacity(keep.len());
    let mut w = Vec::with_capacity(keep.len());
    let mut w_prime = Vec::with_capacity(keep.len());
    let (mut r_s, mut r_w, mut r_u) = (0.0f64, 0.0f64, 0.0f64);
    for &i in &keep {
        let x = grid.mesh[i];
        let kt = &series[i];
        let phi = kt.scale(0.5 * sign).signed_pow(0.5);
        let kd = kt.diff();
        let short = Taylor { c: kt.c[..kd.c.len()].to_vec() };
        let wt = (&kd * &short.recip()).scale(-0.5);
        let u = jets[i][0];
        let pd = phi.derivatives();
        r_s = r_s.max((pd[2] + (u - grid.s) * pd[0]).abs());
        // V = W' - W^2 + s
        let wd = wt.diff();
        let wshort = Taylor { c: wt.c[..wd.c.len()].to_vec() };
        let v = (&wd - &(&wshort * &wshort)).add_const(grid.s);
        let lv = eval_diffpoly(lk, &v);
        let lvd = lv.derivatives();
        let wv = wt.derivatives();
        r_w = r_w.max((lvd[1] + 2.0 * wv[0] * lvd[0] - x * wv[0] - 0.5).abs());
        // U''/U = ψ''/ψ against q' + q^2 = -W' + W^2
        r_u = r_u.max((pd[2] / pd[0] - (-wv[1] + wv[0] * wv[0])).abs());
        x_grid.push(x);
        psi.push(pd[0]);
        w.push(wv[0]);
        w_prime.push(wv[1]);
    }
    Ok(BacklundChain {
        k,
        s: grid.s,
        x_grid,
        psi,
        imaginary: sign < 0.0,
        w,
        w_prime,
        residual_schrodinger: r_s,
        residual_weqn: r_w,
        residual_first_integral,
        k_sup,
        residual_u_relation: r_u,
    })
}

/// For `k = 1`: largest `|W(x) - 2^{-1/3} q'(t)/q(t)|`, `t = 2^{2/3}s - 2^{-1/3}x`, over chain
/// nodes whose `t` lies inside the Hastings-McLeod profile.
pub fn compare_with_hastings_mcleod(chain: &BacklundChain, hm: &HmProfile) -> Result<(f64, usize)> {
    if chain.k != 1 {
        return Err(Error::Invalid("Hastings-McLeod comparison is defined for k = 1".into()));
    }
    let c = 2f64.powf(-1.0 / 3.0);
    let mut worst = 0.0f64;
    let mut used = 0;
    for (&x, &w) in chain.x_grid.iter().zip(&chain.w) {
        let t = 2f64.powf(2.0 / 3.0) * chain.s - c * x;
        if t < hm.x_min() || t > hm.x_max() - 1.0 {
            continue;
        }
        let q = hm.eval(t, 1)?;
        worst = worst.max((w - c * q[1] / q[0]).abs());
        used += 1;
    }
    Ok((worst, used))
}

/// The shifted transcendent `-W(x + τ_0(βs), s)` on the chain nodes, returned as
/// `(x, q, q', q'')` with derivatives from the chain's `W` series. For `k = 1` it satisfies
/// `q'' = 2q^3 + xq - 1/2`.
pub fn shifted_transcendent(spec: &HierarchySpec, grid: &SolutionGrid, chain: &BacklundChain) -> Result<Vec<[f64; 4]>> {
    let k = spec.k;
    let tau0 = tau_profile(k, beta_scale(k) * grid.s)[0];
    let lk = spec.lk();
    let jets = grid.node_jets(2 * k + 1);
    let mut out = Vec::new();
    for (i, &x) in grid.mesh.iter().enumerate() {
        if !chain.x_grid.contains(&x) {
            continue;
        }
        let kt = k_series(lk, x, &jets[i]);
        let kd = kt.diff();
        let short = Taylor { c: kt.c[..kd.c.len()].to_vec() };
        let wt = (&kd * &short.recip()).scale(-0.5).derivatives();
        out.push([x - tau0, -wt[0], -wt[1], -wt[2]]);
    }
    Ok(out)
}
