//! The P34 hierarchy equation `𝓛'_{k+1} - 4s𝓛'_k = x u' + 2u - 2s` on `[-left, right]`.
//!
//! Left end: `u` and its first `k` derivatives match the background. Right end, beyond the
//! point where `u_inf = s`: `u^(j) = 0` for `j = 1..=k`, since `u = s` solves the equation.

use crate::bvp::{self, Boundary, BvpSolution, CollocationOptions, Guess, Ode, XPoly};
use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::taylor::Taylor;

use super::{BackgroundSolution, HierarchySpec, P34Config};

const BLEND_WIDTH: f64 = 0.3;
const MIDPOINT_EXTRA: usize = 12;

#[derive(Clone, Debug)]
pub struct SolutionGrid {
    pub k: usize,
    pub s: f64,
    pub mesh: Vec<f64>,
    /// Index of `mesh[0]` in the background mesh.
    pub offset: usize,
    pub sol: BvpSolution,
    pub ode: Ode,
    pub converged: bool,
    pub newton_residual: f64,
    /// `(u, ..., u^(2k+3))` at every node.
    pub jets: Vec<Vec<f64>>,
}

impl SolutionGrid {
    pub fn depth(&self) -> usize {
        self.jets[0].len() - 1
    }

    pub fn values(&self) -> Vec<f64> {
        self.jets.iter().map(|j| j[0]).collect()
    }

    /// Node jets of depth `depth` (recomputed from the equation when deeper than stored).
    pub fn node_jets(&self, depth: usize) -> Vec<Vec<f64>> {
        if depth <= self.depth() {
            return self.jets.iter().map(|j| j[..=depth].to_vec()).collect();
        }
        self.sol.node_jets(&self.ode, depth)
    }

    /// Largest residual of the equation at interval midpoints, reached by Taylor expansion of
    /// deep node jets.
    pub fn midpoint_residual(&self) -> f64 {
        bvp::midpoint_defect(self.ode.residual_poly(), &self.mesh, |i| self.sol.node_state(i).to_vec(), MIDPOINT_EXTRA)
            .unwrap_or(f64::INFINITY)
    }

    /// `u - u_inf` at the nodes.
    pub fn deviation(&self, bg: &BackgroundSolution) -> Vec<f64> {
        self.jets.iter().enumerate().map(|(i, j)| j[0] - bg.jets[self.offset + i][0]).collect()
    }
}

/// Residual polynomial of the P34 equation at parameter `s`.
pub fn p34_ode(spec: &HierarchySpec, s: f64, extra: usize) -> Result<Ode> {
    let k = spec.k;
    let g = XPoly::from_diffpoly(&spec.lenard.primes[k + 1], 1.0)
        .plus(&XPoly::from_diffpoly(&spec.lenard.primes[k], -4.0 * s))
        .plus(&XPoly::monomial(-1.0, 1, 1, 1))
        .plus(&XPoly::monomial(-2.0, 0, 0, 1))
        .plus(&XPoly::constant(2.0 * s));
    Ode::new(g, extra)
}

/// Mesh of the background (with margins) and the node range used by the P34 solve.
pub fn meshes(cfg: &P34Config) -> (Vec<f64>, std::ops::Range<usize>) {
    let lo = -cfg.left - cfg.margin;
    let hi = cfg.right + cfg.margin;
    let full = bvp::uniform_mesh(lo, hi, cfg.h, &[-cfg.left, 0.0, cfg.right]);
    let a = full.iter().position(|&x| x == -cfg.left).expect("pinned");
    let b = full.iter().position(|&x| x == cfg.right).expect("pinned");
    (full, a..b + 1)
}

fn options(cfg: &P34Config) -> CollocationOptions {
    CollocationOptions { stages: cfg.stages, tol: cfg.tol, max_iter: cfg.max_iter }
}

fn jet_depth(k: usize) -> usize {
    2 * k + 3
}

/// Soft minimum of `u_inf` and `s`.
fn blend_guess(bg: &BackgroundSolution, s: f64, x: f64, n: usize) -> Vec<f64> {
    let d = bg.eval(x, n).expect("guess inside background mesh");
    let z = Taylor::from_derivatives(&d).add_const(-s);
    let soft = z.scale(1.0 / BLEND_WIDTH).softplus().scale(BLEND_WIDTH);
    (&z - &soft).add_const(s).derivatives()
}

/// Euler predictor along `∂_s u = ∂_x(x - 2𝓛_k[u])`, exact in `s` to first order.
fn predict(spec: &HierarchySpec, grid: &SolutionGrid, s_new: f64) -> Vec<f64> {
    let k = spec.k;
    let n = grid.ode.order();
    let ds = s_new - grid.s;
    // ∂_x^j of the flow needs 𝓛_k^(j+1), j <= n
    let derivs: Vec<DiffPoly> = (1..=n + 1).map(|j| spec.lk().nth_derivative(j)).collect();
    let depth = 2 * k - 2 + n + 1;
    grid.sol.remap(&grid.ode, depth, |_, jet| {
        (0..=n)
            .map(|j| {
                let flow = -2.0 * derivs[j].eval_jet(jet).expect("jet deep enough") + if j == 0 { 1.0 } else { 0.0 };
                jet[j] + ds * flow
            })
            .collect()
    })
}

/// Solves at one `s`, from a warm start when given (predicted along the flow in `s`).
pub fn p34_solve(
    spec: &HierarchySpec,
    s: f64,
    bg: &BackgroundSolution,
    warm: Option<&SolutionGrid>,
    cfg: &P34Config,
) -> Result<SolutionGrid> {
    let k = spec.k;
    if bg.k != k {
        return Err(Error::Invalid(format!("background for k = {} used with k = {k}", bg.k)));
    }
    let a = bg.node_index(-cfg.left).ok_or_else(|| Error::Invalid("background mesh lacks the left end".into()))?;
    let b = bg.node_index(cfg.right).ok_or_else(|| Error::Invalid("background mesh lacks the right end".into()))?;
    let mesh = bg.mesh[a..=b].to_vec();
    let ode = p34_ode(spec, s, 2 * k)?;
    let left = &bg.jets[a];
    if left.len() < k + 1 {
        return Err(Error::JetTooShort { need: k + 1, got: left.len() });
    }
    let bc = Boundary {
        left: (0..=k).map(|j| (j, left[j])).collect(),
        right: (1..=k).map(|j| (j, 0.0)).collect(),
    };
    let opts = options(cfg);
    let sol = match warm {
        Some(w) => {
            if w.k != k || w.mesh != mesh {
                return Err(Error::Invalid("warm start from a different grid".into()));
            }
            bvp::solve(&ode, &mesh, &bc, Guess::Unknowns(predict(spec, w, s)), &opts)?
        }
        None => {
            let n = ode.order();
            let guess = |x: f64| blend_guess(bg, s, x, n);
            bvp::solve(&ode, &mesh, &bc, Guess::Function(&guess), &opts)?
        }
    };
    let jets = sol.node_jets(&ode, jet_depth(k));
    let grid = SolutionGrid {
        k,
        s,
        offset: a,
        converged: true,
        newton_residual: sol.newton_residual,
        mesh,
        sol,
        ode,
        jets,
    };
    check_matching_window(&grid, bg)?;
    Ok(grid)
}

/// `|u - u_inf|` must not grow towards the left end over the outer 10% of `[-left, 0]`.
fn check_matching_window(grid: &SolutionGrid, bg: &BackgroundSolution) -> Result<()> {
    let dev = grid.deviation(bg);
    let x0 = grid.mesh[0];
    let edge = x0 + 0.1 * (-x0);
    let count = grid.mesh.iter().take_while(|&&x| x <= edge).count();
    for i in 0..count.saturating_sub(1) {
        if dev[i].abs() > dev[i + 1].abs() + 1e-10 {
            return Err(Error::MatchingWindowViolated(format!(
                "|u - u_inf| grows towards the left end at x = {} ({:e} > {:e})",
                grid.mesh[i],
                dev[i].abs(),
                dev[i + 1].abs()
            )));
        }
    }
    Ok(())
}

/// Solutions at every target, descending in `s`, each warm-started from its predecessor.
/// A failed step is halved down to `cfg.min_step`.
pub fn p34_continuation(
    spec: &HierarchySpec,
    bg: &BackgroundSolution,
    targets: &[f64],
    cfg: &P34Config,
) -> Result<Vec<SolutionGrid>> {
    if targets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("continuation targets must be strictly descending".into()));
    }
    let mut out: Vec<SolutionGrid> = Vec::with_capacity(targets.len());
    let Some(&first) = targets.first() else {
        return Ok(out);
    };
    let mut current = p34_solve(spec, first, bg, None, cfg)?;
    out.push(current.clone());
    for &target in &targets[1..] {
        let mut step = (current.s - target).min(cfg.max_step);
        while current.s > target {
            let next = (current.s - step).max(target);
            match p34_solve(spec, next, bg, Some(&current), cfg) {
                Ok(g) => {
                    current = g;
                    step = (step * 1.5).min(cfg.max_step);
                }
                Err(e @ (Error::NoConvergence(_) | Error::MatchingWindowViolated(_))) => {
                    step /= 2.0;
                    if step < cfg.min_step {
                        return Err(Error::NoConvergence(format!(
                            "continuation stalled at s = {} towards {target}: {e}",
                            current.s
                        )));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        out.push(current.clone());
    }
    Ok(out)
}
