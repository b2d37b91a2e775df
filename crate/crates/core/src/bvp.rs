//! Gauss-Legendre collocation with Newton iteration for scalar ODEs
//! `g(x, u, u', ..., u^(n)) = 0` that are linear in `u^(n)` with a constant coefficient.
//!
//! The ODE is rewritten as the first-order system `y = (u, ..., u^(n-1))`, discretized as an
//! implicit Gauss Runge-Kutta scheme on a given mesh (stage derivatives `K` are unknowns next
//! to the node states `Y`), and the resulting almost block diagonal system is solved with a
//! band LU.

use std::collections::BTreeMap;

use crate::diffpoly::{DiffMonomial, DiffPoly};
use crate::diffpoly::rat_to_f64;
use crate::error::{Error, Result};
use crate::linalg::{BandMatrix, DenseLu};
use crate::quadrature::GaussTableau;

/// `Σ c x^p M(u, u', ...)` with floating coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct XPoly {
    terms: Vec<(f64, u32, DiffMonomial)>,
}

impl XPoly {
    fn from_map(map: BTreeMap<(u32, DiffMonomial), f64>) -> Self {
        XPoly { terms: map.into_iter().filter(|(_, c)| *c != 0.0).map(|((p, m), c)| (c, p, m)).collect() }
    }

    fn to_map(&self) -> BTreeMap<(u32, DiffMonomial), f64> {
        let mut map = BTreeMap::new();
        for (c, p, m) in &self.terms {
            *map.entry((*p, m.clone())).or_insert(0.0) += c;
        }
        map
    }

    pub fn from_diffpoly(p: &DiffPoly, scale: f64) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in p.terms() {
            *map.entry((0, m.clone())).or_insert(0.0) += scale * rat_to_f64(c);
        }
        Self::from_map(map)
    }

    /// `c x^p (u^(order))^e`; `e = 0` gives `c x^p`.
    pub fn monomial(c: f64, xpow: u32, order: u32, e: u32) -> Self {
        XPoly { terms: vec![(c, xpow, DiffMonomial::var(order, e))] }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0, 0)
    }

    pub fn plus(&self, o: &XPoly) -> Self {
        let mut map = self.to_map();
        for (c, p, m) in &o.terms {
            *map.entry((*p, m.clone())).or_insert(0.0) += c;
        }
        Self::from_map(map)
    }

    pub fn total_derivative(&self) -> Self {
        let mut map = BTreeMap::new();
        for (c, p, m) in &self.terms {
            if *p > 0 {
                *map.entry((p - 1, m.clone())).or_insert(0.0) += c * *p as f64;
            }
            for &(j, e) in m.factors() {
                let nm = m.divide_var(j).expect("factor present").mul(&DiffMonomial::var(j + 1, 1));
                *map.entry((*p, nm)).or_insert(0.0) += c * e as f64;
            }
        }
        Self::from_map(map)
    }

    pub fn partial(&self, order: u32) -> Self {
        let mut map = BTreeMap::new();
        for (c, p, m) in &self.terms {
            let e = m.exponent(order);
            if e > 0 {
                *map.entry((*p, m.divide_var(order).expect("factor present"))).or_insert(0.0) += c * e as f64;
            }
        }
        Self::from_map(map)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.iter().filter_map(|(_, _, m)| m.max_order()).max()
    }

    pub fn depends_on_x(&self) -> bool {
        self.terms.iter().any(|(_, p, _)| *p > 0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, p, m)| *p == 0 && m.is_one())
    }

    pub fn eval(&self, x: f64, jet: &[f64]) -> f64 {
        self.terms.iter().map(|(c, p, m)| c * x.powi(*p as i32) * m.eval(jet)).sum()
    }
}

/// Scalar ODE `g = 0` with `g = lead · u^(n) + (terms of lower order)`.
#[derive(Clone, Debug)]
pub struct Ode {
    order: usize,
    lead: f64,
    /// `g, g', g'', ...`, each linear in its top derivative with coefficient `lead`.
    derivs: Vec<XPoly>,
    partials: Vec<XPoly>,
}

impl Ode {
    /// `extra` further derivatives of `g` are prepared for jet extension.
    pub fn new(g: XPoly, extra: usize) -> Result<Self> {
        let order = g.max_order().ok_or_else(|| Error::Invalid("equation has no derivative terms".into()))? as usize;
        if order == 0 {
            return Err(Error::Invalid("algebraic equation, nothing to integrate".into()));
        }
        let lead_poly = g.partial(order as u32);
        if !lead_poly.is_constant() {
            return Err(Error::Invalid("equation is not linear in its top derivative with constant coefficient".into()));
        }
        let lead = lead_poly.eval(0.0, &[]);
        if lead == 0.0 {
            return Err(Error::Invalid("vanishing top coefficient".into()));
        }
        let partials = (0..order).map(|j| g.partial(j as u32)).collect();
        let mut derivs = vec![g];
        for _ in 0..extra {
            let next = derivs.last().expect("nonempty").total_derivative();
            derivs.push(next);
        }
        Ok(Ode { order, lead, derivs, partials })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_jet_depth(&self) -> usize {
        self.order + self.derivs.len() - 1
    }

    pub fn residual_poly(&self) -> &XPoly {
        &self.derivs[0]
    }

    /// `g(x, jet)`; `jet` must reach `u^(n)`.
    pub fn residual(&self, x: f64, jet: &[f64]) -> f64 {
        self.derivs[0].eval(x, jet)
    }

    /// `u^(n)` solved from `y = (u, ..., u^(n-1))`.
    pub fn top(&self, x: f64, y: &[f64]) -> f64 {
        let mut jet = y[..self.order].to_vec();
        jet.push(0.0);
        -self.derivs[0].eval(x, &jet) / self.lead
    }

    /// `∂u^(n)/∂y_j`.
    pub fn top_partials(&self, x: f64, y: &[f64], out: &mut [f64]) {
        let mut jet = y[..self.order].to_vec();
        jet.push(0.0);
        for (j, p) in self.partials.iter().enumerate() {
            out[j] = -p.eval(x, &jet) / self.lead;
        }
    }

    /// `(u, u', ..., u^(depth))` from the state `y`, differentiating the equation as needed.
    pub fn extend_jet(&self, x: f64, y: &[f64], depth: usize) -> Vec<f64> {
        assert!(depth <= self.max_jet_depth(), "jet depth {depth} beyond prepared {}", self.max_jet_depth());
        let mut jet = y[..self.order.min(depth + 1)].to_vec();
        for m in 0..=depth.saturating_sub(self.order) {
            if jet.len() > depth {
                break;
            }
            jet.push(0.0);
            let v = -self.derivs[m].eval(x, &jet) / self.lead;
            *jet.last_mut().expect("pushed") = v;
        }
        jet.truncate(depth + 1);
        jet
    }
}

/// Boundary conditions `y_j = value` at either end.
#[derive(Clone, Debug, Default)]
pub struct Boundary {
    pub left: Vec<(usize, f64)>,
    pub right: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct CollocationOptions {
    pub stages: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CollocationOptions {
    fn default() -> Self {
        CollocationOptions { stages: 4, tol: 1e-11, max_iter: 40 }
    }
}

pub enum Guess<'a> {
    /// Returns `(u, u', ..., u^(n))` at `x`.
    Function(&'a dyn Fn(f64) -> Vec<f64>),
    Warm(&'a BvpSolution),
    /// A full unknown vector laid out like `BvpSolution::unknowns` on the same mesh.
    Unknowns(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct BvpSolution {
    pub mesh: Vec<f64>,
    pub n: usize,
    pub tableau: GaussTableau,
    pub unknowns: Vec<f64>,
    pub newton_residual: f64,
    pub last_step: f64,
    pub iterations: usize,
}

struct Layout {
    n: usize,
    m: usize,
    intervals: usize,
}

impl Layout {
    fn block(&self) -> usize {
        (self.m + 1) * self.n
    }
    fn y(&self, i: usize) -> usize {
        i * self.block()
    }
    fn k(&self, i: usize, j: usize) -> usize {
        i * self.block() + self.n + j * self.n
    }
    fn total(&self) -> usize {
        self.intervals * self.block() + self.n
    }
}

impl BvpSolution {
    fn layout(&self) -> Layout {
        Layout { n: self.n, m: self.tableau.stages(), intervals: self.mesh.len() - 1 }
    }

    pub fn node_state(&self, i: usize) -> &[f64] {
        let at = self.layout().y(i);
        &self.unknowns[at..at + self.n]
    }

    pub fn stage_x(&self, i: usize, j: usize) -> f64 {
        let h = self.mesh[i + 1] - self.mesh[i];
        self.mesh[i] + self.tableau.c[j] * h
    }

    /// Collocation state at stage `j` of interval `i`.
    pub fn stage_state(&self, i: usize, j: usize) -> Vec<f64> {
        let lay = self.layout();
        let h = self.mesh[i + 1] - self.mesh[i];
        let mut z = self.node_state(i).to_vec();
        for l in 0..lay.m {
            let at = lay.k(i, l);
            for c in 0..self.n {
                z[c] += h * self.tableau.a[j][l] * self.unknowns[at + c];
            }
        }
        z
    }

    pub fn node_jet(&self, ode: &Ode, i: usize, depth: usize) -> Vec<f64> {
        ode.extend_jet(self.mesh[i], self.node_state(i), depth)
    }

    pub fn node_jets(&self, ode: &Ode, depth: usize) -> Vec<Vec<f64>> {
        (0..self.mesh.len()).map(|i| self.node_jet(ode, i, depth)).collect()
    }

    pub fn stage_jet(&self, ode: &Ode, i: usize, j: usize, depth: usize) -> Vec<f64> {
        ode.extend_jet(self.stage_x(i, j), &self.stage_state(i, j), depth)
    }

    /// Unknown vector whose node states and stage derivatives come from `f(x, jet)`, where
    /// `jet` is the current solution's jet of depth `depth` at `x` and `f` returns
    /// `(u, ..., u^(n))` there.
    pub fn remap(&self, ode: &Ode, depth: usize, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Vec<f64> {
        let lay = self.layout();
        let n = self.n;
        let mut out = vec![0.0; self.unknowns.len()];
        for i in 0..self.mesh.len() {
            let v = f(self.mesh[i], &self.node_jet(ode, i, depth));
            out[lay.y(i)..lay.y(i) + n].copy_from_slice(&v[..n]);
            if i + 1 < self.mesh.len() {
                for j in 0..lay.m {
                    let v = f(self.stage_x(i, j), &self.stage_jet(ode, i, j, depth));
                    out[lay.k(i, j)..lay.k(i, j) + n].copy_from_slice(&v[1..=n]);
                }
            }
        }
        out
    }

    /// Index of the mesh interval containing `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let (lo, hi) = (self.mesh[0], *self.mesh.last().expect("mesh"));
        if !(lo..=hi).contains(&x) {
            return Err(Error::DomainExceeded { value: x, lo, hi });
        }
        let i = self.mesh.partition_point(|&m| m <= x);
        Ok(i.saturating_sub(1).min(self.mesh.len() - 2))
    }

    /// Derivatives `0..=nderiv` at arbitrary `x` by two-point Hermite interpolation of
    /// node jets of depth `depth`.
    pub fn eval(&self, ode: &Ode, x: f64, depth: usize, nderiv: usize) -> Result<Vec<f64>> {
        let i = self.locate(x)?;
        let a = self.node_jet(ode, i, depth);
        let b = self.node_jet(ode, i + 1, depth);
        let h = self.mesh[i + 1] - self.mesh[i];
        Ok(hermite_eval(&a, &b, h, (x - self.mesh[i]) / h, nderiv))
    }
}

/// Derivatives `0..=nout` at `x + dx` from the Taylor series of `jet` at `x`.
pub fn taylor_shift(jet: &[f64], dx: f64, nout: usize) -> Vec<f64> {
    (0..=nout)
        .map(|j| {
            let mut acc = 0.0;
            let mut coef = 1.0;
            for m in 0..jet.len().saturating_sub(j) {
                if m > 0 {
                    coef *= dx / m as f64;
                }
                acc += jet[j + m] * coef;
            }
            acc
        })
        .collect()
}

/// Largest `|g|` at interval midpoints, with the state there obtained by Taylor-shifting node
/// jets that are `extra` orders deeper than the equation.
pub fn midpoint_defect(g: &XPoly, mesh: &[f64], node_state: impl Fn(usize) -> Vec<f64>, extra: usize) -> Result<f64> {
    let ode = Ode::new(g.clone(), extra)?;
    let n = ode.order();
    let mut worst = 0.0f64;
    for i in 0..mesh.len() - 1 {
        let h = mesh[i + 1] - mesh[i];
        let x = mesh[i];
        let jet = ode.extend_jet(x, &node_state(i), n + extra);
        let mid = taylor_shift(&jet, 0.5 * h, n);
        worst = worst.max(ode.residual(x + 0.5 * h, &mid).abs());
    }
    Ok(worst)
}

/// Two-point Hermite interpolant on `[a, a+h]` matching derivatives `0..=d` at both ends,
/// evaluated with derivatives `0..=nderiv` at `a + t h`.
pub fn hermite_eval(left: &[f64], right: &[f64], h: f64, t: f64, nderiv: usize) -> Vec<f64> {
    let d = left.len().min(right.len());
    let size = 2 * d;
    // basis t^p, p < size; rows: p^(k)(0) and p^(k)(1) scaled by h^k
    let mut mat = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    let mut hk = 1.0;
    for k in 0..d {
        for p in k..size {
            let fall: f64 = (0..k).map(|q| (p - q) as f64).product();
            if p == k {
                mat[k * size + p] = fall;
            }
            mat[(d + k) * size + p] = fall;
        }
        rhs[k] = left[k] * hk;
        rhs[d + k] = right[k] * hk;
        hk *= h;
    }
    let coef = DenseLu::new(mat, size).expect("Hermite system is regular").solve(&rhs);
    let mut out = Vec::with_capacity(nderiv + 1);
    for k in 0..=nderiv {
        let mut v = 0.0;
        for p in k..size {
            let fall: f64 = (0..k).map(|q| (p - q) as f64).product();
            v += coef[p] * fall * t.powi((p - k) as i32);
        }
        out.push(v / h.powi(k as i32));
    }
    out
}

/// Quadrature from two-point Hermite data: integrates the interpolant matching derivatives
/// `0..d` at both ends of each interval.
#[derive(Clone, Debug)]
pub struct HermiteRule {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl HermiteRule {
    /// Closed-form weights `C(m,j) / (2 C(2m+1,j) (j+1)!)` with `m = d - 1`.
    pub fn new(d: usize) -> Self {
        assert!(d >= 1);
        let m = d - 1;
        let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        let mut left = Vec::with_capacity(d);
        let mut right = Vec::with_capacity(d);
        let mut fact = 1.0;
        for j in 0..d {
            fact *= (j + 1) as f64;
            let w = binom(m, j) / (2.0 * binom(2 * m + 1, j) * fact);
            left.push(w);
            right.push(if j % 2 == 0 { w } else { -w });
        }
        HermiteRule { left, right }
    }

    pub fn depth(&self) -> usize {
        self.left.len()
    }

    /// `∫_a^{a+h} f` from derivative lists at both ends.
    pub fn interval(&self, a: &[f64], b: &[f64], h: f64) -> f64 {
        let mut acc = 0.0;
        let mut hk = h;
        for k in 0..self.depth() {
            acc += (self.left[k] * a[k] + self.right[k] * b[k]) * hk;
            hk *= h;
        }
        acc
    }

    /// Composite rule over a mesh with derivative lists at every node.
    pub fn integrate(&self, mesh: &[f64], jets: &[Vec<f64>]) -> f64 {
        (0..mesh.len() - 1).map(|i| self.interval(&jets[i], &jets[i + 1], mesh[i + 1] - mesh[i])).sum()
    }
}

/// Uniform mesh on `[a, b]` with spacing close to `h`, containing every point of `pins`.
pub fn uniform_mesh(a: f64, b: f64, h: f64, pins: &[f64]) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(pins.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let mut mesh = vec![a];
    for w in cuts.windows(2) {
        let steps = ((w[1] - w[0]) / h).round().max(1.0) as usize;
        for s in 1..=steps {
            mesh.push(if s == steps { w[1] } else { w[0] + (w[1] - w[0]) * s as f64 / steps as f64 });
        }
    }
    mesh
}

/// Solves the boundary-value problem by damped Newton iteration.
pub fn solve(ode: &Ode, mesh: &[f64], bc: &Boundary, guess: Guess<'_>, opts: &CollocationOptions) -> Result<BvpSolution> {
    let n = ode.order();
    if bc.left.len() + bc.right.len() != n {
        return Err(Error::Invalid(format!(
            "need {n} boundary conditions, got {} + {}",
            bc.left.len(),
            bc.right.len()
        )));
    }
    if mesh.len() < 2 || mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("mesh must be strictly increasing with at least two nodes".into()));
    }
    let tableau = GaussTableau::new(opts.stages);
    let lay = Layout { n, m: opts.stages, intervals: mesh.len() - 1 };
    let mut u = match guess {
        Guess::Warm(prev) => {
            if prev.mesh != mesh || prev.n != n || prev.tableau.stages() != opts.stages {
                return Err(Error::Invalid("warm start on a different mesh".into()));
            }
            prev.unknowns.clone()
        }
        Guess::Function(f) => initial_unknowns(f, mesh, &tableau, &lay),
        Guess::Unknowns(v) => {
            if v.len() != lay.total() {
                return Err(Error::Invalid("unknown vector of the wrong length".into()));
            }
            v
        }
    };
    let mut res = residual(ode, mesh, bc, &tableau, &lay, &u);
    let mut rnorm = inf_norm(&res);
    let mut last_step = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let jac = jacobian(ode, mesh, bc, &tableau, &lay, &u);
        let delta = jac.solve(&res)?;
        let dnorm = inf_norm(&delta);
        if dnorm <= opts.tol * (1.0 + inf_norm(&u)) {
            // at round-off level the residual need not decrease any more
            for (a, d) in u.iter_mut().zip(&delta) {
                *a -= d;
            }
            let res = residual(ode, mesh, bc, &tableau, &lay, &u);
            return Ok(BvpSolution {
                mesh: mesh.to_vec(),
                n,
                tableau,
                unknowns: u,
                newton_residual: inf_norm(&res),
                last_step: dnorm,
                iterations: iter + 1,
            });
        }
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
            let tres = residual(ode, mesh, bc, &tableau, &lay, &trial);
            let tnorm = inf_norm(&tres);
            if tnorm.is_finite() && (tnorm <= (1.0 - 0.25 * lambda) * rnorm || tnorm < 1e-13 || lambda < 1.0 / 1024.0) {
                if lambda < 1.0 / 1024.0 && tnorm > rnorm {
                    return Err(Error::NoConvergence(format!(
                        "line search stalled at iteration {iter}, residual {rnorm:e}"
                    )));
                }
                u = trial;
                res = tres;
                rnorm = tnorm;
                break;
            }
            lambda *= 0.5;
        }
        last_step = lambda * dnorm;
    }
    Err(Error::NoConvergence(format!(
        "no convergence in {} iterations (residual {rnorm:e}, last step {last_step:e})",
        opts.max_iter
    )))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b.abs()) })
}

fn initial_unknowns(f: &dyn Fn(f64) -> Vec<f64>, mesh: &[f64], tab: &GaussTableau, lay: &Layout) -> Vec<f64> {
    let n = lay.n;
    let mut u = vec![0.0; lay.total()];
    for (i, &x) in mesh.iter().enumerate() {
        let g = f(x);
        u[lay.y(i)..lay.y(i) + n].copy_from_slice(&g[..n]);
        if i + 1 < mesh.len() {
            let h = mesh[i + 1] - x;
            for j in 0..lay.m {
                let g = f(x + tab.c[j] * h);
                u[lay.k(i, j)..lay.k(i, j) + n].copy_from_slice(&g[1..=n]);
            }
        }
    }
    u
}

fn residual(ode: &Ode, mesh: &[f64], bc: &Boundary, tab: &GaussTableau, lay: &Layout, u: &[f64]) -> Vec<f64> {
    let (n, m) = (lay.n, lay.m);
    let pa = bc.left.len();
    let mut r = vec![0.0; lay.total()];
    for (q, &(c, v)) in bc.left.iter().enumerate() {
        r[q] = u[lay.y(0) + c] - v;
    }
    let mut z = vec![0.0; n];
    for i in 0..lay.intervals {
        let h = mesh[i + 1] - mesh[i];
        let base = pa + i * lay.block();
        let y = &u[lay.y(i)..lay.y(i) + n];
        for j in 0..m {
            z.copy_from_slice(y);
            for l in 0..m {
                let k = &u[lay.k(i, l)..lay.k(i, l) + n];
                for c in 0..n {
                    z[c] += h * tab.a[j][l] * k[c];
                }
            }
            let x = mesh[i] + tab.c[j] * h;
            let kj = &u[lay.k(i, j)..lay.k(i, j) + n];
            for c in 0..n - 1 {
                r[base + j * n + c] = kj[c] - z[c + 1];
            }
            r[base + j * n + n - 1] = kj[n - 1] - ode.top(x, &z);
        }
        let y_next = &u[lay.y(i + 1)..lay.y(i + 1) + n];
        for c in 0..n {
            let mut incr = 0.0;
            for j in 0..m {
                incr += tab.b[j] * u[lay.k(i, j) + c];
            }
            r[base + m * n + c] = y_next[c] - y[c] - h * incr;
        }
    }
    let last = lay.y(lay.intervals);
    let base = pa + lay.intervals * lay.block();
    for (q, &(c, v)) in bc.right.iter().enumerate() {
        r[base + q] = u[last + c] - v;
    }
    r
}

fn jacobian(ode: &Ode, mesh: &[f64], bc: &Boundary, tab: &GaussTableau, lay: &Layout, u: &[f64]) -> BandMatrix {
    let (n, m) = (lay.n, lay.m);
    let pa = bc.left.len();
    let kl = pa + lay.block() + n;
    let ku = lay.block() + n;
    let mut jac = BandMatrix::zeros(lay.total(), kl, ku);
    for (q, &(c, _)) in bc.left.iter().enumerate() {
        jac.add(q, lay.y(0) + c, 1.0);
    }
    let mut z = vec![0.0; n];
    let mut dtop = vec![0.0; n];
    for i in 0..lay.intervals {
        let h = mesh[i + 1] - mesh[i];
        let base = pa + i * lay.block();
        let yi = lay.y(i);
        for j in 0..m {
            z.copy_from_slice(&u[yi..yi + n]);
            for l in 0..m {
                for c in 0..n {
                    z[c] += h * tab.a[j][l] * u[lay.k(i, l) + c];
                }
            }
            let x = mesh[i] + tab.c[j] * h;
            ode.top_partials(x, &z, &mut dtop);
            for c in 0..n {
                let row = base + j * n + c;
                jac.add(row, lay.k(i, j) + c, 1.0);
                if c < n - 1 {
                    // -z_{c+1}
                    jac.add(row, yi + c + 1, -1.0);
                    for l in 0..m {
                        jac.add(row, lay.k(i, l) + c + 1, -h * tab.a[j][l]);
                    }
                } else {
                    for d in 0..n {
                        if dtop[d] == 0.0 {
                            continue;
                        }
                        jac.add(row, yi + d, -dtop[d]);
                        for l in 0..m {
                            jac.add(row, lay.k(i, l) + d, -h * tab.a[j][l] * dtop[d]);
                        }
                    }
                }
            }
        }
        for c in 0..n {
            let row = base + m * n + c;
            jac.add(row, lay.y(i + 1) + c, 1.0);
            jac.add(row, yi + c, -1.0);
            for j in 0..m {
                jac.add(row, lay.k(i, j) + c, -h * tab.b[j]);
            }
        }
    }
    let last = lay.y(lay.intervals);
    let base = pa + lay.intervals * lay.block();
    for (q, &(c, _)) in bc.right.iter().enumerate() {
        jac.add(base + q, last + c, 1.0);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    /// u'' = -u on [0, π/2], u(0) = 0, u(π/2) = 1 → sin.
    #[test]
    fn linear_problem_recovers_sine() {
        let g = XPoly::monomial(1.0, 0, 2, 1).plus(&XPoly::monomial(1.0, 0, 0, 1));
        let ode = Ode::new(g, 2).unwrap();
        let mesh = uniform_mesh(0.0, std::f64::consts::FRAC_PI_2, 0.1, &[]);
        let bc = Boundary { left: vec![(0, 0.0)], right: vec![(0, 1.0)] };
        let guess = |x: f64| vec![x, 1.0, 0.0];
        let sol = solve(&ode, &mesh, &bc, Guess::Function(&guess), &CollocationOptions::default()).unwrap();
        for i in 0..mesh.len() {
            let jet = sol.node_jet(&ode, i, 4);
            let x = mesh[i];
            let exact = [x.sin(), x.cos(), -x.sin(), -x.cos(), x.sin()];
            for k in 0..5 {
                assert!((jet[k] - exact[k]).abs() < 1e-11, "node {i} order {k}");
            }
        }
        let v = sol.eval(&ode, 0.123, 3, 1).unwrap();
        assert!((v[0] - 0.123f64.sin()).abs() < 1e-12 && (v[1] - 0.123f64.cos()).abs() < 1e-11);
    }

    /// Bratu-type nonlinear problem u'' + e^u ... replaced by u'' = u^2 - x with explicit x.
    #[test]
    fn nonlinear_problem_converges_quadratically() {
        // u'' - 6u^2 = 0 has u = 1/x^2; on [1, 2] with u(1) = 1, u(2) = 1/4.
        let g = XPoly::monomial(1.0, 0, 2, 1).plus(&XPoly::monomial(-6.0, 0, 0, 2));
        let ode = Ode::new(g, 1).unwrap();
        let mesh = uniform_mesh(1.0, 2.0, 0.05, &[]);
        let bc = Boundary { left: vec![(0, 1.0)], right: vec![(0, 0.25)] };
        let guess = |x: f64| vec![1.75 - 0.75 * x, -0.75, 0.0];
        let sol = solve(&ode, &mesh, &bc, Guess::Function(&guess), &CollocationOptions::default()).unwrap();
        for (i, &x) in mesh.iter().enumerate() {
            assert!((sol.node_state(i)[0] - 1.0 / (x * x)).abs() < 1e-11);
        }
        assert!(sol.iterations < 12);
    }

    #[test]
    fn jets_use_explicit_x_terms() {
        // Airy: u'' - x u = 0; third derivative is u + x u'.
        let g = XPoly::monomial(1.0, 0, 2, 1).plus(&XPoly::monomial(-1.0, 1, 0, 1));
        let ode = Ode::new(g, 2).unwrap();
        let jet = ode.extend_jet(2.0, &[3.0, 5.0], 4);
        assert_eq!(jet[2], 6.0);
        assert_eq!(jet[3], 3.0 + 2.0 * 5.0);
        // u'''' = 2u' + x u''
        assert_eq!(jet[4], 2.0 * 5.0 + 2.0 * 6.0);
    }

    #[test]
    fn hermite_reproduces_polynomials() {
        let f = |x: f64| vec![x.powi(5), 5.0 * x.powi(4), 20.0 * x.powi(3)];
        let v = hermite_eval(&f(1.0), &f(1.5), 0.5, 0.3, 2);
        let e = f(1.15);
        for k in 0..3 {
            assert!((v[k] - e[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_rule_is_high_order() {
        let rule = HermiteRule::new(4);
        // trapezoid-with-endpoint-corrections weights
        assert!((rule.left[0] - 0.5).abs() < 1e-14 && (rule.left[1] - 3.0 / 28.0).abs() < 1e-15);
        let mesh = uniform_mesh(0.0, 2.0, 0.25, &[]);
        let jets: Vec<Vec<f64>> = mesh.iter().map(|x| vec![x.exp(); 4]).collect();
        let v = rule.integrate(&mesh, &jets);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-11, "{:e}", v - (2f64.exp() - 1.0));
    }

    #[test]
    fn taylor_shift_of_exponential() {
        let jet = vec![1.0; 16];
        let v = taylor_shift(&jet, 0.1, 2);
        for x in v {
            assert!((x - 0.1f64.exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_contains_pins() {
        let m = uniform_mesh(-4.0, 3.0, 0.3, &[0.0]);
        assert!(m.contains(&0.0));
        assert_eq!(m[0], -4.0);
        assert_eq!(*m.last().unwrap(), 3.0);
    }
}
