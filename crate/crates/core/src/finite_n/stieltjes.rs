//! Orthonormal polynomials for the weight `e^{-α̂V(λ)}` on `(-∞, y]` by the discretized
//! Stieltjes procedure.
//!
//! The integrand `e^{-α̂V} p(λ)` is entire and the wall at `y` is a plain endpoint, so a
//! composite Gauss-Legendre rule on `[a, min(y, b)]` converges geometrically. The cutoffs
//! `a` (and `b` when the weight decays upwards) are placed where `e^{-α̂V}(1+|λ|)^{2n+2}`
//! has dropped below the working precision relative to its maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{DoubleDouble, Real};
use crate::quadrature::composite_rule;

use super::Potential;

/// Default working precision: double-double.
pub const DEFAULT_PRECISION_BITS: u32 = 106;

const NODES_PER_PANEL: usize = 24;
const CHECK_NODES_PER_PANEL: usize = 29;
const MAX_PANELS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OPSystem {
    /// Wall position; `f64::INFINITY` for the untruncated weight.
    pub y: f64,
    pub n_max: usize,
    pub alpha_hat: f64,
    /// Squared norms of the monic polynomials; may overflow for large `n`, see `log_h`.
    pub h: Vec<f64>,
    pub log_h: Vec<f64>,
    /// `r[n] = h_n / h_{n-1}` for `n >= 1`; `r[0]` is unused and set to 0.
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    /// `π_n(y)`; empty for an infinite wall.
    pub pi_at_y: Vec<f64>,
    /// `e^{-α̂V(y)/2} π_n(y)`, zero for an infinite wall.
    pub weighted_pi_at_y: Vec<f64>,
    pub precision_bits: u32,
    /// Integration range actually used.
    pub cutoff: (f64, f64),
    /// Largest `|⟨π_i, π_j⟩ - δ_ij|` over sampled pairs, measured with an independent rule.
    pub gram_residual: f64,
}

impl OPSystem {
    /// `log Z_N = N log h_0 + N Σ_{i=1}^{N-1} (1 - i/N) log r_i`.
    pub fn log_z(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.n_max + 1 {
            return Err(Error::IndexOutOfRange(format!("N = {n} needs 1 <= N <= {}", self.n_max + 1)));
        }
        let nf = n as f64;
        let tail: f64 = (1..n).map(|i| (1.0 - i as f64 / nf) * self.r[i].ln()).sum();
        Ok(nf * self.log_h[0] + nf * tail)
    }

    /// `log Z_N = Σ_{i<N} log h_i`.
    pub fn log_z_product(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.n_max + 1 {
            return Err(Error::IndexOutOfRange(format!("N = {n} needs 1 <= N <= {}", self.n_max + 1)));
        }
        Ok(self.log_h[..n].iter().sum())
    }

    pub fn is_finite_wall(&self) -> bool {
        self.y.is_finite()
    }
}

fn v_in<T: Real>(pot: &Potential, x: T) -> T {
    let mut acc = T::zero();
    for (i, &c) in pot.g.iter().enumerate().rev() {
        acc = acc * x + T::of(c) / T::of_usize(i + 1);
    }
    acc * x
}

/// `log(e^{-α̂V(λ)} (1+|λ|)^{2n+2})`.
fn log_envelope(pot: &Potential, n_max: usize, x: f64) -> f64 {
    -pot.alpha_hat * pot.v(x) + (2 * n_max + 2) as f64 * x.abs().ln_1p()
}

fn scan_step(pot: &Potential) -> f64 {
    let gmax = pot.g.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    0.05 / (pot.alpha_hat * gmax).sqrt().max(1.0)
}

/// Walks from `start` in direction `dir` until the envelope is `drop` below its running
/// maximum and still decreasing.
fn scan(pot: &Potential, n_max: usize, start: f64, dir: f64, drop: f64) -> Result<f64> {
    let step = scan_step(pot);
    let mut x = start;
    let mut prev = log_envelope(pot, n_max, x);
    let mut best = prev;
    for _ in 0..2_000_000 {
        x += dir * step;
        let f = log_envelope(pot, n_max, x);
        if !f.is_finite() {
            break;
        }
        best = best.max(f);
        if f < best - drop && f < prev {
            return Ok(x);
        }
        prev = f;
    }
    Err(Error::NonIntegrableWeight(format!("weight does not decay from {start} towards {}", if dir < 0.0 { "-inf" } else { "+inf" })))
}

/// Integration interval `[a, b]`.
pub(crate) fn integration_range(pot: &Potential, y: f64, n_max: usize, bits: u32) -> Result<(f64, f64)> {
    if !pot.integrable_below() {
        return Err(Error::NonIntegrableWeight("e^{-α̂V} grows as λ -> -∞".into()));
    }
    let drop = bits as f64 * std::f64::consts::LN_2 + 20.0;
    let upper = if pot.integrable_above() {
        Some(scan(pot, n_max, 0.0, 1.0, drop)?)
    } else {
        None
    };
    let top = match (y.is_finite(), upper) {
        (true, Some(b)) => y.min(b),
        (true, None) => y,
        (false, Some(b)) => b,
        (false, None) => {
            return Err(Error::NonIntegrableWeight("weight grows as λ -> +∞; only finite walls are allowed".into()))
        }
    };
    let a = scan(pot, n_max, top.min(0.0), -1.0, drop)?;
    if a >= top {
        return Err(Error::Invalid(format!("empty integration range [{a}, {top}]")));
    }
    Ok((a, top))
}

/// Panel edges of width at most `min(0.5, 2/sqrt(max curvature of the log-weight))`.
fn panel_edges(pot: &Potential, a: f64, b: f64, n_max: usize) -> Result<Vec<f64>> {
    let probes = 2000;
    let mut curv = 1.0f64;
    for i in 0..=probes {
        let x = a + (b - a) * i as f64 / probes as f64;
        let vpp: f64 = pot.g.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64 * x.powi(i as i32 - 1)).sum();
        curv = curv.max(pot.alpha_hat * vpp.abs() + (2 * n_max + 2) as f64 / (1.0 + x * x));
    }
    let hp = 0.5f64.min(2.0 / curv.sqrt());
    let panels = ((b - a) / hp).ceil() as usize;
    if panels > MAX_PANELS {
        return Err(Error::NonIntegrableWeight(format!("range [{a}, {b}] needs {panels} panels")));
    }
    Ok((0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect())
}

/// Quadrature nodes and weights `w_i e^{-α̂V(x_i) - shift}` in `T`, plus the shift.
struct Discrete<T> {
    x: Vec<T>,
    w: Vec<T>,
    shift: f64,
}

fn discretize<T: Real>(pot: &Potential, edges: &[f64], m: usize, shift: Option<f64>) -> Discrete<T> {
    let et: Vec<T> = edges.iter().map(|&e| T::of(e)).collect();
    let (x, qw) = composite_rule::<T>(&et, m);
    let alpha = T::of(pot.alpha_hat);
    let logs: Vec<T> = x.iter().map(|&xi| -(alpha * v_in(pot, xi))).collect();
    let shift = shift.unwrap_or_else(|| logs.iter().map(|l| l.f64()).fold(f64::NEG_INFINITY, f64::max));
    let st = T::of(shift);
    let w = logs.iter().zip(&qw).map(|(&l, &q)| q * (l - st).exp()).collect();
    Discrete { x, w, shift }
}

/// Recurrence coefficients `(log h_0, s, sqrt r)` and the orthonormal values at the nodes.
struct Recurrence<T> {
    log_h0: f64,
    s: Vec<T>,
    sqrt_r: Vec<T>,
    h0: T,
}

fn stieltjes<T: Real>(d: &Discrete<T>, n_max: usize) -> Result<Recurrence<T>> {
    let m = d.x.len();
    let h0 = d.w.iter().fold(T::zero(), |acc, &w| acc + w);
    if !(h0.f64() > 0.0) {
        return Err(Error::NonIntegrableWeight("weight has no mass on the integration range".into()));
    }
    let inv = T::one() / h0.sqrt();
    let mut prev = vec![T::zero(); m];
    let mut cur = vec![inv; m];
    let mut s = Vec::with_capacity(n_max + 1);
    let mut sqrt_r = vec![T::zero()];
    for n in 0..=n_max {
        let mut sn = T::zero();
        for i in 0..m {
            sn += d.w[i] * d.x[i] * cur[i] * cur[i];
        }
        s.push(sn);
        if n == n_max {
            break;
        }
        let b = sqrt_r[n];
        let mut next = vec![T::zero(); m];
        let mut norm = T::zero();
        for i in 0..m {
            let v = (d.x[i] - sn) * cur[i] - b * prev[i];
            next[i] = v;
            norm += d.w[i] * v * v;
        }
        if !(norm.f64() > 0.0) {
            return Err(Error::PrecisionExhausted { residual: 1.0 });
        }
        let rt = norm.sqrt();
        for v in &mut next {
            *v /= rt;
        }
        sqrt_r.push(rt);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(Recurrence { log_h0: h0.ln().f64() + d.shift, s, sqrt_r, h0 })
}

/// Orthonormal values `π_0..π_{n_max}` at `x` (for the shifted weight).
fn eval_orthonormal<T: Real>(rec: &Recurrence<T>, x: T) -> Vec<T> {
    let n_max = rec.s.len() - 1;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = T::zero();
    let mut cur = T::one() / rec.h0.sqrt();
    out.push(cur);
    for n in 0..n_max {
        let next = ((x - rec.s[n]) * cur - rec.sqrt_r[n] * prev) / rec.sqrt_r[n + 1];
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Values and first derivatives of `π_0..π_{n_max}` at `x`.
fn eval_with_derivative<T: Real>(rec: &Recurrence<T>, x: T) -> (Vec<T>, Vec<T>) {
    let n_max = rec.s.len() - 1;
    let mut p = vec![T::zero(); n_max + 1];
    let mut dp = vec![T::zero(); n_max + 1];
    p[0] = T::one() / rec.h0.sqrt();
    for n in 0..n_max {
        let (pm, dpm) = if n == 0 { (T::zero(), T::zero()) } else { (p[n - 1], dp[n - 1]) };
        p[n + 1] = ((x - rec.s[n]) * p[n] - rec.sqrt_r[n] * pm) / rec.sqrt_r[n + 1];
        dp[n + 1] = (p[n] + (x - rec.s[n]) * dp[n] - rec.sqrt_r[n] * dpm) / rec.sqrt_r[n + 1];
    }
    (p, dp)
}

/// Gram residual of sampled pairs under a rule with a different node count per panel.
fn gram_check<T: Real>(pot: &Potential, edges: &[f64], rec: &Recurrence<T>, shift: f64) -> f64 {
    let d = discretize::<T>(pot, edges, CHECK_NODES_PER_PANEL, Some(shift));
    let n_max = rec.s.len() - 1;
    let mut picks = vec![0, 1, n_max / 2, n_max.saturating_sub(1), n_max];
    picks.sort_unstable();
    picks.dedup();
    picks.retain(|&i| i <= n_max);
    let mut gram = vec![T::zero(); picks.len() * picks.len()];
    for (&x, &w) in d.x.iter().zip(&d.w) {
        let v = eval_orthonormal(rec, x);
        for (a, &i) in picks.iter().enumerate() {
            for (b, &j) in picks.iter().enumerate() {
                gram[a * picks.len() + b] += w * v[i] * v[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..picks.len() {
        for b in 0..picks.len() {
            let target = if a == b { 1.0 } else { 0.0 };
            let g = gram[a * picks.len() + b] - T::of(target);
            worst = worst.max(g.abs().f64());
        }
    }
    worst
}

/// Tolerance `10^{1 - digits/2}` for the sampled Gram matrix.
pub fn gram_tolerance(bits: u32) -> f64 {
    let digits = bits as f64 * std::f64::consts::LOG10_2;
    10f64.powf(1.0 - digits / 2.0)
}

struct Run<T> {
    sys: OPSystem,
    rec: Recurrence<T>,
    edges: Vec<f64>,
    shift: f64,
}

fn run<T: Real>(pot: &Potential, y: f64, n_max: usize, bits: u32) -> Result<Run<T>> {
    let (a, b) = integration_range(pot, y, n_max, bits)?;
    let edges = panel_edges(pot, a, b, n_max)?;
    let d = discretize::<T>(pot, &edges, NODES_PER_PANEL, None);
    let rec = stieltjes(&d, n_max)?;
    let gram_residual = gram_check(pot, &edges, &rec, d.shift);
    if !(gram_residual < gram_tolerance(bits)) {
        return Err(Error::PrecisionExhausted { residual: gram_residual });
    }
    let mut r = vec![0.0];
    let mut log_h = vec![rec.log_h0];
    for n in 1..=n_max {
        let rn = rec.sqrt_r[n] * rec.sqrt_r[n];
        r.push(rn.f64());
        log_h.push(log_h[n - 1] + rn.ln().f64());
    }
    let (pi_at_y, weighted_pi_at_y) = if y.is_finite() {
        let yt = T::of(y);
        let q = eval_orthonormal(&rec, yt);
        // q is orthonormal for e^{-α̂V - shift}; π_n = q e^{-shift/2}
        let lw = -(T::of(pot.alpha_hat) * v_in(pot, yt));
        let half = T::of(0.5);
        let wscale = ((lw - T::of(d.shift)) * half).exp();
        let pscale = (-T::of(d.shift) * half).exp();
        (q.iter().map(|&v| (v * pscale).f64()).collect(), q.iter().map(|&v| (v * wscale).f64()).collect())
    } else {
        (Vec::new(), vec![0.0; n_max + 1])
    };
    let sys = OPSystem {
        y,
        n_max,
        alpha_hat: pot.alpha_hat,
        h: log_h.iter().map(|l| l.exp()).collect(),
        log_h,
        r,
        s: rec.s.iter().map(|v| v.f64()).collect(),
        pi_at_y,
        weighted_pi_at_y,
        precision_bits: bits,
        cutoff: (a, b),
        gram_residual,
    };
    Ok(Run { sys, rec, edges, shift: d.shift })
}

/// `A_nm = ⟨π_m | ∂_λ π_n⟩`, dense lower triangular, `(n_max+1)²` row-major as rows.
fn derivative_matrix_in<T: Real>(pot: &Potential, run: &Run<T>) -> Vec<Vec<f64>> {
    let d = discretize::<T>(pot, &run.edges, NODES_PER_PANEL, Some(run.shift));
    let n = run.sys.n_max + 1;
    let mut a = vec![vec![T::zero(); n]; n];
    for (&x, &w) in d.x.iter().zip(&d.w) {
        let (p, dp) = eval_with_derivative(&run.rec, x);
        for row in 0..n {
            for col in 0..row {
                a[row][col] += w * p[col] * dp[row];
            }
        }
    }
    a.into_iter().map(|row| row.into_iter().map(|v| v.f64()).collect()).collect()
}

fn check_args(y: f64, n_max: usize, bits: u32) -> Result<()> {
    if y.is_nan() || y == f64::NEG_INFINITY {
        return Err(Error::Invalid(format!("wall position {y} is not usable")));
    }
    if n_max == 0 || n_max > 2000 {
        return Err(Error::Invalid(format!("n_max must be in 1..=2000, got {n_max}")));
    }
    if bits == 0 || bits > 106 {
        return Err(Error::Invalid(format!("precision_bits must be in 1..=106, got {bits}")));
    }
    Ok(())
}

/// Recurrence data of the orthonormal polynomials on `(-∞, y]`. `y = f64::INFINITY` selects
/// the full weight. Up to 53 bits runs in `f64`, up to 106 bits in double-double.
pub fn stieltjes_recurrence(pot: &Potential, y: f64, n_max: usize, precision_bits: u32) -> Result<OPSystem> {
    check_args(y, n_max, precision_bits)?;
    if precision_bits <= 53 {
        Ok(run::<f64>(pot, y, n_max, precision_bits)?.sys)
    } else {
        Ok(run::<DoubleDouble>(pot, y, n_max, precision_bits)?.sys)
    }
}

/// Recurrence data together with the matrix `A` of `∂_λ` in the orthonormal basis.
pub fn stieltjes_with_derivative(pot: &Potential, y: f64, n_max: usize, precision_bits: u32) -> Result<(OPSystem, Vec<Vec<f64>>)> {
    check_args(y, n_max, precision_bits)?;
    if precision_bits <= 53 {
        let r = run::<f64>(pot, y, n_max, precision_bits)?;
        let a = derivative_matrix_in(pot, &r);
        Ok((r.sys, a))
    } else {
        let r = run::<DoubleDouble>(pot, y, n_max, precision_bits)?;
        let a = derivative_matrix_in(pot, &r);
        Ok((r.sys, a))
    }
}
