//! `det(I - K_Ai)` on `L^2(s, ∞)` by Nyström discretization.
//!
//! Gauss-Legendre nodes in `t ∈ (0, 1)` mapped by `x = s + t/(1-t)`; the matrix is
//! symmetrized as `√w_i K(x_i, x_j) √w_j`.

use crate::numeric::{DoubleDouble, Real};

use super::airy::airy_ai;
use crate::error::{Error, Result};
use crate::linalg::DenseLu;
use crate::quadrature::gauss_legendre;

pub const MIN_NODES: usize = 8;
/// Above this node count the determinant is accumulated in double-double.
pub const EXTENDED_ABOVE: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FredholmResult {
    pub s: f64,
    pub f2: f64,
    pub n_nodes: usize,
    pub self_error: f64,
}

/// `(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`, with `Ai'(x)^2 - x Ai(x)^2` on the diagonal.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (a, b) = (airy_ai(x), airy_ai(y));
    kernel_from_values(x, a.ai, a.ai_prime, y, b.ai, b.ai_prime)
}

fn kernel_from_values(x: f64, ax: f64, apx: f64, y: f64, ay: f64, apy: f64) -> f64 {
    if x == y {
        apx * apx - x * ax * ax
    } else {
        (ax * apy - apx * ay) / (x - y)
    }
}

/// Mapped nodes and weights on `(s, ∞)`.
pub fn nodes(s: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    t.iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let t = 0.5 * (t + 1.0);
            let one_m = 1.0 - t;
            (s + t / one_m, 0.5 * w / (one_m * one_m))
        })
        .unzip()
}

/// Row-major symmetric matrix `√w_i K(x_i, x_j) √w_j`.
pub fn nystrom_matrix(s: f64, n: usize) -> Vec<f64> {
    let (x, w) = nodes(s, n);
    let vals: Vec<_> = x.iter().map(|&x| airy_ai(x)).collect();
    let sw: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = kernel_from_values(x[i], vals[i].ai, vals[i].ai_prime, x[j], vals[j].ai, vals[j].ai_prime);
            let v = sw[i] * k * sw[j];
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

fn det_in<T: Real>(k: &[f64], n: usize) -> Result<f64> {
    let a: Vec<T> = (0..n * n)
        .map(|idx| {
            let id = if idx / n == idx % n { 1.0 } else { 0.0 };
            T::of(id) - T::of(k[idx])
        })
        .collect();
    Ok(DenseLu::new(a, n)?.det().f64())
}

/// `det(I - K)` with `n` nodes.
pub fn det_airy(s: f64, n: usize) -> Result<f64> {
    if n < MIN_NODES {
        return Err(Error::NodeCountTooSmall { min: MIN_NODES, got: n });
    }
    let k = nystrom_matrix(s, n);
    if n > EXTENDED_ABOVE {
        det_in::<DoubleDouble>(&k, n)
    } else {
        det_in::<f64>(&k, n)
    }
}

/// `F_2(s)` with `n_nodes`, and the change when the node count is doubled.
pub fn fredholm_det_airy(s: f64, n_nodes: usize) -> Result<FredholmResult> {
    let f2 = det_airy(s, n_nodes)?;
    let doubled = det_airy(s, 2 * n_nodes)?;
    Ok(FredholmResult { s, f2: f2.clamp(0.0, 1.0), n_nodes, self_error: (f2 - doubled).abs() })
}

/// Mean and variance of the law with CDF `F_2`, truncated to `[a, b]`:
/// `∫ σ dF = [σF] - ∫F` and `∫ σ² dF = [σ²F] - 2∫σF`, with composite Gauss-Legendre panels.
pub fn tw_moments(a: f64, b: f64, panels: usize, n_nodes: usize) -> Result<(f64, f64)> {
    let (t, w) = gauss_legendre(10);
    let h = (b - a) / panels as f64;
    let (mut i0, mut i1) = (0.0, 0.0);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (ti, wi) in t.iter().zip(&w) {
            let x = c + 0.5 * h * ti;
            let f = det_airy(x, n_nodes)?;
            i0 += 0.5 * h * wi * f;
            i1 += 0.5 * h * wi * x * f;
        }
    }
    let (fa, fb) = (det_airy(a, n_nodes)?, det_airy(b, n_nodes)?);
    let mass = fb - fa;
    let m1 = (b * fb - a * fa - i0) / mass;
    let m2 = (b * b * fb - a * a * fa - 2.0 * i1) / mass;
    Ok((m1, m2 - m1 * m1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_tends_to_one_on_the_right() {
        let r = fredholm_det_airy(4.0, 40).unwrap();
        assert!(r.f2 > 1.0 - 1e-4 && r.f2 <= 1.0);
    }

    #[test]
    fn diagonal_is_the_limit_of_the_kernel() {
        let x = 0.7;
        let d = airy_kernel(x, x);
        let mut prev = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let e = (airy_kernel(x, x + h) - d).abs();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn self_convergence_at_minus_two() {
        let a = det_airy(-2.0, 60).unwrap();
        let b = det_airy(-2.0, 120).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!((b - 0.41322414250512).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_node_counts() {
        assert!(matches!(fredholm_det_airy(0.0, 4), Err(Error::NodeCountTooSmall { .. })));
    }
}
