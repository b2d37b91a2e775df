//! Gap probability `P_N(λ_max < y) = Z_N(y)/Z_N(∞)` from the recurrence data, and a
//! determinant-free oracle for `N <= 3` by direct integration of the eigenvalue density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::composite_rule;

use super::stieltjes::{integration_range, stieltjes_recurrence, DEFAULT_PRECISION_BITS};
use super::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    pub y: f64,
    pub log_p: f64,
    pub p: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > 2000 {
        return Err(Error::Invalid(format!("N must be in 1..=2000, got {n}")));
    }
    Ok(())
}

/// `log Z_N(∞)`. The infinite wall is realized by cutting the weight where
/// `e^{-α̂V}(1+|λ|)^{2N+2}` is below the working precision.
fn log_z_infinity(pot: &Potential, n: usize, bits: u32) -> Result<f64> {
    if !pot.integrable_above() {
        return Err(Error::NonIntegrableWeight(
            "Z_N(∞) diverges for this potential; compare two finite walls with gap_ratio".into(),
        ));
    }
    stieltjes_recurrence(pot, f64::INFINITY, n, bits)?.log_z(n)
}

fn value(y: f64, log_p: f64) -> GapValue {
    // round-off can push log_p a hair above zero at walls past the cutoff
    let log_p = log_p.min(0.0);
    GapValue { y, log_p, p: log_p.exp() }
}

/// `P_N(λ_max < y)` at the default precision.
pub fn gap_probability_finite_n(pot: &Potential, n: usize, y: f64) -> Result<GapValue> {
    gap_probability_finite_n_with(pot, n, y, DEFAULT_PRECISION_BITS)
}

pub fn gap_probability_finite_n_with(pot: &Potential, n: usize, y: f64, bits: u32) -> Result<GapValue> {
    check_n(n)?;
    let inf = log_z_infinity(pot, n, bits)?;
    let at = stieltjes_recurrence(pot, y, n, bits)?.log_z(n)?;
    Ok(value(y, at - inf))
}

/// `P_N(λ_max < y)` at every `y`, sharing `Z_N(∞)`.
pub fn gap_cdf_finite_n(pot: &Potential, n: usize, ys: &[f64], bits: u32) -> Result<Vec<GapValue>> {
    use rayon::prelude::*;
    check_n(n)?;
    let inf = log_z_infinity(pot, n, bits)?;
    ys.par_iter()
        .map(|&y| Ok(value(y, stieltjes_recurrence(pot, y, n, bits)?.log_z(n)? - inf)))
        .collect()
}

/// `log(Z_N(y_1)/Z_N(y_2))`, usable for potentials unbounded above.
pub fn gap_ratio(pot: &Potential, n: usize, y1: f64, y2: f64, bits: u32) -> Result<f64> {
    check_n(n)?;
    let a = stieltjes_recurrence(pot, y1, n, bits)?.log_z(n)?;
    let b = stieltjes_recurrence(pot, y2, n, bits)?.log_z(n)?;
    Ok(a - b)
}

const ORACLE_NODES: usize = 8;
const ORACLE_LEVELS: usize = 7;

/// `N! Z_N` over `[a, top]` with `panels` equal panels, weights shifted by `e^{shift}`.
fn direct_sum(pot: &Potential, n: usize, a: f64, top: f64, panels: usize, shift: f64) -> f64 {
    let edges: Vec<f64> = (0..=panels).map(|i| a + (top - a) * i as f64 / panels as f64).collect();
    let (x, q) = composite_rule::<f64>(&edges, ORACLE_NODES);
    let w: Vec<f64> = x.iter().zip(&q).map(|(&x, &q)| q * (-pot.alpha_hat * pot.v(x) - shift).exp()).collect();
    let m = x.len();
    match n {
        1 => w.iter().sum(),
        2 => (0..m)
            .map(|i| w[i] * (0..m).map(|j| w[j] * (x[i] - x[j]).powi(2)).sum::<f64>())
            .sum(),
        _ => (0..m)
            .map(|i| {
                w[i] * (0..m)
                    .map(|j| {
                        let dij = (x[i] - x[j]).powi(2);
                        w[j] * dij * (0..m).map(|k| w[k] * ((x[i] - x[k]) * (x[j] - x[k])).powi(2)).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum(),
    }
}

/// `Z_N(y)/Z_N(∞)` for `N <= 3` by tensor-product Gauss-Legendre quadrature of the
/// Vandermonde-squared density, with panel doubling until two levels agree to `tol`.
pub fn direct_quadrature_oracle(pot: &Potential, n: usize, y: f64) -> Result<f64> {
    direct_quadrature_oracle_with_tol(pot, n, y, 1e-12)
}

pub fn direct_quadrature_oracle_with_tol(pot: &Potential, n: usize, y: f64, tol: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::Invalid(format!("direct quadrature supports N in 1..=3, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let (a_inf, b_inf) = integration_range(pot, f64::INFINITY, n, 53)?;
    let (a_y, top) = integration_range(pot, y, n, 53)?;
    let a = a_inf.min(a_y);
    if top <= a {
        return Ok(0.0);
    }
    let shift = (0..=1000)
        .map(|i| -pot.alpha_hat * pot.v(a + (b_inf - a) * i as f64 / 1000.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let base = ((b_inf - a) / 0.5).ceil() as usize;
    let mut prev: Option<f64> = None;
    for level in 0..ORACLE_LEVELS {
        let p_full = base << level;
        let p_top = ((p_full as f64) * (top - a) / (b_inf - a)).ceil().max(1.0) as usize;
        let ratio = direct_sum(pot, n, a, top, p_top, shift) / direct_sum(pot, n, a, b_inf, p_full, shift);
        if let Some(p) = prev {
            if (ratio - p).abs() <= tol * ratio.abs().max(1e-300) {
                return Ok(ratio.min(1.0));
            }
        }
        prev = Some(ratio);
    }
    Err(Error::NotConverged(format!("direct quadrature for N = {n} at y = {y} after {ORACLE_LEVELS} levels")))
}
