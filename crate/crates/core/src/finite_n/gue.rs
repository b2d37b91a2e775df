//! Largest eigenvalue of the β = 2 tridiagonal ensemble.
//!
//! The tridiagonal matrix with `N(0, 1)` diagonal and `χ_{2(N-i)}/sqrt(2)` off-diagonal has
//! joint eigenvalue density `∝ ∏ e^{-λ_i²/2} Δ²`. Multiplying by `1/sqrt(2α̂)` maps it to
//! `∏ e^{-α̂λ_i²} Δ²`, the Gaussian weight used by the orthogonal-polynomial side.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_N: usize = 500;
pub const MAX_SAMPLES: usize = 10_000_000;

/// Sorted sample of largest eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub maxima: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut maxima: Vec<f64>) -> Self {
        maxima.sort_by(f64::total_cmp);
        EmpiricalCdf { maxima }
    }

    pub fn len(&self) -> usize {
        self.maxima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty()
    }

    /// Fraction of samples with `λ_max < y`.
    pub fn cdf(&self, y: f64) -> f64 {
        if self.maxima.is_empty() {
            return f64::NAN;
        }
        self.maxima.partition_point(|&m| m < y) as f64 / self.maxima.len() as f64
    }

    /// Binomial standard error `sqrt(p(1-p)/n)` at the true probability `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.maxima.len() as f64).sqrt()
    }

    /// Union of two samples; associative and independent of argument order.
    pub fn merge(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            if self.maxima[i].total_cmp(&other.maxima[j]).is_le() {
                out.push(self.maxima[i]);
                i += 1;
            } else {
                out.push(other.maxima[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.maxima[i..]);
        out.extend_from_slice(&other.maxima[j..]);
        EmpiricalCdf { maxima: out }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x` (Sturm count).
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue by bisection on the Sturm count inside the Gershgorin interval.
pub fn largest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let radius = |i: usize| {
        (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i + 1 < n { off[i].abs() } else { 0.0 })
    };
    let mut hi = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let mut lo = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One sample from stream `index` of `seed`.
fn sample(n: usize, seed: u64, index: u64, scale: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let diag: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).map(|z: f64| z * scale).collect();
    let off: Vec<f64> = (1..n)
        .map(|i| {
            let chi2 = ChiSquared::new(2.0 * (n - i) as f64).expect("positive dof");
            (chi2.sample(&mut rng) / 2.0).sqrt() * scale
        })
        .collect();
    largest_eigenvalue(&diag, &off)
}

/// Empirical distribution of `λ_max` for weight `e^{-α̂λ²}`. Sample `i` draws from ChaCha8
/// stream `i` of `seed`, so the result does not depend on thread scheduling.
pub fn gue_sample_maxeig(n: usize, n_samples: usize, seed: u64, alpha_hat: f64) -> Result<EmpiricalCdf> {
    if n == 0 || n > MAX_N {
        return Err(Error::Invalid(format!("N must be in 1..={MAX_N}, got {n}")));
    }
    if n_samples == 0 || n_samples > MAX_SAMPLES {
        return Err(Error::Invalid(format!("sample count must be in 1..={MAX_SAMPLES}, got {n_samples}")));
    }
    if !(alpha_hat > 0.0 && alpha_hat.is_finite()) {
        return Err(Error::Invalid(format!("alpha_hat must be positive, got {alpha_hat}")));
    }
    let scale = 1.0 / (2.0 * alpha_hat).sqrt();
    let maxima: Vec<f64> = (0..n_samples as u64).into_par_iter().map(|i| sample(n, seed, i, scale)).collect();
    Ok(EmpiricalCdf::new(maxima))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_top_eigenvalue() {
        // tridiag(1, 2, 1) of size 5: eigenvalues 2 + 2cos(kπ/6)
        let diag = vec![2.0; 5];
        let off = vec![1.0; 4];
        let top = largest_eigenvalue(&diag, &off);
        assert!((top - (2.0 + 2.0 * (std::f64::consts::PI / 6.0).cos())).abs() < 1e-13);
        assert_eq!(count_below(&diag, &off, 2.0 - 1e-9), 2);
    }

    #[test]
    fn seeded_runs_agree() {
        let a = gue_sample_maxeig(6, 500, 7, 1.0).unwrap();
        let b = gue_sample_maxeig(6, 500, 7, 1.0).unwrap();
        assert_eq!(a, b);
        let c = gue_sample_maxeig(6, 500, 8, 1.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = EmpiricalCdf::new(vec![0.3, -1.0, 2.0]);
        let b = EmpiricalCdf::new(vec![0.5, 0.3]);
        assert_eq!(a.merge(&b), b.merge(&a));
        assert_eq!(a.merge(&b).cdf(0.4), 0.6);
    }
}
