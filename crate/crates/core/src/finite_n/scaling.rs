//! Edge scaling of the Gaussian model onto the Tracy-Widom variable.

use serde::{Deserialize, Serialize};

/// Gaussian weight `e^{-α̂λ²}` with `N` eigenvalues, `α̂ = Nα`.
///
/// With `λ = μ/sqrt(α̂)` the weight becomes `e^{-μ²}`, whose spectral edge sits at
/// `μ = sqrt(2N)` with fluctuation width `2^{-1/2} N^{-1/6}`. Hence
/// `y(σ) = (sqrt(2N) + σ/(sqrt(2) N^{1/6})) / sqrt(α̂)` and `P_N(λ_max < y(σ)) → F_2(σ)`.
/// The P34 variable of the `k = 1` gap curve is `s = 2^{-2/3} σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub n: usize,
    pub alpha_hat: f64,
}

impl ScalingMap {
    pub fn new(n: usize, alpha_hat: f64) -> Self {
        ScalingMap { n, alpha_hat }
    }

    /// Expansion parameter `a = N^{-2/3}`.
    pub fn a(&self) -> f64 {
        (self.n as f64).powf(-2.0 / 3.0)
    }

    /// Critical index ratio `ξ_c = n/N` at the top of the spectrum.
    pub fn xi_c(&self) -> f64 {
        1.0
    }

    /// Recurrence coefficient at `ξ_c`: `r_c = N/(2α̂)`.
    pub fn r_c(&self) -> f64 {
        self.n as f64 / (2.0 * self.alpha_hat)
    }

    /// Diagonal coefficient at `ξ_c`; zero for an even potential.
    pub fn s_c(&self) -> f64 {
        0.0
    }

    /// Spectral edge `y_c = s_c + 2 sqrt(r_c)`.
    pub fn y_c(&self) -> f64 {
        self.s_c() + 2.0 * self.r_c().sqrt()
    }

    /// Width of the edge window in `y`.
    pub fn width(&self) -> f64 {
        1.0 / (std::f64::consts::SQRT_2 * (self.n as f64).powf(1.0 / 6.0) * self.alpha_hat.sqrt())
    }

    pub fn y_of_sigma(&self, sigma: f64) -> f64 {
        self.y_c() + sigma * self.width()
    }

    pub fn sigma_of_y(&self, y: f64) -> f64 {
        (y - self.y_c()) / self.width()
    }

    /// P34 variable `s = 2^{-2/3} σ` of the `k = 1` curve.
    pub fn painleve_s(sigma: f64) -> f64 {
        sigma * 2f64.powf(-2.0 / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_edge() {
        let m = ScalingMap::new(50, 1.0);
        assert!((m.y_c() - 10.0).abs() < 1e-14);
        let y = m.y_of_sigma(-1.3);
        assert!((m.sigma_of_y(y) + 1.3).abs() < 1e-13);
        let m2 = ScalingMap::new(50, 4.0);
        assert!((m2.y_of_sigma(0.7) - m.y_of_sigma(0.7) / 2.0).abs() < 1e-14);
    }
}
