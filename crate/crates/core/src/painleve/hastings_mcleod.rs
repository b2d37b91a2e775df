//! Hastings-McLeod solution of `q'' = 2q^3 + xq` and the Tracy-Widom log-CDF built from it.

use crate::airy_oracle::airy_ai;
use crate::bvp::{self, Boundary, BvpSolution, CollocationOptions, Guess, HermiteRule, Ode, XPoly};
use crate::error::{Error, Result};
use crate::taylor::Taylor;

const QUAD_DEPTH: usize = 4;

#[derive(Clone, Debug)]
pub struct HmProfile {
    pub mesh: Vec<f64>,
    pub sol: BvpSolution,
    ode: Ode,
    /// `(q, q', q'', q''')` at the nodes.
    pub jets: Vec<Vec<f64>>,
    /// `∫_{x_i}^{x_max} q^2` and `∫_{x_i}^{x_max} x q^2`.
    tail0: Vec<f64>,
    tail1: Vec<f64>,
}

fn ode() -> Ode {
    let g = XPoly::monomial(1.0, 0, 2, 1)
        .plus(&XPoly::monomial(-2.0, 0, 0, 3))
        .plus(&XPoly::monomial(-1.0, 1, 0, 1));
    Ode::new(g, QUAD_DEPTH).expect("well-formed equation")
}

/// Left boundary value from the large-negative-x expansion.
pub fn left_asymptote(x: f64) -> f64 {
    let x3 = x * x * x;
    (-x / 2.0).sqrt() * (1.0 + 1.0 / (8.0 * x3) - 73.0 / (128.0 * x3 * x3))
}

fn guess(x: f64) -> Vec<f64> {
    let eps = 0.2;
    let z = Taylor::variable(x, 2).scale(-0.5 / eps);
    z.softplus().scale(eps).signed_pow(0.5).derivatives()
}

/// Jets of `q^2` and `x q^2`.
fn integrand_jets(x: f64, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t = Taylor::from_derivatives(q);
    let q2 = &t * &t;
    let xq2 = &Taylor::variable(x, q2.order()) * &q2;
    (q2.derivatives(), xq2.derivatives())
}

/// Solves on `[x_min, x_max]` with `n_grid` intervals.
pub fn hastings_mcleod(x_min: f64, x_max: f64, n_grid: usize) -> Result<HmProfile> {
    if !(x_min < 0.0 && 0.0 < x_max) {
        return Err(Error::Invalid(format!("need x_min < 0 < x_max, got [{x_min}, {x_max}]")));
    }
    if n_grid < 8 {
        return Err(Error::NodeCountTooSmall { min: 8, got: n_grid });
    }
    let ode = ode();
    let mesh = bvp::uniform_mesh(x_min, x_max, (x_max - x_min) / n_grid as f64, &[]);
    let bc = Boundary { left: vec![(0, left_asymptote(x_min))], right: vec![(0, airy_ai(x_max).ai)] };
    let opts = CollocationOptions { stages: 4, tol: 1e-12, max_iter: 60 };
    let sol = bvp::solve(&ode, &mesh, &bc, Guess::Function(&guess), &opts)?;
    let jets = sol.node_jets(&ode, QUAD_DEPTH - 1);
    let rule = HermiteRule::new(QUAD_DEPTH);
    let n = mesh.len();
    let mut tail0 = vec![0.0; n];
    let mut tail1 = vec![0.0; n];
    let ij: Vec<(Vec<f64>, Vec<f64>)> = mesh.iter().zip(&jets).map(|(&x, q)| integrand_jets(x, q)).collect();
    for i in (0..n - 1).rev() {
        let h = mesh[i + 1] - mesh[i];
        tail0[i] = tail0[i + 1] + rule.interval(&ij[i].0, &ij[i + 1].0, h);
        tail1[i] = tail1[i + 1] + rule.interval(&ij[i].1, &ij[i + 1].1, h);
    }
    Ok(HmProfile { mesh, sol, ode, jets, tail0, tail1 })
}

impl HmProfile {
    pub fn x_min(&self) -> f64 {
        self.mesh[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.mesh.last().expect("mesh")
    }

    /// `(q, q', ...)` at `x` up to `nderiv`.
    pub fn eval(&self, x: f64, nderiv: usize) -> Result<Vec<f64>> {
        let q = self.sol.eval(&self.ode, x, QUAD_DEPTH - 1, 1)?;
        Ok(self.ode.extend_jet(x, &q, nderiv))
    }

    /// Largest `|q'' - 2q^3 - xq|` at interval midpoints.
    pub fn midpoint_residual(&self) -> f64 {
        bvp::midpoint_defect(self.ode.residual_poly(), &self.mesh, |i| self.sol.node_state(i).to_vec(), 12)
            .unwrap_or(f64::INFINITY)
    }

    /// `∫_{x_max}^∞ (x - s) Ai(x)^2 dx` in closed form.
    pub fn airy_tail(&self, s: f64) -> f64 {
        let x = self.x_max();
        let a = airy_ai(x);
        let int0 = a.ai_prime * a.ai_prime - x * a.ai * a.ai;
        let int1 = -(x * x * a.ai * a.ai - x * a.ai_prime * a.ai_prime + a.ai * a.ai_prime) / 3.0;
        int1 - s * int0
    }

    /// `log F2(s) = -∫_s^∞ (x - s) q(x)^2 dx`.
    pub fn tw_logcdf(&self, s: f64) -> Result<f64> {
        let (lo, hi) = (self.x_min(), self.x_max());
        if !(lo..=hi).contains(&s) {
            return Err(Error::DomainExceeded { value: s, lo, hi });
        }
        let i = self.sol.locate(s)?;
        let rule = HermiteRule::new(QUAD_DEPTH);
        let qs = self.eval(s, QUAD_DEPTH - 1)?;
        let (a0, a1) = integrand_jets(s, &qs);
        let (b0, b1) = integrand_jets(self.mesh[i + 1], &self.jets[i + 1]);
        let h = self.mesh[i + 1] - s;
        let int0 = rule.interval(&a0, &b0, h) + self.tail0[i + 1];
        let int1 = rule.interval(&a1, &b1, h) + self.tail1[i + 1];
        Ok(-(int1 - s * int0) - self.airy_tail(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy_oracle::fredholm_det_airy;

    #[test]
    fn matches_fredholm_at_minus_two() {
        let hm = hastings_mcleod(-12.0, 8.0, 400).unwrap();
        let f = fredholm_det_airy(-2.0, 60).unwrap().f2;
        let v = hm.tw_logcdf(-2.0).unwrap().exp();
        assert!((v - f).abs() < 1e-9, "{v} vs {f}");
        assert!(hm.midpoint_residual() < 1e-9);
    }
}
