//! Background profile `u_inf` solving `𝓛_k[u] = x/2`.

use crate::bvp::{self, hermite_eval, Boundary, BvpSolution, CollocationOptions, Guess, Ode, XPoly};
use crate::error::{Error, Result};
use crate::lenard::beta;
use crate::diffpoly::rat_to_f64;
use crate::taylor::{eval_diffpoly, Taylor};

use super::HierarchySpec;

#[derive(Clone, Debug)]
pub struct BackgroundSolution {
    pub k: usize,
    pub mesh: Vec<f64>,
    /// `(u, u', ..., u^(depth))` at every mesh node.
    pub jets: Vec<Vec<f64>>,
    /// Largest `|𝓛_k[u] - x/2|` at interval midpoints (interpolated).
    pub residual: f64,
    solved: Option<(BvpSolution, Ode)>,
}

impl BackgroundSolution {
    pub fn depth(&self) -> usize {
        self.jets[0].len() - 1
    }

    /// Index of the node at exactly `x`.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        self.mesh.iter().position(|&m| m == x)
    }

    /// Derivatives `0..=nderiv` at `x`.
    pub fn eval(&self, x: f64, nderiv: usize) -> Result<Vec<f64>> {
        if self.k == 1 {
            let mut d = vec![0.0; nderiv + 1];
            d[0] = x / 2.0;
            if nderiv >= 1 {
                d[1] = 0.5;
            }
            return Ok(d);
        }
        let (lo, hi) = (self.mesh[0], *self.mesh.last().expect("mesh"));
        if !(lo..=hi).contains(&x) {
            return Err(Error::DomainExceeded { value: x, lo, hi });
        }
        let i = self.mesh.partition_point(|&m| m <= x).saturating_sub(1).min(self.mesh.len() - 2);
        let h = self.mesh[i + 1] - self.mesh[i];
        Ok(hermite_eval(&self.jets[i], &self.jets[i + 1], h, (x - self.mesh[i]) / h, nderiv))
    }

    /// Newton iterations used (0 for the closed form).
    pub fn iterations(&self) -> usize {
        self.solved.as_ref().map_or(0, |(s, _)| s.iterations)
    }
}

/// Far-field jet `(u, ..., u^(depth))` of the background: the algebraic root
/// `u0 = (x/(2β_k))^{1/k}` corrected by one Newton step of the dominant balance.
pub fn far_field_jet(spec: &HierarchySpec, x: f64, depth: usize) -> Result<Vec<f64>> {
    let k = spec.k;
    if x < 0.0 && k % 2 == 0 {
        return Err(Error::NoRealBranch(format!(
            "(x/(2β_{k}))^(1/{k}) has no real value at x = {x} for even k"
        )));
    }
    if x == 0.0 {
        return Err(Error::Invalid("far-field expansion is singular at x = 0".into()));
    }
    let b = rat_to_f64(&beta(k));
    let a = (1.0 / (2.0 * b)).powf(1.0 / k as f64);
    let order = depth + 2 * k - 2;
    let var = Taylor::variable(x, order);
    let u0 = var.signed_pow(1.0 / k as f64).scale(a);
    if k == 1 {
        return Ok(u0.derivatives());
    }
    let lk = eval_diffpoly(spec.lk(), &u0);
    let shortvar = Taylor::variable(x, lk.order());
    let r = &lk - &shortvar.scale(0.5);
    let mut pow = Taylor::constant(1.0, lk.order());
    for _ in 0..k - 1 {
        pow = &pow * &u0;
    }
    let delta = -&(&r * &pow.scale(k as f64 * b).recip());
    let u = &u0 + &delta;
    let mut d = u.derivatives();
    d.truncate(depth + 1);
    Ok(d)
}

/// Smooth interpolant of the far-field root through `x = 0`, used to seed Newton.
fn seed(spec: &HierarchySpec, x: f64, depth: usize) -> Vec<f64> {
    let k = spec.k as f64;
    let a = (1.0 / (2.0 * rat_to_f64(&beta(spec.k)))).powf(1.0 / k);
    let var = Taylor::variable(x, depth);
    let shell = (&var * &var).add_const(4.0).signed_pow((1.0 - k) / (2.0 * k));
    (&var * &shell).scale(a).derivatives()
}

/// `𝓛_k[u] - x/2` as an ODE.
fn background_ode(spec: &HierarchySpec, extra: usize) -> Result<Ode> {
    let g = XPoly::from_diffpoly(spec.lk(), 1.0).plus(&XPoly::monomial(-0.5, 1, 0, 0));
    Ode::new(g, extra)
}

/// Background on `mesh`, with jets of the given depth at every node.
///
/// `k = 1` is the closed form `x/2`. For `k >= 2` the ODE is solved by collocation with
/// far-field data at both ends.
pub fn background_solution(spec: &HierarchySpec, mesh: &[f64], depth: usize, opts: &CollocationOptions) -> Result<BackgroundSolution> {
    let k = spec.k;
    if mesh.len() < 64 {
        return Err(Error::NodeCountTooSmall { min: 64, got: mesh.len() });
    }
    if k == 1 {
        let jets = mesh
            .iter()
            .map(|&x| {
                let mut d = vec![0.0; depth + 1];
                d[0] = x / 2.0;
                if depth >= 1 {
                    d[1] = 0.5;
                }
                d
            })
            .collect();
        return Ok(BackgroundSolution { k, mesh: mesh.to_vec(), jets, residual: 0.0, solved: None });
    }
    let (a, b) = (mesh[0], *mesh.last().expect("mesh"));
    let left = far_field_jet(spec, a, k)?;
    let right = far_field_jet(spec, b, k)?;
    let n = 2 * k - 2;
    let ode = background_ode(spec, depth.saturating_sub(n) + 2)?;
    let bc = Boundary {
        left: (0..k - 1).map(|j| (j, left[j])).collect(),
        right: (0..k - 1).map(|j| (j, right[j])).collect(),
    };
    let guess = |x: f64| seed(spec, x, n);
    let sol = bvp::solve(&ode, mesh, &bc, Guess::Function(&guess), opts)?;
    let jets = sol.node_jets(&ode, depth);
    let scale = mesh.iter().map(|&x| (x.abs() / 2.0).powf(1.0 / k as f64)).fold(1.0, f64::max);
    for (x, jet) in mesh.iter().zip(&jets) {
        if !jet[0].is_finite() || jet[0].abs() > 1e3 * scale {
            return Err(Error::PoleDetected { x: *x });
        }
    }
    let residual = bvp::midpoint_defect(ode.residual_poly(), mesh, |i| sol.node_state(i).to_vec(), 12)?;
    Ok(BackgroundSolution { k, mesh: mesh.to_vec(), jets, residual, solved: Some((sol, ode)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_solves_to_leading_orders() {
        let spec = HierarchySpec::new(3).unwrap();
        let jet = far_field_jet(&spec, -60.0, 6).unwrap();
        let lk = spec.lk().eval_jet(&jet[..5]).unwrap();
        // corrected root: residual is two orders below x
        assert!((lk - (-30.0)).abs() < 1e-5, "{lk}");
        assert!((jet[0] - (-3f64).cbrt()).abs() < 1e-3);
    }

    #[test]
    fn even_order_has_no_real_left_branch() {
        let spec = HierarchySpec::new(2).unwrap();
        assert!(matches!(far_field_jet(&spec, -10.0, 2), Err(Error::NoRealBranch(_))));
        let right = far_field_jet(&spec, 24.0, 2).unwrap();
        assert!((right[0] - 2.0).abs() < 1e-2);
    }
}
