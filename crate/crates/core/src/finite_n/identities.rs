//! Residuals of the finite-N recurrence identities.
//!
//! Algebraic identities are evaluated directly on the recurrence data. Those involving
//! `∂_y` or `∂_α̂` use central differences from auxiliary systems, and are run at `dy` and
//! `dy/2` so the observed order can be reported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lax::{jacobi_matrix, v_prime_of};
use super::stieltjes::stieltjes_recurrence;
use super::{OPSystem, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    /// Sup-norm over the checked index range.
    pub residual: f64,
    /// Same identity at half the step, for finite-difference identities.
    pub residual_half_step: Option<f64>,
}

impl IdentityResidual {
    /// `log2` of the residual ratio under step halving.
    pub fn observed_order(&self) -> Option<f64> {
        self.residual_half_step.map(|h| (self.residual / h).log2())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub y: f64,
    pub alpha_hat: f64,
    pub n_max: usize,
    pub dy: f64,
    pub dalpha: f64,
    pub entries: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn add(entries: &mut Vec<IdentityResidual>, name: &str, residual: f64, half: Option<f64>) {
    entries.push(IdentityResidual { name: name.into(), residual, residual_half_step: half });
}

fn sup(range: std::ops::RangeInclusive<usize>, f: impl Fn(usize) -> f64) -> f64 {
    range.map(f).fold(0.0, |m, v| m.max(v.abs()))
}

/// Derivative data at one step size.
struct Diffs {
    dlogr: Vec<f64>,
    d2logr: Vec<f64>,
    ds: Vec<f64>,
}

fn y_diffs(pot: &Potential, sys: &OPSystem, dy: f64) -> Result<Diffs> {
    let bits = sys.precision_bits;
    let p = stieltjes_recurrence(pot, sys.y + dy, sys.n_max, bits)?;
    let m = stieltjes_recurrence(pot, sys.y - dy, sys.n_max, bits)?;
    let n = sys.n_max + 1;
    let lr = |s: &OPSystem, i: usize| if i == 0 { 0.0 } else { s.r[i].ln() };
    Ok(Diffs {
        dlogr: (0..n).map(|i| (lr(&p, i) - lr(&m, i)) / (2.0 * dy)).collect(),
        d2logr: (0..n).map(|i| (lr(&p, i) - 2.0 * lr(sys, i) + lr(&m, i)) / (dy * dy)).collect(),
        ds: (0..n).map(|i| (p.s[i] - m.s[i]) / (2.0 * dy)).collect(),
    })
}

/// `∂_α̂ log r_n` at fixed `y`.
fn alpha_diff(pot: &Potential, sys: &OPSystem, da: f64) -> Result<Vec<f64>> {
    let bits = sys.precision_bits;
    let p = stieltjes_recurrence(&pot.with_alpha(pot.alpha_hat + da)?, sys.y, sys.n_max, bits)?;
    let m = stieltjes_recurrence(&pot.with_alpha(pot.alpha_hat - da)?, sys.y, sys.n_max, bits)?;
    Ok((0..=sys.n_max)
        .map(|i| if i == 0 { 0.0 } else { (p.r[i].ln() - m.r[i].ln()) / (2.0 * da) })
        .collect())
}

/// Residuals over `n ∈ [2, n_max - 2]`.
///
/// Gaussian potential: string equations, `s_n` and `P_{n,n-1}` identities, flow equations,
/// Toda, the `y`/`α̂` scaling identity and its consequence for `r_{n+1} - r_{n-1}`.
/// Any potential: `Z` via `∏ h_i` against `h_0^N ∏ r_i^{N-i}`, and at an infinite wall the
/// untruncated string equations `α̂ sqrt(r_n) V'(B)_{n,n-1} = n`, `V'(B)_{nn} = 0`.
pub fn verify_recurrence_identities(pot: &Potential, sys: &OPSystem, dy: f64, dalpha: f64) -> Result<IdentityReport> {
    if sys.n_max < 6 {
        return Err(Error::Invalid(format!("n_max must be at least 6, got {}", sys.n_max)));
    }
    if !(dy > 0.0 && dalpha > 0.0 && dalpha < pot.alpha_hat) {
        return Err(Error::Invalid("steps must be positive and dalpha < alpha_hat".into()));
    }
    if sys.alpha_hat != pot.alpha_hat {
        return Err(Error::Invalid("system and potential disagree on alpha_hat".into()));
    }
    let a = pot.alpha_hat;
    let (r, s) = (&sys.r, &sys.s);
    let top = sys.n_max - 2;
    let range = || 2..=top;
    let finite = sys.is_finite_wall();
    // at an infinite wall s_n vanishes faster than y grows, so every y-term drops out
    let y = if finite { sys.y } else { 0.0 };
    let mut entries = Vec::new();

    let nz = sys.n_max + 1;
    add(&mut entries, "znorm", (sys.log_z(nz)? - sys.log_z_product(nz)?) / (1.0 + sys.log_z_product(nz)?.abs()), None);

    if !finite {
        let b = jacobi_matrix(sys);
        let vp = v_prime_of(pot, &b);
        let last = sys.n_max.saturating_sub(pot.degree() + 1);
        add(&mut entries, "zinfstr_offdiag", sup(1..=last, |n| a * r[n].sqrt() * vp.get(n, n - 1) - n as f64), None);
        add(&mut entries, "zinfstr_diag", sup(0..=last, |n| vp.get(n, n)), None);
    }

    if !pot.is_gaussian() {
        return Ok(IdentityReport { y: sys.y, alpha_hat: a, n_max: sys.n_max, dy, dalpha, entries });
    }

    add(&mut entries,
        "string1",
        sup(range(), |n| s[n + 1] * s[n + 1] - s[n] * s[n] + r[n + 2] - r[n] - y * (s[n + 1] - s[n]) - 1.0 / a),
        None,
    );
    add(&mut entries,
        "string2",
        sup(range(), |n| {
            r[n + 1] * (s[n + 1] + s[n] - y) - r[n] * (s[n] + s[n - 1] - y) - (s[n] - y) / (2.0 * a)
        }),
        None,
    );
    let wpi = &sys.weighted_pi_at_y;
    add(&mut entries, "sn", sup(range(), |n| s[n] + wpi[n] * wpi[n] / (2.0 * a)), None);
    add(&mut entries,
        "pid2",
        sup(range(), |n| (2 * n + 1) as f64 - 2.0 * a * ((s[n] - y) * s[n] + r[n + 1] + r[n])),
        None,
    );

    let flow = |d: &Diffs| -> [f64; 3] {
        [
            sup(range(), |n| s[n] - s[n - 1] + d.dlogr[n] / (2.0 * a)),
            sup(range(), |n| r[n + 1] - r[n] - (1.0 - d.ds[n]) / (2.0 * a)),
            sup(range(), |n| r[n + 1] + r[n - 1] - 2.0 * r[n] - d.d2logr[n] / (4.0 * a * a)),
        ]
    };
    let (full, half, dl, dl_half) = if finite {
        let full = y_diffs(pot, sys, dy)?;
        let half = y_diffs(pot, sys, dy / 2.0)?;
        (flow(&full), Some(flow(&half)), full.dlogr, half.dlogr)
    } else {
        let zero = Diffs { dlogr: vec![0.0; nz], d2logr: vec![0.0; nz], ds: vec![0.0; nz] };
        (flow(&zero), None, zero.dlogr.clone(), zero.dlogr)
    };
    for (i, name) in ["snG", "rnG", "toda"].iter().enumerate() {
        add(&mut entries, name, full[i], half.map(|h| h[i]));
    }

    let da_full = alpha_diff(pot, sys, dalpha)?;
    let da_half = alpha_diff(pot, sys, dalpha / 2.0)?;
    let yal = |dl: &[f64], da: &[f64]| sup(range(), |n| 1.0 - 0.5 * y * dl[n] + a * da[n]);
    add(&mut entries, "yal", yal(&dl, &da_full), Some(yal(&dl_half, &da_half)));
    let rngsn = |da: &[f64]| sup(range(), |n| r[n + 1] - r[n - 1] + s[n] * s[n] - s[n - 1] * s[n - 1] + da[n]);
    add(&mut entries, "rnGSN", rngsn(&da_full), Some(rngsn(&da_half)));

    Ok(IdentityReport { y: sys.y, alpha_hat: a, n_max: sys.n_max, dy, dalpha, entries })
}
