//! Aggregated Gaussian identity checks with fixed thresholds.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{build_lax_matrices_and_check, stieltjes_recurrence, verify_recurrence_identities, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    pub value: f64,
    /// Accepted band `[lo, hi]`; `lo` is `-inf` for plain thresholds.
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl SuiteCheck {
    fn below(name: String, value: f64, hi: f64) -> Self {
        SuiteCheck { name, value, lo: f64::NEG_INFINITY, hi, pass: value < hi }
    }

    fn within(name: String, value: f64, lo: f64, hi: f64) -> Self {
        SuiteCheck { name, value, lo, hi, pass: lo <= value && value <= hi }
    }
}

pub const ALGEBRAIC_TOL: f64 = 1e-8;
pub const LAX_TOL: f64 = 1e-7;
pub const HERMITE_TOL: f64 = 1e-10;
/// Central differences must show an observed order in this band.
pub const ORDER_BAND: (f64, f64) = (1.8, 2.2);

/// Gaussian `α̂ = 1` checks at each wall in `ys` with `n_max` polynomials, plus the
/// untruncated Hermite limit.
pub fn gaussian_suite(ys: &[f64], n_max: usize, bits: u32) -> Result<Vec<SuiteCheck>> {
    let pot = Potential::gaussian(1.0);
    let mut out = Vec::new();
    for &y in ys {
        let sys = stieltjes_recurrence(&pot, y, n_max, bits)?;
        let rep = verify_recurrence_identities(&pot, &sys, 1e-2, 1e-2)?;
        for name in ["string1", "string2", "sn", "pid2"] {
            let e = rep.get(name).expect("gaussian entry");
            out.push(SuiteCheck::below(format!("{name}@y={y}"), e.residual, ALGEBRAIC_TOL));
        }
        for name in ["snG", "rnG", "toda"] {
            let e = rep.get(name).expect("gaussian entry");
            let order = e.observed_order().unwrap_or(f64::NAN);
            out.push(SuiteCheck::within(format!("{name}_order@y={y}"), order, ORDER_BAND.0, ORDER_BAND.1));
        }
        let lax = build_lax_matrices_and_check(&pot, y, n_max, 1e-4, bits)?;
        for (name, v) in [
            ("lax_string", lax.string),
            ("lax_flow", lax.flow),
            ("lax_hexp", lax.hexp),
            ("lax_aid", lax.a_subdiagonal),
            ("lax_canonical", lax.canonical),
        ] {
            out.push(SuiteCheck::below(format!("{name}@y={y}"), v, LAX_TOL));
        }
        out.push(SuiteCheck::below(format!("lax_flow_pm2@y={y}"), lax.flow_pm2, 1e-12));
    }
    let sys = stieltjes_recurrence(&pot, f64::INFINITY, n_max, bits)?;
    let mut fact = 1.0;
    let mut worst_h = 0.0f64;
    let mut worst_r = 0.0f64;
    for n in 0..=n_max {
        if n > 0 {
            fact *= n as f64 / 2.0;
            worst_r = worst_r.max((sys.r[n] - n as f64 / 2.0).abs() / (n as f64 / 2.0));
        }
        let h = fact * std::f64::consts::PI.sqrt();
        worst_h = worst_h.max((sys.h[n] - h).abs() / h);
    }
    out.push(SuiteCheck::below("hermite_h".into(), worst_h, HERMITE_TOL));
    out.push(SuiteCheck::below("hermite_r".into(), worst_r, HERMITE_TOL));
    Ok(out)
}
