//! Airy function `Ai` and its derivative.
//!
//! Maclaurin series summed in double-double inside `|x| <= X_SWITCH`,
//! Poincaré asymptotic expansions outside.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::numeric::{DoubleDouble as Dd, Real};

/// Series/asymptotic crossover. At `|x| = 9.5`, `ζ = (2/3)|x|^{3/2} ≈ 19.5`: the smallest
/// asymptotic term is about `e^{-2ζ} ≈ 1e-17` relative, while series cancellation costs
/// about `e^{2ζ} · 2^{-104} ≈ 5e-15` relative on the decaying side.
pub const X_SWITCH: f64 = 9.5;

// Ai(0) and -Ai'(0) as double-double pairs.
const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
const NEG_AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub est_abs_error: f64,
}

pub fn airy_ai(x: f64) -> AiryValue {
    if x.abs() <= X_SWITCH {
        series(x)
    } else if x > 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(x)
    }
}

fn series(x: f64) -> AiryValue {
    let xd = Dd::of(x);
    let x3 = xd * xd * xd;
    let tol = Dd::of(1e-34);
    // f = Σ t_k, t_{k+1} = t_k x^3/((3k+2)(3k+3)); g = Σ, g_{k+1} = g_k x^3/((3k+3)(3k+4))
    let (mut f, mut tf) = (Dd::one(), Dd::one());
    let (mut g, mut tg) = (xd, xd);
    // f' terms p_1 = x^2/2, p_{k+1} = p_k x^3/(3k(3k+2)); g' terms p_0 = 1, p_{k+1} = p_k x^3/((3k+1)(3k+3))
    let (mut fp, mut tfp) = (xd * xd / Dd::of(2.0), xd * xd / Dd::of(2.0));
    let (mut gp, mut tgp) = (Dd::one(), Dd::one());
    let mut largest = 1.0f64.max(x.abs());
    for k in 0..200 {
        let kf = k as f64;
        tf = tf * x3 / Dd::of((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg = tg * x3 / Dd::of((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        tgp = tgp * x3 / Dd::of((3.0 * kf + 1.0) * (3.0 * kf + 3.0));
        let k1 = kf + 1.0;
        tfp = tfp * x3 / Dd::of((3.0 * k1) * (3.0 * k1 + 2.0));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        largest = largest.max(tf.abs().f64()).max(tg.abs().f64());
        if tf.abs() < tol && tg.abs() < tol && tfp.abs() < tol && tgp.abs() < tol {
            break;
        }
    }
    let c1 = qd::Quad(AI0.0, AI0.1);
    let c2 = qd::Quad(NEG_AIP0.0, NEG_AIP0.1);
    let ai = c1 * f - c2 * g;
    let aip = c1 * fp - c2 * gp;
    AiryValue {
        x,
        ai: ai.f64(),
        ai_prime: aip.f64(),
        est_abs_error: largest * 1e-31 + f64::EPSILON * ai.abs().f64(),
    }
}

/// Coefficients `u_k` of the Airy asymptotic series, with the companion `v_k`.
fn uv(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-next * (6.0 * kf + 1.0) / (6.0 * kf - 1.0));
    }
    (u, v)
}

/// Sums `Σ (±1)^k c_k / ζ^k` (terms chosen by `pick`) until terms stop decreasing.
fn asym_sum(c: &[f64], zeta: f64, pick: impl Fn(usize) -> Option<f64>) -> (f64, f64) {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut zk = 1.0;
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            zk /= zeta;
        }
        if let Some(sign) = pick(k) {
            let t = sign * ck * zk;
            if t.abs() > last {
                return (sum, last);
            }
            sum += t;
            last = t.abs();
        }
    }
    (sum, last)
}

fn asymptotic_positive(x: f64) -> AiryValue {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv(40);
    let alt = |k: usize| Some(if k % 2 == 0 { 1.0 } else { -1.0 });
    let (su, eu) = asym_sum(&u, zeta, alt);
    let (sv, ev) = asym_sum(&v, zeta, alt);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    let ai = e / q * su;
    let aip = -e * q * sv;
    AiryValue { x, ai, ai_prime: aip, est_abs_error: (e / q * eu).max(e * q * ev) + f64::EPSILON * ai.abs() }
}

fn asymptotic_negative(x: f64) -> AiryValue {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = uv(40);
    let even = |k: usize| (k % 2 == 0).then(|| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 });
    let odd = |k: usize| (k % 2 == 1).then(|| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 });
    let (pu, e1) = asym_sum(&u, zeta, even);
    let (qu, e2) = asym_sum(&u, zeta, odd);
    let (pv, e3) = asym_sum(&v, zeta, even);
    let (qv, e4) = asym_sum(&v, zeta, odd);
    let (s, c) = (zeta + FRAC_PI_4).sin_cos();
    let q = z.powf(0.25);
    let norm = 1.0 / PI.sqrt();
    let ai = norm / q * (s * pu - c * qu);
    let aip = -norm * q * (c * pv + s * qv);
    let trunc = (norm / q * e1.max(e2)).max(norm * q * e3.max(e4));
    // argument reduction of ζ in double precision
    let arg = zeta * f64::EPSILON * norm * q;
    AiryValue { x, ai, ai_prime: aip, est_abs_error: trunc + arg + 2.0 * f64::EPSILON }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from a 50-digit evaluation
    const REF: [(f64, f64, f64); 10] = [
        (-15.0, 0.27821749087082892953, 0.27237420430864202083),
        (-9.7, 0.28023750191629778381, 0.48628629123926627751),
        (-9.4, 0.29347755611206789964, -0.39986236638984384278),
        (-5.0, 0.35076100902411431979, 0.32719281855444313679),
        (-1.0, 0.5355608832923521188, -0.010160567116645209395),
        (0.5, 0.23169360648083348977, -0.22491053266468389314),
        (2.0, 0.034924130423274379135, -0.053090384433653631704),
        (9.4, 7.26741177077919352e-10, -2.2470755570506666927e-9),
        (9.7, 2.8537159314931064167e-10, -8.9599458489931752356e-10),
        (10.0, 1.1047532552898685934e-10, -3.5206336767389236366e-10),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, ai, aip) in &REF {
            let v = airy_ai(x);
            assert!((v.ai - ai).abs() < 1e-14, "Ai({x}) = {} vs {ai}", v.ai);
            assert!((v.ai_prime - aip).abs() < 1e-14, "Ai'({x}) = {} vs {aip}", v.ai_prime);
            assert!(v.est_abs_error < 1e-12);
        }
    }

    #[test]
    fn values_at_zero() {
        let v = airy_ai(0.0);
        assert!((v.ai - 0.355028053887817).abs() < 1e-15);
        assert!((v.ai_prime + 0.258819403792807).abs() < 1e-15);
    }

    #[test]
    fn decays_positively() {
        let v = airy_ai(10.0);
        assert!(v.ai > 0.0 && v.ai < 1e-9);
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &x in &[X_SWITCH, -X_SWITCH] {
            let a = series(x);
            let b = if x > 0.0 { asymptotic_positive(x) } else { asymptotic_negative(x) };
            let scale = if x > 0.0 { a.ai.abs() } else { 1.0 };
            assert!((a.ai - b.ai).abs() < 1e-13 * scale.max(1e-30) + 1e-14, "{x}");
        }
    }
}
