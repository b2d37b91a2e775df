//! Lenard operators `L_l[u]`: `d L_{l+1} = (d^3 + 4u d + 2u') L_l`, `L_0 = 1/2`, `L_l[0] = 0`.

use std::fmt::Write as _;
use std::path::Path;

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::diffpoly::{rat, rat_to_f64, DiffMonomial, DiffPoly, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LenardTable {
    pub k_max: usize,
    pub entries: Vec<DiffPoly>,
    pub primes: Vec<DiffPoly>,
}

/// `(d^3 + 4u d + 2u') p`.
pub fn recursion_operator(p: &DiffPoly) -> DiffPoly {
    let d1 = p.total_derivative();
    let d3 = d1.total_derivative().total_derivative();
    let four_u = DiffPoly::u(0).scale(&rat(4, 1));
    let two_up = DiffPoly::u(1).scale(&rat(2, 1));
    &(&d3 + &(&four_u * &d1)) + &(&two_up * p)
}

pub fn build_table(k_max: usize) -> Result<LenardTable> {
    let mut entries = vec![DiffPoly::constant(rat(1, 2))];
    let mut primes = vec![DiffPoly::zero()];
    for l in 0..k_max {
        let next_prime = recursion_operator(&entries[l]);
        let next = next_prime.integrate_exact()?;
        entries.push(next);
        primes.push(next_prime);
    }
    Ok(LenardTable { k_max, entries, primes })
}

impl LenardTable {
    pub fn entry(&self, l: usize) -> Result<&DiffPoly> {
        self.entries
            .get(l)
            .ok_or_else(|| Error::IndexOutOfRange(format!("L_{l} beyond table depth {}", self.k_max)))
    }

    pub fn prime(&self, l: usize) -> Result<&DiffPoly> {
        self.primes
            .get(l)
            .ok_or_else(|| Error::IndexOutOfRange(format!("L'_{l} beyond table depth {}", self.k_max)))
    }

    /// Checks every table invariant; returns a description of the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.entries.len() != self.k_max + 1 || self.primes.len() != self.k_max + 1 {
            return Err("table length does not match k_max".into());
        }
        if self.entries[0] != DiffPoly::constant(rat(1, 2)) {
            return Err("L_0 must be 1/2".into());
        }
        for l in 0..=self.k_max {
            if self.primes[l] != self.entries[l].total_derivative() {
                return Err(format!("stored L'_{l} is not the derivative of L_{l}"));
            }
            if l >= 1 {
                if !self.entries[l].constant_term().is_zero() {
                    return Err(format!("L_{l}[0] != 0"));
                }
                if !self.entries[l].is_homogeneous(2 * l as u64) {
                    return Err(format!("L_{l} is not of weight {}", 2 * l));
                }
                if self.primes[l] != recursion_operator(&self.entries[l - 1]) {
                    return Err(format!("L'_{l} does not follow from L_{}", l - 1));
                }
            }
        }
        Ok(())
    }

    /// Stable text form, one `L_l = ...` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, p) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "L_{l} = {p}");
        }
        out
    }

    pub fn to_text_with_primes(&self) -> String {
        let mut out = self.to_text();
        for (l, p) in self.primes.iter().enumerate() {
            let _ = writeln!(out, "L'_{l} = {p}");
        }
        out
    }

    /// Parses `to_text` output, recomputes derivatives and validates invariants.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("L'_") {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { pos: lineno, msg: "missing '='".into() })?;
            let idx: usize = lhs
                .trim()
                .strip_prefix("L_")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse { pos: lineno, msg: format!("bad label '{}'", lhs.trim()) })?;
            if idx != entries.len() {
                return Err(Error::Parse { pos: lineno, msg: format!("expected L_{}, found L_{idx}", entries.len()) });
            }
            entries.push(rhs.parse::<DiffPoly>()?);
        }
        Self::from_entries(entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: LenardTable = serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
        t.check().map_err(Error::Invalid)?;
        Ok(t)
    }

    fn from_entries(entries: Vec<DiffPoly>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("empty table".into()));
        }
        let primes = entries.iter().map(|p| p.total_derivative()).collect();
        let t = LenardTable { k_max: entries.len() - 1, entries, primes };
        t.check().map_err(Error::Invalid)?;
        Ok(t)
    }

    /// Loads a cached table of depth at least `k_max`, rebuilding and rewriting it otherwise.
    pub fn load_or_build(path: &Path, k_max: usize) -> Result<Self> {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(t) = Self::from_text(&text) {
                if t.k_max >= k_max {
                    return Ok(t.truncated(k_max));
                }
            }
        }
        let t = build_table(k_max)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, t.to_text())?;
        Ok(t)
    }

    pub fn truncated(&self, k_max: usize) -> Self {
        let k = k_max.min(self.k_max);
        LenardTable {
            k_max: k,
            entries: self.entries[..=k].to_vec(),
            primes: self.primes[..=k].to_vec(),
        }
    }

    /// `(lead, s_part)` with the string equation `lead + s * s_part = x u' + 2u - 2s`,
    /// i.e. `lead = L'_{k+1}` and `s_part = -4 L'_k`.
    pub fn string_equation(&self, k: usize) -> Result<(DiffPoly, DiffPoly)> {
        let lead = self.prime(k + 1)?.clone();
        let s_part = self.prime(k)?.scale(&rat(-4, 1));
        Ok((lead, s_part))
    }
}

/// `α^(k)_j = Γ(k+1/2) / (Γ(k-j+1) Γ(j+1/2))` for `0 <= j <= k`, by the Pascal rule.
pub fn alpha_row(k: usize) -> Vec<Rational> {
    let mut row = vec![Rational::one()];
    for m in 0..k {
        let mut next = Vec::with_capacity(m + 2);
        next.push(&row[0] * rat(2 * m as i64 + 1, 2 * (m as i64 + 1)));
        for j in 1..=m {
            next.push(&row[j] + &row[j - 1]);
        }
        next.push(Rational::one());
        row = next;
    }
    row
}

pub fn alpha(k: usize, j: usize) -> Result<Rational> {
    if j > k {
        return Err(Error::IndexOutOfRange(format!("alpha needs j <= k, got j={j}, k={k}")));
    }
    Ok(alpha_row(k).swap_remove(j))
}

/// `β_k`, the coefficient of `u^k` in `L_k`: `β_0 = 1/2`, `β_{k+1} = 4 (k+1/2)/(k+1) β_k`.
pub fn beta(k: usize) -> Rational {
    let mut b = rat(1, 2);
    for m in 0..k {
        b = b * rat(2 * (2 * m as i64 + 1), m as i64 + 1);
    }
    b
}

/// `2^{(4k-2)/(2k+1)}`, the rescaling of the wall parameter in the shift `x -> x + τ_0(βs)`.
pub fn beta_scale(k: usize) -> f64 {
    let k = k as f64;
    2f64.powf((4.0 * k - 2.0) / (2.0 * k + 1.0))
}

#[derive(Clone, Debug)]
pub struct HierarchyCoefficients {
    pub k: usize,
    pub j: usize,
    pub alpha: Rational,
    pub beta: Rational,
    /// Exact factor `2 α^(k)_j` in front of `2^{(2k-4j-1)/(2k+1)} s^{k-j}`.
    pub tau_rational: Rational,
    pub tau_prefactor: f64,
}

impl HierarchyCoefficients {
    pub fn tau(&self, s: f64) -> f64 {
        self.tau_prefactor * s.powi((self.k - self.j) as i32)
    }
}

pub fn hierarchy_coefficients(k: usize, j: usize) -> Result<HierarchyCoefficients> {
    let a = alpha(k, j)?;
    let tau_rational = &a * rat(2, 1);
    let (kf, jf) = (k as f64, j as f64);
    let tau_prefactor = rat_to_f64(&tau_rational) * 2f64.powf((2.0 * kf - 4.0 * jf - 1.0) / (2.0 * kf + 1.0));
    Ok(HierarchyCoefficients { k, j, alpha: a, beta: beta(k), tau_rational, tau_prefactor })
}

/// `τ_0(s) .. τ_{k-1}(s)`.
pub fn tau_profile(k: usize, s: f64) -> Vec<f64> {
    (0..k).map(|j| hierarchy_coefficients(k, j).expect("j < k").tau(s)).collect()
}

#[derive(Clone, Debug)]
pub struct ShiftCheck {
    pub exact: bool,
    pub residual: DiffPoly,
}

/// `L_k[u+z] - Σ_j (4z)^{k-j} α^(k)_j L_j[u]`, expanded symbolically.
pub fn verify_shift_identity(table: &LenardTable, k: usize, z: &Rational) -> Result<ShiftCheck> {
    let lhs = table.entry(k)?.shift(z);
    let alphas = alpha_row(k);
    let four_z = z * Rational::from_integer(BigInt::from(4));
    let mut rhs = DiffPoly::zero();
    for (j, a) in alphas.iter().enumerate() {
        let mut c = a.clone();
        for _ in 0..(k - j) {
            c = &c * &four_z;
        }
        rhs = &rhs + &table.entry(j)?.scale(&c);
    }
    let residual = &lhs - &rhs;
    Ok(ShiftCheck { exact: residual.is_zero(), residual })
}

/// Coefficient of `(u^(0))^k` in `L_k`.
pub fn leading_power_coefficient(table: &LenardTable, k: usize) -> Result<Rational> {
    Ok(table.entry(k)?.coefficient(&DiffMonomial::var(0, k as u32)))
}

/// Outcome of one exact check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> SymbolicCheck {
    SymbolicCheck { name: name.into(), pass, detail }
}

/// Leading parts `L'_{k+1}` of the string equations for `k = 1, 2, 3`, written out by hand as
/// `(coefficient, [(order, exponent)])`.
fn expected_leads() -> Vec<(usize, DiffPoly)> {
    use crate::diffpoly::poly_from_ints;
    vec![
        (1, poly_from_ints(&[(1, &[(3, 1)]), (6, &[(0, 1), (1, 1)])])),
        (2, poly_from_ints(&[(1, &[(5, 1)]), (30, &[(0, 2), (1, 1)]), (20, &[(1, 1), (2, 1)]), (10, &[(0, 1), (3, 1)])])),
        (
            3,
            poly_from_ints(&[
                (1, &[(7, 1)]),
                (70, &[(2, 1), (3, 1)]),
                (42, &[(1, 1), (4, 1)]),
                (14, &[(0, 1), (5, 1)]),
                (70, &[(1, 3)]),
                (280, &[(0, 1), (1, 1), (2, 1)]),
                (70, &[(0, 2), (3, 1)]),
                (140, &[(0, 3), (1, 1)]),
            ]),
        ),
    ]
}

/// Exact checks on `L_0..L_{k_max}`: vanishing at `u = 0`, weight `2l` homogeneity, the
/// shift identity at five rational points, `β_k` against the `u^k` coefficient, and the
/// written-out string equations for `k = 1, 2, 3` (which need `k_max >= 4`).
pub fn symbolic_suite(k_max: usize) -> Result<Vec<SymbolicCheck>> {
    let t = build_table(k_max)?;
    let mut out = Vec::new();
    out.push(check("table", t.check().is_ok(), t.check().err().unwrap_or_default()));
    let zero: Vec<usize> = (1..=k_max).filter(|&l| !t.entries[l].constant_term().is_zero()).collect();
    out.push(check("vanish_at_zero", zero.is_empty(), format!("failing l: {zero:?}")));
    let inhom: Vec<usize> = (1..=k_max).filter(|&l| !t.entries[l].is_homogeneous(2 * l as u64)).collect();
    out.push(check("homogeneity", inhom.is_empty(), format!("failing l: {inhom:?}")));
    let zs = [rat(1, 1), rat(-1, 2), rat(3, 7), rat(-5, 3), rat(2, 1)];
    let mut bad = Vec::new();
    for k in 0..=k_max {
        for z in &zs {
            if !verify_shift_identity(&t, k, z)?.exact {
                bad.push(format!("k={k} z={z}"));
            }
        }
    }
    out.push(check("shift_identity", bad.is_empty(), format!("{} cases, failing: {bad:?}", (k_max + 1) * zs.len())));
    let wrong: Vec<usize> = (0..=k_max).filter(|&k| leading_power_coefficient(&t, k).ok() != Some(beta(k))).collect();
    out.push(check("beta_closed_form", wrong.is_empty(), format!("failing k: {wrong:?}")));
    for (k, lead) in expected_leads() {
        let name = format!("string_equation_k{k}");
        if k + 1 > k_max {
            out.push(check(&name, false, format!("needs k_max >= {}", k + 1)));
            continue;
        }
        let (got_lead, got_s) = t.string_equation(k)?;
        // the s-part is -4 L'_k, i.e. -4 times the previous lead
        let prev = if k == 1 { DiffPoly::u(1) } else { expected_leads()[k - 2].1.clone() };
        let s_ok = got_s == prev.scale(&rat(-4, 1));
        out.push(check(&name, got_lead == lead && s_ok, format!("L'_{} = {got_lead}", k + 1)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::poly_from_ints;

    #[test]
    fn first_entries() {
        let t = build_table(4).unwrap();
        assert_eq!(t.entries[1], DiffPoly::u(0));
        assert_eq!(t.entries[2], poly_from_ints(&[(1, &[(2, 1)]), (3, &[(0, 2)])]));
        assert_eq!(
            t.entries[3],
            poly_from_ints(&[(1, &[(4, 1)]), (10, &[(0, 1), (2, 1)]), (5, &[(1, 2)]), (10, &[(0, 3)])])
        );
        assert_eq!(t.primes[4].coefficient(&DiffMonomial::from_pairs(&[(0, 3), (1, 1)])), rat(140, 1));
        t.check().unwrap();
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(alpha(2, 1).unwrap(), rat(3, 2));
        assert_eq!(alpha(1, 0).unwrap(), rat(1, 2));
        assert_eq!(beta(1), rat(1, 1));
        assert_eq!(beta(3), rat(10, 1));
        assert!(alpha(2, 3).is_err());
        let t = build_table(3).unwrap();
        assert_eq!(leading_power_coefficient(&t, 3).unwrap(), beta(3));
    }

    #[test]
    fn tau_values() {
        let c = hierarchy_coefficients(1, 0).unwrap();
        assert!((c.tau(1.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(tau_profile(3, 0.0).iter().all(|&t| t == 0.0));
    }

    #[test]
    fn shift_small_cases() {
        let t = build_table(5).unwrap();
        assert!(verify_shift_identity(&t, 2, &rat(1, 1)).unwrap().exact);
        assert!(verify_shift_identity(&t, 1, &rat(-5, 3)).unwrap().exact);
        assert!(verify_shift_identity(&t, 5, &rat(3, 7)).unwrap().exact);
    }

    #[test]
    fn symbolic_suite_passes() {
        for c in symbolic_suite(4).unwrap() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn text_cache_round_trip() {
        let t = build_table(4).unwrap();
        assert_eq!(LenardTable::from_text(&t.to_text()).unwrap(), t);
        assert_eq!(LenardTable::from_json(&t.to_json()).unwrap(), t);
        let broken = t.to_text().replace("L_2 = 3 * u^(0)^2", "L_2 = 4 * u^(0)^2");
        assert!(LenardTable::from_text(&broken).is_err());
    }
}
