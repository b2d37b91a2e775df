//! Truncated banded operators `B`, `P`, `H` in the orthonormal basis and the commutator
//! identities linking them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::stieltjes::{stieltjes_recurrence, stieltjes_with_derivative};
use super::{OPSystem, Potential};

/// Square matrix stored by diagonals: `bands[k][i] = M[i][i + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix {
    pub n: usize,
    pub bands: BTreeMap<isize, Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize) -> Self {
        BandedMatrix { n, bands: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.bands.insert(0, vec![1.0; n]);
        m
    }

    fn band_len(&self, k: isize) -> usize {
        self.n.saturating_sub(k.unsigned_abs())
    }

    /// Row of the first entry of band `k`.
    fn row0(k: isize) -> usize {
        if k < 0 {
            k.unsigned_abs()
        } else {
            0
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let k = j as isize - i as isize;
        self.bands.get(&k).map_or(0.0, |b| b[i - Self::row0(k)])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = j as isize - i as isize;
        let len = self.band_len(k);
        let band = self.bands.entry(k).or_insert_with(|| vec![0.0; len]);
        band[i - Self::row0(k)] = v;
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Self::zeros(self.n);
        let keys: std::collections::BTreeSet<isize> = self.bands.keys().chain(other.bands.keys()).copied().collect();
        for k in keys {
            let len = self.band_len(k);
            let a = self.bands.get(&k);
            let b = other.bands.get(&k);
            let band = (0..len).map(|i| f(a.map_or(0.0, |a| a[i]), b.map_or(0.0, |b| b[i]))).collect();
            out.bands.insert(k, band);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        let bands = self.bands.iter().map(|(&k, b)| (k, b.iter().map(|v| v * c).collect())).collect();
        BandedMatrix { n: self.n, bands }
    }

    /// `self - c·1`.
    pub fn shift(&self, c: f64) -> Self {
        self.sub(&Self::identity(self.n).scale(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut acc: BTreeMap<isize, Vec<f64>> = BTreeMap::new();
        for (&ka, a) in &self.bands {
            for (&kb, b) in &other.bands {
                let k = ka + kb;
                if k.unsigned_abs() >= self.n {
                    continue;
                }
                let len = self.band_len(k);
                let out = acc.entry(k).or_insert_with(|| vec![0.0; len]);
                // M[i][i+ka] * N[i+ka][i+ka+kb]
                for (ia, &va) in a.iter().enumerate() {
                    let i = ia + Self::row0(ka);
                    let mid = (i as isize + ka) as usize;
                    let j = mid as isize + kb;
                    if j < 0 || j as usize >= self.n {
                        continue;
                    }
                    let vb = b[mid - Self::row0(kb)];
                    out[i - Self::row0(k)] += va * vb;
                }
            }
        }
        BandedMatrix { n: self.n, bands: acc }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    fn select(&self, keep: impl Fn(isize) -> bool) -> Self {
        let bands = self.bands.iter().filter(|(&k, _)| keep(k)).map(|(&k, b)| (k, b.clone())).collect();
        BandedMatrix { n: self.n, bands }
    }

    /// Strictly upper part.
    pub fn upper(&self) -> Self {
        self.select(|k| k > 0)
    }

    /// Strictly lower part.
    pub fn lower(&self) -> Self {
        self.select(|k| k < 0)
    }

    pub fn diagonal(&self) -> Self {
        self.select(|k| k == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for (&k, b) in &self.bands {
            out.bands.insert(-k, b.clone());
        }
        out
    }

    /// Largest `|M[i][j]|` with both indices below `n - margin`.
    pub fn interior_sup(&self, margin: usize) -> f64 {
        let lim = self.n.saturating_sub(margin);
        let mut worst = 0.0f64;
        for (&k, b) in &self.bands {
            for (ib, &v) in b.iter().enumerate() {
                let i = ib + Self::row0(k);
                let j = (i as isize + k) as usize;
                if i < lim && j < lim {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Largest entry on band `k` inside the interior.
    pub fn band_sup(&self, k: isize, margin: usize) -> f64 {
        self.select(|b| b == k).interior_sup(margin)
    }

    /// Polynomial `Σ c_i M^i` by Horner's rule.
    pub fn polynomial(&self, coeffs: &[f64]) -> Self {
        let id = Self::identity(self.n);
        let mut acc = Self::zeros(self.n);
        for &c in coeffs.iter().rev() {
            acc = acc.mul(self).add(&id.scale(c));
        }
        acc
    }
}

/// Jacobi matrix `B` of the recurrence, truncated to `(n_max + 1)²`.
pub fn jacobi_matrix(sys: &OPSystem) -> BandedMatrix {
    let n = sys.n_max + 1;
    let mut b = BandedMatrix::zeros(n);
    b.bands.insert(0, sys.s.clone());
    let off: Vec<f64> = (1..n).map(|i| sys.r[i].sqrt()).collect();
    b.bands.insert(1, off.clone());
    b.bands.insert(-1, off);
    b
}

/// `V'(B)`.
pub fn v_prime_of(pot: &Potential, b: &BandedMatrix) -> BandedMatrix {
    b.polynomial(&pot.v_prime_coefficients())
}

/// `P = -(α̂/2)(V'(B)_+ - V'(B)_-)`.
pub fn p_matrix(pot: &Potential, b: &BandedMatrix) -> BandedMatrix {
    let vp = v_prime_of(pot, b);
    vp.upper().sub(&vp.lower()).scale(-pot.alpha_hat / 2.0)
}

/// `H = -(α̂/2)((V'(B)(B-y))_+ - (V'(B)(B-y))_-)`.
pub fn h_matrix(pot: &Potential, b: &BandedMatrix, y: f64) -> BandedMatrix {
    let m = v_prime_of(pot, b).mul(&b.shift(y));
    m.upper().sub(&m.lower()).scale(-pot.alpha_hat / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxReport {
    pub y: f64,
    pub n_max: usize,
    pub dy: f64,
    /// Rows within this distance of the truncation edge are excluded.
    pub margin: usize,
    /// `[B - y, H] - (B - y)`.
    pub string: f64,
    /// `[P, y - B] - (1 - ∂_y B)`, with `∂_y B` by central differences.
    pub flow: f64,
    /// Largest entry of the flow residual on the diagonals `m = n ± 2`.
    pub flow_pm2: f64,
    /// `H - ((B - y)P - (BP)_d - (B_+ - B_-)(α̂/2)V'(B)_d)`.
    pub hexp: f64,
    /// `max |A_{n,n-1} - n/sqrt(r_n)|`.
    pub a_subdiagonal: f64,
    /// `[B, A] - 1`.
    pub canonical: f64,
    pub p_antisymmetry: f64,
    pub h_antisymmetry: f64,
}

/// Builds `B`, `P`, `H` and `A` at the wall `y` and checks the operator identities on the
/// interior. Needs a finite wall; `∂_y B` comes from systems at `y ± dy`.
pub fn build_lax_matrices_and_check(pot: &Potential, y: f64, n_max: usize, dy: f64, bits: u32) -> Result<LaxReport> {
    if !y.is_finite() {
        return Err(Error::Invalid("the Lax identities involve y explicitly; use a finite wall".into()));
    }
    if n_max < 20 {
        return Err(Error::Invalid(format!("n_max must be at least 20, got {n_max}")));
    }
    if !(dy > 0.0) {
        return Err(Error::Invalid("dy must be positive".into()));
    }
    let (sys, a_dense) = stieltjes_with_derivative(pot, y, n_max, bits)?;
    let plus = stieltjes_recurrence(pot, y + dy, n_max, bits)?;
    let minus = stieltjes_recurrence(pot, y - dy, n_max, bits)?;
    let n = n_max + 1;
    let margin = 2 * pot.degree() + 2;

    let b = jacobi_matrix(&sys);
    let p = p_matrix(pot, &b);
    let h = h_matrix(pot, &b, y);
    let id = BandedMatrix::identity(n);
    let bmy = b.shift(y);

    let string = bmy.commutator(&h).sub(&bmy).interior_sup(margin);

    let db = jacobi_matrix(&plus).sub(&jacobi_matrix(&minus)).scale(0.5 / dy);
    let flow_res = p.commutator(&b.scale(-1.0).add(&id.scale(y))).sub(&id.sub(&db));
    let flow = flow_res.interior_sup(margin);
    let flow_pm2 = flow_res.band_sup(2, margin).max(flow_res.band_sup(-2, margin));

    let vp_d = v_prime_of(pot, &b).diagonal();
    let expansion = bmy
        .mul(&p)
        .sub(&b.mul(&p).diagonal())
        .sub(&b.upper().sub(&b.lower()).mul(&vp_d).scale(pot.alpha_hat / 2.0));
    let hexp = h.sub(&expansion).interior_sup(margin);

    let a = BandedMatrix::from_dense(&a_dense);
    let a_subdiagonal = (1..n).map(|i| (a.get(i, i - 1) - i as f64 / sys.r[i].sqrt()).abs()).fold(0.0, f64::max);
    let canonical = b.commutator(&a).sub(&id).interior_sup(margin);

    Ok(LaxReport {
        y,
        n_max,
        dy,
        margin,
        string,
        flow,
        flow_pm2,
        hexp,
        a_subdiagonal,
        canonical,
        p_antisymmetry: p.add(&p.transpose()).interior_sup(0),
        h_antisymmetry: h.add(&h.transpose()).interior_sup(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &BandedMatrix) -> Vec<Vec<f64>> {
        (0..m.n).map(|i| (0..m.n).map(|j| m.get(i, j)).collect()).collect()
    }

    #[test]
    fn banded_product_matches_dense() {
        let a = BandedMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![3.0, 4.0, 5.0], vec![0.0, 6.0, 7.0]]);
        let b = BandedMatrix::from_dense(&[vec![0.0, 0.0, 1.0], vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 1.0]]);
        let c = dense(&a.mul(&b));
        let da = dense(&a);
        let db = dense(&b);
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| da[i][k] * db[k][j]).sum();
                assert_eq!(c[i][j], e);
            }
        }
    }

    #[test]
    fn gaussian_p_has_one_band_each_side() {
        let pot = Potential::gaussian(1.0);
        let sys = stieltjes_recurrence(&pot, 1.0, 10, 106).unwrap();
        let b = jacobi_matrix(&sys);
        let p = p_matrix(&pot, &b);
        assert!(p.diagonal().interior_sup(0) < 1e-15);
        assert!((p.get(2, 3) + sys.r[3].sqrt()).abs() < 1e-15);
        assert!((p.get(3, 2) - sys.r[3].sqrt()).abs() < 1e-15);
    }
}
