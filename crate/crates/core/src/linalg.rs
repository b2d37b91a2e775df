//! Banded and dense LU factorizations with partial pivoting.

use crate::numeric::Real;

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, with room for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    /// True if `(r, c)` lies inside the declared band.
    pub fn in_band(&self, r: usize, c: usize) -> bool {
        c + self.kl >= r && c <= r + self.ku
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        assert!(self.in_band(r, c), "entry ({r}, {c}) outside band kl={} ku={}", self.kl, self.ku);
        let i = self.idx(r, c);
        self.data[i] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c + self.kl < r || c > r + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.idx(r, c)]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            let lo = r.saturating_sub(self.kl);
            let hi = (r + self.ku).min(self.n - 1);
            y[r] = (lo..=hi).map(|c| self.get(r, c) * x[c]).sum();
        }
        y
    }

    /// Factorizes in place and solves `A x = b`.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let reach = kl + ku;
        let mut rhs = b.to_vec();
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.abs());
        }
        for i in 0..n {
            let last_row = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = self.get(i, i).abs();
            for r in i + 1..=last_row {
                let v = self.get(r, i).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::NoConvergence(format!("singular band matrix at column {i}")));
            }
            let last_col = (i + reach).min(n - 1);
            if p != i {
                for c in i..=last_col {
                    let (a, b) = (self.idx(i, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
                rhs.swap(i, p);
            }
            let piv = self.get(i, i);
            for r in i + 1..=last_row {
                let ri = self.idx(r, i);
                let f = self.data[ri] / piv;
                if f == 0.0 {
                    continue;
                }
                self.data[ri] = 0.0;
                for c in i + 1..=last_col {
                    let (src, dst) = (self.idx(i, c), self.idx(r, c));
                    self.data[dst] -= f * self.data[src];
                }
                rhs[r] -= f * rhs[i];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let mut acc = rhs[i];
            for c in i + 1..=last_col {
                acc -= self.get(i, c) * x[c];
            }
            x[i] = acc / self.get(i, i);
        }
        Ok(x)
    }
}

/// LU with partial pivoting of a row-major `n x n` matrix.
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> DenseLu<T> {
    pub fn new(mut a: Vec<T>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for i in 0..n {
            let mut p = i;
            let mut best = a[i * n + i].abs();
            for r in i + 1..n {
                let v = a[r * n + i].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() {
                return Err(Error::NoConvergence(format!("singular matrix at column {i}")));
            }
            if p != i {
                for c in 0..n {
                    a.swap(i * n + c, p * n + c);
                }
                perm.swap(i, p);
                sign = -sign;
            }
            let piv = a[i * n + i];
            for r in i + 1..n {
                let f = a[r * n + i] / piv;
                a[r * n + i] = f;
                if f == T::zero() {
                    continue;
                }
                for c in i + 1..n {
                    let t = a[i * n + c];
                    a[r * n + c] = a[r * n + c] - f * t;
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm, sign })
    }

    pub fn det(&self) -> T {
        let mut d = self.sign;
        for i in 0..self.n {
            d = d * self.lu[i * self.n + i];
        }
        d
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for c in 0..i {
                x[i] = x[i] - self.lu[i * n + c] * x[c];
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                x[i] = x[i] - self.lu[i * n + c] * x[c];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }
}
