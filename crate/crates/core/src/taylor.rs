//! Truncated Taylor series at a point, `c[k] = f^(k)(x0) / k!`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::diffpoly::{rat_to_f64, DiffPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct Taylor {
    pub c: Vec<f64>,
}

impl Taylor {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Taylor { c }
    }

    /// The identity `x0 + t`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut t = Self::constant(x0, order);
        if order >= 1 {
            t.c[1] = 1.0;
        }
        t
    }

    /// From derivative values `f, f', f'', ...`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut f = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    f *= k as f64;
                }
                v / f
            })
            .collect();
        Taylor { c }
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut f = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    f *= k as f64;
                }
                v * f
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn scale(&self, a: f64) -> Self {
        Taylor { c: self.c.iter().map(|v| v * a).collect() }
    }

    pub fn add_const(&self, a: f64) -> Self {
        let mut t = self.clone();
        t.c[0] += a;
        t
    }

    /// Derivative series, one order shorter.
    pub fn diff(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::constant(0.0, 0);
        }
        Taylor { c: (1..=n).map(|k| k as f64 * self.c[k]).collect() }
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / self.c[0];
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s / self.c[0];
        }
        Taylor { c: r }
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Taylor { c: e }
    }

    pub fn ln(&self) -> Self {
        let n = self.order();
        let mut l = vec![0.0; n + 1];
        l[0] = self.c[0].ln();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * self.c[k - j]).sum();
            l[k] = (k as f64 * self.c[k] - s) / (k as f64 * self.c[0]);
        }
        Taylor { c: l }
    }

    /// `|f|^p` with the sign of `f` reattached, for `f(x0) != 0`.
    pub fn signed_pow(&self, p: f64) -> Self {
        let sign = self.c[0].signum();
        self.scale(sign).ln().scale(p).exp().scale(sign)
    }

    /// `ln(1 + f)` with an accurate constant term for small `f`.
    pub fn ln_1p(&self) -> Self {
        let mut l = self.add_const(1.0).ln();
        l.c[0] = self.c[0].ln_1p();
        l
    }

    /// `ln(1 + e^f)`, evaluated without overflow.
    pub fn softplus(&self) -> Self {
        if self.c[0] > 0.0 {
            self + &(-self).exp().ln_1p()
        } else {
            self.exp().ln_1p()
        }
    }
}

/// `p[u]` as a series in `x`, given the series of `u`. The result loses `max_order(p)` orders.
pub fn eval_diffpoly(p: &DiffPoly, u: &Taylor) -> Taylor {
    let top = p.max_order().unwrap_or(0) as usize;
    assert!(top <= u.order(), "series too short for order {top}");
    let out_order = u.order() - top;
    let mut derivs = vec![u.clone()];
    for _ in 0..top {
        let next = derivs.last().expect("nonempty").diff();
        derivs.push(next);
    }
    let mut acc = Taylor::constant(0.0, out_order);
    for (m, c) in p.terms() {
        let mut t = Taylor::constant(rat_to_f64(c), out_order);
        for &(j, e) in m.factors() {
            for _ in 0..e {
                t = &t * &derivs[j as usize];
            }
        }
        acc = &acc + &t;
    }
    acc
}

impl Add for &Taylor {
    type Output = Taylor;
    fn add(self, o: &Taylor) -> Taylor {
        Taylor { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Taylor {
    type Output = Taylor;
    fn sub(self, o: &Taylor) -> Taylor {
        Taylor { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &Taylor {
    type Output = Taylor;
    fn mul(self, o: &Taylor) -> Taylor {
        let n = self.order().min(o.order());
        Taylor { c: (0..=n).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect() }
    }
}

impl Neg for &Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}
