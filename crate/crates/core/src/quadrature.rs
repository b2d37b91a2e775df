//! Gauss-Legendre rules and composite panel quadrature.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use crate::numeric::Real;

/// Nodes ascending on `[-1, 1]` with weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("n >= 1"));
    let mut pairs: Vec<(f64, f64)> = rule.iter().copied().collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_and_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let one = T::one();
    let (mut p0, mut p1) = (one, x);
    if n == 0 {
        return (one, T::zero());
    }
    for k in 1..n {
        let kf = T::of_usize(k);
        let p2 = ((kf + kf + one) * x * p1 - kf * p0) / (kf + one);
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let dp = nf * (x * p1 - p0) / (x * x - one);
    (p1, dp)
}

/// Gauss-Legendre rule in a wider float type, refining the `f64` nodes by Newton steps.
pub fn gauss_legendre_in<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x64, _) = gauss_legendre(n);
    let two = T::of(2.0);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for &x0 in &x64 {
        let mut x = T::of(x0);
        for _ in 0..3 {
            let (p, dp) = legendre_and_derivative(n, x);
            x = x - p / dp;
        }
        let (_, dp) = legendre_and_derivative(n, x);
        xs.push(x);
        ws.push(two / ((T::one() - x * x) * dp * dp));
    }
    (xs, ws)
}

/// Nodes and weights of `m`-point rules on each panel `[edges[i], edges[i+1]]`.
pub fn composite_rule<T: Real>(edges: &[T], m: usize) -> (Vec<T>, Vec<T>) {
    let (t, w) = gauss_legendre_in::<T>(m);
    let half = T::of(0.5);
    let mut xs = Vec::with_capacity(m * edges.len());
    let mut ws = Vec::with_capacity(m * edges.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let c = half * (a + b);
        let h = half * (b - a);
        for i in 0..m {
            xs.push(c + h * t[i]);
            ws.push(h * w[i]);
        }
    }
    (xs, ws)
}

/// Gauss collocation tableau on `[0, 1]`: abscissae `c`, integration matrix `a`, weights `b`.
#[derive(Clone, Debug)]
pub struct GaussTableau {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl GaussTableau {
    pub fn new(m: usize) -> Self {
        let (t, w) = gauss_legendre(m);
        let c: Vec<f64> = t.iter().map(|&t| 0.5 * (t + 1.0)).collect();
        let b: Vec<f64> = w.iter().map(|&w| 0.5 * w).collect();
        // a[j][l] = ∫_0^{c_j} ℓ_l, integrated exactly with an m-point rule on [0, c_j].
        let mut a = vec![vec![0.0; m]; m];
        for j in 0..m {
            for l in 0..m {
                let mut acc = 0.0;
                for q in 0..m {
                    let tau = c[j] * c[q];
                    let mut ell = 1.0;
                    for r in 0..m {
                        if r != l {
                            ell *= (tau - c[r]) / (c[l] - c[r]);
                        }
                    }
                    acc += b[q] * c[j] * ell;
                }
                a[j][l] = acc;
            }
        }
        GaussTableau { c, a, b }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::DoubleDouble;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn refined_rule_is_double_double_accurate() {
        let (x, w) = gauss_legendre_in::<DoubleDouble>(20);
        let mut s = DoubleDouble::zero();
        for i in 0..20 {
            let mut p = DoubleDouble::one();
            for _ in 0..38 {
                p *= x[i];
            }
            s += w[i] * p;
        }
        let exact = DoubleDouble::of(2.0) / DoubleDouble::of(39.0);
        let err = (s - exact).abs().f64();
        assert!(err < 1e-28, "{err:e}");
    }

    #[test]
    fn tableau_rows_integrate_constants() {
        let t = GaussTableau::new(4);
        for j in 0..4 {
            let row: f64 = t.a[j].iter().sum();
            assert!((row - t.c[j]).abs() < 1e-14);
        }
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
