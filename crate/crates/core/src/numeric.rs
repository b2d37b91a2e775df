//! Float abstraction over `f64` and double-double.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Double-double (about 106-bit significand) real.
pub type DoubleDouble = qd::Quad;

pub trait Real:
    Copy
    + PartialOrd
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Significand bits.
    const BITS: u32;
    fn of(x: f64) -> Self;
    fn f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
    fn zero() -> Self {
        Self::of(0.0)
    }
    fn one() -> Self {
        Self::of(1.0)
    }
    fn max(self, o: Self) -> Self {
        if o > self {
            o
        } else {
            self
        }
    }
    fn powi(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc *= self;
        }
        acc
    }
}

impl Real for f64 {
    const BITS: u32 = 53;
    fn of(x: f64) -> Self {
        x
    }
    fn f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

impl Real for DoubleDouble {
    const BITS: u32 = 106;
    fn of(x: f64) -> Self {
        qd::Quad::from(x)
    }
    fn f64(self) -> f64 {
        self.0 + self.1
    }
    fn abs(self) -> Self {
        qd::Quad::abs(self)
    }
    fn sqrt(self) -> Self {
        qd::Quad::sqrt(self)
    }
    fn exp(self) -> Self {
        qd::Quad::exp(self)
    }
    fn ln(self) -> Self {
        qd::Quad::ln(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_arithmetic_is_extended() {
        let a = DoubleDouble::of(2.0) / DoubleDouble::of(39.0);
        let r = a * DoubleDouble::of(39.0) - DoubleDouble::of(2.0);
        assert!(r.f64().abs() < 1e-30);
        let e = DoubleDouble::of(-3.7).exp();
        // exp(-3.7) = 0.024723526470339388 - 1.294857794723138e-18
        let d = e - DoubleDouble::of(0.024723526470339388);
        assert!((d.f64() + 1.294857794723138e-18).abs() < 1e-30);
    }
}
