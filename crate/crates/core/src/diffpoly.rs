//! Differential polynomials in one dependent variable `u(x)`.
//!
//! A monomial is a product of powers of the jet variables `u^(j)`, a
//! polynomial a finite map from monomials to exact rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => r.to_f64().unwrap_or(f64::NAN),
    }
}

/// `∏_j (u^(j))^{e_j}`, stored as `(j, e_j)` pairs sorted by `j`, all `e_j > 0`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct DiffMonomial {
    factors: Vec<(u32, u32)>,
}

impl DiffMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// `(u^(order))^exp`.
    pub fn var(order: u32, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Self { factors: vec![(order, exp)] }
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut m = Self::one();
        for &(j, e) in pairs {
            m = m.mul(&Self::var(j, e));
        }
        m
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `Σ e_j (j + 2)`.
    pub fn weight(&self) -> u64 {
        self.factors.iter().map(|&(j, e)| e as u64 * (j as u64 + 2)).sum()
    }

    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64).sum()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.factors.last().map(|&(j, _)| j)
    }

    pub fn exponent(&self, order: u32) -> u32 {
        match self.factors.binary_search_by_key(&order, |&(j, _)| j) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut k) = (0, 0);
        while i < self.factors.len() && k < other.factors.len() {
            let (a, b) = (self.factors[i], other.factors[k]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    k += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    k += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[k..]);
        Self { factors: out }
    }

    /// Lowers the exponent of `u^(order)` by one; `None` if absent.
    pub fn divide_var(&self, order: u32) -> Option<Self> {
        let i = self.factors.binary_search_by_key(&order, |&(j, _)| j).ok()?;
        let mut f = self.factors.clone();
        if f[i].1 == 1 {
            f.remove(i);
        } else {
            f[i].1 -= 1;
        }
        Some(Self { factors: f })
    }

    /// Product of jet entries; `jet[j]` is `u^(j)`.
    pub fn eval(&self, jet: &[f64]) -> f64 {
        let mut v = 1.0;
        for &(j, e) in &self.factors {
            v *= jet[j as usize].powi(e as i32);
        }
        v
    }
}

impl Ord for DiffMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for DiffMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (j, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "u^({j})^{e}")?;
        }
        Ok(())
    }
}

/// Canonical differential polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct DiffPoly {
    terms: BTreeMap<DiffMonomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, DiffMonomial::one())
    }

    /// The jet variable `u^(order)`.
    pub fn u(order: u32) -> Self {
        Self::term(Rational::one(), DiffMonomial::var(order, 1))
    }

    pub fn term(c: Rational, m: DiffMonomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (DiffMonomial, Rational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: DiffMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
            e.is_zero()
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &DiffMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&DiffMonomial::one())
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order()).max()
    }

    /// Sorted, deduplicated term weights.
    pub fn weights(&self) -> Vec<u64> {
        let mut w: Vec<u64> = self.terms.keys().map(|m| m.weight()).collect();
        w.dedup();
        w
    }

    pub fn is_homogeneous(&self, weight: u64) -> bool {
        self.terms.keys().all(|m| m.weight() == weight)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Total x-derivative; `d u^(j) = u^(j+1)` with the Leibniz rule.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for &(j, e) in m.factors() {
                let rest = m.divide_var(j).expect("factor present");
                let nm = rest.mul(&DiffMonomial::var(j + 1, 1));
                out.add_term(nm, c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.total_derivative();
        }
        p
    }

    /// Partial derivative with respect to the jet variable `u^(order)`.
    pub fn partial(&self, order: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(order);
            if e > 0 {
                let rest = m.divide_var(order).expect("factor present");
                out.add_term(rest, c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Antiderivative `q` with `d q = self` and no constant term.
    ///
    /// Peels the highest-order term `c u^(J) (u^(J-1))^a R` with the candidate
    /// `c/(a+1) (u^(J-1))^(a+1) R` until nothing is left.
    pub fn integrate_exact(&self) -> Result<Self> {
        let mut rest = self.clone();
        let mut acc = Self::zero();
        while let Some(top) = rest.max_order() {
            if !rest.constant_term().is_zero() {
                return Err(Error::NotExact(format!("constant term {}", rest.constant_term())));
            }
            if top == 0 {
                return Err(Error::NotExact(format!("leftover {rest}")));
            }
            let (m, c) = rest
                .terms
                .iter()
                .rev()
                .find(|(m, _)| m.exponent(top) > 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .expect("a term attains the maximal order");
            if m.exponent(top) != 1 {
                return Err(Error::NotExact(format!("term {c} * {m} is nonlinear in u^({top})")));
            }
            let base = m.divide_var(top).expect("factor present");
            let a = base.exponent(top - 1);
            let cand = DiffPoly::term(
                c / Rational::from_integer(BigInt::from(a + 1)),
                base.mul(&DiffMonomial::var(top - 1, 1)),
            );
            rest = &rest - &cand.total_derivative();
            acc = &acc + &cand;
        }
        if !rest.is_zero() {
            return Err(Error::NotExact(format!("constant term {}", rest.constant_term())));
        }
        Ok(acc)
    }

    /// Evaluates at a jet `(u, u', u'', ...)` in canonical term order.
    pub fn eval_jet(&self, jet: &[f64]) -> Result<f64> {
        let need = self.max_order().map_or(0, |j| j as usize + 1);
        if jet.len() < need {
            return Err(Error::JetTooShort { need, got: jet.len() });
        }
        Ok(self.terms.iter().map(|(m, c)| rat_to_f64(c) * m.eval(jet)).sum())
    }

    /// Substitutes `u -> u + z`; derivatives of `u` are unchanged.
    pub fn shift(&self, z: &Rational) -> Self {
        let shifted_u = &Self::u(0) + &Self::constant(z.clone());
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for &(j, e) in m.factors() {
                let f = if j == 0 { shifted_u.pow(e) } else { Self::term(Rational::one(), DiffMonomial::var(j, e)) };
                t = &t * &f;
            }
            out = &out + &t;
        }
        out
    }

    pub fn to_f64_terms(&self) -> Vec<(f64, DiffMonomial)> {
        self.terms.iter().map(|(m, c)| (rat_to_f64(c), m.clone())).collect()
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for DiffPoly {
            type Output = DiffPoly;
            fn $f(self, rhs: DiffPoly) -> DiffPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Stable text form: `coeff * u^(j)^e * ...` terms joined by ` + `, canonical order.
impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {m}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for DiffPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DiffPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for DiffPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Parser { src: s.as_bytes(), pos: 0 }.poly()
    }
}

/// Largest derivative order and exponent accepted by the text parser.
pub const MAX_PARSED_ORDER: u32 = 4096;
pub const MAX_PARSED_EXPONENT: u32 = 4096;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&str> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn small(&mut self, max: u32) -> Result<u32> {
        let d = self.digits()?;
        match d.parse::<u32>() {
            Ok(v) if v <= max => Ok(v),
            _ => self.err("integer too large"),
        }
    }

    fn coeff(&mut self) -> Result<Rational> {
        let n: BigInt = self.digits()?.parse().expect("digits parse");
        let d: BigInt = if self.eat(b'/') { self.digits()?.parse().expect("digits parse") } else { BigInt::one() };
        if d.is_zero() {
            return self.err("zero denominator");
        }
        Ok(Rational::new(n, d))
    }

    fn factor(&mut self) -> Result<DiffMonomial> {
        if !self.eat(b'u') {
            return self.err("expected 'u'");
        }
        let mut order = 0;
        let mut exp = 1;
        if self.eat(b'^') {
            if self.eat(b'(') {
                order = self.small(MAX_PARSED_ORDER)?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                if self.eat(b'^') {
                    exp = self.small(MAX_PARSED_EXPONENT)?;
                }
            } else {
                exp = self.small(MAX_PARSED_EXPONENT)?;
            }
        }
        Ok(DiffMonomial::var(order, exp))
    }

    fn term(&mut self, mut negate: bool) -> Result<(DiffMonomial, Rational)> {
        while self.eat(b'-') {
            negate = !negate;
        }
        let mut c = Rational::one();
        let mut m = DiffMonomial::one();
        match self.peek() {
            Some(b'u') => m = self.factor()?,
            Some(b) if b.is_ascii_digit() => c = self.coeff()?,
            _ => return self.err("expected term"),
        }
        while self.eat(b'*') {
            let f = self.factor()?;
            if m.degree() + f.degree() > MAX_PARSED_EXPONENT as u64 {
                return self.err("monomial degree too large");
            }
            m = m.mul(&f);
        }
        Ok((m, if negate { -c } else { c }))
    }

    fn poly(mut self) -> Result<DiffPoly> {
        let mut p = DiffPoly::zero();
        let (m, c) = self.term(false)?;
        p.add_term(m, c);
        loop {
            let negate = if self.eat(b'+') {
                false
            } else if self.eat(b'-') {
                true
            } else {
                break;
            };
            let (m, c) = self.term(negate)?;
            p.add_term(m, c);
        }
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(p)
    }
}

/// Reads a small polynomial from `(coefficient, [(order, exp)])` pairs.
pub fn poly_from_ints(terms: &[(i64, &[(u32, u32)])]) -> DiffPoly {
    DiffPoly::from_terms(
        terms
            .iter()
            .map(|(c, f)| (DiffMonomial::from_pairs(f), Rational::from_integer(BigInt::from(*c)))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(j: u32) -> DiffPoly {
        DiffPoly::u(j)
    }

    #[test]
    fn additive_inverse_is_empty() {
        assert!((&u(0) - &u(0)).is_zero());
    }

    #[test]
    fn square_of_first_derivative() {
        let p = &u(1) * &u(1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&DiffMonomial::var(1, 2)), Rational::one());
    }

    #[test]
    fn derivative_examples() {
        let p = &u(0) * &u(0);
        assert_eq!(p.total_derivative(), poly_from_ints(&[(2, &[(0, 1), (1, 1)])]));
        let l2 = poly_from_ints(&[(1, &[(2, 1)]), (3, &[(0, 2)])]);
        let d = poly_from_ints(&[(1, &[(3, 1)]), (6, &[(0, 1), (1, 1)])]);
        assert_eq!(l2.total_derivative(), d);
        assert!(DiffPoly::constant(rat(1, 2)).total_derivative().is_zero());
    }

    #[test]
    fn integrate_examples() {
        let d = poly_from_ints(&[(1, &[(3, 1)]), (6, &[(0, 1), (1, 1)])]);
        let l2 = poly_from_ints(&[(1, &[(2, 1)]), (3, &[(0, 2)])]);
        assert_eq!(d.integrate_exact().unwrap(), l2);
        assert_eq!(u(1).integrate_exact().unwrap(), u(0));
        assert!(matches!(u(0).integrate_exact(), Err(Error::NotExact(_))));
        assert!(DiffPoly::constant(rat(1, 2)).integrate_exact().is_err());
        assert!((&u(2) * &u(2)).integrate_exact().is_err());
    }

    #[test]
    fn jet_evaluation() {
        let l2 = poly_from_ints(&[(1, &[(2, 1)]), (3, &[(0, 2)])]);
        assert_eq!(l2.eval_jet(&[1.0, 0.0, 2.0]).unwrap(), 5.0);
        assert_eq!(DiffPoly::constant(rat(1, 2)).eval_jet(&[]).unwrap(), 0.5);
        assert!(matches!(l2.eval_jet(&[1.0, 0.0]), Err(Error::JetTooShort { need: 3, got: 2 })));
    }

    #[test]
    fn text_round_trip() {
        let p = poly_from_ints(&[(1, &[(2, 1)]), (-3, &[(0, 2)]), (7, &[])]);
        let s = p.to_string();
        assert_eq!(s.parse::<DiffPoly>().unwrap(), p);
        assert_eq!("u'' ".parse::<DiffPoly>().is_err(), true);
        assert_eq!("u^(2) - 3*u^2 + 7".parse::<DiffPoly>().unwrap(), p);
        assert_eq!("0".parse::<DiffPoly>().unwrap(), DiffPoly::zero());
        assert!("1/0".parse::<DiffPoly>().is_err());
    }

    #[test]
    fn partials() {
        let p = poly_from_ints(&[(3, &[(0, 2), (1, 1)])]);
        assert_eq!(p.partial(0), poly_from_ints(&[(6, &[(0, 1), (1, 1)])]));
        assert_eq!(p.partial(1), poly_from_ints(&[(3, &[(0, 2)])]));
        assert!(p.partial(2).is_zero());
    }

    #[test]
    fn shift_of_square() {
        let p = &u(0) * &u(0);
        let q = p.shift(&rat(1, 1));
        assert_eq!(q, poly_from_ints(&[(1, &[(0, 2)]), (2, &[(0, 1)]), (1, &[])]));
    }
}
