//! Polynomial potentials `V(λ) = Σ g_l λ^l / l` with the coupling `α̂ = Nα`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    /// `g[l - 1]` is `g_l`.
    pub g: Vec<f64>,
    pub alpha_hat: f64,
}

impl Potential {
    pub fn new(g: Vec<f64>, alpha_hat: f64) -> Result<Self> {
        if !(alpha_hat > 0.0 && alpha_hat.is_finite()) {
            return Err(Error::Invalid(format!("alpha_hat must be positive, got {alpha_hat}")));
        }
        if g.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("couplings must be finite".into()));
        }
        let mut g = g;
        while g.last() == Some(&0.0) {
            g.pop();
        }
        if g.is_empty() {
            return Err(Error::Invalid("at least one coupling g_l must be nonzero".into()));
        }
        Ok(Potential { g, alpha_hat })
    }

    /// `V(λ) = λ²`, i.e. `g_2 = 2`.
    pub fn gaussian(alpha_hat: f64) -> Self {
        Potential::new(vec![0.0, 2.0], alpha_hat).expect("valid")
    }

    /// `V(λ) = g_2 λ²/2 + g_4 λ⁴/4`.
    pub fn quartic(g2: f64, g4: f64, alpha_hat: f64) -> Result<Self> {
        Potential::new(vec![0.0, g2, 0.0, g4], alpha_hat)
    }

    pub fn with_alpha(&self, alpha_hat: f64) -> Result<Self> {
        Potential::new(self.g.clone(), alpha_hat)
    }

    /// Highest `l` with `g_l != 0`.
    pub fn degree(&self) -> usize {
        self.g.len()
    }

    pub fn coupling(&self, l: usize) -> f64 {
        if l == 0 {
            return 0.0;
        }
        self.g.get(l - 1).copied().unwrap_or(0.0)
    }

    pub fn is_gaussian(&self) -> bool {
        self.g.len() == 2 && self.g[0] == 0.0 && self.g[1] == 2.0
    }

    pub fn v(&self, x: f64) -> f64 {
        self.g.iter().enumerate().rev().fold(0.0, |acc, (i, &c)| acc * x + c / (i + 1) as f64) * x
    }

    pub fn v_prime(&self, x: f64) -> f64 {
        self.g.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Coefficients of `V'(λ) = Σ g_l λ^{l-1}`, ascending.
    pub fn v_prime_coefficients(&self) -> Vec<f64> {
        self.g.clone()
    }

    /// `e^{-α̂ V}` decays at `-∞`.
    pub fn integrable_below(&self) -> bool {
        let l = self.degree();
        let lead = self.g[l - 1];
        if l % 2 == 0 {
            lead > 0.0
        } else {
            lead < 0.0
        }
    }

    /// `e^{-α̂ V}` decays at `+∞`.
    pub fn integrable_above(&self) -> bool {
        self.g[self.degree() - 1] > 0.0
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_gaussian() {
            return write!(f, "gauss:alpha={}", self.alpha_hat);
        }
        write!(f, "poly:alpha={}", self.alpha_hat)?;
        for (i, c) in self.g.iter().enumerate() {
            if *c != 0.0 {
                write!(f, ",g{}={}", i + 1, c)?;
            }
        }
        Ok(())
    }
}

/// Largest accepted coupling index; keeps parsed degrees sane.
const MAX_DEGREE: usize = 64;

/// Grammar: `name[:key=value,...]` with `name` one of `gauss`, `quartic`, `poly`. Keys are
/// `alpha` and `g<l>`. `gauss` fixes `g_2 = 2`; `quartic` defaults to `g2=2,g4=0`.
impl FromStr for Potential {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.find(':') {
            Some(i) => (&text[..i], Some((i + 1, &text[i + 1..]))),
            None => (text, None),
        };
        let mut alpha = 1.0;
        let mut g: Vec<f64> = Vec::new();
        let mut saw_g = false;
        if let Some((base, rest)) = rest {
            let mut pos = base;
            for item in rest.split(',') {
                let err = |msg: String| Error::Parse { pos, msg };
                let (key, value) = item.split_once('=').ok_or_else(|| err(format!("expected key=value, got {item:?}")))?;
                let value: f64 = value.trim().parse().map_err(|_| err(format!("bad number {value:?}")))?;
                if !value.is_finite() {
                    return Err(err("value must be finite".into()));
                }
                match key.trim() {
                    "alpha" => alpha = value,
                    k if k.starts_with('g') => {
                        let l: usize = k[1..].parse().map_err(|_| err(format!("bad coupling key {k:?}")))?;
                        if l == 0 || l > MAX_DEGREE {
                            return Err(err(format!("coupling index must be in 1..={MAX_DEGREE}")));
                        }
                        if g.len() < l {
                            g.resize(l, 0.0);
                        }
                        g[l - 1] = value;
                        saw_g = true;
                    }
                    k => return Err(err(format!("unknown key {k:?}"))),
                }
                pos += item.len() + 1;
            }
        }
        match name {
            "gauss" | "gaussian" => {
                if saw_g {
                    return Err(Error::Parse { pos: 0, msg: "gauss takes only alpha".into() });
                }
                Potential::new(vec![0.0, 2.0], alpha)
            }
            "quartic" => {
                if g.len() > 4 || g.first().is_some_and(|&c| c != 0.0) || g.get(2).is_some_and(|&c| c != 0.0) {
                    return Err(Error::Parse { pos: 0, msg: "quartic takes only g2 and g4".into() });
                }
                let g2 = if saw_g { g.get(1).copied().unwrap_or(0.0) } else { 2.0 };
                let g4 = g.get(3).copied().unwrap_or(0.0);
                Potential::quartic(g2, g4, alpha)
            }
            "poly" => Potential::new(g, alpha),
            other => Err(Error::Parse { pos: 0, msg: format!("unknown potential {other:?}") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets() {
        let p: Potential = "gauss".parse().unwrap();
        assert!(p.is_gaussian());
        assert_eq!(p.alpha_hat, 1.0);
        let q: Potential = "quartic:g2=-1,g4=1,alpha=3".parse().unwrap();
        assert_eq!(q.g, vec![0.0, -1.0, 0.0, 1.0]);
        assert_eq!(q.alpha_hat, 3.0);
        let r: Potential = "poly:g1=1,g3=-2".parse().unwrap();
        assert_eq!(r.degree(), 3);
        assert!(r.integrable_below() && !r.integrable_above());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "gauss:alpha=-1", "poly", "poly:g0=1", "gauss:g2=3", "cubic", "poly:g1=x", "poly:g2"] {
            assert!(s.parse::<Potential>().is_err(), "{s}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["gauss:alpha=2", "poly:alpha=1,g2=-1,g4=0.5"] {
            let p: Potential = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Potential>().unwrap(), p);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let p = Potential::quartic(-1.0, 1.0, 1.0).unwrap();
        let h = 1e-6;
        let fd = (p.v(0.7 + h) - p.v(0.7 - h)) / (2.0 * h);
        assert!((fd - p.v_prime(0.7)).abs() < 1e-8);
    }
}
