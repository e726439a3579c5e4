//! Exact polynomials in one small parameter (t = e^{−γ²} or s = e^{−γ²/2})
//! and a log-magnitude number type for evaluating them without underflow.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::fock::{ln_abs_ratio, ratio_to_f64};

/// Σ c_k x^k with exact rational c_k.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XPoly {
    pub terms: BTreeMap<u64, BigRational>,
}

impl XPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: u64, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(k, c);
        p
    }

    pub fn add_term(&mut self, k: u64, c: BigRational) {
        let e = self.terms.entry(k).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u64> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, k: u64) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Value at x = e^{ln_x}.
    pub fn eval_log(&self, ln_x: f64) -> LogValue {
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(self.terms.len());
        for (&k, c) in &self.terms {
            let sign = if c.is_negative() { -1.0 } else { 1.0 };
            parts.push((sign, ln_abs_ratio(c) + k as f64 * ln_x));
        }
        LogValue::sum(&parts)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > 0.0 {
            return self.eval_log(x.ln()).to_f64();
        }
        if x == 0.0 {
            return ratio_to_f64(&self.coeff(0));
        }
        self.terms
            .iter()
            .map(|(&k, c)| ratio_to_f64(c) * x.powi(k as i32))
            .sum()
    }
}

impl Add for &XPoly {
    type Output = XPoly;
    fn add(self, o: &XPoly) -> XPoly {
        let mut r = self.clone();
        for (&k, c) in &o.terms {
            r.add_term(k, c.clone());
        }
        r
    }
}

impl Sub for &XPoly {
    type Output = XPoly;
    fn sub(self, o: &XPoly) -> XPoly {
        let mut r = self.clone();
        for (&k, c) in &o.terms {
            r.add_term(k, -c);
        }
        r
    }
}

impl Mul for &XPoly {
    type Output = XPoly;
    fn mul(self, o: &XPoly) -> XPoly {
        let mut r = XPoly::zero();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &o.terms {
                r.add_term(a + b, ca * cb);
            }
        }
        r
    }
}

/// sign · e^{ln_abs}; zero has sign 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { sign: 0.0, ln_abs: f64::NEG_INFINITY };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue { sign: x.signum(), ln_abs: x.abs().ln() }
        }
    }

    /// Σ sign_i e^{ln_i}, scaled by the largest term.
    pub fn sum(parts: &[(f64, f64)]) -> Self {
        let top = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s: f64 = parts.iter().map(|(sg, l)| sg * (l - top).exp()).sum();
        if s == 0.0 {
            Self::ZERO
        } else {
            LogValue { sign: s.signum(), ln_abs: top + s.abs().ln() }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    pub fn mul(self, o: LogValue) -> LogValue {
        if self.sign == 0.0 || o.sign == 0.0 {
            return Self::ZERO;
        }
        LogValue { sign: self.sign * o.sign, ln_abs: self.ln_abs + o.ln_abs }
    }

    pub fn div(self, o: LogValue) -> LogValue {
        assert!(o.sign != 0.0, "division by zero");
        if self.sign == 0.0 {
            return Self::ZERO;
        }
        LogValue { sign: self.sign * o.sign, ln_abs: self.ln_abs - o.ln_abs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let a = &XPoly::constant(r(1, 1)) + &XPoly::monomial(2, r(2, 1));
        let b = &a * &a;
        assert_eq!(b.coeff(2), r(4, 1));
        assert_eq!(b.coeff(4), r(4, 1));
        let c = &b - &(&a * &a);
        assert!(c.is_zero());
        assert_eq!((&b - &XPoly::constant(r(1, 1))).valuation(), Some(2));
    }

    #[test]
    fn deep_underflow_survives_in_log_space() {
        // 3 x^40 − x^41 at x = e^{−25}: far below f64 range
        let p = &XPoly::monomial(40, r(3, 1)) - &XPoly::monomial(41, r(1, 1));
        let v = p.eval_log(-25.0);
        assert_eq!(v.sign, 1.0);
        assert!((v.ln_abs - (3f64.ln() - 1000.0)).abs() < 1e-9);
        assert_eq!(p.eval((-25.0f64).exp()), 0.0);
    }
}
