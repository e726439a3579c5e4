//! Coefficient fields for the graded operator kernel.
//!
//! The kernel works in the rescaled basis f_s = √q^{ℓ(s)}|s⟩ where every matrix
//! entry of D±, W and the scaled modes is rational, so one code path serves
//! exact rationals, multi-modular residues and magnitude majorants.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub trait Field: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    /// n/d with d > 0.
    fn from_ratio(n: i128, d: i128) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    fn from_int(n: i128) -> Self {
        Self::from_ratio(n, 1)
    }

    fn one() -> Self {
        Self::from_int(1)
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_ratio(n: i128, d: i128) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// The four largest primes below 2^62.
pub const PRIMES: [u64; 4] = [
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387761,
];

/// log2 of the product of [`PRIMES`], rounded down.
pub const LOG2_MODULUS: f64 = 247.99;

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn reduce(n: i128, p: u64) -> u64 {
    n.rem_euclid(p as i128) as u64
}

/// Residues modulo each of [`PRIMES`]; equality in all four residues together
/// with a magnitude bound below half the modulus certifies rational equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modular(pub [u64; 4]);

impl Field for Modular {
    fn zero() -> Self {
        Modular([0; 4])
    }
    fn from_ratio(n: i128, d: i128) -> Self {
        let mut r = [0u64; 4];
        for (k, &p) in PRIMES.iter().enumerate() {
            let inv = powmod(reduce(d, p), p - 2, p);
            r[k] = mulmod(reduce(n, p), inv, p);
        }
        Modular(r)
    }
    fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }
    fn add(&self, o: &Self) -> Self {
        let mut r = [0u64; 4];
        for k in 0..4 {
            let s = self.0[k] + o.0[k];
            r[k] = if s >= PRIMES[k] { s - PRIMES[k] } else { s };
        }
        Modular(r)
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let mut r = [0u64; 4];
        for k in 0..4 {
            r[k] = mulmod(self.0[k], o.0[k], PRIMES[k]);
        }
        Modular(r)
    }
    fn neg(&self) -> Self {
        let mut r = [0u64; 4];
        for k in 0..4 {
            r[k] = if self.0[k] == 0 { 0 } else { PRIMES[k] - self.0[k] };
        }
        Modular(r)
    }
}

/// Upper bound on absolute values: every operation acts on |·|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Majorant(pub f64);

impl Field for Majorant {
    fn zero() -> Self {
        Majorant(0.0)
    }
    fn from_ratio(n: i128, d: i128) -> Self {
        Majorant((n.unsigned_abs() as f64 / d as f64) * (1.0 + 1e-12))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        Majorant(self.0 + o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        Majorant(self.0 + o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        Majorant(self.0 * o.0)
    }
    fn neg(&self) -> Self {
        *self
    }
}

/// Convert an exact rational into a field element (used to seed tests).
pub fn ratio_into<F: Field>(r: &BigRational) -> Option<F> {
    let n: i128 = r.numer().try_into().ok()?;
    let d: i128 = r.denom().try_into().ok()?;
    Some(F::from_ratio(n, d))
}

pub fn rational_abs_f64(r: &BigRational) -> f64 {
    crate::fock::ratio_to_f64(&r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = n - 1;
        let mut s = 0;
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = powmod(a, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 0..s - 1 {
                x = mulmod(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn moduli_are_prime() {
        for p in PRIMES {
            assert!(is_prime(p));
        }
        let log2: f64 = PRIMES.iter().map(|&p| (p as f64).log2()).sum();
        assert!(log2 >= LOG2_MODULUS);
    }

    #[test]
    fn modular_matches_rational() {
        let a = Modular::from_ratio(3, 7);
        let b = Modular::from_ratio(-5, 11);
        let c = a.mul(&b).add(&Modular::from_ratio(15, 77));
        assert!(c.is_zero());
        assert_eq!(a.sub(&a), Modular::zero());
        assert_eq!(Modular::from_ratio(2, 4), Modular::from_ratio(1, 2));
    }

    #[test]
    fn majorant_bounds() {
        let a = Majorant::from_ratio(-3, 2);
        let b = Majorant::from_ratio(1, 2);
        assert!(a.sub(&b).0 >= 2.0);
        assert!(a.mul(&b).0 >= 0.75);
    }
}
