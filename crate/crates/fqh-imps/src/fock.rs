//! The bosonic Fock space ℋ = ⊕_M ℋ(M) with modes a_n, [a_n, a_m*] = n δ_{nm},
//! and exact scalars in ℚ[√q].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// `rat + surd·√q`.  The surd part is tracked even when q is a perfect square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub rat: BigRational,
    pub surd: BigRational,
    pub q: u32,
}

impl Scalar {
    pub fn zero(q: u32) -> Self {
        Scalar {
            rat: BigRational::zero(),
            surd: BigRational::zero(),
            q,
        }
    }

    pub fn one(q: u32) -> Self {
        Self::rational(q, BigRational::one())
    }

    pub fn rational(q: u32, rat: BigRational) -> Self {
        Scalar {
            rat,
            surd: BigRational::zero(),
            q,
        }
    }

    pub fn int(q: u32, v: i64) -> Self {
        Self::rational(q, BigRational::from_integer(v.into()))
    }

    pub fn ratio(q: u32, n: i64, d: i64) -> Self {
        Self::rational(q, BigRational::new(n.into(), d.into()))
    }

    pub fn sqrt_q(q: u32) -> Self {
        Scalar {
            rat: BigRational::zero(),
            surd: BigRational::one(),
            q,
        }
    }

    /// √q^k
    pub fn sqrt_q_pow(q: u32, k: u32) -> Self {
        let half = BigRational::from_integer(BigInt::from(q).pow(k / 2));
        if k % 2 == 0 {
            Self::rational(q, half)
        } else {
            Scalar {
                rat: BigRational::zero(),
                surd: half,
                q,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.surd.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Scalar {
            rat: &self.rat * r,
            surd: &self.surd * r,
            q: self.q,
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rat) + ratio_to_f64(&self.surd) * (self.q as f64).sqrt()
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        sign * ln_abs_ratio(r).exp()
    })
}

/// ln|r| for a nonzero rational, safe for huge numerators/denominators.
pub fn ln_abs_ratio(r: &BigRational) -> f64 {
    ln_abs_int(r.numer()) - ln_abs_int(r.denom())
}

pub fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn check_q(a: &Scalar, b: &Scalar) {
    debug_assert_eq!(a.q, b.q, "scalars over different fields");
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        check_q(self, o);
        Scalar {
            rat: &self.rat + &o.rat,
            surd: &self.surd + &o.surd,
            q: self.q,
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        check_q(self, o);
        Scalar {
            rat: &self.rat - &o.rat,
            surd: &self.surd - &o.surd,
            q: self.q,
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        check_q(self, o);
        let q = BigRational::from_integer(self.q.into());
        Scalar {
            rat: &self.rat * &o.rat + &self.surd * &o.surd * q,
            surd: &self.rat * &o.surd + &self.surd * &o.rat,
            q: self.q,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            rat: -&self.rat,
            surd: -&self.surd,
            q: self.q,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.surd.is_zero()) {
            (_, true) => write!(f, "{}", self.rat),
            (true, false) => write!(f, "{}·√{}", self.surd, self.q),
            (false, false) => write!(f, "{} + {}·√{}", self.rat, self.surd, self.q),
        }
    }
}

/// Occupations n_1, n_2, … of the modes (index 0 holds n_1), trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeState(Vec<u32>);

impl ModeState {
    pub fn vacuum() -> Self {
        ModeState(Vec::new())
    }

    pub fn from_counts(mut counts: Vec<u32>) -> Self {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        ModeState(counts)
    }

    /// ∏ a*_{modes[i]} |0⟩
    pub fn from_modes(modes: &[u32]) -> Self {
        let mut s = ModeState::vacuum();
        for &m in modes {
            s = s.raised(m);
        }
        s
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn count(&self, n: u32) -> u32 {
        self.0.get(n as usize - 1).copied().unwrap_or(0)
    }

    pub fn momentum(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64 + 1) * c as u64)
            .sum()
    }

    /// Number of excited quanta Σ n_j.
    pub fn quanta(&self) -> u32 {
        self.0.iter().sum()
    }

    /// ⟨s|s⟩ = ∏ j^{n_j} n_j!
    pub fn norm_squared(&self) -> BigInt {
        let mut z = BigInt::one();
        for (i, &c) in self.0.iter().enumerate() {
            let j = BigInt::from(i + 1);
            z *= j.pow(c);
            for k in 2..=c {
                z *= k;
            }
        }
        z
    }

    pub fn raised(&self, n: u32) -> ModeState {
        let mut c = self.0.clone();
        if c.len() < n as usize {
            c.resize(n as usize, 0);
        }
        c[n as usize - 1] += 1;
        ModeState(c)
    }

    pub fn lowered(&self, n: u32) -> Option<ModeState> {
        if self.count(n) == 0 {
            return None;
        }
        let mut c = self.0.clone();
        c[n as usize - 1] -= 1;
        Some(ModeState::from_counts(c))
    }

    /// Mode indices with multiplicity, ascending.
    pub fn modes(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, &c) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i as u32 + 1, c as usize));
        }
        out
    }
}

impl Serialize for ModeState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, u32> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| ((i + 1).to_string(), c))
            .collect();
        map.serialize(s)
    }
}

/// All mode states of total momentum M; p(M) of them.
pub fn basis_of_momentum(m: i64) -> Vec<ModeState> {
    if m < 0 {
        return Vec::new();
    }
    crate::partitions::partitions_of(m as u32)
        .into_iter()
        .map(|p| ModeState::from_modes(p.parts()))
        .collect()
}

/// Sparse vector in ℋ₀.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub q: u32,
    terms: BTreeMap<ModeState, Scalar>,
}

impl FockVector {
    pub fn zero(q: u32) -> Self {
        FockVector {
            q,
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(q: u32) -> Self {
        Self::basis(q, ModeState::vacuum())
    }

    pub fn basis(q: u32, s: ModeState) -> Self {
        let mut v = Self::zero(q);
        v.terms.insert(s, Scalar::one(q));
        v
    }

    pub fn terms(&self) -> &BTreeMap<ModeState, Scalar> {
        &self.terms
    }

    pub fn coeff(&self, s: &ModeState) -> Scalar {
        self.terms.get(s).cloned().unwrap_or_else(|| Scalar::zero(self.q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c·|s⟩`, dropping the entry if it cancels.
    pub fn add_term(&mut self, s: ModeState, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&s) {
            Some(x) => {
                *x = &*x + c;
                if x.is_zero() {
                    self.terms.remove(&s);
                }
            }
            None => {
                self.terms.insert(s, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: &Scalar) {
        for (s, x) in &other.terms {
            self.add_term(s.clone(), &(x * c));
        }
    }

    pub fn scaled(&self, c: &Scalar) -> FockVector {
        let mut out = FockVector::zero(self.q);
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.add_scaled(other, &Scalar::int(self.q, -1));
        out
    }

    /// Momenta M with a nonzero component in ℋ(M).
    pub fn momentum_support(&self) -> Vec<u64> {
        let mut m: Vec<u64> = self.terms.keys().map(|s| s.momentum()).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    /// Component in ℋ(M).
    pub fn grade(&self, m: u64) -> FockVector {
        FockVector {
            q: self.q,
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| s.momentum() == m)
                .map(|(s, c)| (s.clone(), c.clone()))
                .collect(),
        }
    }
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            state: &'a ModeState,
            rat: String,
            surd: String,
        }
        let entries: Vec<Entry> = self
            .terms
            .iter()
            .map(|(st, c)| Entry {
                state: st,
                rat: c.rat.to_string(),
                surd: c.surd.to_string(),
            })
            .collect();
        entries.serialize(s)
    }
}

fn check_mode(n: i64) -> Result<u32> {
    if n <= 0 {
        return Err(Error::Invalid(format!("mode index must be positive, got {n}")));
    }
    Ok(n as u32)
}

pub fn apply_creation(n: i64, v: &FockVector) -> Result<FockVector> {
    let n = check_mode(n)?;
    let mut out = FockVector::zero(v.q);
    for (s, c) in &v.terms {
        out.add_term(s.raised(n), c);
    }
    Ok(out)
}

/// a_n|…n_n…⟩ = n·n_n|…n_n − 1…⟩
pub fn apply_annihilation(n: i64, v: &FockVector) -> Result<FockVector> {
    let n = check_mode(n)?;
    let mut out = FockVector::zero(v.q);
    for (s, c) in &v.terms {
        if let Some(t) = s.lowered(n) {
            let f = BigRational::from_integer((n as i64 * s.count(n) as i64).into());
            out.add_term(t, &c.scale(&f));
        }
    }
    Ok(out)
}

pub fn momentum(s: &ModeState) -> u64 {
    s.momentum()
}

pub fn apply_l0(v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(v.q);
    for (s, c) in &v.terms {
        let m = BigRational::from_integer(s.momentum().into());
        out.add_term(s.clone(), &c.scale(&m));
    }
    out
}

/// ⟨u, v⟩; coefficients are real so no conjugation is needed.
pub fn inner_product(u: &FockVector, v: &FockVector) -> Scalar {
    let mut acc = Scalar::zero(u.q);
    for (s, a) in &u.terms {
        if let Some(b) = v.terms.get(s) {
            let z = BigRational::from_integer(s.norm_squared());
            acc = &acc + &(a * b).scale(&z);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Scalar {
        Scalar::int(2, v)
    }

    #[test]
    fn scalar_field_arithmetic() {
        let r2 = Scalar::sqrt_q(2);
        assert_eq!(&r2 * &r2, int(2));
        let a = &int(1) + &r2;
        let b = &int(1) - &r2;
        assert_eq!(&a * &b, int(-1));
        // perfect squares keep the surd separate
        let r4 = Scalar::sqrt_q(4);
        assert!(!r4.is_rational());
        assert_eq!((&r4 * &r4), Scalar::int(4, 4));
        assert_eq!(Scalar::sqrt_q_pow(3, 3).surd, BigRational::from_integer(3.into()));
    }

    #[test]
    fn ladder_examples() {
        let vac = FockVector::vacuum(2);
        let v = apply_annihilation(1, &apply_creation(1, &vac).unwrap()).unwrap();
        assert_eq!(v, vac);
        let v = apply_annihilation(2, &apply_creation(2, &vac).unwrap()).unwrap();
        assert_eq!(v, vac.scaled(&int(2)));
        assert!(apply_annihilation(3, &vac).unwrap().is_zero());
        assert!(apply_creation(0, &vac).is_err());
    }

    #[test]
    fn l0_examples() {
        let vac = FockVector::vacuum(1);
        assert!(apply_l0(&vac).is_zero());
        let v = FockVector::basis(1, ModeState::from_modes(&[2, 1]));
        assert_eq!(apply_l0(&v), v.scaled(&Scalar::int(1, 3)));
        let v = FockVector::basis(1, ModeState::from_modes(&[1, 1, 1]));
        assert_eq!(apply_l0(&v), v.scaled(&Scalar::int(1, 3)));
    }

    #[test]
    fn inner_products() {
        let a2 = FockVector::basis(2, ModeState::from_modes(&[2]));
        assert_eq!(inner_product(&a2, &a2), int(2));
        let a11 = FockVector::basis(2, ModeState::from_modes(&[1, 1]));
        assert_eq!(inner_product(&a11, &a11), int(2));
        let a1 = FockVector::basis(2, ModeState::from_modes(&[1]));
        assert_eq!(inner_product(&a1, &a2), int(0));
    }

    #[test]
    fn bases() {
        assert_eq!(basis_of_momentum(0), vec![ModeState::vacuum()]);
        assert_eq!(basis_of_momentum(3).len(), 3);
        assert_eq!(basis_of_momentum(4).len(), 5);
        assert!(basis_of_momentum(-1).is_empty());
    }

    fn all_basis(max: i64) -> Vec<ModeState> {
        (0..=max).flat_map(basis_of_momentum).collect()
    }

    #[test]
    fn adjointness_and_commutators() {
        let q = 3;
        let states = all_basis(7);
        for n in 1..=7i64 {
            for u in &states {
                let uv = FockVector::basis(q, u.clone());
                let cu = apply_creation(n, &uv).unwrap();
                for v in &states {
                    let vv = FockVector::basis(q, v.clone());
                    let av = apply_annihilation(n, &vv).unwrap();
                    assert_eq!(inner_product(&cu, &vv), inner_product(&uv, &av));
                }
            }
        }
        for x in all_basis(6) {
            let v = FockVector::basis(q, x);
            for n in 1..=5i64 {
                for m in 1..=5i64 {
                    let lhs = apply_annihilation(n, &apply_creation(m, &v).unwrap()).unwrap();
                    let rhs = apply_creation(m, &apply_annihilation(n, &v).unwrap()).unwrap();
                    let expect = if n == m { v.scaled(&Scalar::int(q, n)) } else { FockVector::zero(q) };
                    assert_eq!(lhs.sub(&rhs), expect);
                    let aa = apply_annihilation(n, &apply_annihilation(m, &v).unwrap()).unwrap();
                    let bb = apply_annihilation(m, &apply_annihilation(n, &v).unwrap()).unwrap();
                    assert_eq!(aa, bb);
                }
                // L0 a_j = a_j (L0 - j)
                let lhs = apply_l0(&apply_annihilation(n, &v).unwrap());
                let shifted = apply_l0(&v).sub(&v.scaled(&Scalar::int(q, n)));
                assert_eq!(lhs, apply_annihilation(n, &shifted).unwrap());
            }
        }
    }

    #[test]
    fn number_operator_moments_bounded_by_l0() {
        // Σ_{j1..jm ≤ J} ‖a_{j1}…a_{jm} x‖² ≤ ⟨x|L0^m|x⟩
        let q = 2;
        for x in all_basis(8) {
            let xv = FockVector::basis(q, x.clone());
            let big_j = x.momentum().max(1) as i64;
            let mut layer = vec![xv.clone()];
            let mut l0m = xv.clone();
            for _m in 1..=3 {
                layer = layer
                    .iter()
                    .flat_map(|v| (1..=big_j).map(move |j| apply_annihilation(j, v).unwrap()))
                    .collect();
                l0m = apply_l0(&l0m);
                let lhs = layer
                    .iter()
                    .fold(Scalar::zero(q), |acc, v| &acc + &inner_product(v, v));
                let rhs = inner_product(&xv, &l0m);
                assert!(lhs.is_rational() && rhs.is_rational());
                assert!(lhs.rat <= rhs.rat, "{x:?}: {lhs} > {rhs}");
            }
        }
    }
}
