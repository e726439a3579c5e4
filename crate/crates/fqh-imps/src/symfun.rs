//! Power sums, monomial symmetric polynomials and the transition polynomial
//! m_b = Pol_b(p_1, …, p_{|b|}).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partitions::{partitions_of, Partition};

/// A polynomial in the power sums: each key μ stands for the product p_{μ_1}⋯p_{μ_k}.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPolynomial {
    pub degree: u32,
    pub terms: BTreeMap<Partition, BigRational>,
}

impl SymPolynomial {
    /// Evaluate with `p[n-1]` standing for p_n.
    pub fn eval(&self, p: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (mu, c) in &self.terms {
            let mut t = c.clone();
            for &n in mu.parts() {
                t *= &p[n as usize - 1];
            }
            acc += t;
        }
        acc
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.keys().all(|mu| mu.weight() == self.degree as u64)
    }
}

impl Serialize for SymPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            exponents: BTreeMap<String, u32>,
            coeff: String,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(mu, c)| Term {
                exponents: mu.occupation().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                coeff: c.to_string(),
            })
            .collect();
        terms.serialize(s)
    }
}

pub fn power_sum_eval(n: u32, points: &[BigRational]) -> BigRational {
    points.iter().map(|z| pow(z, n)).sum()
}

fn pow(z: &BigRational, n: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..n {
        r *= z;
    }
    r
}

/// m_b(z) = (1/M(b)!) Σ_σ ∏ z_{σ(j)}^{b_j}: one term per distinct arrangement of b.
pub fn monomial_eval(b: &Partition, points: &[BigRational]) -> Result<BigRational> {
    if b.len() != points.len() {
        return Err(Error::LengthMismatch {
            what: "points",
            expected: b.len(),
            got: points.len(),
        });
    }
    let mut arr = b.parts().to_vec();
    let mut acc = BigRational::zero();
    loop {
        let mut t = BigRational::one();
        for (z, &e) in points.iter().zip(&arr) {
            t *= pow(z, e);
        }
        acc += t;
        if !next_permutation(&mut arr) {
            break;
        }
    }
    Ok(acc)
}

pub(crate) fn next_permutation(a: &mut [u32]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Number of ways to send the (labelled) parts of μ into the blocks of ν so
/// that block k receives total ν_k: the coefficient of z^ν in p_μ.
fn merge_count(mu: &[u32], nu: &[u32]) -> u64 {
    fn rec(mu: &[u32], i: usize, rem: &mut [u32]) -> u64 {
        if i == mu.len() {
            return rem.iter().all(|&r| r == 0) as u64;
        }
        let mut total = 0;
        for k in 0..rem.len() {
            if rem[k] >= mu[i] {
                rem[k] -= mu[i];
                total += rec(mu, i + 1, rem);
                rem[k] += mu[i];
            }
        }
        total
    }
    let mut mu = mu.to_vec();
    mu.sort_unstable_by(|a, b| b.cmp(a));
    rec(&mu, 0, &mut nu.to_vec())
}

fn cache() -> &'static Mutex<HashMap<Partition, Arc<SymPolynomial>>> {
    static CACHE: OnceLock<Mutex<HashMap<Partition, Arc<SymPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Pol_b, independent of leading zeros in b.
pub fn transition_polynomial(b: &Partition) -> Arc<SymPolynomial> {
    let key = Partition::from_unsorted(b.parts().iter().copied().filter(|&x| x > 0).collect());
    if let Some(p) = cache().lock().unwrap().get(&key) {
        return p.clone();
    }
    let built = Arc::new(build_transition(&key));
    cache().lock().unwrap().entry(key).or_insert(built).clone()
}

fn build_transition(b: &Partition) -> SymPolynomial {
    let n = b.weight() as u32;
    // longest partitions first: L_{μν} ≠ 0 only if ν coarsens μ
    let mut parts = partitions_of(n);
    parts.sort_by(|a, c| c.len().cmp(&a.len()).then(a.cmp(c)));
    let mut x: BTreeMap<Partition, BigRational> = BTreeMap::new();
    for nu in &parts {
        let rhs = if nu == b { BigRational::one() } else { BigRational::zero() };
        let mut acc = rhs;
        for (mu, xm) in &x {
            if mu.len() > nu.len() {
                let l = merge_count(mu.parts(), nu.parts());
                if l > 0 {
                    acc -= xm * BigRational::from_integer(BigInt::from(l));
                }
            }
        }
        let diag = merge_count(nu.parts(), nu.parts());
        x.insert(nu.clone(), acc / BigRational::from_integer(BigInt::from(diag)));
    }
    x.retain(|_, c| !c.is_zero());
    SymPolynomial { degree: n, terms: x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(power_sum_eval(1, &ints(&[1, 2, 3])), q(6, 1));
        let pts = ints(&[5, 7]);
        assert_eq!(monomial_eval(&p(&[0, 1]), &pts).unwrap(), q(12, 1));
        assert_eq!(monomial_eval(&p(&[1, 1]), &ints(&[2, 3])).unwrap(), q(6, 1));
        assert!(monomial_eval(&p(&[1, 1]), &ints(&[2])).is_err());
    }

    #[test]
    fn transition_examples() {
        let one = transition_polynomial(&p(&[0, 0, 1]));
        assert_eq!(one.terms, BTreeMap::from([(p(&[1]), q(1, 1))]));
        let two = transition_polynomial(&p(&[0, 2]));
        assert_eq!(two.terms, BTreeMap::from([(p(&[2]), q(1, 1))]));
        let eleven = transition_polynomial(&p(&[1, 1]));
        assert_eq!(
            eleven.terms,
            BTreeMap::from([(p(&[1, 1]), q(1, 2)), (p(&[2]), q(-1, 2))])
        );
        assert_eq!(transition_polynomial(&p(&[0, 0])).terms, BTreeMap::from([(p(&[]), q(1, 1))]));
    }

    #[test]
    fn leading_zeros_do_not_matter() {
        for b in [p(&[1, 2]), p(&[1, 1, 3])] {
            let mut padded = vec![0];
            padded.extend_from_slice(b.parts());
            assert_eq!(transition_polynomial(&b), transition_polynomial(&p(&padded)));
        }
    }

    #[test]
    fn matches_monomials_at_random_points() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for w in 0..=5u32 {
            for base in partitions_of(w) {
                let pol = transition_polynomial(&base);
                assert!(pol.is_homogeneous());
                for extra in 0..=2usize {
                    let mut parts = vec![0; extra];
                    parts.extend_from_slice(base.parts());
                    let b = p(&parts);
                    if b.is_empty() {
                        continue;
                    }
                    for _ in 0..20 {
                        let pts: Vec<BigRational> = (0..b.len())
                            .map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
                            .collect();
                        let psums: Vec<BigRational> =
                            (1..=w.max(1)).map(|n| power_sum_eval(n, &pts)).collect();
                        assert_eq!(monomial_eval(&b, &pts).unwrap(), pol.eval(&psums), "b={b}");
                    }
                }
            }
        }
    }
}
