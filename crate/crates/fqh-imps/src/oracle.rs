//! Brute-force ground truth: the expansion of m_b(z)·∏_{i<j}(z_i − z_j)^q.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cft_ops::{w_coefficient, Route};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_dominated, Partition, Root};
use crate::symfun::next_permutation;

/// Default guard on the brute-force expansion.
pub const MAX_N: usize = 6;
pub const MAX_Q: u32 = 3;

/// Sparse integer polynomial in z_1..z_N keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    pub n: usize,
    pub terms: HashMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn one(n: usize) -> Self {
        MultiPoly {
            n,
            terms: HashMap::from([(vec![0; n], BigInt::one())]),
        }
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        let mut terms: HashMap<Vec<u32>, BigInt> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MultiPoly { n: self.n, terms }
    }

    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// Some(d) if every term has total degree d.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    /// The polynomial with z_i and z_j exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e = e.clone();
                e.swap(i, j);
                (e, c.clone())
            })
            .collect();
        MultiPoly { n: self.n, terms }
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

fn binom_row(q: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..q {
        let next = &row[k as usize] * BigInt::from(q - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// m_b(z)·∏_{i<j}(z_i − z_j)^q, exact.
pub fn expand(q: u32, n: usize, b: &Partition) -> Result<MultiPoly> {
    expand_with_cap(q, n, b, MAX_N, MAX_Q)
}

pub fn expand_with_cap(q: u32, n: usize, b: &Partition, max_n: usize, max_q: u32) -> Result<MultiPoly> {
    if n > max_n {
        return Err(Error::ResourceCap { what: "oracle N", limit: max_n });
    }
    if q > max_q {
        return Err(Error::ResourceCap { what: "oracle q", limit: max_q as usize });
    }
    if b.len() != n {
        return Err(Error::LengthMismatch { what: "b", expected: n, got: b.len() });
    }
    let row = binom_row(q);
    let mut acc = MultiPoly::one(n);
    // nearest pairs first keeps the intermediate supports small
    for gap in 1..n {
        for i in 0..n - gap {
            let j = i + gap;
            let mut f = MultiPoly { n, terms: HashMap::new() };
            for (k, c) in row.iter().enumerate() {
                let mut e = vec![0; n];
                e[i] = (q as usize - k) as u32;
                e[j] = k as u32;
                f.terms.insert(e, if k % 2 == 0 { c.clone() } else { -c });
            }
            acc = acc.mul(&f);
        }
    }
    let mut mono = MultiPoly { n, terms: HashMap::new() };
    let mut arr = b.parts().to_vec();
    loop {
        mono.terms.insert(arr.clone(), BigInt::one());
        if !next_permutation(&mut arr) {
            break;
        }
    }
    Ok(acc.mul(&mono))
}

/// Parity of the permutation sorting `k` (strict inversions).
fn sort_sign(k: &[u32]) -> i32 {
    let mut inv = 0usize;
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            if k[i] > k[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub exponent: Vec<u32>,
    #[serde(serialize_with = "crate::io::ser_ratio")]
    pub oracle: BigRational,
    #[serde(serialize_with = "crate::io::ser_ratio")]
    pub imps: BigRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub q: u32,
    pub n: usize,
    pub b: Partition,
    pub coefficients_checked: usize,
    pub mismatches: Vec<Mismatch>,
    /// Partitions where the two w routes disagree.
    pub route_disagreements: Vec<Partition>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.route_disagreements.is_empty()
    }
}

/// Compare every coefficient of `poly` against (−1)^{qN(N−1)/2} sgn(σ)^q w_b(sort k).
pub fn compare(poly: &MultiPoly, root: &Root) -> Result<OracleReport> {
    let q = root.q;
    let n = root.n;
    let global = if (q as usize * n * n.saturating_sub(1) / 2) % 2 == 0 { 1 } else { -1 };
    let mut report = OracleReport {
        q,
        n,
        b: root.b.clone(),
        coefficients_checked: 0,
        mismatches: Vec::new(),
        route_disagreements: Vec::new(),
    };
    let mut predicted: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    for lam in enumerate_dominated(root) {
        let w = w_coefficient(&lam, root, Route::PermutationSum)?;
        let w2 = w_coefficient(&lam, root, Route::BoundaryCharge)?;
        if w != w2 {
            report.route_disagreements.push(lam.clone());
        }
        if w.is_zero() {
            continue;
        }
        let mut arr = lam.parts().to_vec();
        loop {
            let s = if q % 2 == 1 { sort_sign(&arr) } else { 1 };
            predicted.insert(arr.clone(), &w * BigRational::from_integer((global * s).into()));
            if !next_permutation(&mut arr) {
                break;
            }
        }
    }
    let mut keys: Vec<Vec<u32>> = poly.terms.keys().cloned().collect();
    keys.extend(predicted.keys().cloned());
    keys.sort();
    keys.dedup();
    for k in keys {
        report.coefficients_checked += 1;
        let lhs = BigRational::from_integer(poly.coeff(&k));
        let rhs = predicted.get(&k).cloned().unwrap_or_else(BigRational::zero);
        if lhs != rhs {
            report.mismatches.push(Mismatch { exponent: k, oracle: lhs, imps: rhs });
        }
    }
    Ok(report)
}

/// Expand and compare in one go.
pub fn check_root(root: &Root) -> Result<OracleReport> {
    let poly = expand(root.q, root.n, &root.b)?;
    compare(&poly, root)
}
