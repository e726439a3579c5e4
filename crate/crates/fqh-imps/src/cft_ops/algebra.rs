//! Operator identities for D± and W, checked on every basis vector of ℋ(M).
//!
//! In the rescaled kernel (A_n = a_n/√q) the four identities read
//!   1(a)  D⁺_m D⁻_k = Σ_{ℓ=0..q} (−1)^ℓ C(q,ℓ) D⁻_{k−ℓ} D⁺_{m−ℓ}
//!   1(b)  A_n D⁻_ℓ  = D⁻_ℓ A_n + D⁻_{ℓ−n}
//!   2(a)  W_m W_k   = (−1)^q W_{k−q} W_{m+q}
//!   2(b)  A_n W_m   = W_m A_n + W_{m−n}
//!
//! `Arithmetic::Modular` compares residues modulo four 62-bit primes and
//! certifies each comparison: with D a common denominator of both sides and
//! B a bound on |lhs| + |rhs| (computed in the `Majorant` field), residue
//! equality implies rational equality once D·B is below half the modulus.

use rayon::prelude::*;
use serde::Serialize;

use super::field::{Field, Majorant, Modular, LOG2_MODULUS};
use super::graded::{opt_add, opt_is_zero, opt_sub, GVec, Graded};
use crate::fock::ModeState;

type Q = num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Exact,
    Modular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Identity {
    #[serde(rename = "1a")]
    DPlusDMinus,
    #[serde(rename = "1b")]
    ModeDMinus,
    #[serde(rename = "2a")]
    WExchange,
    #[serde(rename = "2b")]
    ModeW,
}

/// Largest annihilation mode used in 1(b) and 2(b).
pub const MODE_MAX: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub identity: Identity,
    pub state: ModeState,
    pub m: i64,
    pub k: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport {
    pub q: u32,
    pub m_max: usize,
    pub range: (i64, i64),
    pub arithmetic: Arithmetic,
    pub checks: u64,
    pub violations: Vec<Violation>,
    /// Largest log2(D·B) over all checks (modular only); must stay below the modulus.
    pub worst_certificate_bits: f64,
    pub certified: bool,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.certified
    }
}

fn log2_factorial(n: i64) -> f64 {
    (2..=n.max(0)).map(|i| (i as f64).log2()).sum()
}

fn binom(n: u32, k: u32) -> i128 {
    (0..k as i128).fold(1, |r, i| r * (n as i128 - i) / (i + 1))
}

/// One identity instance on one basis vector: (identity, m, k, lhs, rhs, log2 D).
type Check<F> = (Identity, i64, i64, Option<GVec<F>>, Option<GVec<F>>, f64);

fn checks_on<F: Field>(g: &Graded<F>, x: &GVec<F>, lo: i64, hi: i64) -> Vec<Check<F>> {
    let q = g.q as i64;
    let grade = x.grade as i64;
    let mut out = Vec::new();

    // 1(a)
    for m in lo..=hi {
        for k in lo..=hi {
            let lhs = g.d_plus_opt(m, &g.d_minus(k, x));
            let mut rhs = None;
            for l in 0..=q {
                let c = F::from_int(if l % 2 == 0 { 1 } else { -1 } * binom(g.q, l as u32));
                let t = g.d_minus_opt(k - l, &g.d_plus(m - l, x)).map(|v| v.scale(&c));
                rhs = opt_add(rhs, t);
            }
            out.push((Identity::DPlusDMinus, m, k, lhs, rhs, log2_factorial(k)));
        }
    }
    // 1(b), with k standing for the mode n
    for l in lo..=hi {
        for n in 1..=MODE_MAX {
            let lhs = g.lower_opt(n, &g.d_minus(l, x));
            let rhs = opt_add(g.d_minus_opt(l, &g.lower(n, x)), g.d_minus(l - n as i64, x));
            out.push((Identity::ModeDMinus, l, n as i64, lhs, rhs, log2_factorial(l)));
        }
    }
    // 2(a): precompute W_j x once for every j that appears
    let wx: Vec<Option<GVec<F>>> = (lo..=hi + q).map(|j| g.w(j, x)).collect();
    let at = |j: i64| &wx[(j - lo) as usize];
    let sign = F::from_int(if q % 2 == 0 { 1 } else { -1 });
    for m in lo..=hi {
        for k in lo..=hi {
            let lhs = g.w_opt(m, at(k));
            let rhs = g.w_opt(k - q, at(m + q)).map(|v| v.scale(&sign));
            let bits = log2_factorial(grade + k)
                + log2_factorial(grade + m + q)
                + log2_factorial(grade + m + k);
            out.push((Identity::WExchange, m, k, lhs, rhs, bits));
        }
    }
    // 2(b)
    for m in lo..=hi {
        for n in 1..=MODE_MAX {
            let lhs = g.lower_opt(n, at(m));
            let rhs = opt_add(g.w_opt(m, &g.lower(n, x)), g.w(m - n as i64, x));
            out.push((Identity::ModeW, m, n as i64, lhs, rhs, log2_factorial(grade + m)));
        }
    }
    out
}

fn basis_vectors<F: Field>(g: &Graded<F>, m_max: usize) -> Vec<(ModeState, GVec<F>)> {
    let mut v = Vec::new();
    for grade in 0..=m_max {
        let b = g.basis(grade);
        for (i, s) in b.states.iter().enumerate() {
            v.push((s.clone(), g.unit(grade, i)));
        }
    }
    v
}

fn vec_bound(a: &Option<GVec<Majorant>>) -> f64 {
    a.as_ref()
        .map(|v| v.data.iter().map(|x| x.0).fold(0.0, f64::max))
        .unwrap_or(0.0)
}

/// Check all four identities on every basis vector of ℋ(M), M ≤ `m_max`, with
/// m, k ∈ `range` (and n = 1..6 for the mode identities).
pub fn verify_algebra(q: u32, m_max: usize, range: (i64, i64), arithmetic: Arithmetic) -> AlgebraReport {
    let (lo, hi) = range;
    let mut report = AlgebraReport {
        q,
        m_max,
        range,
        arithmetic,
        checks: 0,
        violations: Vec::new(),
        worst_certificate_bits: 0.0,
        certified: true,
    };
    match arithmetic {
        Arithmetic::Exact => {
            let g = Graded::<Q>::new(q);
            let xs = basis_vectors(&g, m_max);
            let per: Vec<(ModeState, Vec<(Identity, i64, i64, bool)>)> = xs
                .par_iter()
                .map(|(s, x)| {
                    let r = checks_on(&g, x, lo, hi)
                        .into_iter()
                        .map(|(id, m, k, l, r, _)| (id, m, k, opt_is_zero(&opt_sub(l, r))))
                        .collect();
                    (s.clone(), r)
                })
                .collect();
            for (s, rs) in per {
                for (identity, m, k, ok) in rs {
                    report.checks += 1;
                    if !ok {
                        report.violations.push(Violation { identity, state: s.clone(), m, k });
                    }
                }
            }
        }
        Arithmetic::Modular => {
            let gm = Graded::<Modular>::new(q);
            let gb = Graded::<Majorant>::new(q);
            let xs = basis_vectors(&gm, m_max);
            let ys = basis_vectors(&gb, m_max);
            let per: Vec<(ModeState, Vec<(Identity, i64, i64, bool, f64)>)> = xs
                .par_iter()
                .zip(ys.par_iter())
                .map(|((s, x), (_, y))| {
                    let exact = checks_on(&gm, x, lo, hi);
                    let bounds = checks_on(&gb, y, lo, hi);
                    let r = exact
                        .into_iter()
                        .zip(bounds)
                        .map(|((id, m, k, l, r, bits), (_, _, _, bl, br, _))| {
                            let b = vec_bound(&bl) + vec_bound(&br);
                            let cert = if b > 0.0 { bits + b.log2() } else { 0.0 };
                            (id, m, k, opt_is_zero(&opt_sub(l, r)), cert)
                        })
                        .collect();
                    (s.clone(), r)
                })
                .collect();
            for (s, rs) in per {
                for (identity, m, k, ok, cert) in rs {
                    report.checks += 1;
                    report.worst_certificate_bits = report.worst_certificate_bits.max(cert);
                    if !ok {
                        report.violations.push(Violation { identity, state: s.clone(), m, k });
                    }
                }
            }
            report.certified = report.worst_certificate_bits < LOG2_MODULUS - 1.0;
        }
    }
    report
}
