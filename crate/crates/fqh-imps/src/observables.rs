//! Local observables: ladder words in the occupation basis, expectation
//! values and connected correlators on the cylinder.
//!
//! Fermionic modes are ordered by increasing orbital index, and c_k, c*_k
//! carry (−1)^{#particles in orbitals < k}.
//!
//! Each nonzero ⟨Φ_μ, O Φ_λ⟩ h(μ) h(λ) is a rational multiple of
//! s^{Δ(μ)+Δ(λ)}, s = e^{−γ²/2}, so ⟨Ψ, O Ψ⟩ is an exact polynomial in s.
//! Connected correlators are formed from those polynomials before anything is
//! rounded; in floats ⟨AB⟩ − ⟨A⟩⟨B⟩ cancels to noise on thin cylinders.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{Partition, Root};
use crate::series::{LogValue, XPoly};
use crate::wavefunction::{build_expansion, c_constant, Geometry, WavefunctionExpansion};

type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    pub fn of(root: &Root) -> Self {
        if root.is_fermionic() {
            Statistics::Fermion
        } else {
            Statistics::Boson
        }
    }
}

/// c*_{L₁}⋯c*_{L_r} c_{L′₁}⋯c_{L′_s}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderWord {
    pub create: Vec<u32>,
    pub annihilate: Vec<u32>,
    pub statistics: Statistics,
}

impl LadderWord {
    pub fn new(create: Vec<u32>, annihilate: Vec<u32>, statistics: Statistics) -> Self {
        LadderWord { create, annihilate, statistics }
    }

    pub fn identity(statistics: Statistics) -> Self {
        Self::new(vec![], vec![], statistics)
    }

    /// n_k = c*_k c_k
    pub fn number(k: u32, statistics: Statistics) -> Self {
        Self::new(vec![k], vec![k], statistics)
    }

    pub fn support(&self) -> Option<(u32, u32)> {
        let all = self.create.iter().chain(&self.annihilate);
        Some((*all.clone().min()?, *all.max()?))
    }

    /// Σ create − Σ annihilate.
    pub fn momentum_transfer(&self) -> i64 {
        self.create.iter().map(|&k| k as i64).sum::<i64>() - self.annihilate.iter().map(|&k| k as i64).sum::<i64>()
    }

    /// Elementary operators in the order they act on a ket.
    fn ops(&self) -> impl Iterator<Item = (bool, u32)> + '_ {
        let ann = self.annihilate.iter().rev().map(|&k| (false, k));
        let cre = self.create.iter().rev().map(|&k| (true, k));
        ann.chain(cre)
    }
}

/// A product of words; the rightmost acts first.
#[derive(Clone, Debug)]
struct Product<'a>(Vec<&'a LadderWord>);

impl Product<'_> {
    fn statistics(&self) -> Option<Statistics> {
        self.0.first().map(|w| w.statistics)
    }
}

/// Result of applying a word to Φ_λ: sign · √(square) · Φ_μ.
struct Image {
    occupation: Vec<u32>,
    sign: i32,
    square: BigInt,
}

fn occupation_of(lambda: &Partition) -> Vec<u32> {
    let mut occ = vec![0u32; lambda.last() as usize + 1];
    for &p in lambda.parts() {
        occ[p as usize] += 1;
    }
    occ
}

fn partition_of(occ: &[u32]) -> Partition {
    let mut parts = Vec::new();
    for (k, &n) in occ.iter().enumerate() {
        parts.extend(std::iter::repeat_n(k as u32, n as usize));
    }
    Partition::from_unsorted(parts)
}

fn apply(product: &Product, lambda: &Partition) -> Option<Image> {
    let mut occ = occupation_of(lambda);
    let mut sign = 1i32;
    let mut square = BigInt::one();
    for word in product.0.iter().rev() {
        let fermion = word.statistics == Statistics::Fermion;
        for (create, k) in word.ops() {
            let k = k as usize;
            if occ.len() <= k {
                occ.resize(k + 1, 0);
            }
            if fermion && occ[..k].iter().sum::<u32>() % 2 == 1 {
                sign = -sign;
            }
            if create {
                if fermion && occ[k] == 1 {
                    return None;
                }
                occ[k] += 1;
                square *= occ[k];
            } else {
                if occ[k] == 0 {
                    return None;
                }
                square *= occ[k];
                occ[k] -= 1;
            }
        }
    }
    Some(Image { occupation: occ, sign, square })
}

/// ⟨Φ_μ, c*_L c_{L′} Φ_λ⟩ for normalized occupation states.
pub fn matrix_element(mu: &Partition, lambda: &Partition, word: &LadderWord) -> f64 {
    match apply(&Product(vec![word]), lambda) {
        Some(img) if partition_of(&img.occupation) == *mu => {
            img.sign as f64 * crate::fock::ratio_to_f64(&Q::from_integer(img.square)).sqrt()
        }
        _ => 0.0,
    }
}

fn exact_sqrt(r: &Q) -> Option<Q> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Q::new(n, d))
}

fn require_cylinder(exp: &WavefunctionExpansion) -> Result<f64> {
    exp.geometry
        .gamma()
        .ok_or_else(|| Error::Precondition("cylinder geometry required".into()))
}

fn check_statistics(exp: &WavefunctionExpansion, words: &[&LadderWord]) -> Result<()> {
    let want = Statistics::of(&exp.root);
    if words.iter().any(|w| w.statistics != want) {
        return Err(Error::Precondition(format!(
            "word statistics must be {want:?} for q = {}",
            exp.root.q
        )));
    }
    Ok(())
}

/// ⟨Ψ, O Ψ⟩ as an exact polynomial in s = e^{−γ²/2}, O a product of words.
fn product_polynomial(exp: &WavefunctionExpansion, product: &Product) -> Result<XPoly> {
    let index: HashMap<&Partition, usize> = exp.terms.iter().enumerate().map(|(i, t)| (&t.lambda, i)).collect();
    let mut p = XPoly::zero();
    if product.statistics().is_none() {
        return Ok(norm_in_s(exp));
    }
    for t in &exp.terms {
        let Some(img) = apply(product, &t.lambda) else { continue };
        let mu = partition_of(&img.occupation);
        let Some(&j) = index.get(&mu) else { continue };
        let u = &exp.terms[j];
        // h(μ) h(λ) amp = w_μ w_λ s^{Δμ+Δλ} · sign √(square / (M_μ! M_λ!))
        let ratio = Q::new(img.square, BigInt::from(u.m_factorial) * BigInt::from(t.m_factorial));
        let root = exact_sqrt(&ratio).ok_or_else(|| {
            Error::Invalid("matrix element is not rational; use normal-ordered words on disjoint orbitals".into())
        })?;
        let c = &u.w * &t.w * root * Q::from_integer(img.sign.into());
        p.add_term((u.delta + t.delta) as u64, c);
    }
    Ok(p)
}

fn norm_in_s(exp: &WavefunctionExpansion) -> XPoly {
    let mut p = XPoly::zero();
    for t in &exp.terms {
        p.add_term(2 * t.delta as u64, &t.w * &t.w / Q::from_integer(t.m_factorial.into()));
    }
    p
}

/// ⟨Ψ, O Ψ⟩ (unnormalized) as a polynomial in s = e^{−γ²/2}.
pub fn expectation_polynomial(exp: &WavefunctionExpansion, word: &LadderWord) -> Result<XPoly> {
    check_statistics(exp, &[word])?;
    product_polynomial(exp, &Product(vec![word]))
}

/// ⟨O⟩ = ⟨Ψ, O Ψ⟩ / ‖Ψ‖².
pub fn expectation(exp: &WavefunctionExpansion, word: &LadderWord) -> Result<f64> {
    let gamma = require_cylinder(exp)?;
    let ln_s = -gamma * gamma / 2.0;
    let num = expectation_polynomial(exp, word)?.eval_log(ln_s);
    let den = norm_in_s(exp).eval_log(ln_s);
    Ok(num.div(den).to_f64())
}

/// ⟨AB⟩ − ⟨A⟩⟨B⟩ in log form, from the exact numerator P_AB P_1 − P_A P_B.
pub fn connected_correlator_log(exp: &WavefunctionExpansion, a: &LadderWord, b: &LadderWord) -> Result<LogValue> {
    let gamma = require_cylinder(exp)?;
    check_statistics(exp, &[a, b])?;
    if let (Some((_, amax)), Some((bmin, _))) = (a.support(), b.support()) {
        if amax >= bmin {
            return Err(Error::Precondition(format!(
                "supports must satisfy max supp A < min supp B (got {amax} >= {bmin})"
            )));
        }
    }
    let p1 = norm_in_s(exp);
    let pa = product_polynomial(exp, &Product(vec![a]))?;
    let pb = product_polynomial(exp, &Product(vec![b]))?;
    let pab = if a.support().is_none() || b.support().is_none() {
        // identity factor: AB is the other word
        if a.support().is_none() { pb.clone() } else { pa.clone() }
    } else {
        product_polynomial(exp, &Product(vec![a, b]))?
    };
    let num = &(&pab * &p1) - &(&pa * &pb);
    let ln_s = -gamma * gamma / 2.0;
    let den = p1.eval_log(ln_s);
    Ok(num.eval_log(ln_s).div(den.mul(den)))
}

pub fn connected_correlator(exp: &WavefunctionExpansion, a: &LadderWord, b: &LadderWord) -> Result<f64> {
    Ok(connected_correlator_log(exp, a, b)?.to_f64())
}

/// Observable families for [`clustering_scan`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// n_x and n_{x+d}, maximized over admissible anchors x.
    Density,
    /// c*_x c_{x+1} and c*_{y+1} c_y with y = x + 1 + d; momentum-neutral pair hop.
    Hopping,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Family::Density),
            "hopping" => Ok(Family::Hopping),
            _ => Err(Error::Invalid(format!("unknown observable family {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationRow {
    pub distance: u32,
    /// Anchor x achieving the largest |connected| at this distance.
    pub anchor: u32,
    pub value: f64,
    /// ln|value|, finite even where value underflows.
    pub ln_abs: f64,
    /// |conn(d₀)| e^{−C_q(γ)(d−d₀)/6}, d₀ the smallest scanned distance.
    pub bound: f64,
    pub ln_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusteringReport {
    pub q: u32,
    pub n: usize,
    pub b: Partition,
    pub gamma: f64,
    pub family: Family,
    pub c_constant: f64,
    pub rows: Vec<CorrelationRow>,
    /// Least-squares slope of ln|conn| against distance.
    pub slope: f64,
    pub decreasing: bool,
    pub within_bound: bool,
}

impl ClusteringReport {
    pub fn passed(&self) -> bool {
        self.decreasing && self.within_bound && self.slope <= -self.c_constant / 6.0
    }
}

fn family_pair(family: Family, x: u32, d: u32, stats: Statistics) -> (LadderWord, LadderWord) {
    match family {
        Family::Density => (LadderWord::number(x, stats), LadderWord::number(x + d, stats)),
        Family::Hopping => {
            let y = x + 1 + d;
            (
                LadderWord::new(vec![x], vec![x + 1], stats),
                LadderWord::new(vec![y + 1], vec![y], stats),
            )
        }
    }
}

/// |connected| against distance, maximized over anchors inside the orbital range.
pub fn clustering_scan(root: &Root, gamma: f64, family: Family, distances: &[u32]) -> Result<ClusteringReport> {
    let c = c_constant(root.q, gamma);
    if c <= 0.0 {
        return Err(Error::Precondition(format!("C_q(gamma) = {c} <= 0")));
    }
    if distances.is_empty() {
        return Err(Error::Invalid("no distances to scan".into()));
    }
    let exp = build_expansion(root, &Geometry::cylinder(gamma)?)?;
    let stats = Statistics::of(root);
    let top = root.span();
    let mut rows = Vec::with_capacity(distances.len());
    for &d in distances {
        let mut best: Option<(u32, LogValue)> = None;
        for x in 0..=top {
            let (a, b) = family_pair(family, x, d, stats);
            if b.support().unwrap().1 > top {
                break;
            }
            let v = connected_correlator_log(&exp, &a, &b)?;
            if best.is_none_or(|(_, bv)| v.ln_abs > bv.ln_abs) {
                best = Some((x, v));
            }
        }
        let (anchor, v) =
            best.ok_or_else(|| Error::Invalid(format!("distance {d} does not fit in orbitals 0..={top}")))?;
        rows.push(CorrelationRow {
            distance: d,
            anchor,
            value: v.to_f64(),
            ln_abs: v.ln_abs,
            bound: 0.0,
            ln_bound: 0.0,
        });
    }
    let d0 = rows[0].distance as f64;
    let l0 = rows[0].ln_abs;
    for r in &mut rows {
        r.ln_bound = l0 - c * (r.distance as f64 - d0) / 6.0;
        r.bound = r.ln_bound.exp();
    }
    let finite: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ln_abs.is_finite())
        .map(|r| (r.distance as f64, r.ln_abs))
        .collect();
    let slope = if finite.len() >= 2 {
        let n = finite.len() as f64;
        let mx = finite.iter().map(|p| p.0).sum::<f64>() / n;
        let my = finite.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = finite.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = finite.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NEG_INFINITY
    };
    let decreasing = rows.windows(2).all(|w| w[1].ln_abs < w[0].ln_abs || w[1].ln_abs == f64::NEG_INFINITY);
    let within_bound = rows.iter().all(|r| r.ln_abs <= r.ln_bound + 1e-9);
    Ok(ClusteringReport {
        q: root.q,
        n: root.n,
        b: root.b.clone(),
        gamma,
        family,
        c_constant: c,
        rows,
        slope,
        decreasing,
        within_bound,
    })
}

/// Σ_k ⟨n_k⟩ and Σ_k k⟨n_k⟩ over the orbitals of the expansion.
pub fn occupation_moments(exp: &WavefunctionExpansion) -> Result<(f64, f64)> {
    let stats = Statistics::of(&exp.root);
    let mut n = 0.0;
    let mut m = 0.0;
    for k in 0..=exp.root.span() {
        let v = expectation(exp, &LadderWord::number(k, stats))?;
        n += v;
        m += k as f64 * v;
    }
    Ok((n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_dominated;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ladder_examples() {
        let b = Statistics::Boson;
        let f = Statistics::Fermion;
        let lam = p(&[0, 1, 1, 3]);
        for k in 0..5 {
            let m = *lam.occupation().get(&k).unwrap_or(&0) as f64;
            assert_eq!(matrix_element(&lam, &lam, &LadderWord::number(k, b)), m);
        }
        let w = LadderWord::new(vec![0, 2], vec![1, 1], b);
        assert!((matrix_element(&p(&[0, 2]), &p(&[1, 1]), &w) - 2f64.sqrt()).abs() < 1e-15);
        let hop = LadderWord::new(vec![2], vec![1], f);
        assert_eq!(matrix_element(&p(&[0, 2]), &p(&[0, 1]), &hop), 1.0);
        assert_eq!(matrix_element(&p(&[1]), &p(&[0]), &LadderWord::new(vec![1], vec![0], f)), 1.0);
        // c*_2 c*_0 c_2 c_0 = −n_2 n_0, c*_0 c*_2 c_2 c_0 = n_0 n_2
        assert_eq!(matrix_element(&p(&[0, 2]), &p(&[0, 2]), &LadderWord::new(vec![2, 0], vec![2, 0], f)), -1.0);
        assert_eq!(matrix_element(&p(&[0, 2]), &p(&[0, 2]), &LadderWord::new(vec![0, 2], vec![2, 0], f)), 1.0);
        // Pauli
        assert_eq!(matrix_element(&p(&[1, 1]), &p(&[0, 1]), &LadderWord::new(vec![1], vec![0], f)), 0.0);
    }

    #[test]
    fn selection_rules_exhaustive_small() {
        // every occupation of orbitals 0..=3 by 1..=3 bosons
        let mut states: Vec<Partition> = Vec::new();
        for n in 1..=3usize {
            let mut cur = vec![0u32; n];
            loop {
                states.push(p(&cur));
                let Some(i) = (0..n).rev().find(|&i| cur[i] < 3) else { break };
                let v = cur[i] + 1;
                cur[i..].iter_mut().for_each(|x| *x = v);
            }
        }
        let words = [
            LadderWord::new(vec![2], vec![0], Statistics::Boson),
            LadderWord::new(vec![0, 1], vec![1], Statistics::Boson),
            LadderWord::new(vec![3], vec![1, 2], Statistics::Boson),
        ];
        for w in &words {
            for mu in &states {
                for lam in &states {
                    let v = matrix_element(mu, lam, w);
                    let ok = mu.weight() as i64 - lam.weight() as i64 == w.momentum_transfer()
                        && mu.len() + w.annihilate.len() == lam.len() + w.create.len();
                    if !ok {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let root = Root::laughlin(2, 1);
        let exp = build_expansion(&root, &Geometry::cylinder(1.0).unwrap()).unwrap();
        assert_eq!(expectation(&exp, &LadderWord::number(0, Statistics::Boson)).unwrap(), 1.0);
        let planar = build_expansion(&root, &Geometry::Planar).unwrap();
        assert!(expectation(&planar, &LadderWord::number(0, Statistics::Boson)).is_err());
        let wrong = LadderWord::number(0, Statistics::Fermion);
        assert!(expectation(&exp, &wrong).is_err());
    }

    #[test]
    fn conservation_laws() {
        for (q, b) in [(2, vec![0, 0, 0]), (1, vec![0, 1, 1]), (3, vec![0, 0, 2])] {
            let root = Root::new(q, 3, p(&b)).unwrap();
            let exp = build_expansion(&root, &Geometry::cylinder(0.8).unwrap()).unwrap();
            let (n, m) = occupation_moments(&exp).unwrap();
            assert!((n - 3.0).abs() < 1e-10);
            assert!((m - root.partition().weight() as f64).abs() < 1e-10);
        }
    }

    /// Dense pair sum over every dominated μ, λ.
    fn dense(exp: &WavefunctionExpansion, word: &LadderWord) -> f64 {
        let all = enumerate_dominated(&exp.root);
        let h = |l: &Partition| exp.term(l).map_or(0.0, |t| t.h);
        let mut num = 0.0;
        let mut den = 0.0;
        for mu in &all {
            den += h(mu) * h(mu);
            for lam in &all {
                num += h(mu) * h(lam) * matrix_element(mu, lam, word);
            }
        }
        num / den
    }

    #[test]
    fn agrees_with_dense_oracle() {
        for q in [1, 2] {
            let root = Root::laughlin(q, 3);
            let exp = build_expansion(&root, &Geometry::cylinder(0.7).unwrap()).unwrap();
            let s = Statistics::of(&root);
            let words = [
                LadderWord::number(2, s),
                LadderWord::new(vec![1, 3], vec![2, 2], s),
                LadderWord::new(vec![1, 3], vec![0, 4], s),
                LadderWord::new(vec![2, 2], vec![1, 3], s),
            ];
            for w in &words {
                if s == Statistics::Fermion && w.create == vec![2, 2] {
                    continue;
                }
                let a = expectation(&exp, w).unwrap();
                let b = dense(&exp, w);
                assert!((a - b).abs() < 1e-12, "q={q} {w:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn connected_correlator_basics() {
        let root = Root::laughlin(2, 4);
        let exp = build_expansion(&root, &Geometry::cylinder(1.0).unwrap()).unwrap();
        let s = Statistics::Boson;
        let id = LadderWord::identity(s);
        assert_eq!(connected_correlator(&exp, &id, &LadderWord::number(3, s)).unwrap(), 0.0);
        assert!(connected_correlator(&exp, &LadderWord::number(3, s), &LadderWord::number(2, s)).is_err());
        // exact numerator against the float formula where the latter is accurate
        let a = LadderWord::number(0, s);
        let b = LadderWord::number(2, s);
        let conn = connected_correlator(&exp, &a, &b).unwrap();
        let ab = LadderWord::new(vec![0, 2], vec![0, 2], s);
        let naive = expectation(&exp, &ab).unwrap() - expectation(&exp, &a).unwrap() * expectation(&exp, &b).unwrap();
        assert!((conn - naive).abs() < 1e-12, "{conn} vs {naive}");
    }

    #[test]
    fn product_state_has_no_connected_part() {
        let root = Root::laughlin(2, 2);
        let exp = build_expansion(&root, &Geometry::cylinder(30.0).unwrap()).unwrap();
        let s = Statistics::Boson;
        let v = connected_correlator(&exp, &LadderWord::number(0, s), &LadderWord::number(2, s)).unwrap();
        assert!(v.abs() < 1e-300);
    }

    #[test]
    fn bosonic_moments_are_finite() {
        let root = Root::laughlin(2, 4);
        let exp = build_expansion(&root, &Geometry::cylinder(1.0).unwrap()).unwrap();
        for x in 0..=6 {
            for s in 1..=4 {
                let w = LadderWord::new(vec![x; s], vec![x; s], Statistics::Boson);
                assert!(expectation(&exp, &w).unwrap().is_finite());
            }
        }
    }
}
