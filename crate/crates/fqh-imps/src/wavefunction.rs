//! Expansions Ψ_{b,N} = Σ h_b(λ) Φ_λ on the plane and the cylinder, their
//! norms, the renewal structure of the norms and the thin-cylinder bounds.
//!
//! On the cylinder h_b(λ) = w_b(λ) s^{Δ_b(λ)} / √M(λ)! with s = e^{−γ²/2}, so
//! every norm is an exact polynomial in t = s² with nonnegative rational
//! coefficients.  Those polynomials are the primary objects here; floats only
//! appear when they are evaluated.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cft_ops::all_coefficients;
use crate::error::{Error, Result};
use crate::fock::ratio_to_f64;
use crate::partitions::{concatenate, enumerate_dominated_with, is_irreducible, Partition, Root};
use crate::series::XPoly;

type Q = BigRational;

/// Default cap on the number of dominated partitions per expansion.
pub const DEFAULT_MAX_PARTITIONS: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Planar,
    Cylinder { gamma: f64 },
}

impl Geometry {
    pub fn cylinder(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Invalid(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Geometry::Cylinder { gamma })
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Geometry::Cylinder { gamma } => Some(*gamma),
            Geometry::Planar => None,
        }
    }

    fn require_cylinder(&self) -> Result<f64> {
        self.gamma()
            .ok_or_else(|| Error::Precondition("cylinder geometry required".into()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionTerm {
    pub lambda: Partition,
    #[serde(serialize_with = "crate::io::ser_ratio")]
    pub w: Q,
    pub delta: i64,
    pub m_factorial: u64,
    pub g: f64,
    pub h: f64,
    /// h fell below 1e−300 and is stored as 0.
    pub underflow: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WavefunctionExpansion {
    pub root: Root,
    pub geometry: Geometry,
    pub terms: Vec<ExpansionTerm>,
}

impl WavefunctionExpansion {
    pub fn term(&self, lambda: &Partition) -> Option<&ExpansionTerm> {
        self.terms
            .binary_search_by(|t| t.lambda.cmp(lambda))
            .ok()
            .map(|i| &self.terms[i])
    }
}

fn ensure_dominated(lambda: &Partition, root: &Root) -> Result<Partition> {
    let rp = root.partition();
    match rp.dominates(lambda) {
        Ok(true) => Ok(rp),
        _ => Err(Error::NotDominated(lambda.parts().to_vec(), rp.parts().to_vec())),
    }
}

/// Δ_b(λ) = Σ_j (root_j² − λ_j²).
pub fn delta_b(lambda: &Partition, root: &Root) -> Result<i64> {
    let rp = ensure_dominated(lambda, root)?;
    Ok(rp
        .parts()
        .iter()
        .zip(lambda.parts())
        .map(|(&r, &l)| (r as i64).pow(2) - (l as i64).pow(2))
        .sum())
}

/// Γ_b(λ) = Σ_j (N + ½ − j)(λ_j − root_j), j 1-based.
pub fn gamma_b(lambda: &Partition, root: &Root) -> Result<Q> {
    let rp = ensure_dominated(lambda, root)?;
    let n = lambda.len() as i64;
    let twice: i64 = rp
        .parts()
        .iter()
        .zip(lambda.parts())
        .enumerate()
        .map(|(i, (&r, &l))| (2 * n + 1 - 2 * (i as i64 + 1)) * (l as i64 - r as i64))
        .sum();
    Ok(Q::new(twice.into(), 2.into()))
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Planar: ∏ √(λ_j!/root_j!).  Cylinder: e^{−γ²Δ/2}.
pub fn g_factor(lambda: &Partition, root: &Root, geometry: &Geometry) -> Result<f64> {
    let rp = ensure_dominated(lambda, root)?;
    Ok(match geometry {
        Geometry::Planar => {
            let ln: f64 = lambda
                .parts()
                .iter()
                .zip(rp.parts())
                .map(|(&l, &r)| ln_factorial(l) - ln_factorial(r))
                .sum();
            (ln / 2.0).exp()
        }
        Geometry::Cylinder { gamma } => (-gamma * gamma * delta_b(lambda, root)? as f64 / 2.0).exp(),
    })
}

/// Exact (w, Δ, M!) for every λ ⪯ root with w ≠ 0.
fn coefficient_table(root: &Root, cap: usize) -> Result<Arc<Vec<(Partition, Q, i64, u64)>>> {
    type Table = Arc<Vec<(Partition, Q, i64, u64)>>;
    static CACHE: OnceLock<Mutex<HashMap<Root, Table>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(root) {
        return Ok(t.clone());
    }
    let fermionic = root.is_fermionic();
    enumerate_dominated_with(root, fermionic, cap)?;
    let rows: Vec<_> = all_coefficients(root, fermionic)
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(lam, w)| {
            let d = delta_b(&lam, root).expect("dominated");
            let m = lam.m_factorial();
            (lam, w, d, m)
        })
        .collect();
    let t = Arc::new(rows);
    cache.lock().unwrap().insert(root.clone(), t.clone());
    Ok(t)
}

pub fn build_expansion(root: &Root, geometry: &Geometry) -> Result<WavefunctionExpansion> {
    build_expansion_with_cap(root, geometry, DEFAULT_MAX_PARTITIONS)
}

pub fn build_expansion_with_cap(root: &Root, geometry: &Geometry, cap: usize) -> Result<WavefunctionExpansion> {
    if let Geometry::Cylinder { gamma } = geometry {
        Geometry::cylinder(*gamma)?;
    }
    let table = coefficient_table(root, cap)?;
    let terms = table
        .iter()
        .map(|(lam, w, d, m)| {
            let g = g_factor(lam, root, geometry).expect("dominated");
            let h = g * ratio_to_f64(w) / (*m as f64).sqrt();
            let underflow = h.abs() < 1e-300;
            ExpansionTerm {
                lambda: lam.clone(),
                w: w.clone(),
                delta: *d,
                m_factorial: *m,
                g,
                h: if underflow { 0.0 } else { h },
                underflow,
            }
        })
        .collect();
    Ok(WavefunctionExpansion {
        root: root.clone(),
        geometry: *geometry,
        terms,
    })
}

fn norm_poly(root: &Root, irreducible_only: bool) -> Result<XPoly> {
    let table = coefficient_table(root, DEFAULT_MAX_PARTITIONS)?;
    let mut p = XPoly::zero();
    for (lam, w, d, m) in table.iter() {
        if irreducible_only && !is_irreducible(lam, root)? {
            continue;
        }
        p.add_term(*d as u64, w * w / Q::from_integer(BigInt::from(*m)));
    }
    Ok(p)
}

/// ‖Ψ_{b,N}‖² as an exact polynomial in t = e^{−γ²}.
pub fn norm_polynomial(root: &Root) -> Result<XPoly> {
    norm_poly(root, false)
}

/// ‖Ψ̂_{b,N}‖² (irreducible λ only) as an exact polynomial in t = e^{−γ²}.
pub fn irreducible_norm_polynomial(root: &Root) -> Result<XPoly> {
    norm_poly(root, true)
}

pub fn norm_squared(exp: &WavefunctionExpansion) -> Result<f64> {
    exp.geometry.require_cylinder()?;
    Ok(exp.terms.iter().map(|t| t.h * t.h).sum())
}

pub fn irreducible_norm_squared(root: &Root, geometry: &Geometry) -> Result<f64> {
    let gamma = geometry.require_cylinder()?;
    Ok(irreducible_norm_polynomial(root)?.eval((-gamma * gamma).exp()))
}

/// Σ over segmentations of ∏ ‖Ψ̂‖², recursing on the first segment.
pub fn segmentation_polynomial(root: &Root) -> Result<(XPoly, u64)> {
    let mut total = irreducible_norm_polynomial(root)?;
    let mut count = 1u64;
    for s in 1..root.n {
        let (r1, r2) = root.split(s)?;
        let (rest, c) = segmentation_polynomial(&r2)?;
        total = &total + &(&irreducible_norm_polynomial(&r1)? * &rest);
        count += c;
    }
    Ok((total, count))
}

#[derive(Clone, Debug, Serialize)]
pub struct RenewalIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub segmentations: u64,
    /// The two sides agree as exact polynomials in e^{−γ²}.
    pub exact: bool,
}

pub fn verify_renewal_identity(root: &Root, geometry: &Geometry) -> Result<RenewalIdentityReport> {
    let gamma = geometry.require_cylinder()?;
    let lhs_poly = norm_polynomial(root)?;
    let (rhs_poly, segmentations) = segmentation_polynomial(root)?;
    // the left side is summed term by term from the float expansion
    let lhs = norm_squared(&build_expansion(root, geometry)?)?;
    let rhs = rhs_poly.eval((-gamma * gamma).exp());
    Ok(RenewalIdentityReport {
        lhs,
        rhs,
        relative_error: (lhs - rhs).abs() / lhs.abs(),
        segmentations,
        exact: lhs_poly == rhs_poly,
    })
}

/// C_q(γ) = γ² − 2(4q+1) − (2/q) ln(1 − e^{−(4q+1)}) − π√(2/3).
pub fn c_constant(q: u32, gamma: f64) -> f64 {
    let a = (4 * q + 1) as f64;
    gamma * gamma - 2.0 * a - 2.0 / q as f64 * (-(-a).exp()).ln_1p() - std::f64::consts::PI * (2.0f64 / 3.0).sqrt()
}

/// D_{b,N} = q(N−1) + b_N − b_1.
pub fn d_constant(root: &Root) -> i64 {
    root.q as i64 * (root.n as i64 - 1) + root.b.last() as i64 - root.b.parts()[0] as i64
}

/// 2e^{−Cq/2}/(1 − e^{−Cq}).
pub fn factorization_bound(q: u32, gamma: f64) -> f64 {
    let c = c_constant(q, gamma) * q as f64;
    2.0 * (-c / 2.0).exp() / (1.0 - (-c).exp())
}

/// 1 − 4√2/√(e^{Cq} − 1).
pub fn eigenvalue_bound(q: u32, gamma: f64) -> f64 {
    let c = c_constant(q, gamma) * q as f64;
    1.0 - 4.0 * 2f64.sqrt() / c.exp_m1().sqrt()
}

/// exp((4q+1)Γ)/(1 − e^{−(4q+1)})^{N−1}, the bound on |w_b(λ)|.
pub fn coefficient_bound(lambda: &Partition, root: &Root) -> Result<f64> {
    let a = (4 * root.q + 1) as f64;
    let g = ratio_to_f64(&gamma_b(lambda, root)?);
    Ok((a * g).exp() / (1.0 - (-a).exp()).powi(root.n as i32 - 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub split: usize,
    pub distance: f64,
    pub bound: f64,
    pub c_constant: f64,
}

/// ‖Ψ/‖Ψ‖ − (Ψ₁/‖Ψ₁‖) ⊙ (Ψ₂/‖Ψ₂‖)‖ in the occupation basis.
pub fn factorization_distance(root: &Root, n1: usize, geometry: &Geometry) -> Result<FactorizationReport> {
    let gamma = geometry.require_cylinder()?;
    let (r1, r2) = root.split(n1)?;
    let full = build_expansion(root, geometry)?;
    let e1 = build_expansion(&r1, geometry)?;
    let e2 = build_expansion(&r2, geometry)?;
    let n = norm_squared(&full)?.sqrt();
    let n12 = norm_squared(&e1)?.sqrt() * norm_squared(&e2)?.sqrt();
    let mut product: HashMap<Partition, f64> = HashMap::new();
    for a in &e1.terms {
        for b in &e2.terms {
            let lam = concatenate(&a.lambda, &r1, &b.lambda)?;
            product.insert(lam, a.h * b.h / n12);
        }
    }
    let mut d2 = 0.0;
    for t in &full.terms {
        let p = product.remove(&t.lambda).unwrap_or(0.0);
        d2 += (t.h / n - p).powi(2);
    }
    // every product term is dominated, so nothing should be left over
    d2 += product.values().map(|x| x * x).sum::<f64>();
    Ok(FactorizationReport {
        split: n1,
        distance: d2.sqrt(),
        bound: factorization_bound(root.q, gamma),
        c_constant: c_constant(root.q, gamma),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupermultiplicativityRow {
    pub split: usize,
    pub norm: f64,
    pub product: f64,
    pub left: f64,
    /// ‖Ψ‖² − ‖Ψ₁‖²‖Ψ₂‖² and ‖Ψ₁‖²‖Ψ₂‖² − ‖Ψ₁‖² have nonnegative coefficients in t.
    pub exact: bool,
}

/// ‖Ψ‖² ≥ ‖Ψ₁‖²‖Ψ₂‖² ≥ ‖Ψ₁‖² for every split of the root.
pub fn supermultiplicativity(root: &Root, geometry: &Geometry) -> Result<Vec<SupermultiplicativityRow>> {
    let gamma = geometry.require_cylinder()?;
    let t = (-gamma * gamma).exp();
    let full = norm_polynomial(root)?;
    let mut rows = Vec::new();
    for s in 1..root.n {
        let (r1, r2) = root.split(s)?;
        let p1 = norm_polynomial(&r1)?;
        let p12 = &p1 * &norm_polynomial(&r2)?;
        rows.push(SupermultiplicativityRow {
            split: s,
            norm: full.eval(t),
            product: p12.eval(t),
            left: p1.eval(t),
            exact: (&full - &p12).nonnegative() && (&p12 - &p1).nonnegative(),
        });
    }
    Ok(rows)
}

impl SupermultiplicativityRow {
    pub fn holds(&self) -> bool {
        self.exact && self.norm >= self.product && self.product >= self.left
    }
}

/// Γ ≤ Δ for all λ, and Δ ≥ D_{b,N} for irreducible λ, over every dominated λ.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaGammaReport {
    pub partitions: usize,
    pub gamma_exceeds_delta: Vec<Partition>,
    pub irreducible_below_d: Vec<Partition>,
}

pub fn delta_gamma_check(root: &Root) -> Result<DeltaGammaReport> {
    let d = d_constant(root);
    let lams = enumerate_dominated_with(root, false, DEFAULT_MAX_PARTITIONS)?;
    let mut rep = DeltaGammaReport {
        partitions: lams.len(),
        gamma_exceeds_delta: Vec::new(),
        irreducible_below_d: Vec::new(),
    };
    for lam in lams {
        let delta = delta_b(&lam, root)?;
        if gamma_b(&lam, root)? > Q::from_integer(delta.into()) {
            rep.gamma_exceeds_delta.push(lam.clone());
        }
        if is_irreducible(&lam, root)? && delta < d {
            rep.irreducible_below_d.push(lam);
        }
    }
    Ok(rep)
}

impl DeltaGammaReport {
    pub fn passed(&self) -> bool {
        self.gamma_exceeds_delta.is_empty() && self.irreducible_below_d.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IrreducibleNormRow {
    pub n: usize,
    pub b: Partition,
    /// ln ‖Ψ̂_{b,N}‖²; −∞ when no irreducible partition has w ≠ 0.
    pub ln_norm: f64,
    /// −C_q(γ) D_{b,N}.
    pub ln_bound: f64,
}

impl IrreducibleNormRow {
    pub fn holds(&self) -> bool {
        self.ln_norm <= self.ln_bound
    }
}

/// ‖Ψ̂_{b,N}‖² ≤ exp(−C_q(γ) D_{b,N}), compared in log space.
pub fn irreducible_norm_bound(root: &Root, gamma: f64) -> Result<IrreducibleNormRow> {
    let c = c_constant(root.q, gamma);
    if c <= 0.0 {
        return Err(Error::Precondition(format!("C_q(gamma) = {c} <= 0")));
    }
    let v = irreducible_norm_polynomial(root)?.eval_log(-gamma * gamma);
    Ok(IrreducibleNormRow {
        n: root.n,
        b: root.b.clone(),
        ln_norm: v.ln_abs,
        ln_bound: -c * d_constant(root) as f64,
    })
}

/// |w_b(λ)| against its bound, in log space; returns the largest ln|w| − ln bound.
pub fn coefficient_bound_margin(root: &Root) -> Result<f64> {
    let table = coefficient_table(root, DEFAULT_MAX_PARTITIONS)?;
    let mut worst = f64::NEG_INFINITY;
    for (lam, w, _, _) in table.iter() {
        let lw = crate::fock::ln_abs_ratio(&w.abs());
        worst = worst.max(lw - coefficient_bound(lam, root)?.ln());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_dominated;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn delta_and_gamma_examples() {
        let root = Root::laughlin(2, 2);
        assert_eq!(delta_b(&p(&[0, 2]), &root).unwrap(), 0);
        assert_eq!(delta_b(&p(&[1, 1]), &root).unwrap(), 2);
        assert_eq!(gamma_b(&p(&[1, 1]), &root).unwrap(), Q::from_integer(1.into()));
        assert!(delta_b(&p(&[0, 1, 5]), &Root::laughlin(2, 3)).is_err());
    }

    #[test]
    fn squeeze_increment_of_delta() {
        let root = Root::laughlin(3, 4);
        for mu in enumerate_dominated(&root) {
            let n = mu.len();
            for i in 0..n {
                for j in i + 1..n {
                    for s in 1..=(mu.parts()[j] - mu.parts()[i]) / 2 {
                        if let Ok(nu) = mu.squeeze(i, j, s) {
                            let inc = delta_b(&nu, &root).unwrap() - delta_b(&mu, &root).unwrap();
                            let gap = mu.parts()[j] as i64 - mu.parts()[i] as i64 - s as i64;
                            assert_eq!(inc, 2 * s as i64 * gap);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn g_factor_examples() {
        let root = Root::laughlin(2, 2);
        let cyl = Geometry::cylinder(1.0).unwrap();
        assert_eq!(g_factor(&p(&[0, 2]), &root, &cyl).unwrap(), 1.0);
        assert!(close(g_factor(&p(&[1, 1]), &root, &cyl).unwrap(), (-1.0f64).exp(), 1e-15));
        assert!(close(g_factor(&p(&[1, 1]), &root, &Geometry::Planar).unwrap(), 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn expansion_examples() {
        let gamma = 1.3;
        let e = build_expansion(&Root::laughlin(2, 2), &Geometry::cylinder(gamma).unwrap()).unwrap();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.terms[0].h, 1.0);
        assert!(close(e.terms[1].h, -(2f64).sqrt() * (-gamma * gamma).exp(), 1e-14));

        let e = build_expansion(&Root::laughlin(1, 2), &Geometry::Planar).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].lambda, p(&[0, 1]));

        let e = build_expansion(&Root::laughlin(3, 2), &Geometry::Planar).unwrap();
        assert_eq!(e.term(&p(&[1, 2])).unwrap().w, Q::from_integer((-3).into()));
    }

    #[test]
    fn norm_examples() {
        for gamma in [0.7, 1.0, 2.0] {
            let geo = Geometry::cylinder(gamma).unwrap();
            let root = Root::laughlin(2, 2);
            let t2 = (-2.0 * gamma * gamma).exp();
            let n = norm_squared(&build_expansion(&root, &geo).unwrap()).unwrap();
            assert!(close(n, 1.0 + 2.0 * t2, 1e-14));
            assert!(close(irreducible_norm_squared(&root, &geo).unwrap(), 2.0 * t2, 1e-14));
            let one = Root::new(2, 1, p(&[3])).unwrap();
            assert_eq!(irreducible_norm_squared(&one, &geo).unwrap(), 1.0);
        }
        assert!(norm_squared(&build_expansion(&Root::laughlin(2, 2), &Geometry::Planar).unwrap()).is_err());
    }

    #[test]
    fn renewal_identity_small() {
        let geo = Geometry::cylinder(1.0).unwrap();
        let r = verify_renewal_identity(&Root::laughlin(2, 1), &geo).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        for root in [Root::laughlin(2, 3), Root::new(3, 3, p(&[0, 1, 1])).unwrap(), Root::new(1, 4, p(&[0, 0, 1, 2])).unwrap()] {
            let r = verify_renewal_identity(&root, &geo).unwrap();
            assert!(r.exact, "{root:?}");
            assert!(r.relative_error < 1e-12);
        }
        assert_eq!(verify_renewal_identity(&Root::laughlin(2, 2), &geo).unwrap().segmentations, 2);
    }

    #[test]
    fn constants() {
        assert_eq!(d_constant(&Root::laughlin(2, 2)), 2);
        assert_eq!(d_constant(&Root::new(3, 6, p(&[1, 1, 2, 3, 3, 5])).unwrap()), 19);
        let c = c_constant(2, 5.0);
        assert!(c > 0.0);
        assert!((c - 4.435024).abs() < 1e-5, "{c}");
    }

    #[test]
    fn irreducible_norms_obey_bound() {
        for n in 1..=5 {
            let row = irreducible_norm_bound(&Root::laughlin(2, n), 5.0).unwrap();
            assert!(row.holds(), "{row:?}");
        }
        // N = 2: only (1,1) is irreducible, ‖Ψ̂‖² = 2e^{−2γ²}
        let row = irreducible_norm_bound(&Root::laughlin(2, 2), 5.0).unwrap();
        assert!((row.ln_norm - (2f64.ln() - 50.0)).abs() < 1e-12);
        assert!(irreducible_norm_bound(&Root::laughlin(2, 2), 1.0).is_err());
    }

    #[test]
    fn h_is_multiplicative_over_renewal_points() {
        let geo = Geometry::cylinder(1.1).unwrap();
        let root = Root::new(2, 4, p(&[0, 0, 1, 1])).unwrap();
        let full = build_expansion(&root, &geo).unwrap();
        let (r1, r2) = root.split(2).unwrap();
        let e1 = build_expansion(&r1, &geo).unwrap();
        let e2 = build_expansion(&r2, &geo).unwrap();
        for a in &e1.terms {
            for b in &e2.terms {
                let lam = concatenate(&a.lambda, &r1, &b.lambda).unwrap();
                let h = full.term(&lam).unwrap().h;
                assert!(close(h, a.h * b.h, 1e-12), "{lam}");
            }
        }
    }

    #[test]
    fn segment_decomposition_is_unique() {
        let root = Root::laughlin(2, 4);
        let mut seen = std::collections::HashSet::new();
        for lam in enumerate_dominated(&root) {
            let segs = crate::partitions::irreducible_decomposition(&lam, &root).unwrap();
            assert!(seen.insert(segs));
        }
    }
}
