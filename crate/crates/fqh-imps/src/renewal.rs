//! Discrete renewal equations C_n = Σ_{j<n} α_j C_{n−j} + β_n: radius of
//! convergence, the Feller limit C_n rⁿ → β(r)/μ and its geometric rate,
//! and the Laughlin norms as a renewal system.
//!
//! On a thin cylinder α_2 ≈ 2e^{−2γ²}, so r differs from 1 far below double
//! precision.  The solver is generic over [`RScalar`]; Laughlin feeds run on
//! [`BigFloat`] (2048 bits), synthetic rational feeds on exact rationals.

use std::collections::HashMap;
use std::fmt::Debug;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::ln_abs_ratio;
use crate::partitions::{Partition, Root};
use crate::series::XPoly;
use crate::wavefunction::{c_constant, irreducible_norm_polynomial, norm_polynomial};

pub trait RScalar: Clone + PartialOrd + Debug + Send + Sync {
    fn from_ratio(r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn to_f64(&self) -> f64;
    /// ln|x|, −∞ at zero.
    fn ln_abs(&self) -> f64;

    fn zero() -> Self {
        Self::from_ratio(&<BigRational as Zero>::zero())
    }
    fn one() -> Self {
        Self::from_ratio(&<BigRational as One>::one())
    }
    fn from_int(n: i64) -> Self {
        Self::from_ratio(&BigRational::from_integer(n.into()))
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            Self::zero().sub(self)
        } else {
            self.clone()
        }
    }
}

impl RScalar for f64 {
    fn from_ratio(r: &BigRational) -> Self {
        crate::fock::ratio_to_f64(r)
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
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln_abs(&self) -> f64 {
        f64::abs(*self).ln()
    }
}

impl RScalar for BigRational {
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
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
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        crate::fock::ratio_to_f64(self)
    }
    fn ln_abs(&self) -> f64 {
        if Zero::is_zero(self) {
            f64::NEG_INFINITY
        } else {
            ln_abs_ratio(self)
        }
    }
}

/// Working precision of [`BigFloat`] in bits.
pub const PRECISION: usize = 2048;

type F = FBig<HalfEven>;

/// A 2048-bit binary float.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigFloat(pub F);

fn to_ibig(n: &num_bigint::BigInt) -> IBig {
    n.to_string().parse().expect("decimal integer")
}

impl BigFloat {
    pub fn exp(&self) -> Self {
        BigFloat(self.0.exp())
    }

    pub fn from_f64(x: f64) -> Self {
        let r = BigRational::from_float(x).expect("finite float");
        Self::from_ratio(&r)
    }
}

impl RScalar for BigFloat {
    fn from_ratio(r: &BigRational) -> Self {
        let n = F::from(to_ibig(r.numer())).with_precision(PRECISION).value();
        let d = F::from(to_ibig(r.denom())).with_precision(PRECISION).value();
        BigFloat(n / d)
    }
    fn add(&self, o: &Self) -> Self {
        BigFloat(&self.0 + &o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        BigFloat(&self.0 - &o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        BigFloat(&self.0 * &o.0)
    }
    fn div(&self, o: &Self) -> Self {
        BigFloat(&self.0 / &o.0)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.abs().0.ln().to_f64().value()
    }
}

/// Weight sequences α_n, β_n for n = 1..=horizon (stored 0-based).
#[derive(Clone, Debug)]
pub struct RenewalSystem<S> {
    pub alpha: Vec<S>,
    pub beta: Vec<S>,
    /// First n whose α_n/β_n were not computed and are taken as 0.
    pub truncated_from: Option<usize>,
}

impl<S: RScalar> RenewalSystem<S> {
    pub fn new(alpha: Vec<S>, beta: Vec<S>) -> Result<Self> {
        let zero = S::zero();
        if alpha.iter().chain(&beta).any(|x| *x < zero) {
            return Err(Error::Invalid("renewal weights must be nonnegative".into()));
        }
        Ok(RenewalSystem { alpha, beta, truncated_from: None })
    }

    fn alpha_at(&self, n: usize) -> S {
        self.alpha.get(n - 1).cloned().unwrap_or_else(S::zero)
    }

    fn beta_at(&self, n: usize) -> S {
        self.beta.get(n - 1).cloned().unwrap_or_else(S::zero)
    }

    pub fn horizon(&self) -> usize {
        self.alpha.len().max(self.beta.len())
    }
}

/// C_1..C_{n_max}.
pub fn solve_c<S: RScalar>(sys: &RenewalSystem<S>, n_max: usize) -> Vec<S> {
    let mut c: Vec<S> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut v = sys.beta_at(n);
        for j in 1..n {
            let a = sys.alpha_at(j);
            if !a.is_zero() {
                v = v.add(&a.mul(&c[n - j - 1]));
            }
        }
        c.push(v);
    }
    c
}

/// Σ_{n ≥ 1} coeffs[n−1] zⁿ
pub fn series_eval<S: RScalar>(coeffs: &[S], z: &S) -> S {
    let mut acc = S::zero();
    for c in coeffs.iter().rev() {
        acc = acc.add(c).mul(z);
    }
    acc
}

fn series_derivative_weighted<S: RScalar>(coeffs: &[S], z: &S) -> S {
    // Σ n c_n zⁿ
    let mut acc = S::zero();
    let mut zn = S::one();
    for (i, c) in coeffs.iter().enumerate() {
        zn = zn.mul(z);
        acc = acc.add(&c.mul(&zn).mul(&S::from_int(i as i64 + 1)));
    }
    acc
}

/// Truncated power-series check of C(z)(1 − α(z)) = β(z) through order n_max;
/// returns the largest |coefficient residual|.
pub fn power_series_residual<S: RScalar>(sys: &RenewalSystem<S>, c: &[S]) -> S {
    let mut worst = S::zero();
    for n in 1..=c.len() {
        let mut lhs = c[n - 1].clone();
        for j in 1..n {
            lhs = lhs.sub(&sys.alpha_at(j).mul(&c[n - j - 1]));
        }
        let r = lhs.sub(&sys.beta_at(n)).abs();
        if r > worst {
            worst = r;
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct Radius<S> {
    pub r: S,
    /// α(r) = 1 was hit exactly.
    pub exact: bool,
    pub iterations: usize,
}

/// Smallest t > 0 with α(t) = 1, by bisection down to `tol`.
///
/// α has nonnegative coefficients, so it is increasing on [0, ∞).  The bracket
/// starts at [0, 1/α₁] when α₁ > 0 and is doubled until α(hi) ≥ 1.
pub fn radius<S: RScalar>(sys: &RenewalSystem<S>, tol: &S) -> Result<Radius<S>> {
    let one = S::one();
    let a1 = sys.alpha_at(1);
    let mut hi = if a1.is_zero() { one.clone() } else { one.div(&a1) };
    let mut expansions = 0;
    while series_eval(&sys.alpha, &hi) < one {
        hi = hi.mul(&S::from_int(2));
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Precondition(
                "alpha(t) never reaches 1 within the horizon; cannot bracket the radius".into(),
            ));
        }
    }
    let mut lo = S::zero();
    if series_eval(&sys.alpha, &hi) == one {
        return Ok(Radius { r: hi, exact: true, iterations: 0 });
    }
    let half = S::from_ratio(&BigRational::new(1.into(), 2.into()));
    let mut it = 0;
    while hi.sub(&lo) > *tol {
        let mid = lo.add(&hi).mul(&half);
        let v = series_eval(&sys.alpha, &mid);
        it += 1;
        if v == one {
            return Ok(Radius { r: mid, exact: true, iterations: it });
        }
        if v < one {
            lo = mid;
        } else {
            hi = mid;
        }
        if it > 100_000 {
            break;
        }
    }
    Ok(Radius { r: lo.add(&hi).mul(&half), exact: false, iterations: it })
}

/// Feller limit data in log form (values may be far below f64 range).
#[derive(Clone, Debug, Serialize)]
pub struct FellerReport {
    pub r: f64,
    /// ln r, kept separately since r may round to 1.
    pub ln_r: f64,
    pub mu: f64,
    pub target: f64,
    pub scaled: Vec<f64>,
    /// ln|C_n rⁿ − β(r)/μ| for n = 1..n_max; None where the residual is exactly 0.
    pub ln_residuals: Vec<Option<f64>>,
    /// Least-squares slope of ln residual against n over the nonzero tail.
    pub ln_rate: Option<f64>,
    /// ln of the guaranteed lower bound on R, when its hypotheses hold.
    pub ln_rate_bound: Option<f64>,
    pub truncated_from: Option<usize>,
}

impl FellerReport {
    /// Residuals decay (running envelope) and the fitted rate is at least 90% of the
    /// guaranteed bound (in ln R), when that bound applies.
    pub fn geometric(&self) -> bool {
        let vals: Vec<f64> = self.ln_residuals.iter().skip(1).flatten().copied().collect();
        if vals.len() < 3 {
            return false;
        }
        // the envelope must shrink: no residual exceeds an earlier one
        let decreasing = (1..vals.len()).all(|i| vals[i] < vals[..i].iter().cloned().fold(f64::MIN, f64::max));
        let rate_ok = match (self.ln_rate, self.ln_rate_bound) {
            (Some(s), Some(t)) => -s >= 0.9 * t,
            (Some(s), None) => s < 0.0,
            _ => false,
        };
        decreasing && rate_ok
    }

    /// Every residual is exactly zero (closed-form systems).
    pub fn exact_limit(&self) -> bool {
        self.ln_residuals.iter().all(|r| r.is_none())
    }
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// ln of min{R_β/r, (e^c/r)/(1 + C/(1 − e^{−c}))} with C = max(α₁, 1) and the
/// largest c such that α_n ≤ C e^{−c(n−1)} on the horizon; R_β ≥ e^c.
fn rate_bound<S: RScalar>(sys: &RenewalSystem<S>, ln_r: f64) -> Option<f64> {
    if ln_r >= 0.0 {
        return None;
    }
    let big_c = sys.alpha_at(1).to_f64().max(1.0);
    let mut c = f64::INFINITY;
    for n in 2..=sys.alpha.len() {
        let la = sys.alpha_at(n).ln_abs();
        if la.is_finite() {
            c = c.min((big_c.ln() - la) / (n - 1) as f64);
        }
    }
    if !c.is_finite() || c <= 0.0 {
        return None;
    }
    let first = c - ln_r;
    let second = c - ln_r - (1.0 + big_c / (-(-c).exp_m1())).ln();
    Some(first.min(second))
}

pub fn feller_limit<S: RScalar>(sys: &RenewalSystem<S>, r: &S, n_max: usize) -> FellerReport {
    let c = solve_c(sys, n_max);
    let mu = series_derivative_weighted(&sys.alpha, r);
    let target = series_eval(&sys.beta, r).div(&mu);
    let mut scaled = Vec::with_capacity(n_max);
    let mut residuals = Vec::with_capacity(n_max);
    let mut rn = S::one();
    for cn in &c {
        rn = rn.mul(r);
        let v = cn.mul(&rn);
        let res = v.sub(&target);
        scaled.push(v.to_f64());
        residuals.push(if res.is_zero() { None } else { Some(res.ln_abs()) });
    }
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(i, x)| x.map(|v| ((i + 1) as f64, v)))
        .collect();
    let ln_r = r.ln_abs();
    FellerReport {
        r: r.to_f64(),
        ln_r,
        mu: mu.to_f64(),
        target: target.to_f64(),
        scaled,
        ln_residuals: residuals,
        ln_rate: fit_slope(&pts),
        ln_rate_bound: rate_bound(sys, ln_r),
        truncated_from: sys.truncated_from,
    }
}

/// α = (1/2, 0, …), β = (1, 0, …): C_n = 2^{1−n}, r = 2, μ = 1, β(r)/μ = 2.
pub fn geometric_toy() -> RenewalSystem<BigRational> {
    let half = BigRational::new(1.into(), 2.into());
    RenewalSystem::new(vec![half], vec![<BigRational as One>::one()]).expect("nonnegative")
}

/// Irreducible and full norm polynomials (in t = e^{−γ²}) for roots of the
/// form (0,…,0, b⁽²⁾) and their segments, computed exactly up to `exact_max`
/// particles; longer irreducible segments are taken as 0.
pub struct NormFeed {
    pub exact_max: usize,
    irreducible: HashMap<Root, Option<XPoly>>,
    full: HashMap<Root, XPoly>,
}

impl NormFeed {
    pub fn new(exact_max: usize) -> Self {
        NormFeed { exact_max, irreducible: HashMap::new(), full: HashMap::new() }
    }

    /// None when the segment is longer than `exact_max`.
    pub fn irreducible(&mut self, root: &Root) -> Result<Option<XPoly>> {
        if let Some(p) = self.irreducible.get(root) {
            return Ok(p.clone());
        }
        let p = if root.n <= self.exact_max { Some(irreducible_norm_polynomial(root)?) } else { None };
        self.irreducible.insert(root.clone(), p.clone());
        Ok(p)
    }

    /// ‖Ψ_root‖² by conditioning on the last renewal point; exact when
    /// root.n ≤ exact_max, otherwise with long irreducible segments dropped.
    /// The flag reports whether anything was dropped.
    pub fn norm(&mut self, root: &Root) -> Result<(XPoly, bool)> {
        if root.n <= self.exact_max {
            if let Some(p) = self.full.get(root) {
                return Ok((p.clone(), false));
            }
            let p = norm_polynomial(root)?;
            self.full.insert(root.clone(), p.clone());
            return Ok((p, false));
        }
        let mut total = XPoly::zero();
        let mut dropped = false;
        let last = self.irreducible(root)?;
        match last {
            Some(p) => total = &total + &p,
            None => dropped = true,
        }
        for s in 1..root.n {
            let (r1, r2) = root.split(s)?;
            let Some(tail) = self.irreducible(&r2)? else {
                dropped = true;
                continue;
            };
            let (head, d) = self.norm(&r1)?;
            dropped |= d;
            total = &total + &(&head * &tail);
        }
        Ok((total, dropped))
    }
}

fn eval_big(p: &XPoly, t: &BigFloat) -> BigFloat {
    let mut acc = BigFloat::zero();
    let mut prev = 0u64;
    let mut tk = BigFloat::one();
    for (&k, c) in &p.terms {
        for _ in prev..k {
            tk = tk.mul(t);
        }
        prev = k;
        acc = acc.add(&BigFloat::from_ratio(c).mul(&tk));
    }
    acc
}

/// t = e^{−γ²} in 2048-bit precision.
pub fn big_t(gamma: f64) -> BigFloat {
    let g = BigFloat::from_f64(gamma);
    BigFloat(F::ZERO.with_precision(PRECISION).value() - (&g.0 * &g.0)).exp()
}

/// α_n = β_n = ‖Ψ̂_{0,n}‖² for n = 1..=horizon, exact up to `exact_max`.
pub fn laughlin_system(q: u32, gamma: f64, horizon: usize, exact_max: usize) -> Result<RenewalSystem<BigFloat>> {
    let t = big_t(gamma);
    let mut feed = NormFeed::new(exact_max);
    let mut alpha = Vec::with_capacity(horizon);
    let mut truncated_from = None;
    for n in 1..=horizon {
        match feed.irreducible(&Root::laughlin(q, n))? {
            Some(p) => alpha.push(eval_big(&p, &t)),
            None => {
                truncated_from.get_or_insert(n);
                alpha.push(BigFloat::zero());
            }
        }
    }
    let mut sys = RenewalSystem::new(alpha.clone(), alpha)?;
    sys.truncated_from = truncated_from;
    Ok(sys)
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureReport {
    pub suffix: Vec<u32>,
    /// ln C_N / N for N = 1..=N_max, C_N = ‖Ψ_{(0,…,0,b⁽²⁾),N}‖².
    pub values: Vec<f64>,
    /// ln C_{N₁+N₂} ≥ ln C_{N₁} + ln C_{N₂} for every pair (Laughlin suffix only).
    pub superadditive: Option<bool>,
    /// ln C_N / N is non-decreasing in N (the limit is a supremum).
    pub nondecreasing: bool,
    /// Some norm dropped irreducible segments beyond the exact range.
    pub truncated: bool,
    pub c_constant: f64,
}

/// ln C_N / N with C_N the squared norm for b = (0,…,0,b⁽²⁾), N ≥ ℓ(b⁽²⁾).
pub fn pressure(q: u32, gamma: f64, suffix: &[u32], n_max: usize, exact_max: usize) -> Result<PressureReport> {
    let c = c_constant(q, gamma);
    if c <= 0.0 {
        return Err(Error::Precondition(format!("C_q(gamma) = {c} <= 0")));
    }
    let ln_t = -gamma * gamma;
    let m = suffix.len().max(1);
    let mut feed = NormFeed::new(exact_max);
    let mut values = Vec::new();
    let mut truncated = false;
    let mut ln_c = Vec::new();
    for n in 1..=n_max {
        if n < m {
            values.push(f64::NAN);
            ln_c.push(f64::NAN);
            continue;
        }
        let mut b = vec![0u32; n - suffix.len().min(n)];
        b.extend_from_slice(suffix);
        let root = Root::new(q, n, Partition::new(b)?)?;
        let (p, d) = feed.norm(&root)?;
        truncated |= d;
        // ln C = ln(1 + (C − 1)), accurate when C − 1 is tiny
        let excess = &p - &XPoly::constant(<BigRational as One>::one());
        let e = excess.eval_log(ln_t);
        let v = if e.sign == 0.0 { 0.0 } else { e.to_f64().ln_1p() };
        ln_c.push(v);
        values.push(v / n as f64);
    }
    let superadditive = suffix.iter().all(|&x| x == 0).then(|| {
        (1..=n_max).all(|a| {
            (1..=n_max - a).all(|b| {
                let lhs = ln_c[a + b - 1];
                let rhs = ln_c[a - 1] + ln_c[b - 1];
                lhs >= rhs * (1.0 - 1e-12)
            })
        })
    });
    let defined: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    let nondecreasing = defined.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    Ok(PressureReport { suffix: suffix.to_vec(), values, superadditive, nondecreasing, truncated, c_constant: c })
}

/// |ln C_N/N − ln C'_N/N| at the largest common N.
pub fn pressure_gap(a: &PressureReport, b: &PressureReport) -> f64 {
    (a.values.last().unwrap() - b.values.last().unwrap()).abs()
}

/// Machine-readable summary of a renewal run.
#[derive(Clone, Debug, Serialize)]
pub struct RenewalReport {
    pub r: f64,
    /// −ln r; the per-particle growth rate of C_n.
    pub ln_inverse_r: f64,
    pub mu: f64,
    pub target: f64,
    pub c: Vec<f64>,
    pub residuals: Vec<Option<f64>>,
    pub pressure: Vec<f64>,
    pub feller: FellerReport,
    pub radius_exact: bool,
}

/// Radius, Feller limit and C_n for a system; `pressure` is ln C_n / n.
pub fn renewal_report<S: RScalar>(sys: &RenewalSystem<S>, tol: &S, n_max: usize) -> Result<RenewalReport> {
    let rad = radius(sys, tol)?;
    let feller = feller_limit(sys, &rad.r, n_max);
    let c = solve_c(sys, n_max);
    let pressure = c.iter().enumerate().map(|(i, x)| x.ln_abs() / (i + 1) as f64).collect();
    Ok(RenewalReport {
        r: feller.r,
        ln_inverse_r: -feller.ln_r,
        mu: feller.mu,
        target: feller.target,
        c: c.iter().map(RScalar::to_f64).collect(),
        residuals: feller.ln_residuals.clone(),
        pressure,
        radius_exact: rad.exact,
        feller,
    })
}

/// Bisection tolerance 2^{−1900} for [`BigFloat`] runs.
pub fn big_tolerance() -> BigFloat {
    let den = num_bigint::BigInt::from(2).pow(1900);
    BigFloat::from_ratio(&BigRational::new(1.into(), den))
}
