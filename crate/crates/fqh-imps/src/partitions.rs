//! Weakly increasing integer partitions, roots, dominance and renewal points.
//!
//! Indices in this module are 0-based; a "split at `s`" puts the first `s`
//! parts into the left segment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotSorted(parts));
        }
        Ok(Partition(parts))
    }

    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.sort_unstable();
        Partition(parts)
    }

    pub fn zeros(n: usize) -> Self {
        Partition(vec![0; n])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&p| p as u64).sum()
    }

    pub fn last(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    /// Occupation numbers m(λ, j) of the orbitals.
    pub fn occupation(&self) -> BTreeMap<u32, u32> {
        let mut occ = BTreeMap::new();
        for &p in &self.0 {
            *occ.entry(p).or_insert(0) += 1;
        }
        occ
    }

    /// M(λ)! = ∏_j m(λ, j)!.  Fits in u64 for up to 20 particles.
    pub fn m_factorial(&self) -> u64 {
        self.occupation().values().map(|&c| factorial(c as u64)).product()
    }

    fn suffix_sums(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.0.len() + 1];
        for i in (0..self.0.len()).rev() {
            out[i] = out[i + 1] + self.0[i] as u64;
        }
        out
    }

    /// Does `self` dominate `other`?  Suffix sums of `other` must not exceed ours.
    pub fn dominates(&self, other: &Partition) -> Result<bool> {
        if self.len() != other.len() || self.weight() != other.weight() {
            return Err(Error::Incomparable);
        }
        let a = self.suffix_sums();
        let b = other.suffix_sums();
        Ok(a.iter().zip(&b).all(|(x, y)| y <= x))
    }

    /// The squeezing R^s_{ij}: parts i < j move s units towards each other.
    pub fn squeeze(&self, i: usize, j: usize, s: u32) -> Result<Partition> {
        let p = &self.0;
        let bad = || Error::Inadmissible {
            parts: p.clone(),
            i,
            j,
            s,
        };
        if s == 0 || i >= j || j >= p.len() {
            return Err(bad());
        }
        let gap = p[j] - p[i];
        if 2 * s > gap || p[i] >= p[i + 1] || p[j] <= p[j - 1] {
            return Err(bad());
        }
        let mut out = p.clone();
        out[i] += s;
        out[j] -= s;
        Ok(Partition::from_unsorted(out))
    }

    /// All results of admissible one-step squeezes R^1_{ij}.
    pub fn unit_squeezes(&self) -> Vec<Partition> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if let Ok(p) = self.squeeze(i, j, 1) {
                    out.push(p);
                }
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// A root (N, b) together with the Jastrow power q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    pub q: u32,
    pub n: usize,
    pub b: Partition,
}

impl Root {
    pub fn new(q: u32, n: usize, b: Partition) -> Result<Self> {
        if q == 0 {
            return Err(Error::Invalid("q must be positive".into()));
        }
        if n == 0 {
            return Err(Error::Invalid("n must be positive".into()));
        }
        if b.len() != n {
            return Err(Error::LengthMismatch {
                what: "b",
                expected: n,
                got: b.len(),
            });
        }
        Ok(Root { q, n, b })
    }

    pub fn laughlin(q: u32, n: usize) -> Self {
        Root::new(q, n, Partition::zeros(n)).expect("valid laughlin root")
    }

    pub fn partition(&self) -> Partition {
        root_partition(self)
    }

    pub fn is_fermionic(&self) -> bool {
        self.q % 2 == 1
    }

    /// Orbital of the j-th (0-based) root particle.
    pub fn orbital(&self, j: usize) -> u32 {
        self.q * j as u32 + self.b.parts()[j]
    }

    /// First orbital after the last block, q·N + b_N.
    pub fn span(&self) -> u32 {
        self.q * self.n as u32 + self.b.last()
    }

    /// The first `s` blocks and the remaining ones as roots of their own.
    pub fn split(&self, s: usize) -> Result<(Root, Root)> {
        if s == 0 || s >= self.n {
            return Err(Error::Invalid(format!("split {s} outside 1..{}", self.n)));
        }
        let b = self.b.parts();
        let left = Partition(b[..s].to_vec());
        let right = Partition(b[s..].iter().map(|&x| x - b[s - 1]).collect());
        Ok((
            Root::new(self.q, s, left)?,
            Root::new(self.q, self.n - s, right)?,
        ))
    }
}

pub fn root_partition(root: &Root) -> Partition {
    Partition((0..root.n).map(|j| root.orbital(j)).collect())
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// All λ with ℓ(λ) = N, |λ| = |root partition| and λ ⪯ root partition, in
/// lexicographic order.
pub fn enumerate_dominated(root: &Root) -> Vec<Partition> {
    enumerate_dominated_with(root, false, usize::MAX).expect("uncapped enumeration")
}

/// Like [`enumerate_dominated`], optionally dropping partitions with repeated
/// parts and failing once more than `cap` partitions were produced.
pub fn enumerate_dominated_with(
    root: &Root,
    distinct_only: bool,
    cap: usize,
) -> Result<Vec<Partition>> {
    let rp = root.partition();
    let n = rp.len();
    let limit = rp.suffix_sums();
    let total = limit[0];
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];

    struct Ctx<'a> {
        limit: &'a [u64],
        total: u64,
        distinct_only: bool,
        cap: usize,
    }

    // Fill cur[i], then descend to i-1; `suffix` is the sum of cur[i+1..].
    fn rec(
        ctx: &Ctx,
        i: usize,
        upper: u64,
        suffix: u64,
        cur: &mut Vec<u32>,
        out: &mut Vec<Partition>,
    ) -> Result<()> {
        let rest = ctx.total - suffix;
        if i == 0 {
            if rest <= upper && rest + suffix <= ctx.limit[0] {
                cur[0] = rest as u32;
                if out.len() >= ctx.cap {
                    return Err(Error::ResourceCap {
                        what: "dominated partitions",
                        limit: ctx.cap,
                    });
                }
                out.push(Partition(cur.clone()));
            }
            return Ok(());
        }
        let hi = upper.min(ctx.limit[i] - suffix).min(rest);
        let slots = i as u64 + 1;
        let lo = rest.div_ceil(slots);
        let mut v = lo;
        while v <= hi {
            cur[i] = v as u32;
            if !ctx.distinct_only {
                rec(ctx, i - 1, v, suffix + v, cur, out)?;
            } else if v > 0 {
                rec(ctx, i - 1, v - 1, suffix + v, cur, out)?;
            }
            v += 1;
        }
        Ok(())
    }

    if n == 0 {
        return Ok(vec![Partition(vec![])]);
    }
    let ctx = Ctx {
        limit: &limit,
        total,
        distinct_only,
        cap,
    };
    rec(&ctx, n - 1, u64::MAX, 0, &mut cur, &mut out)?;
    out.sort();
    Ok(out)
}

/// Closure of the root partition under admissible unit squeezes.
pub fn squeeze_closure(root: &Root) -> BTreeSet<Partition> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root.partition()];
    while let Some(p) = stack.pop() {
        if seen.insert(p.clone()) {
            stack.extend(p.unit_squeezes());
        }
    }
    seen
}

fn ensure_dominated(lambda: &Partition, root: &Root) -> Result<Partition> {
    let rp = root.partition();
    match rp.dominates(lambda) {
        Ok(true) => Ok(rp),
        _ => Err(Error::NotDominated(lambda.0.clone(), rp.0)),
    }
}

/// μ1 ∪ μ2: μ2 shifted by q·N₁ + b⁽¹⁾_{N₁} and appended to μ1.
pub fn concatenate(mu1: &Partition, root1: &Root, mu2: &Partition) -> Result<Partition> {
    ensure_dominated(mu1, root1)?;
    let shift = root1.span();
    let mut parts = mu1.0.clone();
    parts.extend(mu2.0.iter().map(|&p| p + shift));
    Ok(Partition(parts))
}

/// (b⁽¹⁾, b⁽²⁾): b2 shifted by the last entry of b1.
pub fn compose_b(b1: &Partition, b2: &Partition) -> Partition {
    let shift = b1.last();
    let mut parts = b1.0.clone();
    parts.extend(b2.0.iter().map(|&p| p + shift));
    Partition(parts)
}

pub fn compose_roots(r1: &Root, r2: &Root) -> Result<Root> {
    if r1.q != r2.q {
        return Err(Error::Invalid("roots with different q".into()));
    }
    Root::new(r1.q, r1.n + r2.n, compose_b(&r1.b, &r2.b))
}

/// Positions s ∈ 1..N at which the prefix sums of λ and the root partition agree.
pub fn renewal_points(lambda: &Partition, root: &Root) -> Result<Vec<usize>> {
    let rp = ensure_dominated(lambda, root)?;
    let mut out = Vec::new();
    let (mut a, mut b) = (0u64, 0u64);
    for s in 1..lambda.len() {
        a += lambda.0[s - 1] as u64;
        b += rp.0[s - 1] as u64;
        if a == b {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn is_irreducible(lambda: &Partition, root: &Root) -> Result<bool> {
    Ok(renewal_points(lambda, root)?.is_empty())
}

/// Split a dominated λ at a renewal point s into segment roots and partitions.
pub fn split_at(
    lambda: &Partition,
    root: &Root,
    s: usize,
) -> Result<((Root, Partition), (Root, Partition))> {
    if !renewal_points(lambda, root)?.contains(&s) {
        return Err(Error::Invalid(format!("{s} is not a renewal point of {lambda}")));
    }
    let (r1, r2) = root.split(s)?;
    let shift = r1.span();
    let mu1 = Partition(lambda.0[..s].to_vec());
    let mu2 = Partition(lambda.0[s..].iter().map(|&p| p - shift).collect());
    Ok(((r1, mu1), (r2, mu2)))
}

/// Split at every renewal point; each segment is irreducible w.r.t. its root.
pub fn irreducible_decomposition(lambda: &Partition, root: &Root) -> Result<Vec<(Root, Partition)>> {
    let points = renewal_points(lambda, root)?;
    let mut out = Vec::with_capacity(points.len() + 1);
    let mut cur_root = root.clone();
    let mut cur = lambda.clone();
    let mut consumed = 0;
    for s in points {
        let ((r1, m1), (r2, m2)) = split_at(&cur, &cur_root, s - consumed)?;
        out.push((r1, m1));
        cur_root = r2;
        cur = m2;
        consumed = s;
    }
    out.push((cur_root, cur));
    Ok(out)
}

/// Number of partitions p(n), by Euler's pentagonal recurrence.
pub fn partition_count(n: usize) -> u128 {
    let mut p = vec![0u128; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut acc: i128 = 0;
        for k in 1.. {
            let k = k as i64;
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += sign * p[m - g1] as i128;
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                acc += sign * p[m - g2] as i128;
            }
        }
        p[m] = acc as u128;
    }
    p[n]
}

/// All partitions of n (as weakly increasing part lists without zeros).
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition::from_unsorted(cur.clone()));
            return;
        }
        for k in (1..=rem.min(max)).rev() {
            cur.push(k);
            rec(rem - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}
