//! Graded sparse kernel for D±, W and the modes in the basis f_s = √q^{ℓ(s)}|s⟩.
//!
//! In this basis
//!   D⁻_j f_s = Σ_{d ⊢ j} (1/z_d) f_{s+d},
//!   D⁺_j f_s = Σ_{d ⊆ s, |d| = j} (−q)^{ℓ(d)} ∏ C(n_i, d_i) f_{s−d},
//!   a_n = √q·A_n with A_n f_s = n·n_n f_{s−e_n},   a*_n = A*_n/√q with A*_n f_s = f_{s+e_n},
//! so every entry is rational.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::fock::{basis_of_momentum, ModeState};
use crate::partitions::partitions_of;

use super::field::Field;

/// Largest momentum grade the kernel will build a basis for.
pub const MAX_GRADE: usize = 48;

pub struct Basis {
    pub states: Vec<ModeState>,
    pub index: HashMap<ModeState, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Op {
    DMinus,
    DPlus,
    Lower,
    Raise,
}

/// Column-major sparse block: `cols[s]` lists (row, coefficient).
struct Block<F> {
    cols: Vec<Vec<(u32, F)>>,
}

/// A vector living in a single grade ℋ(M).
#[derive(Clone, Debug, PartialEq)]
pub struct GVec<F> {
    pub grade: usize,
    pub data: Vec<F>,
}

impl<F: Field> GVec<F> {
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn sub(&self, o: &GVec<F>) -> GVec<F> {
        debug_assert_eq!(self.grade, o.grade);
        GVec {
            grade: self.grade,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn add_assign(&mut self, o: &GVec<F>) {
        debug_assert_eq!(self.grade, o.grade);
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a = a.add(b);
        }
    }

    pub fn scale(&self, c: &F) -> GVec<F> {
        GVec {
            grade: self.grade,
            data: self.data.iter().map(|a| a.mul(c)).collect(),
        }
    }
}

/// Zero-aware sum of optional grade vectors (None is the zero vector).
pub fn opt_add<F: Field>(a: Option<GVec<F>>, b: Option<GVec<F>>) -> Option<GVec<F>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut x), Some(y)) => {
            x.add_assign(&y);
            Some(x)
        }
    }
}

pub fn opt_sub<F: Field>(a: Option<GVec<F>>, b: Option<GVec<F>>) -> Option<GVec<F>> {
    opt_add(a, b.map(|v| v.scale(&F::from_int(-1))))
}

pub fn opt_is_zero<F: Field>(a: &Option<GVec<F>>) -> bool {
    a.as_ref().is_none_or(|v| v.is_zero())
}

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

fn binom(n: u32, k: u32) -> i128 {
    let mut r: i128 = 1;
    for i in 0..k as i128 {
        r = r * (n as i128 - i) / (i + 1);
    }
    r
}

/// z_d = ∏ j^{d_j} d_j!
fn z_of(counts: &[u32]) -> i128 {
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as i128 + 1).pow(c) * factorial(c))
        .product()
}

/// All sub-multisets of `counts` with momentum exactly `target`.
fn sub_multisets(counts: &[u32], target: u64) -> Vec<Vec<u32>> {
    fn rec(counts: &[u32], i: usize, rem: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        if i == counts.len() {
            return;
        }
        let j = i as u64 + 1;
        let max = (counts[i] as u64).min(rem / j);
        for c in 0..=max {
            cur[i] = c as u32;
            rec(counts, i + 1, rem - c * j, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(counts, 0, target, &mut vec![0; counts.len()], &mut out);
    out
}

pub struct Graded<F> {
    pub q: u32,
    bases: Vec<OnceLock<Arc<Basis>>>,
    blocks: RwLock<HashMap<(Op, usize, usize), Arc<Block<F>>>>,
    w_blocks: RwLock<HashMap<(i64, usize), Arc<Block<F>>>>,
}

impl<F: Field> Graded<F> {
    pub fn new(q: u32) -> Self {
        Graded {
            q,
            bases: (0..=MAX_GRADE).map(|_| OnceLock::new()).collect(),
            blocks: RwLock::new(HashMap::new()),
            w_blocks: RwLock::new(HashMap::new()),
        }
    }

    pub fn basis(&self, grade: usize) -> Arc<Basis> {
        assert!(grade <= MAX_GRADE, "momentum grade {grade} above kernel limit");
        self.bases[grade]
            .get_or_init(|| {
                let states = basis_of_momentum(grade as i64);
                let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
                Arc::new(Basis { states, index })
            })
            .clone()
    }

    pub fn dim(&self, grade: usize) -> usize {
        self.basis(grade).states.len()
    }

    pub fn zeros(&self, grade: usize) -> GVec<F> {
        GVec {
            grade,
            data: vec![F::zero(); self.dim(grade)],
        }
    }

    pub fn unit(&self, grade: usize, idx: usize) -> GVec<F> {
        let mut v = self.zeros(grade);
        v.data[idx] = F::one();
        v
    }

    pub fn vacuum(&self) -> GVec<F> {
        self.unit(0, 0)
    }

    fn block(&self, op: Op, grade: usize, j: usize) -> Arc<Block<F>> {
        let key = (op, grade, j);
        if let Some(b) = self.blocks.read().unwrap().get(&key) {
            return b.clone();
        }
        let built = Arc::new(self.build(op, grade, j));
        self.blocks.write().unwrap().entry(key).or_insert(built).clone()
    }

    fn target(op: Op, grade: usize, j: usize) -> Option<usize> {
        match op {
            Op::DMinus | Op::Raise => Some(grade + j),
            Op::DPlus | Op::Lower => grade.checked_sub(j),
        }
    }

    fn build(&self, op: Op, grade: usize, j: usize) -> Block<F> {
        let src = self.basis(grade);
        let dst = self.basis(Self::target(op, grade, j).expect("valid target grade"));
        let q = self.q as i128;
        let mut cols = Vec::with_capacity(src.states.len());
        match op {
            Op::DMinus => {
                let ds: Vec<Vec<u32>> = partitions_of(j as u32)
                    .into_iter()
                    .map(|p| ModeState::from_modes(p.parts()).counts().to_vec())
                    .collect();
                for s in &src.states {
                    let mut col = Vec::with_capacity(ds.len());
                    for d in ds.iter() {
                        let mut c = s.counts().to_vec();
                        if c.len() < d.len() {
                            c.resize(d.len(), 0);
                        }
                        for (x, y) in c.iter_mut().zip(d) {
                            *x += y;
                        }
                        let t = dst.index[&ModeState::from_counts(c)];
                        col.push((t as u32, F::from_ratio(1, z_of(d))));
                    }
                    cols.push(col);
                }
            }
            Op::DPlus => {
                for s in &src.states {
                    let mut col = Vec::new();
                    for d in sub_multisets(s.counts(), j as u64) {
                        let len: u32 = d.iter().sum();
                        let mut coef = (-q).pow(len);
                        let mut rest = s.counts().to_vec();
                        for (i, &di) in d.iter().enumerate() {
                            coef *= binom(rest[i], di);
                            rest[i] -= di;
                        }
                        let t = dst.index[&ModeState::from_counts(rest)];
                        col.push((t as u32, F::from_int(coef)));
                    }
                    cols.push(col);
                }
            }
            Op::Lower => {
                for s in &src.states {
                    let n = s.count(j as u32);
                    let col = match s.lowered(j as u32) {
                        Some(t) => vec![(dst.index[&t] as u32, F::from_int(j as i128 * n as i128))],
                        None => vec![],
                    };
                    cols.push(col);
                }
            }
            Op::Raise => {
                for s in &src.states {
                    cols.push(vec![(dst.index[&s.raised(j as u32)] as u32, F::one())]);
                }
            }
        }
        Block { cols }
    }

    fn apply_block(&self, op: Op, j: usize, v: &GVec<F>) -> Option<GVec<F>> {
        let tgt = Self::target(op, v.grade, j)?;
        if tgt > MAX_GRADE {
            panic!("momentum grade {tgt} above kernel limit");
        }
        let blk = self.block(op, v.grade, j);
        Some(self.mat_vec(&blk, tgt, v))
    }

    fn mat_vec(&self, blk: &Block<F>, tgt: usize, v: &GVec<F>) -> GVec<F> {
        let mut out = self.zeros(tgt);
        for (x, col) in v.data.iter().zip(&blk.cols) {
            if x.is_zero() {
                continue;
            }
            for (row, c) in col {
                out.data[*row as usize].add_mul(c, x);
            }
        }
        out
    }

    pub fn d_minus(&self, l: i64, v: &GVec<F>) -> Option<GVec<F>> {
        match l {
            l if l < 0 => None,
            0 => Some(v.clone()),
            l => self.apply_block(Op::DMinus, l as usize, v),
        }
    }

    pub fn d_plus(&self, l: i64, v: &GVec<F>) -> Option<GVec<F>> {
        match l {
            l if l < 0 => None,
            0 => Some(v.clone()),
            l => self.apply_block(Op::DPlus, l as usize, v),
        }
    }

    /// Scaled annihilator A_n = a_n/√q.
    pub fn lower(&self, n: usize, v: &GVec<F>) -> Option<GVec<F>> {
        self.apply_block(Op::Lower, n, v)
    }

    /// Scaled creator A*_n = √q·a*_n.
    pub fn raise(&self, n: usize, v: &GVec<F>) -> Option<GVec<F>> {
        self.apply_block(Op::Raise, n, v)
    }

    /// W_m on ℋ(M), through a cached block matrix.
    pub fn w(&self, m: i64, v: &GVec<F>) -> Option<GVec<F>> {
        let tgt = v.grade as i64 + m;
        if tgt < 0 {
            return None;
        }
        let key = (m, v.grade);
        let cached = self.w_blocks.read().unwrap().get(&key).cloned();
        let blk = match cached {
            Some(b) => b,
            None => {
                let cols = (0..self.dim(v.grade))
                    .map(|i| {
                        let col = self.w_direct(m, &self.unit(v.grade, i)).unwrap();
                        col.data
                            .into_iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .map(|(r, c)| (r as u32, c))
                            .collect()
                    })
                    .collect();
                let built = Arc::new(Block { cols });
                self.w_blocks.write().unwrap().entry(key).or_insert(built).clone()
            }
        };
        Some(self.mat_vec(&blk, tgt as usize, v))
    }

    /// W_m = Σ_{ℓ=0..M} D⁻_{m+ℓ} D⁺_ℓ on ℋ(M), summed term by term.
    pub fn w_direct(&self, m: i64, v: &GVec<F>) -> Option<GVec<F>> {
        let g = v.grade as i64;
        if g + m < 0 {
            return None;
        }
        let mut out = self.zeros((g + m) as usize);
        for l in 0..=g {
            if m + l < 0 {
                continue;
            }
            let Some(u) = self.d_plus(l, v) else { continue };
            if u.is_zero() {
                continue;
            }
            if let Some(x) = self.d_minus(m + l, &u) {
                out.add_assign(&x);
            }
        }
        Some(out)
    }

    pub fn w_opt(&self, m: i64, v: &Option<GVec<F>>) -> Option<GVec<F>> {
        v.as_ref().and_then(|v| self.w(m, v))
    }

    pub fn d_minus_opt(&self, l: i64, v: &Option<GVec<F>>) -> Option<GVec<F>> {
        v.as_ref().and_then(|v| self.d_minus(l, v))
    }

    pub fn d_plus_opt(&self, l: i64, v: &Option<GVec<F>>) -> Option<GVec<F>> {
        v.as_ref().and_then(|v| self.d_plus(l, v))
    }

    pub fn lower_opt(&self, n: usize, v: &Option<GVec<F>>) -> Option<GVec<F>> {
        v.as_ref().and_then(|v| self.lower(n, v))
    }
}
