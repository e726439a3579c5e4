//! Orbital cuts: Schmidt spectra of Ψ_{b,N} and the entanglement-gap bound.
//!
//! Splitting Φ_λ at orbital x gives Φ_left ⊗ Φ_right with no sign (modes are
//! ordered lowest first), so the coefficient matrix is just h(λ) placed at
//! (left pattern, right pattern).  It is block diagonal in (particles,
//! momentum) of the left side.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{Partition, Root};
use crate::wavefunction::{
    build_expansion, c_constant, eigenvalue_bound, factorization_distance, Geometry, FactorizationReport,
    WavefunctionExpansion,
};

/// Singular values below this are counted, not listed.
pub const TAIL_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct SchmidtDecomposition {
    pub cut: u32,
    /// Descending Schmidt coefficients of the normalized state.
    pub values: Vec<f64>,
    /// −2 ln v for each listed value.
    pub entanglement_spectrum: Vec<f64>,
    pub tail_count: usize,
    pub sectors: usize,
}

impl SchmidtDecomposition {
    /// Largest eigenvalue of the reduced state.
    pub fn largest_eigenvalue(&self) -> f64 {
        self.values.first().map_or(0.0, |v| v * v)
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

fn split_at(lambda: &Partition, cut: u32) -> (Vec<u32>, Vec<u32>) {
    let k = lambda.parts().partition_point(|&p| p < cut);
    (lambda.parts()[..k].to_vec(), lambda.parts()[k..].to_vec())
}

type Sector = BTreeMap<Vec<u32>, BTreeMap<Vec<u32>, f64>>;

fn sectors(exp: &WavefunctionExpansion, cut: u32, transpose: bool) -> BTreeMap<(usize, u64), Sector> {
    let mut out: BTreeMap<(usize, u64), Sector> = BTreeMap::new();
    for t in &exp.terms {
        if t.h == 0.0 {
            continue;
        }
        let (l, r) = split_at(&t.lambda, cut);
        let (l, r) = if transpose { (r, l) } else { (l, r) };
        let key = (l.len(), l.iter().map(|&x| x as u64).sum());
        *out.entry(key).or_default().entry(l).or_default().entry(r).or_default() += t.h;
    }
    out
}

fn spectrum(exp: &WavefunctionExpansion, cut: u32, transpose: bool) -> Result<SchmidtDecomposition> {
    exp.geometry
        .gamma()
        .ok_or_else(|| Error::Precondition("cylinder geometry required".into()))?;
    let max = exp.terms.iter().map(|t| t.lambda.last()).max().unwrap_or(0);
    if cut > max + 1 {
        return Err(Error::Invalid(format!("cut {cut} beyond orbital {}", max + 1)));
    }
    let norm = exp.terms.iter().map(|t| t.h * t.h).sum::<f64>().sqrt();
    let blocks: Vec<Sector> = sectors(exp, cut, transpose).into_values().collect();
    let n_sectors = blocks.len();
    let mut all: Vec<f64> = blocks
        .par_iter()
        .flat_map_iter(|block| {
            let cols: BTreeMap<&Vec<u32>, usize> = {
                let mut m = BTreeMap::new();
                for row in block.values() {
                    for r in row.keys() {
                        let n = m.len();
                        m.entry(r).or_insert(n);
                    }
                }
                m
            };
            let mut a = DMatrix::<f64>::zeros(block.len(), cols.len());
            for (i, row) in block.values().enumerate() {
                for (r, v) in row {
                    a[(i, cols[r])] = v / norm;
                }
            }
            a.singular_values().iter().copied().collect::<Vec<_>>()
        })
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    let tail_count = all.iter().filter(|&&v| v < TAIL_THRESHOLD).count();
    all.retain(|&v| v >= TAIL_THRESHOLD);
    Ok(SchmidtDecomposition {
        cut,
        entanglement_spectrum: all.iter().map(|v| -2.0 * v.ln()).collect(),
        values: all,
        tail_count,
        sectors: n_sectors,
    })
}

/// Schmidt coefficients across the cut "orbitals < cut | orbitals ≥ cut".
pub fn schmidt_spectrum(exp: &WavefunctionExpansion, cut: u32) -> Result<SchmidtDecomposition> {
    spectrum(exp, cut, false)
}

/// Same decomposition with the roles of the two sides exchanged.
pub fn schmidt_spectrum_transposed(exp: &WavefunctionExpansion, cut: u32) -> Result<SchmidtDecomposition> {
    spectrum(exp, cut, true)
}

/// The particle split N₁ whose root blocks meet at `cut`, if any.
pub fn block_split(root: &Root, cut: u32) -> Option<usize> {
    (1..root.n).find(|&s| root.split(s).map(|(l, _)| l.span() == cut).unwrap_or(false))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub cut: u32,
    pub split: usize,
    pub gamma: f64,
    pub c_constant: f64,
    pub largest_eigenvalue: f64,
    pub gap_bound: f64,
    pub spectrum: SchmidtDecomposition,
    pub factorization: FactorizationReport,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.largest_eigenvalue >= self.gap_bound && self.factorization.distance <= self.factorization.bound
    }
}

/// Largest reduced eigenvalue against 1 − 4√2/√(e^{C_q(γ)q} − 1) at a root-block boundary.
pub fn entanglement_gap_check(root: &Root, gamma: f64, cut: u32) -> Result<GapReport> {
    let c = c_constant(root.q, gamma);
    if c <= 0.0 {
        return Err(Error::Precondition(format!("C_q(gamma) = {c} <= 0")));
    }
    let split = block_split(root, cut).ok_or_else(|| {
        Error::Precondition(format!("cut {cut} is not a boundary between root blocks"))
    })?;
    let geo = Geometry::cylinder(gamma)?;
    let exp = build_expansion(root, &geo)?;
    let spectrum = schmidt_spectrum(&exp, cut)?;
    Ok(GapReport {
        cut,
        split,
        gamma,
        c_constant: c,
        largest_eigenvalue: spectrum.largest_eigenvalue(),
        gap_bound: eigenvalue_bound(root.q, gamma),
        spectrum,
        factorization: factorization_distance(root, split, &geo)?,
    })
}
