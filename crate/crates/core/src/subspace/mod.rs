//! Projection of the Hamiltonian onto a configuration subspace and its
//! ground-state solve.
//!
//! The subspace is the Cartesian product of a sorted list of alpha strings
//! and a sorted list of beta strings; determinant (ia, ib) sits at index
//! ia·n_beta_strings + ib. Because the Hamiltonian is a sum of
//! spin-separable terms, the product structure lets every projected
//! operator be applied exactly from per-spin link tables, without ever
//! forming the matrix.

mod davidson;
mod rdm;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinant::{all_strings, apply_excitation, occupied, same_spin_element, Determinant, SpinString};
use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;

pub use davidson::{davidson, DavidsonOptions, DavidsonResult, DenseOperator, LinearOperator};

/// Determinants spanned by every pairing of the retained alpha and beta strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    n_orb: usize,
    n_alpha: usize,
    n_beta: usize,
    alpha: Vec<SpinString>,
    beta: Vec<SpinString>,
}

impl SubspaceBasis {
    /// Sorts and deduplicates the string lists and checks their Hamming weights.
    pub fn new(
        n_orb: usize,
        n_alpha: usize,
        n_beta: usize,
        alpha: impl IntoIterator<Item = SpinString>,
        beta: impl IntoIterator<Item = SpinString>,
    ) -> Result<Self> {
        if n_orb == 0 || n_orb > 64 {
            return Err(SqdError::InvalidInput(format!("unsupported orbital count {n_orb}")));
        }
        let check = |strings: BTreeSet<SpinString>, n: usize, label: &str| -> Result<Vec<SpinString>> {
            if strings.is_empty() {
                return Err(SqdError::EmptyPool(format!("no {label} strings")));
            }
            for &s in &strings {
                if s.count_ones() as usize != n || (n_orb < 64 && s >> n_orb != 0) {
                    return Err(SqdError::SectorMismatch(format!(
                        "{label} string {s:#b} does not have {n} electrons in {n_orb} orbitals"
                    )));
                }
            }
            Ok(strings.into_iter().collect())
        };
        Ok(Self {
            n_orb,
            n_alpha,
            n_beta,
            alpha: check(alpha.into_iter().collect(), n_alpha, "alpha")?,
            beta: check(beta.into_iter().collect(), n_beta, "beta")?,
        })
    }

    /// Every determinant of the sector.
    pub fn full(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        Self::new(
            n_orb,
            n_alpha,
            n_beta,
            all_strings(n_orb, n_alpha),
            all_strings(n_orb, n_beta),
        )
    }

    /// The product span of the alpha and beta halves of the given determinants.
    pub fn from_determinants<'a>(
        n_orb: usize,
        n_alpha: usize,
        n_beta: usize,
        dets: impl IntoIterator<Item = &'a Determinant>,
    ) -> Result<Self> {
        let (a, b): (Vec<_>, Vec<_>) = dets.into_iter().map(|d| (d.alpha, d.beta)).unzip();
        Self::new(n_orb, n_alpha, n_beta, a, b)
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn alpha_strings(&self) -> &[SpinString] {
        &self.alpha
    }

    pub fn beta_strings(&self) -> &[SpinString] {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn determinant(&self, index: usize) -> Determinant {
        let nb = self.beta.len();
        Determinant::new(self.alpha[index / nb], self.beta[index % nb])
    }

    pub fn index_of(&self, det: &Determinant) -> Option<usize> {
        let ia = self.alpha.binary_search(&det.alpha).ok()?;
        let ib = self.beta.binary_search(&det.beta).ok()?;
        Some(ia * self.beta.len() + ib)
    }

    pub fn determinants(&self) -> impl Iterator<Item = Determinant> + '_ {
        self.alpha
            .iter()
            .flat_map(move |&a| self.beta.iter().map(move |&b| Determinant::new(a, b)))
    }
}

/// a†_cre a_ann |source⟩ = sign |target⟩, stored in the target's list.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Link {
    pub source: u32,
    pub cre: u8,
    pub ann: u8,
    pub sign: f64,
}

/// For every string in the list, all one-body excitations landing on it
/// from another (or the same) listed string.
pub(crate) fn build_links(strings: &[SpinString], n_orb: usize) -> Vec<Vec<Link>> {
    let mut links: Vec<Vec<Link>> = vec![Vec::new(); strings.len()];
    for (j, &s) in strings.iter().enumerate() {
        for ann in occupied(s) {
            for cre in 0..n_orb {
                if let Some((t, sign)) = apply_excitation(s, cre, ann) {
                    if let Ok(i) = strings.binary_search(&t) {
                        links[i].push(Link {
                            source: j as u32,
                            cre: cre as u8,
                            ann: ann as u8,
                            sign,
                        });
                    }
                }
            }
        }
    }
    links
}

/// Sparse rows of the same-spin Hamiltonian block between listed strings.
fn build_same_spin(ham: &MolecularHamiltonian, strings: &[SpinString]) -> Vec<Vec<(u32, f64)>> {
    strings
        .par_iter()
        .map(|&bra| {
            strings
                .iter()
                .enumerate()
                .filter(|(_, &ket)| (bra ^ ket).count_ones() <= 4)
                .filter_map(|(j, &ket)| {
                    let v = same_spin_element(ham, bra, ket);
                    (v != 0.0).then_some((j as u32, v))
                })
                .collect()
        })
        .collect()
}

/// Subspace-projected Ĥ and Ŝ² with their precomputed link tables.
pub struct ProjectedOperators<'a> {
    ham: &'a MolecularHamiltonian,
    basis: &'a SubspaceBasis,
    links_a: Vec<Vec<Link>>,
    links_b: Vec<Vec<Link>>,
    same_a: Vec<Vec<(u32, f64)>>,
    same_b: Vec<Vec<(u32, f64)>>,
    diag_h: Vec<f64>,
    diag_s2: Vec<f64>,
}

impl<'a> ProjectedOperators<'a> {
    pub fn new(ham: &'a MolecularHamiltonian, basis: &'a SubspaceBasis) -> Result<Self> {
        if ham.n_orb != basis.n_orb {
            return Err(SqdError::DimensionMismatch {
                expected: ham.n_orb,
                found: basis.n_orb,
            });
        }
        let n = basis.n_orb;
        let links_a = build_links(&basis.alpha, n);
        let links_b = build_links(&basis.beta, n);
        let same_a = build_same_spin(ham, &basis.alpha);
        let same_b = build_same_spin(ham, &basis.beta);
        let diag_of = |rows: &Vec<Vec<(u32, f64)>>| -> Vec<f64> {
            rows.iter()
                .enumerate()
                .map(|(i, row)| row.iter().find(|(j, _)| *j as usize == i).map_or(0.0, |e| e.1))
                .collect()
        };
        let da = diag_of(&same_a);
        let db = diag_of(&same_b);
        let occ_b: Vec<Vec<usize>> = basis.beta.iter().map(|&b| occupied(b).collect()).collect();
        let sz = 0.5 * (basis.n_alpha as f64 - basis.n_beta as f64);
        let mut diag_h = Vec::with_capacity(basis.dim());
        let mut diag_s2 = Vec::with_capacity(basis.dim());
        for (ia, &a) in basis.alpha.iter().enumerate() {
            let occ_a: Vec<usize> = occupied(a).collect();
            for (ib, &b) in basis.beta.iter().enumerate() {
                let mut coulomb = 0.0;
                for &p in &occ_a {
                    for &q in &occ_b[ib] {
                        coulomb += ham.eri(p, p, q, q);
                    }
                }
                diag_h.push(ham.core_energy + da[ia] + db[ib] + coulomb);
                diag_s2.push(sz * sz + sz + (b & !a).count_ones() as f64);
            }
        }
        Ok(Self {
            ham,
            basis,
            links_a,
            links_b,
            same_a,
            same_b,
            diag_h,
            diag_s2,
        })
    }

    pub fn basis(&self) -> &SubspaceBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn diagonal_h(&self) -> &[f64] {
        &self.diag_h
    }

    pub fn diagonal_s2(&self) -> &[f64] {
        &self.diag_s2
    }

    /// σ = P Ĥ P v.
    pub fn apply_h(&self, v: &[f64], out: &mut [f64]) {
        let nb = self.basis.beta.len();
        let n = self.basis.n_orb;
        let eri = self.ham.eri_slice();
        let core = self.ham.core_energy;
        out.par_chunks_mut(nb).enumerate().for_each(|(ia, row)| {
            for (ib, o) in row.iter_mut().enumerate() {
                let mut acc = core * v[ia * nb + ib];
                for &(jb, h) in &self.same_b[ib] {
                    acc += h * v[ia * nb + jb as usize];
                }
                *o = acc;
            }
            for &(ja, h) in &self.same_a[ia] {
                let src = &v[ja as usize * nb..(ja as usize + 1) * nb];
                for (o, x) in row.iter_mut().zip(src) {
                    *o += h * x;
                }
            }
            for la in &self.links_a[ia] {
                let src = &v[la.source as usize * nb..(la.source as usize + 1) * nb];
                let block = &eri[(la.cre as usize * n + la.ann as usize) * n * n..][..n * n];
                for (ib, o) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for lb in &self.links_b[ib] {
                        acc += block[lb.cre as usize * n + lb.ann as usize] * lb.sign * src[lb.source as usize];
                    }
                    *o += la.sign * acc;
                }
            }
        });
    }

    /// P Ŝ² P v, using Ŝ₋Ŝ₊ = Σ_p n_pβ − Σ_pq E^α_qp E^β_pq.
    pub fn apply_s2(&self, v: &[f64], out: &mut [f64]) {
        let nb = self.basis.beta.len();
        out.par_chunks_mut(nb).enumerate().for_each(|(ia, row)| {
            for (ib, o) in row.iter_mut().enumerate() {
                *o = self.diag_s2[ia * nb + ib] * v[ia * nb + ib];
            }
            for la in &self.links_a[ia] {
                if la.cre == la.ann {
                    continue;
                }
                let src = &v[la.source as usize * nb..(la.source as usize + 1) * nb];
                for (ib, o) in row.iter_mut().enumerate() {
                    for lb in &self.links_b[ib] {
                        if lb.cre == la.ann && lb.ann == la.cre {
                            *o -= la.sign * lb.sign * src[lb.source as usize];
                        }
                    }
                }
            }
        });
    }

    pub fn energy(&self, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.apply_h(v, &mut hv);
        dot(v, &hv) / dot(v, v)
    }

    pub fn s2_expectation(&self, v: &[f64]) -> f64 {
        let mut sv = vec![0.0; v.len()];
        self.apply_s2(v, &mut sv);
        dot(v, &sv) / dot(v, v)
    }
}

/// Ĥ + λ(Ŝ² − s(s+1)) restricted to the subspace.
pub struct PenalizedOperator<'o, 'a> {
    pub ops: &'o ProjectedOperators<'a>,
    pub lambda: f64,
    pub target: f64,
}

impl LinearOperator for PenalizedOperator<'_, '_> {
    fn dim(&self) -> usize {
        self.ops.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.ops.apply_h(x, y);
        if self.lambda != 0.0 {
            let mut s = vec![0.0; x.len()];
            self.ops.apply_s2(x, &mut s);
            let shift = self.target * (self.target + 1.0);
            for ((yi, si), xi) in y.iter_mut().zip(&s).zip(x) {
                *yi += self.lambda * (si - shift * xi);
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let shift = self.target * (self.target + 1.0);
        self.ops
            .diag_h
            .iter()
            .zip(&self.ops.diag_s2)
            .map(|(h, s)| h + self.lambda * (s - shift))
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Settings for the spin-penalized subspace solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Spin-penalty weight λ (Hartree).
    pub lambda: f64,
    /// Residual-norm convergence threshold.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_subspace_vectors: usize,
    /// Largest subspace dimension accepted before the resource guard trips.
    pub max_dimension: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.2,
            tol: 1e-8,
            max_iterations: 500,
            max_subspace_vectors: 20,
            max_dimension: 20_000_000,
        }
    }
}

impl SolverConfig {
    fn davidson_options(&self) -> DavidsonOptions {
        DavidsonOptions {
            tol: self.tol,
            max_iterations: self.max_iterations,
            max_subspace_vectors: self.max_subspace_vectors,
            track_second_root: true,
            ..DavidsonOptions::default()
        }
    }
}

/// Ground state of the penalized operator in a subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceState {
    pub basis: SubspaceBasis,
    /// Coefficients in basis order.
    pub vector: Vec<f64>,
    /// ⟨ψ|Ĥ|ψ⟩, penalty excluded.
    pub energy: f64,
    /// Lowest eigenvalue of the penalized operator.
    pub penalized_eigenvalue: f64,
    pub s2: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl SubspaceState {
    /// Weight of the determinant in the state, or zero if absent.
    pub fn coefficient(&self, det: &Determinant) -> f64 {
        self.basis.index_of(det).map_or(0.0, |i| self.vector[i])
    }

    /// The `k` determinants with the largest |coefficient|.
    pub fn leading(&self, k: usize) -> Vec<(Determinant, f64)> {
        let mut idx: Vec<usize> = (0..self.vector.len()).collect();
        idx.sort_by(|&a, &b| self.vector[b].abs().total_cmp(&self.vector[a].abs()).then(a.cmp(&b)));
        idx.into_iter()
            .take(k)
            .map(|i| (self.basis.determinant(i), self.vector[i]))
            .collect()
    }

    pub fn rdm1(&self, ham: &MolecularHamiltonian) -> Result<ndarray::Array2<f64>> {
        let ops = ProjectedOperators::new(ham, &self.basis)?;
        Ok(ops.rdm1(&self.vector))
    }
}

/// Lowest state of Ĥ + λ(Ŝ² − s(s+1)) within `basis`.
///
/// `warm_start`, when its length matches the basis, seeds the eigensolver.
pub fn solve_subspace(
    ham: &MolecularHamiltonian,
    basis: &SubspaceBasis,
    target_spin: f64,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<SubspaceState> {
    if basis.dim() > config.max_dimension {
        return Err(SqdError::ResourceGuard {
            dimension: basis.dim(),
            limit: config.max_dimension,
        });
    }
    if basis.n_alpha != ham.n_alpha || basis.n_beta != ham.n_beta {
        return Err(SqdError::SectorMismatch(format!(
            "basis holds ({}, {}) electrons, Hamiltonian ({}, {})",
            basis.n_alpha, basis.n_beta, ham.n_alpha, ham.n_beta
        )));
    }
    let ops = ProjectedOperators::new(ham, basis)?;
    let op = PenalizedOperator {
        ops: &ops,
        lambda: config.lambda,
        target: target_spin,
    };
    let guess = warm_start.filter(|w| w.len() == basis.dim() && dot(w, w) > 0.0);
    let res = davidson(&op, guess, &config.davidson_options());
    let energy = ops.energy(&res.eigenvector);
    let s2 = ops.s2_expectation(&res.eigenvector);
    Ok(SubspaceState {
        basis: basis.clone(),
        vector: res.eigenvector,
        energy,
        penalized_eigenvalue: res.eigenvalue,
        s2,
        converged: res.converged,
        degenerate: res.degenerate,
        iterations: res.iterations,
        residual: res.residual,
    })
}
