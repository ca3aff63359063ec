//! Exact references: full CI over a sector and dense diagonalization.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::determinant::slater_condon_element;
use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;
use crate::linalg::{asymmetry, symmetric_eigen};
use crate::subspace::{solve_subspace, SolverConfig, SubspaceBasis, SubspaceState};

/// Largest sector dimension the exact solver accepts.
pub const FCI_DIMENSION_LIMIT: usize = 10_000_000;
/// Largest matrix `dense_diagonalize` accepts.
pub const DENSE_DIMENSION_LIMIT: usize = 2000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub energy: f64,
    pub state: SubspaceState,
    pub s2: f64,
}

/// Full spectrum of a real symmetric matrix, ascending, vectors as columns.
pub fn dense_diagonalize(matrix: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    if matrix.nrows() != matrix.ncols() {
        return Err(SqdError::DimensionMismatch {
            expected: matrix.nrows(),
            found: matrix.ncols(),
        });
    }
    if matrix.nrows() > DENSE_DIMENSION_LIMIT {
        return Err(SqdError::ResourceGuard {
            dimension: matrix.nrows(),
            limit: DENSE_DIMENSION_LIMIT,
        });
    }
    let asym = asymmetry(matrix);
    if asym > 1e-10 {
        return Err(SqdError::NotSymmetric(asym));
    }
    Ok(symmetric_eigen(matrix))
}

/// Explicit Hamiltonian matrix over a basis, from the Slater–Condon rules.
pub fn assemble_matrix(ham: &MolecularHamiltonian, basis: &SubspaceBasis) -> Result<Array2<f64>> {
    let dets: Vec<_> = basis.determinants().collect();
    let mut m = Array2::zeros((dets.len(), dets.len()));
    for i in 0..dets.len() {
        for j in 0..=i {
            let v = slater_condon_element(ham, &dets[i], &dets[j])?;
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    Ok(m)
}

fn oracle_config(lambda: f64) -> SolverConfig {
    SolverConfig {
        lambda,
        tol: 1e-10,
        max_iterations: 2000,
        max_dimension: FCI_DIMENSION_LIMIT,
        ..SolverConfig::default()
    }
}

/// Lowest eigenpair of Ĥ over every determinant of the sector.
pub fn fci_ground_state(ham: &MolecularHamiltonian, n_alpha: usize, n_beta: usize) -> Result<OracleResult> {
    let ham = ham.with_sector(n_alpha, n_beta)?;
    let basis = full_basis(&ham)?;
    let state = solve_subspace(&ham, &basis, 0.0, &oracle_config(0.0), None)?;
    finish(state)
}

/// Lowest state of total spin `spin` in the sector, found by adding
/// λ(Ŝ² − s(s+1)) with a penalty large enough to lift every higher spin.
/// States of spin below |S_z| do not exist in the sector, so the penalty is
/// nonnegative on every competitor when `spin` = |S_z|.
pub fn fci_spin_state(
    ham: &MolecularHamiltonian,
    n_alpha: usize,
    n_beta: usize,
    spin: f64,
    lambda: f64,
) -> Result<OracleResult> {
    let sz = 0.5 * (n_alpha as f64 - n_beta as f64);
    if spin + 1e-12 < sz.abs() {
        return Err(SqdError::InvalidInput(format!(
            "spin {spin} is below |S_z| = {} for the sector",
            sz.abs()
        )));
    }
    let ham = ham.with_sector(n_alpha, n_beta)?;
    let basis = full_basis(&ham)?;
    let state = solve_subspace(&ham, &basis, spin, &oracle_config(lambda), None)?;
    finish(state)
}

fn full_basis(ham: &MolecularHamiltonian) -> Result<SubspaceBasis> {
    let dim = binomial(ham.n_orb, ham.n_alpha).saturating_mul(binomial(ham.n_orb, ham.n_beta));
    if dim > FCI_DIMENSION_LIMIT {
        return Err(SqdError::ResourceGuard {
            dimension: dim,
            limit: FCI_DIMENSION_LIMIT,
        });
    }
    SubspaceBasis::full(ham.n_orb, ham.n_alpha, ham.n_beta)
}

fn finish(state: SubspaceState) -> Result<OracleResult> {
    if !state.converged {
        return Err(SqdError::NotConverged {
            iterations: state.iterations,
            residual: state.residual,
        });
    }
    Ok(OracleResult {
        energy: state.energy,
        s2: state.s2,
        state,
    })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}
