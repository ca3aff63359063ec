//! Dense second-quantized operators on the full Fock space of 2n modes.
//!
//! Mode k < n is alpha orbital k, mode n + k is beta orbital k. A basis state
//! is a bit mask over modes, built as Π_k a†_k |0⟩ in ascending k. Nothing
//! here shares code with the Slater–Condon or string-link paths.

use ndarray::{Array1, Array2};

use crate::determinant::Determinant;
use crate::integrals::MolecularHamiltonian;

pub struct FockOperators {
    pub n_orb: usize,
    pub dim: usize,
}

/// One ladder operator: (is_creation, mode).
pub type Ladder = (bool, usize);

impl FockOperators {
    pub fn new(n_orb: usize) -> Self {
        assert!(2 * n_orb <= 16);
        Self { n_orb, dim: 1 << (2 * n_orb) }
    }

    pub fn index_of(&self, d: &Determinant) -> usize {
        (d.alpha | d.beta << self.n_orb) as usize
    }

    pub fn determinant_of(&self, index: usize) -> Determinant {
        let mask = (1u64 << self.n_orb) - 1;
        Determinant::new(index as u64 & mask, (index as u64 >> self.n_orb) & mask)
    }

    /// Apply a product of ladder operators, rightmost first.
    pub fn apply(&self, ops: &[Ladder], state: usize) -> Option<(usize, f64)> {
        let mut s = state;
        let mut sign = 1.0;
        for &(create, k) in ops.iter().rev() {
            let bit = 1usize << k;
            let occupied = s & bit != 0;
            if create == occupied {
                return None;
            }
            if (s & (bit - 1)).count_ones() % 2 == 1 {
                sign = -sign;
            }
            s ^= bit;
        }
        Some((s, sign))
    }

    /// Dense matrix of a weighted sum of ladder products.
    pub fn matrix(&self, terms: &[(f64, Vec<Ladder>)]) -> Array2<f64> {
        let mut m = Array2::<f64>::zeros((self.dim, self.dim));
        for state in 0..self.dim {
            for (coef, ops) in terms {
                if let Some((out, sign)) = self.apply(ops, state) {
                    m[[out, state]] += coef * sign;
                }
            }
        }
        m
    }

    pub fn alpha(&self, p: usize) -> usize {
        p
    }

    pub fn beta(&self, p: usize) -> usize {
        self.n_orb + p
    }

    /// Expectation ⟨ψ|O|ψ⟩ for one ladder product.
    pub fn expectation(&self, psi: &Array1<f64>, ops: &[Ladder]) -> f64 {
        let mut acc = 0.0;
        for state in 0..self.dim {
            if psi[state] == 0.0 {
                continue;
            }
            if let Some((out, sign)) = self.apply(ops, state) {
                acc += psi[out] * sign * psi[state];
            }
        }
        acc
    }
}

pub fn dense_hamiltonian(ham: &MolecularHamiltonian, ops: &FockOperators) -> Array2<f64> {
    let n = ham.n_orb;
    let mut terms: Vec<(f64, Vec<Ladder>)> = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let h = ham.h(p, q);
            if h != 0.0 {
                for spin in [0, n] {
                    terms.push((h, vec![(true, p + spin), (false, q + spin)]));
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ham.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sa in [0, n] {
                        for sb in [0, n] {
                            terms.push((
                                0.5 * v,
                                vec![(true, p + sa), (true, r + sb), (false, s + sb), (false, q + sa)],
                            ));
                        }
                    }
                }
            }
        }
    }
    let mut m = ops.matrix(&terms);
    for i in 0..ops.dim {
        m[[i, i]] += ham.core_energy;
    }
    m
}

pub fn dense_s2(ops: &FockOperators) -> Array2<f64> {
    let n = ops.n_orb;
    let s_plus = ops.matrix(
        &(0..n)
            .map(|p| (1.0, vec![(true, ops.alpha(p)), (false, ops.beta(p))]))
            .collect::<Vec<_>>(),
    );
    let s_minus = s_plus.t().to_owned();
    let mut sz = Array2::<f64>::zeros((ops.dim, ops.dim));
    for i in 0..ops.dim {
        let d = ops.determinant_of(i);
        sz[[i, i]] = 0.5 * (d.n_alpha() as f64 - d.n_beta() as f64);
    }
    sz.dot(&sz) + &sz + s_minus.dot(&s_plus)
}
