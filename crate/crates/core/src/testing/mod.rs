//! Random problem instances for tests and benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrals::MolecularHamiltonian;

#[cfg(test)]
pub(crate) mod fock;

/// A random Hamiltonian with the full 8-fold integral symmetry.
///
/// The two-electron tensor is built as Σ_L B^L_pq B^L_rs from symmetric
/// factors, so it is positive semidefinite like a physical Coulomb kernel.
pub fn random_hamiltonian(n_orb: usize, n_alpha: usize, n_beta: usize, seed: u64) -> MolecularHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ham = MolecularHamiltonian::zeros(n_orb, n_alpha, n_beta).expect("valid size");
    ham.core_energy = rng.random_range(-1.0..1.0);
    for p in 0..n_orb {
        ham.set_h(p, p, -1.5 + 0.4 * p as f64 + rng.random_range(-0.2..0.2));
        for q in 0..p {
            ham.set_h(p, q, rng.random_range(-0.3..0.3));
        }
    }
    let rank = n_orb + 2;
    let mut factors = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut b = Array2::<f64>::zeros((n_orb, n_orb));
        for p in 0..n_orb {
            b[[p, p]] = rng.random_range(0.0..0.6);
            for q in 0..p {
                let v = rng.random_range(-0.15..0.15);
                b[[p, q]] = v;
                b[[q, p]] = v;
            }
        }
        factors.push(b);
    }
    for p in 0..n_orb {
        for q in 0..=p {
            for r in 0..n_orb {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v: f64 = factors.iter().map(|b| b[[p, q]] * b[[r, s]]).sum();
                    ham.set_eri(p, q, r, s, v);
                }
            }
        }
    }
    ham
}

/// A random antisymmetric matrix with entries uniform in (-scale, scale).
pub fn random_antisymmetric(n: usize, scale: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = Array2::<f64>::zeros((n, n));
    for p in 0..n {
        for q in 0..p {
            let v = rng.random_range(-scale..scale);
            k[[p, q]] = v;
            k[[q, p]] = -v;
        }
    }
    k
}

/// A random real symmetric matrix with entries uniform in (-1, 1) plus a
/// graded diagonal.
pub fn random_symmetric(n: usize, diagonal_spread: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::<f64>::zeros((n, n));
    for p in 0..n {
        a[[p, p]] = diagonal_spread * p as f64 / n.max(1) as f64 + rng.random_range(-1.0..1.0);
        for q in 0..p {
            let v = rng.random_range(-1.0..1.0);
            a[[p, q]] = v;
            a[[q, p]] = v;
        }
    }
    a
}
