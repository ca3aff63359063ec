//! Reduced density matrices of a state expanded in a product subspace.

use ndarray::{Array2, Array4};

use super::ProjectedOperators;
use crate::determinant::{apply_pair_excitation, occupied, SpinString};

impl ProjectedOperators<'_> {
    /// Spin-resolved one-body matrices γ^σ_pq = ⟨a†_pσ a_qσ⟩.
    pub fn rdm1_spin(&self, v: &[f64]) -> (Array2<f64>, Array2<f64>) {
        let n = self.basis.n_orb;
        let nb = self.basis.beta.len();
        let na = self.basis.alpha.len();
        let mut ga = Array2::<f64>::zeros((n, n));
        let mut gb = Array2::<f64>::zeros((n, n));
        for ia in 0..na {
            for la in &self.links_a[ia] {
                let ja = la.source as usize;
                let s: f64 = (0..nb).map(|ib| v[ia * nb + ib] * v[ja * nb + ib]).sum();
                ga[[la.cre as usize, la.ann as usize]] += la.sign * s;
            }
        }
        for ib in 0..nb {
            for lb in &self.links_b[ib] {
                let jb = lb.source as usize;
                let s: f64 = (0..na).map(|ia| v[ia * nb + ib] * v[ia * nb + jb]).sum();
                gb[[lb.cre as usize, lb.ann as usize]] += lb.sign * s;
            }
        }
        let norm = super::dot(v, v);
        (ga / norm, gb / norm)
    }

    /// Spin-summed one-body matrix.
    pub fn rdm1(&self, v: &[f64]) -> Array2<f64> {
        let (a, b) = self.rdm1_spin(v);
        a + b
    }

    /// Spin-summed two-body matrix Γ_pqrs = Σ_στ ⟨a†_pσ a†_rτ a_sτ a_qσ⟩ in
    /// chemists' index order, so that
    /// E = E_core + Σ h_pq γ_pq + ½ Σ (pq|rs) Γ_pqrs.
    pub fn rdm2(&self, v: &[f64]) -> Array4<f64> {
        let n = self.basis.n_orb;
        let na = self.basis.alpha.len();
        let nb = self.basis.beta.len();
        let mut g = Array4::<f64>::zeros((n, n, n, n));

        // Opposite spin: ⟨E^α_pq E^β_rs⟩ and its βα mirror.
        for ia in 0..na {
            for la in &self.links_a[ia] {
                let ja = la.source as usize;
                let (p, q) = (la.cre as usize, la.ann as usize);
                for ib in 0..nb {
                    let bra = v[ia * nb + ib] * la.sign;
                    if bra == 0.0 {
                        continue;
                    }
                    for lb in &self.links_b[ib] {
                        let val = bra * lb.sign * v[ja * nb + lb.source as usize];
                        let (r, s) = (lb.cre as usize, lb.ann as usize);
                        g[[p, q, r, s]] += val;
                        g[[r, s, p, q]] += val;
                    }
                }
            }
        }

        // Same spin, applied directly as a†_p a†_r a_s a_q on each string.
        let mut same = |strings: &[SpinString], pair: &dyn Fn(usize, usize) -> f64| {
            for (j, &ket) in strings.iter().enumerate() {
                let occ: Vec<usize> = occupied(ket).collect();
                for &q in &occ {
                    for &s in &occ {
                        if s == q {
                            continue;
                        }
                        for p in 0..n {
                            for r in 0..n {
                                if p == r {
                                    continue;
                                }
                                if let Some((bra, sign)) = apply_pair_excitation(ket, p, q, r, s) {
                                    if let Ok(i) = strings.binary_search(&bra) {
                                        g[[p, q, r, s]] += sign * pair(i, j);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        };
        same(&self.basis.alpha, &|i, j| (0..nb).map(|ib| v[i * nb + ib] * v[j * nb + ib]).sum());
        same(&self.basis.beta, &|i, j| (0..na).map(|ia| v[ia * nb + i] * v[ia * nb + j]).sum());

        g / super::dot(v, v)
    }
}
