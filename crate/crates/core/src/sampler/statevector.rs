//! Exact statevector of the LUCJ circuit in a fixed (n_alpha, n_beta) sector.

use ndarray::Array2;

use super::lucj::LucjParameters;
use crate::determinant::{occupied, Determinant};
use crate::error::{Result, SqdError};
use crate::oracle::FCI_DIMENSION_LIMIT;
use crate::subspace::{build_links, Link, SubspaceBasis};

/// Complex amplitudes over the full sector, stored as real and imaginary
/// parts in basis order.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub basis: SubspaceBasis,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateVector {
    /// |det⟩ in the full sector of `n_orb` orbitals.
    pub fn determinant(n_orb: usize, det: &Determinant) -> Result<Self> {
        let (na, nb) = (det.n_alpha(), det.n_beta());
        let dim = crate::oracle::binomial(n_orb, na).saturating_mul(crate::oracle::binomial(n_orb, nb));
        if dim > FCI_DIMENSION_LIMIT {
            return Err(SqdError::ResourceGuard {
                dimension: dim,
                limit: FCI_DIMENSION_LIMIT,
            });
        }
        let basis = SubspaceBasis::full(n_orb, na, nb)?;
        let idx = basis
            .index_of(det)
            .ok_or_else(|| SqdError::InvalidInput("reference outside the orbital space".into()))?;
        let mut re = vec![0.0; basis.dim()];
        re[idx] = 1.0;
        Ok(Self {
            im: vec![0.0; basis.dim()],
            basis,
            re,
        })
    }

    pub fn norm(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.re.iter().zip(&self.im).map(|(a, b)| a * a + b * b).collect()
    }

    /// Multiply each determinant by exp(i Σ_PQ J_PQ n_P n_Q).
    pub fn apply_jastrow(&mut self, j: &Array2<f64>) {
        let n = self.basis.n_orb();
        for (k, det) in self.basis.determinants().enumerate() {
            let occ: Vec<usize> = occupied(det.alpha).chain(occupied(det.beta).map(|p| p + n)).collect();
            let mut phase = 0.0;
            for &p in &occ {
                for &q in &occ {
                    phase += j[[p, q]];
                }
            }
            let (s, c) = phase.sin_cos();
            let (re, im) = (self.re[k], self.im[k]);
            self.re[k] = c * re - s * im;
            self.im[k] = s * re + c * im;
        }
    }

    /// Apply exp(K̂_α + K̂_β) for real antisymmetric generators.
    pub fn apply_orbital_rotation(&mut self, k_alpha: &Array2<f64>, k_beta: &Array2<f64>) {
        let rot = OrbitalRotationAction::new(&self.basis, k_alpha, k_beta);
        rot.apply(&mut self.re);
        rot.apply(&mut self.im);
    }
}

/// exp(K̂) on a real vector by a scaled Taylor series over one-body links.
struct OrbitalRotationAction<'a> {
    nb: usize,
    links_a: Vec<Vec<Link>>,
    links_b: Vec<Vec<Link>>,
    k_alpha: &'a Array2<f64>,
    k_beta: &'a Array2<f64>,
    steps: usize,
}

impl<'a> OrbitalRotationAction<'a> {
    fn new(basis: &SubspaceBasis, k_alpha: &'a Array2<f64>, k_beta: &'a Array2<f64>) -> Self {
        let frob = |k: &Array2<f64>| k.iter().map(|x| x * x).sum::<f64>().sqrt();
        // ‖K̂_σ‖ ≤ n_σ ‖K‖₂ ≤ n_σ ‖K‖_F
        let bound = basis.n_alpha() as f64 * frob(k_alpha) + basis.n_beta() as f64 * frob(k_beta);
        Self {
            nb: basis.beta_strings().len(),
            links_a: build_links(basis.alpha_strings(), basis.n_orb()),
            links_b: build_links(basis.beta_strings(), basis.n_orb()),
            k_alpha,
            k_beta,
            steps: (bound / 0.5).ceil().max(1.0) as usize,
        }
    }

    fn generator(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.nb;
        for (ia, links) in self.links_a.iter().enumerate() {
            for l in links {
                if l.cre == l.ann {
                    continue;
                }
                let w = self.k_alpha[[l.cre as usize, l.ann as usize]] * l.sign;
                if w == 0.0 {
                    continue;
                }
                let src = l.source as usize * nb;
                for ib in 0..nb {
                    y[ia * nb + ib] += w * x[src + ib];
                }
            }
        }
        for (ib, links) in self.links_b.iter().enumerate() {
            for l in links {
                if l.cre == l.ann {
                    continue;
                }
                let w = self.k_beta[[l.cre as usize, l.ann as usize]] * l.sign;
                if w == 0.0 {
                    continue;
                }
                for ia in 0..y.len() / nb {
                    y[ia * nb + ib] += w * x[ia * nb + l.source as usize];
                }
            }
        }
    }

    fn apply(&self, v: &mut [f64]) {
        let scale = 1.0 / self.steps as f64;
        let mut term = vec![0.0; v.len()];
        let mut next = vec![0.0; v.len()];
        for _ in 0..self.steps {
            term.copy_from_slice(v);
            let base = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for order in 1..60 {
                next.iter_mut().for_each(|x| *x = 0.0);
                self.generator(&term, &mut next);
                let f = scale / order as f64;
                let mut size = 0.0;
                for (t, nx) in term.iter_mut().zip(&next) {
                    *t = nx * f;
                    size += *t * *t;
                }
                v.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
                if size.sqrt() <= 1e-17 * base.max(1e-300) {
                    break;
                }
            }
        }
    }
}

/// Statevector prepared by the LUCJ circuit from `reference`: each layer
/// applies e^{K̂}, e^{iĴ}, e^{−K̂} in turn, then the final orbital rotation.
pub fn simulate_lucj_state(params: &LucjParameters, reference: &Determinant) -> Result<StateVector> {
    let mut state = StateVector::determinant(params.n_orb, reference)?;
    for layer in &params.layers {
        let neg_a = -&layer.k_alpha;
        let neg_b = -&layer.k_beta;
        state.apply_orbital_rotation(&neg_a, &neg_b);
        state.apply_jastrow(&layer.j);
        state.apply_orbital_rotation(&layer.k_alpha, &layer.k_beta);
    }
    state.apply_orbital_rotation(&params.final_k_alpha, &params.final_k_beta);
    Ok(state)
}
