//! Orbital optimization of a fixed determinant subspace.
//!
//! The one- and two-body integrals are rotated by U = exp(κ) while the
//! determinant list stays fixed. κ is updated with ADAM along the analytic
//! gradient built from the generalized Fock matrix.

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;
use crate::linalg::{expm_antisymmetric, orthogonality_error};
use crate::subspace::{solve_subspace, ProjectedOperators, SolverConfig, SubspaceBasis, SubspaceState};

/// Antisymmetric generator κ with its rotation U = exp(κ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalRotation {
    pub kappa: Array2<f64>,
    #[serde(skip)]
    u: Option<Array2<f64>>,
}

impl OrbitalRotation {
    pub fn identity(n: usize) -> Self {
        Self::new(Array2::zeros((n, n))).expect("zero matrix is antisymmetric")
    }

    pub fn new(kappa: Array2<f64>) -> Result<Self> {
        if kappa.nrows() != kappa.ncols() {
            return Err(SqdError::DimensionMismatch {
                expected: kappa.nrows(),
                found: kappa.ncols(),
            });
        }
        let sym = (0..kappa.nrows())
            .flat_map(|p| (0..kappa.nrows()).map(move |q| (p, q)))
            .map(|(p, q)| (kappa[[p, q]] + kappa[[q, p]]).abs())
            .fold(0.0, f64::max);
        if sym > 1e-12 {
            return Err(SqdError::InvalidInput(format!("kappa is not antisymmetric ({sym:e})")));
        }
        let u = orthonormal_exp(&kappa);
        Ok(Self { kappa, u: Some(u) })
    }

    pub fn n_orb(&self) -> usize {
        self.kappa.nrows()
    }

    pub fn u(&self) -> Array2<f64> {
        self.u.clone().unwrap_or_else(|| orthonormal_exp(&self.kappa))
    }
}

/// exp(κ), re-orthonormalized if round-off drift exceeds 1e-10.
fn orthonormal_exp(kappa: &Array2<f64>) -> Array2<f64> {
    let u = expm_antisymmetric(kappa);
    if orthogonality_error(&u) <= 1e-10 {
        return u;
    }
    let mut q = u.clone();
    for j in 0..q.ncols() {
        for k in 0..j {
            let d = q.column(k).dot(&q.column(j));
            let ck = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-d, &ck);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|x| x / norm);
    }
    q
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbOptConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: usize,
    /// Stop when every gradient component is below this (Hartree per unit κ).
    pub grad_tol: f64,
    /// Steps between subspace re-diagonalizations; RDMs are held in between.
    pub resolve_every: usize,
}

impl Default for OrbOptConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_steps: 200,
            grad_tol: 1e-6,
            resolve_every: 1,
        }
    }
}

impl OrbOptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(SqdError::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(SqdError::Config("beta1 and beta2 must lie in [0, 1)".into()));
        }
        if !(self.epsilon > 0.0) || self.resolve_every == 0 {
            return Err(SqdError::Config("epsilon must be positive and resolve_every at least 1".into()));
        }
        Ok(())
    }
}

/// Average Γ over the index permutations that leave real two-electron
/// integrals invariant, so the energy sees only the symmetric part.
fn symmetrized_rdm2(g: &Array4<f64>) -> Array4<f64> {
    Array4::from_shape_fn(g.dim(), |(p, q, r, s)| {
        0.25 * (g[[p, q, r, s]] + g[[r, s, p, q]] + g[[q, p, s, r]] + g[[s, r, q, p]])
    })
}

/// Energy and gradient dE/dκ for fixed RDMs with integrals rotated by exp(κ).
///
/// E = E_core + Σ h'_pq γ_pq + ½ Σ (pq|rs)' Γ_pqrs. With the generalized Fock
/// matrix F_tp = Σ_q h'_tq γ_pq + Σ_qrs (tq|rs)' Γ_pqrs, the derivative along
/// U → U(1 + X) is 2 Σ X_tp F_tp. Pulling X back through the differential of
/// exp gives D = 2 Σ_k ad_κ^k(F) / (k+1)!, and the gradient is D − Dᵀ.
pub fn orbital_gradient(
    ham: &MolecularHamiltonian,
    rdm1: &Array2<f64>,
    rdm2: &Array4<f64>,
    kappa: &Array2<f64>,
) -> Result<(f64, Array2<f64>)> {
    let n = ham.n_orb;
    if rdm1.dim() != (n, n) || rdm2.dim() != (n, n, n, n) || kappa.dim() != (n, n) {
        return Err(SqdError::DimensionMismatch {
            expected: n,
            found: rdm1.nrows(),
        });
    }
    let rotated = ham.rotate(&orthonormal_exp(kappa))?;
    let gamma = 0.5 * (rdm1 + &rdm1.t());
    let big = symmetrized_rdm2(rdm2);
    let h = rotated.one_body();
    let eri = rotated.eri_slice();

    let mut energy = ham.core_energy + (&h * &gamma).sum();
    let mut fock = h.dot(&gamma.t());
    let n2 = n * n;
    let n3 = n2 * n;
    let big_flat = big.as_slice().expect("standard layout");
    for t in 0..n {
        for p in 0..n {
            let mut acc = 0.0;
            // Σ_qrs (tq|rs) Γ_pqrs
            let e = &eri[t * n3..(t + 1) * n3];
            let g = &big_flat[p * n3..(p + 1) * n3];
            for (a, b) in e.iter().zip(g) {
                acc += a * b;
            }
            fock[[t, p]] += acc;
        }
    }
    for t in 0..n {
        let e = &eri[t * n3..(t + 1) * n3];
        let g = &big_flat[t * n3..(t + 1) * n3];
        energy += 0.5 * e.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
    }

    let mut d = fock.clone();
    let mut term = fock;
    for k in 1..80 {
        term = (kappa.dot(&term) - term.dot(kappa)) / (k + 1) as f64;
        d += &term;
        if term.iter().all(|x| x.abs() < 1e-18) {
            break;
        }
    }
    let d = 2.0 * d;
    let grad = &d - &d.t();
    Ok((energy, grad))
}

/// One entry of the optimization trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbOptStep {
    pub step: usize,
    pub energy: f64,
    /// Largest |dE/dκ_pq|.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbOptOutcome {
    /// Energy of `state` under the rotated integrals.
    pub energy: f64,
    pub initial_energy: f64,
    pub rotation: OrbitalRotation,
    pub state: SubspaceState,
    pub trajectory: Vec<OrbOptStep>,
    pub converged: bool,
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn solve_rotated(
    ham: &MolecularHamiltonian,
    basis: &SubspaceBasis,
    kappa: &Array2<f64>,
    target_spin: f64,
    solver: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<SubspaceState> {
    let rotated = ham.rotate(&orthonormal_exp(kappa))?;
    let state = solve_subspace(&rotated, basis, target_spin, solver, warm)?;
    if !state.converged {
        return Err(SqdError::NotConverged {
            iterations: state.iterations,
            residual: state.residual,
        });
    }
    Ok(state)
}

/// Minimize the subspace energy over orbital rotations with ADAM.
///
/// The returned rotation is the best one visited, so the final energy never
/// exceeds the energy at `init`.
pub fn optimize_orbitals(
    ham: &MolecularHamiltonian,
    basis: &SubspaceBasis,
    target_spin: f64,
    solver: &SolverConfig,
    config: &OrbOptConfig,
    init: Option<&OrbitalRotation>,
) -> Result<OrbOptOutcome> {
    config.validate()?;
    let n = ham.n_orb;
    let mut kappa = match init {
        Some(r) if r.n_orb() == n => r.kappa.clone(),
        Some(r) => {
            return Err(SqdError::DimensionMismatch {
                expected: n,
                found: r.n_orb(),
            })
        }
        None => Array2::zeros((n, n)),
    };
    if max_abs(&(&kappa + &kappa.t())) > 1e-12 {
        return Err(SqdError::InvalidInput("initial kappa is not antisymmetric".into()));
    }

    let mut m = Array2::<f64>::zeros((n, n));
    let mut v = Array2::<f64>::zeros((n, n));
    let mut trajectory = Vec::new();
    let mut state = solve_rotated(ham, basis, &kappa, target_spin, solver, None).map_err(|e| e.at_stage("orbopt step 0"))?;
    let initial_energy = state.energy;
    let mut best = (state.energy, kappa.clone(), state.clone());
    let mut converged = false;
    let (mut rdm1, mut rdm2) = {
        let ops = ProjectedOperators::new(ham, basis)?;
        (ops.rdm1(&state.vector), ops.rdm2(&state.vector))
    };

    for step in 0..=config.max_steps {
        if step > 0 && step % config.resolve_every == 0 {
            state = solve_rotated(ham, basis, &kappa, target_spin, solver, Some(&state.vector))
                .map_err(|e| e.at_stage(format!("orbopt step {step}")))?;
            let ops = ProjectedOperators::new(ham, basis)?;
            rdm1 = ops.rdm1(&state.vector);
            rdm2 = ops.rdm2(&state.vector);
        }
        let (energy, grad) = orbital_gradient(ham, &rdm1, &rdm2, &kappa)?;
        let grad_norm = max_abs(&grad);
        trajectory.push(OrbOptStep {
            step,
            energy,
            grad_norm,
        });
        if energy < best.0 {
            let mut s = state.clone();
            s.energy = energy;
            best = (energy, kappa.clone(), s);
        }
        if grad_norm < config.grad_tol {
            converged = true;
            break;
        }
        if step == config.max_steps {
            break;
        }
        let t = (step + 1) as i32;
        m = config.beta1 * &m + (1.0 - config.beta1) * &grad;
        v = config.beta2 * &v + (1.0 - config.beta2) * &grad.mapv(|g| g * g);
        let c1 = 1.0 - config.beta1.powi(t);
        let c2 = 1.0 - config.beta2.powi(t);
        let update = Array2::from_shape_fn((n, n), |(p, q)| {
            config.learning_rate * (m[[p, q]] / c1) / ((v[[p, q]] / c2).sqrt() + config.epsilon)
        });
        kappa -= &update;
        // Keep κ exactly antisymmetric.
        kappa = 0.5 * (&kappa - &kappa.t());
    }
    log::info!(
        "orbital optimization: {} steps, energy {:.10} -> {:.10}",
        trajectory.len(),
        initial_energy,
        best.0
    );

    let (energy, kappa, state) = best;
    Ok(OrbOptOutcome {
        energy,
        initial_energy,
        rotation: OrbitalRotation::new(kappa)?,
        state,
        trajectory,
        converged,
    })
}
