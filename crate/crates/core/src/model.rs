//! A six-orbital, six-electron methylene-like model with one stretchable
//! C–H bond, used for scans and acceptance runs without external integrals.
//!
//! Site orbitals: 0 carbon hybrid toward H₁, 1 H₁ 1s, 2 carbon σ lone pair,
//! 3 carbon π, 4 carbon hybrid toward H₂, 5 H₂ 1s. The H₂ hopping decays with
//! the bond length R and the lone-pair level drops as the bond stretches, so
//! the triplet (σ¹π¹, Hund-stabilized) lies below the singlet near
//! equilibrium and above it once σ² wins. Integrals are returned in the
//! restricted self-consistent-field orbitals of the requested sector.

use serde::{Deserialize, Serialize};

use ndarray::Array2;

use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;
use crate::linalg::symmetric_eigen;

const BOHR_PER_ANGSTROM: f64 = 1.0 / 0.529_177_210_9;
const CARBON: [usize; 4] = [0, 2, 3, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParameters {
    /// Equilibrium C–H length (Å).
    pub r_eq: f64,
    /// H–C–H angle (degrees).
    pub angle: f64,
    pub eps_hybrid: f64,
    pub eps_h: f64,
    pub eps_pi: f64,
    /// Lone-pair level at equilibrium and its total drop on dissociation.
    pub eps_sigma: f64,
    pub sigma_drop: f64,
    /// Length scale (Å) of the lone-pair drop.
    pub sigma_range: f64,
    /// C–H hopping at equilibrium and its decay length (Å).
    pub t_ch: f64,
    pub t_range: f64,
    /// Weak intra-carbon couplings that lift accidental degeneracies.
    pub t_mix: f64,
    pub u_carbon: f64,
    pub u_h: f64,
    /// Same-centre Coulomb and exchange between carbon orbitals.
    pub v_carbon: f64,
    pub k_carbon: f64,
    pub core_energy: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self {
            r_eq: 1.09,
            angle: 102.4,
            eps_hybrid: -0.45,
            eps_h: -0.40,
            eps_pi: -0.157,
            eps_sigma: -0.244,
            sigma_drop: 0.462,
            sigma_range: 0.391,
            t_ch: 0.30,
            t_range: 0.625,
            t_mix: 0.03,
            u_carbon: 0.457,
            u_h: 0.45,
            v_carbon: 0.287,
            k_carbon: 0.056,
            core_energy: 0.0,
        }
    }
}

/// Ohno interpolation between on-site U and 1/r at distance `r` (Å).
fn ohno(u: f64, r: f64) -> f64 {
    let rb = r * BOHR_PER_ANGSTROM;
    1.0 / (rb * rb + 1.0 / (u * u)).sqrt()
}

/// Integrals in the site basis at C–H₂ length `r` (Å), sector (3, 3).
pub fn site_hamiltonian(params: &ModelParameters, r: f64) -> Result<MolecularHamiltonian> {
    let p = params;
    let mut ham = MolecularHamiltonian::zeros(6, 3, 3)?;
    ham.core_energy = p.core_energy;
    let stretch = r - p.r_eq;
    let eps_sigma = p.eps_sigma - p.sigma_drop * (1.0 - (-stretch / p.sigma_range).exp());
    for (i, e) in [p.eps_hybrid, p.eps_h, eps_sigma, p.eps_pi, p.eps_hybrid, p.eps_h]
        .into_iter()
        .enumerate()
    {
        ham.set_h(i, i, e);
    }
    ham.set_h(0, 1, -p.t_ch);
    ham.set_h(4, 5, -p.t_ch * (-stretch / p.t_range).exp());
    ham.set_h(0, 2, -p.t_mix);
    ham.set_h(2, 4, -p.t_mix);
    ham.set_h(0, 3, -p.t_mix / 3.0);
    ham.set_h(3, 4, -p.t_mix / 6.0);

    for &i in &CARBON {
        ham.set_eri(i, i, i, i, p.u_carbon);
        for &j in CARBON.iter().filter(|&&j| j > i) {
            ham.set_eri(i, i, j, j, p.v_carbon);
            ham.set_eri(i, j, i, j, p.k_carbon);
        }
    }
    ham.set_eri(1, 1, 1, 1, p.u_h);
    ham.set_eri(5, 5, 5, 5, p.u_h);

    let u_ch = 0.5 * (p.u_carbon + p.u_h);
    let cos = p.angle.to_radians().cos();
    let r_hh = (p.r_eq * p.r_eq + r * r - 2.0 * p.r_eq * r * cos).sqrt();
    for &c in &CARBON {
        ham.set_eri(c, c, 1, 1, ohno(u_ch, p.r_eq));
        ham.set_eri(c, c, 5, 5, ohno(u_ch, r));
    }
    ham.set_eri(1, 1, 5, 5, ohno(p.u_h, r_hh));
    Ok(ham)
}

/// Restricted self-consistent-field orbitals for `n_alpha` ≥ `n_beta`
/// electrons, as columns in ascending orbital-energy order.
///
/// Open shells use the Roothaan effective Fock matrix: the spin-averaged
/// Fock matrix in the closed, open and virtual diagonal blocks and the
/// closed–virtual block, F_β between closed and open, F_α between open and
/// virtual. With equal counts this is closed-shell SCF. Open and virtual
/// levels are shifted up to damp occupation swaps.
const LEVEL_SHIFT: f64 = 0.5;
const MAX_SCF_ITERATIONS: usize = 1000;

fn scf_orbitals(ham: &MolecularHamiltonian, n_alpha: usize, n_beta: usize) -> Result<Array2<f64>> {
    let n = ham.n_orb;
    let h = ham.one_body();
    let (_, mut c) = symmetric_eigen(&h);
    let mut da = Array2::<f64>::zeros((n, n));
    let mut db = Array2::<f64>::zeros((n, n));
    let fock = |d_total: &Array2<f64>, d_spin: &Array2<f64>| {
        Array2::from_shape_fn((n, n), |(p, q)| {
            let mut f = h[[p, q]];
            for r in 0..n {
                for s in 0..n {
                    f += d_total[[r, s]] * ham.eri(p, q, r, s) - d_spin[[r, s]] * ham.eri(p, r, q, s);
                }
            }
            f
        })
    };
    for it in 0..MAX_SCF_ITERATIONS {
        let projector = |k: usize| {
            let occ = c.slice(ndarray::s![.., ..k]);
            occ.dot(&occ.t())
        };
        let (fa_d, fb_d) = (projector(n_alpha), projector(n_beta));
        let change = (&fa_d - &da)
            .iter()
            .chain((&fb_d - &db).iter())
            .fold(0.0f64, |a, x| a.max(x.abs()));
        (da, db) = (fa_d, fb_d);
        if it > 0 && change < 1e-12 {
            return Ok(c);
        }
        let total = &da + &db;
        let fa = c.t().dot(&fock(&total, &da)).dot(&c);
        let fb = c.t().dot(&fock(&total, &db)).dot(&c);
        let mut eff = 0.5 * (&fa + &fb);
        for p in 0..n_beta {
            for q in n_beta..n_alpha {
                eff[[p, q]] = fb[[p, q]];
                eff[[q, p]] = fb[[q, p]];
            }
        }
        for p in n_beta..n_alpha {
            for q in n_alpha..n {
                eff[[p, q]] = fa[[p, q]];
                eff[[q, p]] = fa[[q, p]];
            }
        }
        let mut eff = 0.5 * (&eff + &eff.t());
        for p in n_beta..n {
            eff[[p, p]] += if p < n_alpha { 0.5 * LEVEL_SHIFT } else { LEVEL_SHIFT };
        }
        c = c.dot(&symmetric_eigen(&eff).1);
    }
    Err(SqdError::NotConverged {
        iterations: MAX_SCF_ITERATIONS,
        residual: f64::NAN,
    })
}

/// Model integrals at length `r` (Å) for sector (`n_alpha`, `n_beta`), in
/// that sector's SCF orbitals, lowest first, with each orbital's largest
/// component made positive.
pub fn model_hamiltonian(params: &ModelParameters, r: f64, n_alpha: usize, n_beta: usize) -> Result<MolecularHamiltonian> {
    if n_alpha + n_beta != 6 || n_alpha < n_beta {
        return Err(SqdError::SectorMismatch(format!(
            "the model holds 6 electrons with n_alpha >= n_beta, not ({n_alpha}, {n_beta})"
        )));
    }
    let site = site_hamiltonian(params, r)?.with_sector(n_alpha, n_beta)?;
    let mut u = scf_orbitals(&site, n_alpha, n_beta)?;
    for mut col in u.columns_mut() {
        let lead = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
    site.rotate(&u)
}

/// Bond lengths (Å) of the standard five-point scan.
pub const SCAN_LENGTHS: [f64; 5] = [1.09, 1.6, 2.1, 2.6, 3.2];

/// The default model at each of `lengths` for one sector.
pub fn model_scan(lengths: &[f64], n_alpha: usize, n_beta: usize) -> Result<Vec<MolecularHamiltonian>> {
    let p = ModelParameters::default();
    lengths.iter().map(|&r| model_hamiltonian(&p, r, n_alpha, n_beta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fci_spin_state;

    #[test]
    fn integrals_are_symmetric_and_basis_independent() {
        let p = ModelParameters::default();
        let site = site_hamiltonian(&p, 1.5).unwrap();
        assert!(site.symmetry_error() < 1e-14);
        for (na, nb, s) in [(3, 3, 0.0), (4, 2, 1.0)] {
            let mo = model_hamiltonian(&p, 1.5, na, nb).unwrap();
            assert!(mo.symmetry_error() < 1e-12);
            let site = site.with_sector(na, nb).unwrap();
            let a = fci_spin_state(&site, na, nb, s, 0.5).unwrap().energy;
            let b = fci_spin_state(&mo, na, nb, s, 0.5).unwrap().energy;
            assert!((a - b).abs() < 1e-9);
        }
        assert!(model_hamiltonian(&p, 1.5, 2, 4).is_err());
    }

    #[test]
    fn exact_gap_changes_sign_once() {
        let p = ModelParameters::default();
        let gaps: Vec<f64> = SCAN_LENGTHS
            .iter()
            .map(|&r| {
                let s = fci_spin_state(&model_hamiltonian(&p, r, 3, 3).unwrap(), 3, 3, 0.0, 0.5).unwrap();
                let t = fci_spin_state(&model_hamiltonian(&p, r, 4, 2).unwrap(), 4, 2, 1.0, 0.5).unwrap();
                assert!(s.s2.abs() < 1e-8 && (t.s2 - 2.0).abs() < 1e-8);
                s.energy - t.energy
            })
            .collect();
        assert!(gaps[0] > 0.05);
        assert_eq!(gaps.windows(2).filter(|w| w[0].signum() != w[1].signum()).count(), 1);
        assert!(gaps[4].abs() < gaps[0].abs());
        assert!(gaps.iter().all(|g| g.abs() > 0.02));
    }
}
