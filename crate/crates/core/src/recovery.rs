//! Self-consistent configuration recovery.
//!
//! Noisy bit-strings with the wrong number of electrons in a spin half are
//! repaired by flipping bits according to the averaged orbital occupancies of
//! the previous iteration. Each iteration draws K count-weighted batches,
//! diagonalizes the Hamiltonian in the Cartesian product of each batch's
//! spin strings, and averages the batch occupancies into the next profile.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinant::{RawBitString, SpinString};
use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;
use crate::sampler::SampleSet;
use crate::subspace::{solve_subspace, ProjectedOperators, SolverConfig, SubspaceBasis, SubspaceState};

/// Keeps a zero-occupancy orbital reachable by the flip law.
const FLIP_FLOOR: f64 = 1e-6;

/// Averaged orbital occupancies n_pσ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyProfile {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl OccupancyProfile {
    pub fn validate(&self, n_orb: usize) -> Result<()> {
        if self.alpha.len() != n_orb || self.beta.len() != n_orb {
            return Err(SqdError::DimensionMismatch {
                expected: n_orb,
                found: self.alpha.len().max(self.beta.len()),
            });
        }
        let tol = 1e-8;
        if let Some(x) = self
            .alpha
            .iter()
            .chain(&self.beta)
            .find(|x| !x.is_finite() || **x < -tol || **x > 1.0 + tol)
        {
            return Err(SqdError::InvalidInput(format!("occupancy {x} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Number of batches K per iteration.
    pub n_batches: usize,
    /// Distinct configurations drawn per batch.
    pub batch_size: usize,
    pub n_iterations: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            n_batches: 10,
            batch_size: 3000,
            n_iterations: 10,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_batches == 0 || self.batch_size == 0 || self.n_iterations == 0 {
            return Err(SqdError::Config(
                "n_batches, batch_size and n_iterations must all be at least 1".into(),
            ));
        }
        if !(self.solver.lambda >= 0.0) {
            return Err(SqdError::Config(format!("lambda must be nonnegative, got {}", self.solver.lambda)));
        }
        Ok(())
    }
}

/// Spin halves with the right weight, with the shots that carried them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pools {
    pub alpha: BTreeMap<SpinString, u64>,
    pub beta: BTreeMap<SpinString, u64>,
}

/// Harvest alpha and beta halves independently: a string whose alpha half
/// has weight `n_alpha` contributes it even when its beta half is wrong.
pub fn postselect_pools<'a>(
    samples: impl IntoIterator<Item = (&'a RawBitString, &'a u64)>,
    n_alpha: usize,
    n_beta: usize,
) -> Result<Pools> {
    let mut pools = Pools::default();
    for (raw, &count) in samples {
        let (a, b) = raw.halves();
        if a.count_ones() as usize == n_alpha {
            *pools.alpha.entry(a).or_insert(0) += count;
        }
        if b.count_ones() as usize == n_beta {
            *pools.beta.entry(b).or_insert(0) += count;
        }
    }
    if pools.alpha.is_empty() && pools.beta.is_empty() {
        return Err(SqdError::EmptyPool(format!(
            "no sample has {n_alpha} alpha or {n_beta} beta electrons"
        )));
    }
    Ok(pools)
}

/// Bring one spin half to weight `target`, lowering occupied bits with
/// probability ∝ (1 − n_p) + ε or raising empty bits with probability ∝ n_p + ε.
pub fn recover_half(mask: SpinString, occ: &[f64], target: usize, rng: &mut impl Rng) -> SpinString {
    let n = occ.len();
    let mut mask = mask & crate::determinant::low_bits(n);
    loop {
        let weight = mask.count_ones() as usize;
        if weight == target {
            return mask;
        }
        let surplus = weight > target;
        let candidates: Vec<(usize, f64)> = (0..n)
            .filter(|&p| (mask >> p & 1 == 1) == surplus)
            .map(|p| {
                let n_p = occ[p].clamp(0.0, 1.0);
                (p, if surplus { 1.0 - n_p } else { n_p } + FLIP_FLOOR)
            })
            .collect();
        let total: f64 = candidates.iter().map(|c| c.1).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = candidates[candidates.len() - 1].0;
        for &(p, w) in &candidates {
            if u < w {
                pick = p;
                break;
            }
            u -= w;
        }
        mask ^= 1 << pick;
    }
}

/// Repair both halves of a raw string; correct halves pass through.
pub fn recover_string(
    x: &RawBitString,
    occ: &OccupancyProfile,
    n_alpha: usize,
    n_beta: usize,
    rng: &mut impl Rng,
) -> RawBitString {
    let (a, b) = x.halves();
    let a = recover_half(a, &occ.alpha, n_alpha, rng);
    let b = recover_half(b, &occ.beta, n_beta, rng);
    RawBitString::new(x.n_orb, a, b)
}

/// ChaCha stream for one task, keyed by (seed, domain) and task index.
fn task_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

const BATCH_DOMAIN: u64 = 0x6261_7463_6800_0000;
const RECOVERY_DOMAIN: u64 = 0x7265_636f_7600_0000;

/// Recover every shot independently; shot `i` of iteration `t` draws from
/// its own stream, so the result is independent of thread count.
pub fn recover_samples(
    samples: &SampleSet,
    occ: &OccupancyProfile,
    n_alpha: usize,
    n_beta: usize,
    seed: u64,
    iteration: usize,
) -> SampleSet {
    let mut offsets = Vec::with_capacity(samples.counts.len());
    let mut shot = 0u64;
    for &c in samples.counts.values() {
        offsets.push(shot);
        shot += c;
    }
    let entries: Vec<(&RawBitString, u64, u64)> = samples
        .counts
        .iter()
        .zip(offsets)
        .map(|((raw, &c), off)| (raw, c, off))
        .collect();
    let parts: Vec<Vec<(RawBitString, u64)>> = entries
        .par_iter()
        .map(|&(raw, count, first)| {
            let (a, b) = raw.halves();
            if a.count_ones() as usize == n_alpha && b.count_ones() as usize == n_beta {
                return vec![(*raw, count)];
            }
            let mut local: BTreeMap<RawBitString, u64> = BTreeMap::new();
            for s in first..first + count {
                let mut rng = task_rng(seed, RECOVERY_DOMAIN ^ iteration as u64, s);
                *local.entry(recover_string(raw, occ, n_alpha, n_beta, &mut rng)).or_insert(0) += 1;
            }
            local.into_iter().collect()
        })
        .collect();
    let mut out = SampleSet::new(samples.n_orb);
    for (raw, c) in parts.into_iter().flatten() {
        out.add(raw, c);
    }
    out
}

/// Up to `size` distinct configurations drawn without replacement with
/// probability proportional to their counts (Efraimidis–Spirakis keys).
pub fn draw_batch(samples: &SampleSet, size: usize, seed: u64, batch: usize) -> Vec<(RawBitString, u64)> {
    if samples.counts.len() <= size {
        return samples.counts.iter().map(|(r, &c)| (*r, c)).collect();
    }
    let mut rng = task_rng(seed, BATCH_DOMAIN, batch as u64);
    let mut keyed: Vec<(f64, RawBitString, u64)> = samples
        .counts
        .iter()
        .map(|(r, &c)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / c as f64, *r, c)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(size);
    keyed.sort_by_key(|a| a.1);
    keyed.into_iter().map(|(_, r, c)| (r, c)).collect()
}

/// One batch diagonalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchRecord {
    pub iteration: usize,
    pub batch: usize,
    pub energy: f64,
    pub s2: f64,
    pub dimension: usize,
    pub converged: bool,
}

/// Summary of one recovery iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub min_energy: f64,
    pub mean_energy: f64,
    /// ⟨S²⟩ of the lowest-energy batch.
    pub s2: f64,
    /// Dimension of the lowest-energy batch.
    pub dimension: usize,
    /// Shots whose halves both had the right weight before recovery.
    pub valid_fraction: f64,
    /// The same fraction for the shots this iteration diagonalized.
    pub working_valid_fraction: f64,
    /// Every string of every batch basis has the sector's Hamming weight.
    pub weights_exact: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryOutcome {
    pub energy: f64,
    pub state: SubspaceState,
    pub profile: OccupancyProfile,
    pub iterations: Vec<IterationRecord>,
    pub batches: Vec<BatchRecord>,
}

struct BatchSolve {
    state: SubspaceState,
    n_alpha_occ: Vec<f64>,
    n_beta_occ: Vec<f64>,
}

fn solve_batch(
    ham: &MolecularHamiltonian,
    batch: &[(RawBitString, u64)],
    target_spin: f64,
    solver: &SolverConfig,
) -> Result<Option<BatchSolve>> {
    let pools = match postselect_pools(batch.iter().map(|(r, c)| (r, c)), ham.n_alpha, ham.n_beta) {
        Ok(p) => p,
        Err(SqdError::EmptyPool(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if pools.alpha.is_empty() || pools.beta.is_empty() {
        return Ok(None);
    }
    let basis = SubspaceBasis::new(
        ham.n_orb,
        ham.n_alpha,
        ham.n_beta,
        pools.alpha.keys().copied(),
        pools.beta.keys().copied(),
    )?;
    let state = solve_subspace(ham, &basis, target_spin, solver, None)?;
    if !state.converged {
        return Err(SqdError::NotConverged {
            iterations: state.iterations,
            residual: state.residual,
        });
    }
    let ops = ProjectedOperators::new(ham, &basis)?;
    let (ga, gb) = ops.rdm1_spin(&state.vector);
    Ok(Some(BatchSolve {
        n_alpha_occ: ga.diag().to_vec(),
        n_beta_occ: gb.diag().to_vec(),
        state,
    }))
}

/// Run the recovery loop on `samples` for the sector of `ham`.
///
/// Iteration 0 uses post-selected halves only. Later iterations recover the
/// original samples with the occupancy profile of the previous iteration.
/// Batch draws depend on (seed, batch index) only, so a noiseless sample set
/// reaches its fixed point immediately.
pub fn run_recovery(
    ham: &MolecularHamiltonian,
    samples: &SampleSet,
    target_spin: f64,
    config: &RecoveryConfig,
) -> Result<RecoveryOutcome> {
    config.validate()?;
    if samples.counts.is_empty() {
        return Err(SqdError::EmptyPool("sample set is empty".into()));
    }
    if samples.n_orb != ham.n_orb {
        return Err(SqdError::DimensionMismatch {
            expected: ham.n_orb,
            found: samples.n_orb,
        });
    }
    let (na, nb) = (ham.n_alpha, ham.n_beta);
    let valid_fraction = samples.valid_fraction(na, nb);
    let mut profile: Option<OccupancyProfile> = None;
    let mut iterations = Vec::with_capacity(config.n_iterations);
    let mut batches = Vec::new();
    let mut best: Option<SubspaceState> = None;

    for it in 0..config.n_iterations {
        let working = match &profile {
            None => samples.clone(),
            Some(p) => recover_samples(samples, p, na, nb, config.seed, it),
        };
        let draws: Vec<Vec<(RawBitString, u64)>> = (0..config.n_batches)
            .map(|k| draw_batch(&working, config.batch_size, config.seed, k))
            .collect();
        let solves: Vec<Option<BatchSolve>> = draws
            .par_iter()
            .map(|d| solve_batch(ham, d, target_spin, &config.solver))
            .collect::<Result<_>>()
            .map_err(|e| e.at_stage(format!("recovery iteration {it}")))?;

        let solved: Vec<(usize, &BatchSolve)> = solves
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.as_ref().map(|s| (k, s)))
            .collect();
        if solved.is_empty() {
            return Err(SqdError::EmptyPool(format!(
                "every batch lacks alpha or beta strings at iteration {it}"
            )));
        }
        let mut alpha = vec![0.0; ham.n_orb];
        let mut beta = vec![0.0; ham.n_orb];
        for (_, s) in &solved {
            alpha.iter_mut().zip(&s.n_alpha_occ).for_each(|(a, x)| *a += x);
            beta.iter_mut().zip(&s.n_beta_occ).for_each(|(b, x)| *b += x);
        }
        let scale = 1.0 / solved.len() as f64;
        alpha.iter_mut().chain(beta.iter_mut()).for_each(|x| *x *= scale);
        profile = Some(OccupancyProfile { alpha, beta });

        let mut lowest = solved[0];
        let mut mean = 0.0;
        for &(k, s) in &solved {
            batches.push(BatchRecord {
                iteration: it,
                batch: k,
                energy: s.state.energy,
                s2: s.state.s2,
                dimension: s.state.basis.dim(),
                converged: s.state.converged,
            });
            mean += s.state.energy;
            if s.state.energy < lowest.1.state.energy {
                lowest = (k, s);
            }
        }
        let weights_exact = solved.iter().all(|(_, s)| {
            let b = &s.state.basis;
            b.alpha_strings().iter().all(|x| x.count_ones() as usize == na)
                && b.beta_strings().iter().all(|x| x.count_ones() as usize == nb)
        });
        let state = &lowest.1.state;
        log::info!(
            "recovery iteration {it}: min energy {:.10}, dimension {}, <S^2> {:.4}",
            state.energy,
            state.basis.dim(),
            state.s2
        );
        iterations.push(IterationRecord {
            iteration: it,
            min_energy: state.energy,
            mean_energy: mean * scale,
            s2: state.s2,
            dimension: state.basis.dim(),
            valid_fraction,
            working_valid_fraction: working.valid_fraction(na, nb),
            weights_exact,
        });
        best = Some(state.clone());
    }

    let state = best.expect("at least one iteration ran");
    Ok(RecoveryOutcome {
        energy: state.energy,
        state,
        profile: profile.expect("profile set after the first iteration"),
        iterations,
        batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::{slater_condon_element, Determinant};
    use crate::oracle::fci_ground_state;
    use crate::sampler::{sample, NoiseModel, StateVector};
    use crate::testing::random_hamiltonian;
    use proptest::prelude::*;

    fn raw(n: usize, a: u64, b: u64) -> RawBitString {
        RawBitString::new(n, a, b)
    }

    #[test]
    fn pools_harvest_halves_independently() {
        let mut s = SampleSet::new(4);
        s.add(raw(4, 0b0011, 0b0011), 3);
        s.add(raw(4, 0b0101, 0b0111), 2);
        s.add(raw(4, 0b0001, 0b1100), 1);
        let p = postselect_pools(&s.counts, 2, 2).unwrap();
        assert_eq!(p.alpha.into_iter().collect::<Vec<_>>(), vec![(0b0011, 3), (0b0101, 2)]);
        assert_eq!(p.beta.into_iter().collect::<Vec<_>>(), vec![(0b0011, 3), (0b1100, 1)]);

        let mut bad = SampleSet::new(4);
        bad.add(raw(4, 0b0111, 0b0001), 5);
        assert!(matches!(postselect_pools(&bad.counts, 2, 2), Err(SqdError::EmptyPool(_))));
    }

    /// P(alpha half keeps weight k) for a fixed half under independent flips:
    /// as many occupied bits must drop as empty bits rise.
    fn keep_probability(n: usize, k: usize, p: f64) -> f64 {
        let binom = |n: usize, r: usize| crate::oracle::binomial(n, r) as f64;
        (0..=k.min(n - k))
            .map(|j| binom(k, j) * binom(n - k, j) * p.powi(2 * j as i32) * (1.0 - p).powi((n - 2 * j) as i32))
            .sum()
    }

    #[test]
    fn pool_sizes_follow_binomial_law() {
        let (n, na, nb, p, shots) = (6, 3, 2, 0.05, 200_000u64);
        let hf = Determinant::hartree_fock(na, nb);
        let state = StateVector::determinant(n, &hf).unwrap();
        let s = sample(&state, shots, &NoiseModel { bit_flip_prob: p, seed: 11 }).unwrap();
        let pools = postselect_pools(&s.counts, na, nb).unwrap();
        for (got, k) in [(pools.alpha.values().sum::<u64>(), na), (pools.beta.values().sum::<u64>(), nb)] {
            let q = keep_probability(n, k, p);
            let mean = shots as f64 * q;
            let sd = (shots as f64 * q * (1.0 - q)).sqrt();
            assert!((got as f64 - mean).abs() < 3.0 * sd, "k={k}: {got} vs {mean} ± {sd}");
        }
    }

    #[test]
    fn correct_strings_pass_through() {
        let occ = OccupancyProfile {
            alpha: vec![0.5; 5],
            beta: vec![0.5; 5],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = raw(5, 0b10011, 0b00110);
        assert_eq!(recover_string(&x, &occ, 3, 2, &mut rng), x);
    }

    #[test]
    fn empty_half_gains_exactly_one_bit() {
        let occ = vec![0.1, 0.6, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(recover_half(0, &occ, 1, &mut rng).count_ones(), 1);
        }
    }

    #[test]
    fn sharp_profile_drops_the_empty_orbital() {
        let occ = vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let wrong = (0..10_000)
            .filter(|_| recover_half(0b001111, &occ, 3, &mut rng) != 0b000111)
            .count();
        // Failure probability per trial is 3ε / (1 + 4ε) ≈ 3e-6.
        assert!(wrong <= 1, "{wrong} trials removed an occupied orbital");
    }

    #[test]
    fn flip_frequencies_match_the_law() {
        let occ = vec![0.9, 0.7, 0.4, 0.2, 0.05];
        let trials = 40_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);

        // Surplus: weight 3 → 2 from mask {0,1,3}, drop p with ∝ (1 − n_p) + ε.
        let mask = 0b01011u64;
        let mut hits = [0usize; 5];
        for _ in 0..trials {
            let out = recover_half(mask, &occ, 2, &mut rng);
            hits[(mask ^ out).trailing_zeros() as usize] += 1;
        }
        let w: Vec<f64> = [0usize, 1, 3].iter().map(|&p| 1.0 - occ[p] + FLIP_FLOOR).collect();
        let total: f64 = w.iter().sum();
        for (i, &p) in [0usize, 1, 3].iter().enumerate() {
            let q = w[i] / total;
            let sd = (trials as f64 * q * (1.0 - q)).sqrt();
            assert!((hits[p] as f64 - trials as f64 * q).abs() < 4.0 * sd, "bit {p}");
        }

        // Deficit: weight 1 → 2 from mask {4}, raise p with ∝ n_p + ε.
        let mask = 0b10000u64;
        let mut hits = [0usize; 5];
        for _ in 0..trials {
            let out = recover_half(mask, &occ, 2, &mut rng);
            hits[(mask ^ out).trailing_zeros() as usize] += 1;
        }
        let total: f64 = (0..4).map(|p| occ[p] + FLIP_FLOOR).sum();
        for p in 0..4 {
            let q = (occ[p] + FLIP_FLOOR) / total;
            let sd = (trials as f64 * q * (1.0 - q)).sqrt();
            assert!((hits[p] as f64 - trials as f64 * q).abs() < 4.0 * sd, "bit {p}");
        }
    }

    #[test]
    fn batches_are_count_weighted() {
        let mut s = SampleSet::new(3);
        s.add(raw(3, 0b001, 0b001), 1000);
        for a in [0b010u64, 0b100] {
            for b in [0b001u64, 0b010, 0b100] {
                s.add(raw(3, a, b), 1);
            }
        }
        let heavy = raw(3, 0b001, 0b001);
        let picked = (0..200)
            .filter(|&k| draw_batch(&s, 2, 9, k).iter().any(|(r, _)| *r == heavy))
            .count();
        assert!(picked >= 198);
        let b = draw_batch(&s, 4, 9, 0);
        assert_eq!(b.len(), 4);
        assert_eq!(draw_batch(&s, 4, 9, 0), b);
        assert_eq!(draw_batch(&s, 100, 9, 0).len(), s.counts.len());
    }

    fn small_config(k: usize, iterations: usize) -> RecoveryConfig {
        RecoveryConfig {
            n_batches: k,
            batch_size: 3000,
            n_iterations: iterations,
            seed: 5,
            solver: SolverConfig {
                tol: 1e-10,
                ..SolverConfig::default()
            },
        }
    }

    #[test]
    fn delta_state_gives_reference_energy() {
        let ham = random_hamiltonian(5, 2, 2, 31);
        let hf = Determinant::hartree_fock(2, 2);
        let s = SampleSet::from_determinants(5, &[(hf, 100)]);
        let out = run_recovery(&ham, &s, 0.0, &small_config(3, 3)).unwrap();
        let e_hf = slater_condon_element(&ham, &hf, &hf).unwrap();
        for it in &out.iterations {
            assert!((it.min_energy - e_hf).abs() < 1e-12);
        }
        assert_eq!(out.state.basis.dim(), 1);
    }

    #[test]
    fn exhaustive_samples_reach_full_ci() {
        let ham = random_hamiltonian(5, 2, 2, 32);
        let basis = SubspaceBasis::full(5, 2, 2).unwrap();
        let out = run_recovery(&ham, &SampleSet::exhaustive(&basis), 0.0, &small_config(2, 2)).unwrap();
        let fci = fci_ground_state(&ham, 2, 2).unwrap();
        assert!((out.iterations[0].min_energy - fci.energy).abs() < 1e-8);
        assert_eq!(out.iterations[0].min_energy.to_bits(), out.iterations[1].min_energy.to_bits());
        let na: f64 = out.profile.alpha.iter().sum();
        let nb: f64 = out.profile.beta.iter().sum();
        assert!((na - 2.0).abs() < 1e-8 && (nb - 2.0).abs() < 1e-8);
    }

    fn noisy_run(threads: usize) -> RecoveryOutcome {
        let ham = random_hamiltonian(5, 2, 1, 33);
        let basis = SubspaceBasis::full(5, 2, 1).unwrap();
        let mut clean = SampleSet::exhaustive(&basis);
        for c in clean.counts.values_mut() {
            *c = 40;
        }
        // Corrupt by flipping bits deterministically through the sampler.
        let state = StateVector::determinant(5, &Determinant::hartree_fock(2, 1)).unwrap();
        let noisy = sample(&state, 2000, &NoiseModel { bit_flip_prob: 0.1, seed: 3 }).unwrap();
        for (r, c) in noisy.counts {
            clean.add(r, c);
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_recovery(&ham, &clean, 0.5, &small_config(4, 3)).unwrap())
    }

    #[test]
    fn recovered_bases_have_exact_weights_and_are_deterministic() {
        let a = noisy_run(1);
        let b = noisy_run(3);
        let bits = |o: &RecoveryOutcome| o.batches.iter().map(|r| r.energy.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        for d in a.state.basis.determinants() {
            assert_eq!((d.n_alpha(), d.n_beta()), (2, 1));
        }
        assert_eq!(a.iterations.len(), 3);
    }

    #[test]
    fn config_validation() {
        let mut c = RecoveryConfig::default();
        assert!(c.validate().is_ok());
        c.n_batches = 0;
        assert!(matches!(c.validate(), Err(SqdError::Config(_))));
        let ham = random_hamiltonian(3, 1, 1, 1);
        assert!(run_recovery(&ham, &SampleSet::new(3), 0.0, &RecoveryConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn recovery_always_fixes_weights(
            a in 0u64..64, b in 0u64..64, na in 0usize..=6, nb in 0usize..=6, seed in 0u64..1000,
            occ in proptest::collection::vec(0.0f64..=1.0, 12),
        ) {
            let profile = OccupancyProfile { alpha: occ[..6].to_vec(), beta: occ[6..].to_vec() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = raw(6, a, b);
            let y = recover_string(&x, &profile, na, nb, &mut rng);
            let (ya, yb) = y.halves();
            prop_assert_eq!(ya.count_ones() as usize, na);
            prop_assert_eq!(yb.count_ones() as usize, nb);
            // Only bits that move toward the target weight change.
            let (xa, _) = x.halves();
            if (xa.count_ones() as usize) > na {
                prop_assert_eq!(ya & !xa, 0);
            } else {
                prop_assert_eq!(xa & !ya, 0);
            }
        }
    }
}
