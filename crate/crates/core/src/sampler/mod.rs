//! Simulated measurement: LUCJ statevector, computational-basis sampling
//! and an independent bit-flip noise channel.
//!
//! Sample files hold one `bitstring count` pair per line, alpha half first,
//! orbital 0 leftmost in each half. Hardware counts in the same layout can be
//! fed to the recovery stage in place of the simulator.

pub mod amplitudes;
pub mod lucj;
pub mod statevector;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinant::{Determinant, RawBitString};
use crate::error::{Result, SqdError};
use crate::subspace::SubspaceBasis;

pub use amplitudes::{load_amplitudes, mp2_amplitudes, mp2_energy, orbital_energies, parse_amplitudes, write_amplitudes, Amplitudes};
pub use lucj::{build_lucj, composite_t2, reconstruct_composite, reconstruct_t2, Connectivity, LucjLayer, LucjParameters};
pub use statevector::{simulate_lucj_state, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Independent flip probability per bit per shot.
    pub bit_flip_prob: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            bit_flip_prob: 0.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.bit_flip_prob) {
            return Err(SqdError::Config(format!(
                "bit_flip_prob must lie in [0, 0.5), got {}",
                self.bit_flip_prob
            )));
        }
        Ok(())
    }
}

/// Measured bit-strings with their shot counts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    pub n_orb: usize,
    pub counts: BTreeMap<RawBitString, u64>,
}

impl SampleSet {
    pub fn new(n_orb: usize) -> Self {
        Self {
            n_orb,
            counts: BTreeMap::new(),
        }
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn add(&mut self, raw: RawBitString, count: u64) {
        *self.counts.entry(raw).or_insert(0) += count;
    }

    /// One shot of every determinant in the basis.
    pub fn exhaustive(basis: &SubspaceBasis) -> Self {
        let mut set = Self::new(basis.n_orb());
        for d in basis.determinants() {
            set.add(RawBitString::from_determinant(&d, basis.n_orb()), 1);
        }
        set
    }

    pub fn from_determinants(n_orb: usize, dets: &[(Determinant, u64)]) -> Self {
        let mut set = Self::new(n_orb);
        for (d, c) in dets {
            set.add(RawBitString::from_determinant(d, n_orb), *c);
        }
        set
    }

    /// Fraction of shots whose halves both have the given Hamming weights.
    pub fn valid_fraction(&self, n_alpha: usize, n_beta: usize) -> f64 {
        let ok: u64 = self
            .counts
            .iter()
            .filter(|(r, _)| r.alpha.count_ones() as usize == n_alpha && r.beta.count_ones() as usize == n_beta)
            .map(|(_, c)| c)
            .sum();
        ok as f64 / self.total_shots().max(1) as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (raw, count) in &self.counts {
            out.push_str(&format!("{raw} {count}\n"));
        }
        out
    }

    /// Parse `bitstring count` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set: Option<SampleSet> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bits = parts.next().unwrap_or_default();
            let count = match parts.next() {
                Some(c) => c
                    .parse::<u64>()
                    .map_err(|_| SqdError::parse(lineno + 1, format!("bad count '{c}'")))?,
                None => 1,
            };
            if bits.len() % 2 != 0 {
                return Err(SqdError::parse(lineno + 1, "bit-string length must be even"));
            }
            let n_orb = bits.len() / 2;
            let s = set.get_or_insert_with(|| SampleSet::new(n_orb));
            if s.n_orb != n_orb {
                return Err(SqdError::parse(lineno + 1, "bit-strings of differing length"));
            }
            let raw = RawBitString::parse(bits, n_orb).map_err(|e| SqdError::parse(lineno + 1, e.to_string()))?;
            s.add(raw, count);
        }
        set.ok_or_else(|| SqdError::EmptyPool("sample file holds no bit-strings".into()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Draw `shots` determinants with probability |amplitude|² and pass each
/// through the bit-flip channel.
///
/// Every shot uses its own ChaCha stream keyed by (seed, shot index), so the
/// result does not depend on how shots are split across threads.
pub fn sample(state: &StateVector, shots: u64, noise: &NoiseModel) -> Result<SampleSet> {
    noise.validate()?;
    if shots == 0 {
        return Err(SqdError::InvalidInput("at least one shot is required".into()));
    }
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(SqdError::InvalidInput(format!("statevector norm² is {total}, expected 1")));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cdf.push(acc);
    }
    let n_orb = state.basis.n_orb();
    let basis = &state.basis;
    let chunk = 4096u64;
    let partial: Vec<BTreeMap<RawBitString, u64>> = (0..shots.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut counts = BTreeMap::new();
            for shot in c * chunk..((c + 1) * chunk).min(shots) {
                let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
                rng.set_stream(shot);
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
                let det = basis.determinant(k);
                let (mut a, mut b) = (det.alpha, det.beta);
                if noise.bit_flip_prob > 0.0 {
                    for p in 0..n_orb {
                        if rng.random_bool(noise.bit_flip_prob) {
                            a ^= 1 << p;
                        }
                    }
                    for p in 0..n_orb {
                        if rng.random_bool(noise.bit_flip_prob) {
                            b ^= 1 << p;
                        }
                    }
                }
                *counts.entry(RawBitString::new(n_orb, a, b)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut set = SampleSet::new(n_orb);
    for counts in partial {
        for (raw, c) in counts {
            set.add(raw, c);
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{random_antisymmetric, random_symmetric};

    fn random_state(seed: u64) -> StateVector {
        let mut s = StateVector::determinant(4, &Determinant::hartree_fock(2, 2)).unwrap();
        s.apply_orbital_rotation(&random_antisymmetric(4, 0.8, seed), &random_antisymmetric(4, 0.8, seed + 1));
        s.apply_jastrow(&random_symmetric(8, 0.0, seed + 2));
        s.apply_orbital_rotation(&random_antisymmetric(4, 0.5, seed + 3), &random_antisymmetric(4, 0.5, seed + 4));
        s
    }

    #[test]
    fn delta_state_without_noise() {
        let hf = Determinant::hartree_fock(2, 1);
        let s = StateVector::determinant(4, &hf).unwrap();
        let set = sample(&s, 500, &NoiseModel::default()).unwrap();
        assert_eq!(set.counts.len(), 1);
        assert_eq!(set.counts[&RawBitString::from_determinant(&hf, 4)], 500);
        assert_eq!(set.total_shots(), 500);
    }

    #[test]
    fn frequencies_converge() {
        let s = random_state(1);
        assert_eq!(s.basis.dim(), 36);
        let set = sample(&s, 1_000_000, &NoiseModel { bit_flip_prob: 0.0, seed: 7 }).unwrap();
        let probs = s.probabilities();
        let mut tv = 0.0;
        for (k, d) in s.basis.determinants().enumerate() {
            let f = set.counts.get(&RawBitString::from_determinant(&d, 4)).copied().unwrap_or(0) as f64 / 1e6;
            tv += 0.5 * (f - probs[k]).abs();
        }
        assert!(tv < 0.01, "{tv}");
        assert_eq!(set.valid_fraction(2, 2), 1.0);
    }

    #[test]
    fn bit_flip_violation_rate_matches_binomial() {
        let s = StateVector::determinant(6, &Determinant::hartree_fock(3, 3)).unwrap();
        let shots = 200_000u64;
        let p = 0.05;
        let set = sample(&s, shots, &NoiseModel { bit_flip_prob: p, seed: 3 }).unwrap();
        let expected = 1.0 - (1.0 - p).powi(12);
        let observed = 1.0 - set.valid_fraction(3, 3);
        let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
        // Some multi-flip patterns keep both weights, so the observed rate
        // sits slightly below the any-flip probability.
        let keep_both = {
            let half_keep = |k: usize, n: usize| -> f64 {
                // P(weight unchanged) for k ones and n − k zeros.
                let mut total = 0.0;
                for x in 0..=k.min(n - k) {
                    let c = |a: usize, b: usize| crate::oracle::binomial(a, b) as f64;
                    total += c(k, x) * c(n - k, x) * p.powi(2 * x as i32) * (1.0 - p).powi((n - 2 * x) as i32);
                }
                total
            };
            half_keep(3, 6) * half_keep(3, 6)
        };
        let exact = 1.0 - keep_both;
        assert!((observed - exact).abs() < 3.0 * sigma, "{observed} vs {exact}");
        assert!(observed <= expected);
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let s = random_state(5);
        let noise = NoiseModel { bit_flip_prob: 0.02, seed: 11 };
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| sample(&s, 20_000, &noise).unwrap());
        let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| sample(&s, 20_000, &noise).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn text_round_trip() {
        let s = random_state(9);
        let set = sample(&s, 1000, &NoiseModel { bit_flip_prob: 0.1, seed: 1 }).unwrap();
        assert_eq!(SampleSet::parse(&set.to_text()).unwrap(), set);
        assert!(SampleSet::parse("101 3\n").is_err());
        assert!(SampleSet::parse("# nothing\n").is_err());
        let parsed = SampleSet::parse("1100 2\n0011 1\n").unwrap();
        assert_eq!(parsed.counts[&RawBitString::new(2, 0b11, 0)], 2);
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel { bit_flip_prob: 0.5, seed: 0 }.validate().is_err());
        assert!(NoiseModel { bit_flip_prob: -0.1, seed: 0 }.validate().is_err());
    }
}
