//! Slater determinants as pairs of occupation bit masks.
//!
//! Orbital `p` is bit `p` of each mask. Fermionic ordering puts every alpha
//! spin-orbital before every beta spin-orbital, each block in ascending
//! orbital order, so |x⟩ = Π_p a†_pα Π_p a†_pβ |0⟩ with the products taken
//! in ascending p. Because the Hamiltonian conserves each spin, phases can be
//! evaluated inside each spin block independently.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;

/// Occupation bit mask over at most 64 spatial orbitals.
pub type SpinString = u64;

#[inline]
pub fn occupied(mask: SpinString) -> impl Iterator<Item = usize> {
    BitIter(mask)
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let b = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(b)
        }
    }
}

/// Mask with the lowest `n` bits set.
#[inline]
pub fn low_bits(n: usize) -> SpinString {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// (-1)^(number of occupied orbitals strictly between p and q).
#[inline]
pub fn excitation_sign(mask: SpinString, p: usize, q: usize) -> f64 {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    if hi - lo < 2 {
        return 1.0;
    }
    let between = mask & (low_bits(hi) & !low_bits(lo + 1));
    if between.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of a†_p acting on `mask` (bit p must be empty): (-1)^(#occupied below p).
#[inline]
fn create_sign(mask: SpinString, p: usize) -> f64 {
    if (mask & low_bits(p)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Apply a†_cre a_ann to a spin string. Returns the new string and phase,
/// or `None` if the result vanishes.
#[inline]
pub fn apply_excitation(mask: SpinString, cre: usize, ann: usize) -> Option<(SpinString, f64)> {
    let ann_bit = 1u64 << ann;
    if mask & ann_bit == 0 {
        return None;
    }
    if cre == ann {
        return Some((mask, 1.0));
    }
    let cre_bit = 1u64 << cre;
    if mask & cre_bit != 0 {
        return None;
    }
    Some(((mask ^ ann_bit) | cre_bit, excitation_sign(mask, cre, ann)))
}

/// Apply a†_p a†_r a_s a_q to a spin string, evaluated right to left.
#[inline]
pub fn apply_pair_excitation(
    mask: SpinString,
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> Option<(SpinString, f64)> {
    let mut m = mask;
    let mut sign = 1.0;
    for (op, orb) in [(false, q), (false, s), (true, r), (true, p)] {
        let bit = 1u64 << orb;
        if op {
            if m & bit != 0 {
                return None;
            }
            sign *= create_sign(m, orb);
            m |= bit;
        } else {
            if m & bit == 0 {
                return None;
            }
            m &= !bit;
            sign *= create_sign(m, orb);
        }
    }
    Some((m, sign))
}

/// A Slater determinant: alpha and beta occupation masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: SpinString,
    pub beta: SpinString,
}

impl Determinant {
    pub fn new(alpha: SpinString, beta: SpinString) -> Self {
        Self { alpha, beta }
    }

    /// Aufbau reference: lowest `n_alpha` / `n_beta` orbitals occupied.
    pub fn hartree_fock(n_alpha: usize, n_beta: usize) -> Self {
        Self::new(low_bits(n_alpha), low_bits(n_beta))
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    /// Render as "α:01101|β:01100" with orbital 0 leftmost.
    pub fn render(&self, n_orb: usize) -> String {
        format!(
            "α:{}|β:{}",
            render_mask(self.alpha, n_orb),
            render_mask(self.beta, n_orb)
        )
    }

    fn check_sector(&self, other: &Determinant) -> Result<()> {
        if self.n_alpha() != other.n_alpha() || self.n_beta() != other.n_beta() {
            return Err(SqdError::SectorMismatch(format!(
                "({}, {}) vs ({}, {}) electrons",
                self.n_alpha(),
                self.n_beta(),
                other.n_alpha(),
                other.n_beta()
            )));
        }
        Ok(())
    }
}

pub fn render_mask(mask: SpinString, n_orb: usize) -> String {
    (0..n_orb)
        .map(|p| if mask >> p & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A raw measured bit-string of length 2·n_orb: alpha half then beta half.
/// Hamming weights are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RawBitString {
    pub n_orb: usize,
    pub alpha: SpinString,
    pub beta: SpinString,
}

impl RawBitString {
    pub fn new(n_orb: usize, alpha: SpinString, beta: SpinString) -> Self {
        let mask = low_bits(n_orb);
        Self {
            n_orb,
            alpha: alpha & mask,
            beta: beta & mask,
        }
    }

    pub fn from_determinant(det: &Determinant, n_orb: usize) -> Self {
        Self::new(n_orb, det.alpha, det.beta)
    }

    /// Parse '0'/'1' characters: the first n_orb are alpha orbitals 0..n,
    /// the remainder beta orbitals 0..n.
    pub fn parse(text: &str, n_orb: usize) -> Result<Self> {
        let bits: Vec<bool> = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(SqdError::InvalidInput(format!("bad bit character '{other}'"))),
            })
            .collect::<Result<_>>()?;
        split_raw(&bits, n_orb).map(|(a, b)| Self::new(n_orb, a, b))
    }

    pub fn halves(&self) -> (SpinString, SpinString) {
        (self.alpha, self.beta)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.n_orb)
            .map(|p| self.alpha >> p & 1 == 1)
            .chain((0..self.n_orb).map(|p| self.beta >> p & 1 == 1))
            .collect()
    }
}

impl fmt::Display for RawBitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            render_mask(self.alpha, self.n_orb),
            render_mask(self.beta, self.n_orb)
        )
    }
}

/// Split a length-2·n_orb bit vector into its alpha and beta masks.
pub fn split_raw(bits: &[bool], n_orb: usize) -> Result<(SpinString, SpinString)> {
    if bits.len() != 2 * n_orb {
        return Err(SqdError::DimensionMismatch {
            expected: 2 * n_orb,
            found: bits.len(),
        });
    }
    if n_orb > 64 {
        return Err(SqdError::InvalidInput("at most 64 orbitals per spin".into()));
    }
    let pack = |half: &[bool]| {
        half.iter()
            .enumerate()
            .fold(0u64, |m, (p, &b)| if b { m | 1 << p } else { m })
    };
    Ok((pack(&bits[..n_orb]), pack(&bits[n_orb..])))
}

/// Same-spin diagonal energy of one string (no core energy, no opposite-spin
/// Coulomb): Σ_p h_pp + ½ Σ_{p≠q} [(pp|qq) − (pq|qp)].
pub fn same_spin_diagonal(ham: &MolecularHamiltonian, mask: SpinString) -> f64 {
    let occ: Vec<usize> = occupied(mask).collect();
    let mut e = 0.0;
    for (i, &p) in occ.iter().enumerate() {
        e += ham.h(p, p);
        for &q in &occ[..i] {
            e += ham.eri(p, p, q, q) - ham.eri(p, q, q, p);
        }
    }
    e
}

/// ⟨I|Ĥ_σσ|J⟩ for two same-spin strings: one-body plus same-spin two-body
/// part, excluding core energy and opposite-spin contributions.
pub fn same_spin_element(ham: &MolecularHamiltonian, bra: SpinString, ket: SpinString) -> f64 {
    let diff = bra ^ ket;
    match diff.count_ones() {
        0 => same_spin_diagonal(ham, bra),
        2 => {
            let a = (bra & diff).trailing_zeros() as usize;
            let i = (ket & diff).trailing_zeros() as usize;
            let sign = excitation_sign(ket, a, i);
            let mut v = ham.h(a, i);
            for k in occupied(ket) {
                v += ham.eri(a, i, k, k) - ham.eri(a, k, k, i);
            }
            sign * v
        }
        4 => {
            let mut created = occupied(bra & diff);
            let mut removed = occupied(ket & diff);
            let (a, b) = (created.next().unwrap(), created.next().unwrap());
            let (i, j) = (removed.next().unwrap(), removed.next().unwrap());
            // ⟨bra| a†_a a_i a†_b a_j |ket⟩: apply a†_b a_j first.
            let (mid, s1) = apply_excitation(ket, b, j).expect("valid double");
            let (_, s2) = apply_excitation(mid, a, i).expect("valid double");
            s1 * s2 * (ham.eri(a, i, b, j) - ham.eri(a, j, b, i))
        }
        _ => 0.0,
    }
}

/// ⟨d1|Ĥ|d2⟩ by the Slater–Condon rules, including the core energy on the
/// diagonal.
pub fn slater_condon_element(
    ham: &MolecularHamiltonian,
    d1: &Determinant,
    d2: &Determinant,
) -> Result<f64> {
    d1.check_sector(d2)?;
    let da = d1.alpha ^ d2.alpha;
    let db = d1.beta ^ d2.beta;
    let na = da.count_ones();
    let nb = db.count_ones();
    Ok(match (na, nb) {
        (0, 0) => {
            let mut e = ham.core_energy
                + same_spin_diagonal(ham, d1.alpha)
                + same_spin_diagonal(ham, d1.beta);
            for p in occupied(d1.alpha) {
                for q in occupied(d1.beta) {
                    e += ham.eri(p, p, q, q);
                }
            }
            e
        }
        (2, 0) => {
            let mut v = same_spin_element(ham, d1.alpha, d2.alpha);
            let a = (d1.alpha & da).trailing_zeros() as usize;
            let i = (d2.alpha & da).trailing_zeros() as usize;
            let sign = excitation_sign(d2.alpha, a, i);
            for k in occupied(d2.beta) {
                v += sign * ham.eri(a, i, k, k);
            }
            v
        }
        (0, 2) => {
            let mut v = same_spin_element(ham, d1.beta, d2.beta);
            let a = (d1.beta & db).trailing_zeros() as usize;
            let i = (d2.beta & db).trailing_zeros() as usize;
            let sign = excitation_sign(d2.beta, a, i);
            for k in occupied(d2.alpha) {
                v += sign * ham.eri(a, i, k, k);
            }
            v
        }
        (4, 0) => same_spin_element(ham, d1.alpha, d2.alpha),
        (0, 4) => same_spin_element(ham, d1.beta, d2.beta),
        (2, 2) => {
            let a = (d1.alpha & da).trailing_zeros() as usize;
            let i = (d2.alpha & da).trailing_zeros() as usize;
            let b = (d1.beta & db).trailing_zeros() as usize;
            let j = (d2.beta & db).trailing_zeros() as usize;
            excitation_sign(d2.alpha, a, i) * excitation_sign(d2.beta, b, j) * ham.eri(a, i, b, j)
        }
        _ => 0.0,
    })
}

/// ⟨d1|Ŝ²|d2⟩ with Ŝ² = Ŝz² + Ŝz + Ŝ₋Ŝ₊.
pub fn s2_element(d1: &Determinant, d2: &Determinant) -> Result<f64> {
    d1.check_sector(d2)?;
    if d1 == d2 {
        let sz = 0.5 * (d1.n_alpha() as f64 - d1.n_beta() as f64);
        let beta_only = (d1.beta & !d1.alpha).count_ones() as f64;
        return Ok(sz * sz + sz + beta_only);
    }
    let da = d1.alpha ^ d2.alpha;
    let db = d1.beta ^ d2.beta;
    if da.count_ones() != 2 || da != db {
        return Ok(0.0);
    }
    // Ŝ₋Ŝ₊ ⊃ a†_pβ a_pα a†_qα a_qβ = −(a†_qα a_pα)(a†_pβ a_qβ): alpha moves
    // p → q while beta moves q → p.
    let p = (d2.alpha & da).trailing_zeros() as usize;
    let q = (d1.alpha & da).trailing_zeros() as usize;
    if d1.beta >> p & 1 != 1 || d2.beta >> q & 1 != 1 {
        return Ok(0.0);
    }
    Ok(-excitation_sign(d2.alpha, q, p) * excitation_sign(d2.beta, p, q))
}

fn string_singles(mask: SpinString, n_orb: usize) -> Vec<SpinString> {
    let empty = low_bits(n_orb) & !mask;
    let mut out = Vec::new();
    for i in occupied(mask) {
        for a in occupied(empty) {
            out.push(mask ^ (1 << i) ^ (1 << a));
        }
    }
    out
}

fn string_doubles(mask: SpinString, n_orb: usize) -> Vec<SpinString> {
    let empty = low_bits(n_orb) & !mask;
    let occ: Vec<usize> = occupied(mask).collect();
    let vir: Vec<usize> = occupied(empty).collect();
    let mut out = Vec::new();
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in vir.iter().enumerate() {
                for &b in &vir[y + 1..] {
                    out.push(mask ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b));
                }
            }
        }
    }
    out
}

/// Every determinant reachable from `d` by one or two spin-preserving
/// substitutions, each listed once; `d` itself is prepended when
/// `include_self` is set.
pub fn enumerate_connected(d: &Determinant, n_orb: usize, include_self: bool) -> Vec<Determinant> {
    let mut out = Vec::new();
    if include_self {
        out.push(*d);
    }
    let sa = string_singles(d.alpha, n_orb);
    let sb = string_singles(d.beta, n_orb);
    out.extend(sa.iter().map(|&a| Determinant::new(a, d.beta)));
    out.extend(sb.iter().map(|&b| Determinant::new(d.alpha, b)));
    out.extend(string_doubles(d.alpha, n_orb).into_iter().map(|a| Determinant::new(a, d.beta)));
    out.extend(string_doubles(d.beta, n_orb).into_iter().map(|b| Determinant::new(d.alpha, b)));
    for &a in &sa {
        for &b in &sb {
            out.push(Determinant::new(a, b));
        }
    }
    out
}

/// All strings with `k` of the lowest `n` bits set, in ascending order.
pub fn all_strings(n: usize, k: usize) -> Vec<SpinString> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x = low_bits(k);
    let limit = if n >= 64 { u64::MAX } else { 1u64 << n };
    while n >= 64 || x < limit {
        out.push(x);
        // Gosper's hack: next integer with the same popcount.
        let c = x & x.wrapping_neg();
        let r = x.wrapping_add(c);
        if r == 0 {
            break;
        }
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::fock::{FockOperators, dense_hamiltonian, dense_s2};
    use crate::testing::random_hamiltonian;
    use proptest::prelude::*;

    fn sector_dets(n: usize, na: usize, nb: usize) -> Vec<Determinant> {
        let mut out = Vec::new();
        for a in all_strings(n, na) {
            for b in all_strings(n, nb) {
                out.push(Determinant::new(a, b));
            }
        }
        out
    }

    #[test]
    fn split_examples() {
        let (a, b) = split_raw(&[true, false, true, false], 2).unwrap();
        assert_eq!((a, b), (0b01, 0b01));
        let (a, b) = split_raw(&[false; 6], 3).unwrap();
        assert_eq!((a, b), (0, 0));
        assert!(split_raw(&[true; 5], 3).is_err());
        let raw = RawBitString::parse("1010", 2).unwrap();
        assert_eq!(raw.to_string(), "1010");
    }

    proptest! {
        #[test]
        fn split_round_trips(bits in proptest::collection::vec(any::<bool>(), 2..40usize)) {
            let n = bits.len() / 2;
            let bits = &bits[..2 * n];
            let raw = RawBitString::new(n, split_raw(bits, n).unwrap().0, split_raw(bits, n).unwrap().1);
            prop_assert_eq!(raw.to_bits(), bits.to_vec());
        }
    }

    #[test]
    fn render_orbital_zero_leftmost() {
        let d = Determinant::new(0b10110, 0b00110);
        assert_eq!(d.render(5), "α:01101|β:01100");
    }

    #[test]
    fn all_strings_counts() {
        assert_eq!(all_strings(4, 2).len(), 6);
        assert_eq!(all_strings(6, 3).len(), 20);
        assert_eq!(all_strings(5, 0), vec![0]);
        assert_eq!(all_strings(3, 3), vec![0b111]);
        assert!(all_strings(23, 3).windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all_strings(23, 3).len(), 1771);
    }

    #[test]
    fn hf_diagonal_matches_dense_operator() {
        for seed in 0..3 {
            let ham = random_hamiltonian(4, 2, 1, seed);
            let ops = FockOperators::new(4);
            let dense = dense_hamiltonian(&ham, &ops);
            let hf = Determinant::hartree_fock(2, 1);
            let idx = ops.index_of(&hf);
            let e = slater_condon_element(&ham, &hf, &hf).unwrap();
            assert!((e - dense[[idx, idx]]).abs() < 1e-12);
        }
    }

    #[test]
    fn every_pair_matches_dense_operator() {
        for (seed, (na, nb)) in [(1, (2, 2)), (2, (2, 1)), (3, (3, 1)), (4, (1, 1))] {
            let ham = random_hamiltonian(4, na, nb, seed);
            let ops = FockOperators::new(4);
            let dense = dense_hamiltonian(&ham, &ops);
            let dets = sector_dets(4, na, nb);
            for d1 in &dets {
                for d2 in &dets {
                    let v = slater_condon_element(&ham, d1, d2).unwrap();
                    let w = dense[[ops.index_of(d1), ops.index_of(d2)]];
                    assert!((v - w).abs() < 1e-12, "{d1:?} {d2:?}: {v} vs {w}");
                    let back = slater_condon_element(&ham, d2, d1).unwrap();
                    assert!((v - back).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn triple_differences_vanish() {
        let ham = random_hamiltonian(6, 3, 2, 7);
        let d1 = Determinant::new(0b000111, 0b00011);
        let d2 = Determinant::new(0b111000, 0b00011);
        assert_eq!(slater_condon_element(&ham, &d1, &d2).unwrap(), 0.0);
        let d3 = Determinant::new(0b11001, 0b01100);
        assert_eq!((d1.alpha ^ d3.alpha).count_ones() + (d1.beta ^ d3.beta).count_ones(), 8);
        assert_eq!(slater_condon_element(&ham, &d1, &d3).unwrap(), 0.0);
    }

    #[test]
    fn sector_mismatch_is_an_error() {
        let ham = random_hamiltonian(3, 1, 1, 0);
        let d1 = Determinant::new(0b1, 0b1);
        let d2 = Determinant::new(0b11, 0b0);
        assert!(slater_condon_element(&ham, &d1, &d2).is_err());
        assert!(s2_element(&d1, &d2).is_err());
    }

    #[test]
    fn s2_simple_values() {
        let closed = Determinant::new(0b011, 0b011);
        assert_eq!(s2_element(&closed, &closed).unwrap(), 0.0);
        let single = Determinant::new(0b1, 0);
        assert_eq!(s2_element(&single, &single).unwrap(), 0.75);
        let high = Determinant::new(0b0111, 0b0001);
        assert_eq!(s2_element(&high, &high).unwrap(), 2.0);
    }

    #[test]
    fn s2_matches_dense_operator() {
        let ops = FockOperators::new(3);
        let s2 = dense_s2(&ops);
        for (na, nb) in [(2, 1), (1, 1), (2, 2), (3, 1)] {
            let dets = sector_dets(3, na, nb);
            for d1 in &dets {
                for d2 in &dets {
                    let v = s2_element(d1, d2).unwrap();
                    let w = s2[[ops.index_of(d1), ops.index_of(d2)]];
                    assert!((v - w).abs() < 1e-12, "{d1:?} {d2:?}: {v} vs {w}");
                }
            }
        }
    }

    #[test]
    fn connected_counts_and_pattern() {
        let d = Determinant::new(0b01, 0);
        assert_eq!(enumerate_connected(&d, 2, false).len(), 1);

        let n = 5;
        let d = Determinant::new(0b00111, 0b00011);
        let (ka, kb) = (3usize, 2usize);
        let singles = ka * (n - ka) + kb * (n - kb);
        let choose2 = |x: usize| x * x.saturating_sub(1) / 2;
        let doubles = choose2(ka) * choose2(n - ka)
            + choose2(kb) * choose2(n - kb)
            + ka * (n - ka) * kb * (n - kb);
        let conn = enumerate_connected(&d, n, false);
        assert_eq!(conn.len(), singles + doubles);
        let unique: std::collections::HashSet<_> = conn.iter().collect();
        assert_eq!(unique.len(), conn.len());
        assert_eq!(enumerate_connected(&d, n, true).len(), conn.len() + 1);
    }

    #[test]
    fn connectivity_matches_dense_nonzero_pattern() {
        let ham = random_hamiltonian(4, 2, 2, 31);
        let ops = FockOperators::new(4);
        let dense = dense_hamiltonian(&ham, &ops);
        let dets = sector_dets(4, 2, 2);
        for d in &dets {
            let conn: std::collections::HashSet<_> =
                enumerate_connected(d, 4, false).into_iter().collect();
            for other in &dets {
                if other == d {
                    continue;
                }
                let nonzero = dense[[ops.index_of(d), ops.index_of(other)]].abs() > 1e-14;
                assert_eq!(nonzero, conn.contains(other), "{d:?} -> {other:?}");
            }
        }
    }

    #[test]
    fn pair_excitation_matches_sequential_singles() {
        // a†_p a†_r a_s a_q = −a†_p a_s a†_r a_q + δ terms; for distinct
        // indices it equals (a†_p a_q)(a†_r a_s) when r≠q, s≠p.
        let mask = 0b1011u64;
        let (p, q, r, s) = (2, 0, 4, 3);
        let (m1, s1) = apply_excitation(mask, r, s).unwrap();
        let (m2, s2) = apply_excitation(m1, p, q).unwrap();
        let (m3, s3) = apply_pair_excitation(mask, p, q, r, s).unwrap();
        assert_eq!(m2, m3);
        assert_eq!(s1 * s2, s3);
    }
}
