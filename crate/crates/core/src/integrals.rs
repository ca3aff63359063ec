//! Molecular Hamiltonian data in an orthonormal orbital basis: FCIDUMP
//! ingestion and emission, frozen-core folding and orbital rotations.

use std::collections::HashMap;
use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqdError};
use crate::linalg::orthogonality_error;

/// Tolerance for two FCIDUMP lines that land on the same canonical slot.
const DUPLICATE_TOL: f64 = 1e-12;

/// One- and two-electron integrals (chemists' notation) plus the scalar core
/// energy and electron counts per spin.
///
/// The two-body table is stored densely with every symmetry-equivalent slot
/// filled, so `eri(p, q, r, s)` never needs index canonicalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularHamiltonian {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub core_energy: f64,
    h: Vec<f64>,
    eri: Vec<f64>,
}

impl MolecularHamiltonian {
    /// An all-zero Hamiltonian over `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb {
            return Err(SqdError::InvalidInput(format!(
                "electron counts ({n_alpha}, {n_beta}) exceed {n_orb} orbitals"
            )));
        }
        if n_orb > 64 {
            return Err(SqdError::InvalidInput(format!(
                "at most 64 orbitals are supported, got {n_orb}"
            )));
        }
        Ok(Self {
            n_orb,
            n_alpha,
            n_beta,
            core_energy: 0.0,
            h: vec![0.0; n_orb * n_orb],
            eri: vec![0.0; n_orb.pow(4)],
        })
    }

    /// Build from full tables. `h` must be symmetric and `eri` (row-major
    /// n⁴) must carry the 8-fold permutational symmetry.
    pub fn from_tables(
        n_alpha: usize,
        n_beta: usize,
        core_energy: f64,
        h: Array2<f64>,
        eri: Vec<f64>,
    ) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(SqdError::InvalidInput("one-body table is not square".into()));
        }
        if eri.len() != n.pow(4) {
            return Err(SqdError::DimensionMismatch {
                expected: n.pow(4),
                found: eri.len(),
            });
        }
        let mut ham = Self::zeros(n, n_alpha, n_beta)?;
        ham.core_energy = core_energy;
        ham.h = h.iter().copied().collect();
        ham.eri = eri;
        let asym = ham.symmetry_error();
        if asym > 1e-10 {
            return Err(SqdError::NotSymmetric(asym));
        }
        Ok(ham)
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orb + q]
    }

    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.eri[((p * n + q) * n + r) * n + s]
    }

    pub fn one_body(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.n_orb, self.n_orb), self.h.clone()).expect("square table")
    }

    /// Row-major n⁴ view of the two-body table.
    pub fn eri_slice(&self) -> &[f64] {
        &self.eri
    }

    /// Set h[p][q] and h[q][p].
    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.h[p * n + q] = value;
        self.h[q * n + p] = value;
    }

    /// Set (pq|rs) and all seven symmetry partners.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in eri_orbit(p, q, r, s) {
            let n = self.n_orb;
            self.eri[((a * n + b) * n + c) * n + d] = value;
        }
    }

    /// Largest violation of the one-body and 8-fold two-body symmetries.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n_orb;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                worst = worst.max((self.h(p, q) - self.h(q, p)).abs());
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        for (a, b, c, d) in eri_orbit(p, q, r, s) {
                            worst = worst.max((self.eri(a, b, c, d) - v).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Copy with different electron counts (same integrals).
    pub fn with_sector(&self, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > self.n_orb || n_beta > self.n_orb {
            return Err(SqdError::SectorMismatch(format!(
                "({n_alpha}, {n_beta}) electrons do not fit in {} orbitals",
                self.n_orb
            )));
        }
        let mut out = self.clone();
        out.n_alpha = n_alpha;
        out.n_beta = n_beta;
        Ok(out)
    }

    /// Fold the first `n_frozen` doubly occupied orbitals into the core
    /// energy and an effective one-body operator.
    pub fn freeze_core(&self, n_frozen: usize) -> Result<Self> {
        if n_frozen > self.n_alpha.min(self.n_beta) {
            return Err(SqdError::InvalidInput(format!(
                "cannot freeze {n_frozen} orbitals with ({}, {}) electrons",
                self.n_alpha, self.n_beta
            )));
        }
        if n_frozen == 0 {
            return Ok(self.clone());
        }
        let n_act = self.n_orb - n_frozen;
        let mut out = Self::zeros(n_act, self.n_alpha - n_frozen, self.n_beta - n_frozen)?;

        let mut core = self.core_energy;
        for i in 0..n_frozen {
            core += 2.0 * self.h(i, i);
            for j in 0..n_frozen {
                core += 2.0 * self.eri(i, i, j, j) - self.eri(i, j, j, i);
            }
        }
        out.core_energy = core;

        for p in 0..n_act {
            for q in 0..n_act {
                let (pp, qq) = (p + n_frozen, q + n_frozen);
                let mut v = self.h(pp, qq);
                for i in 0..n_frozen {
                    v += 2.0 * self.eri(pp, qq, i, i) - self.eri(pp, i, i, qq);
                }
                out.h[p * n_act + q] = v;
            }
        }
        for p in 0..n_act {
            for q in 0..n_act {
                for r in 0..n_act {
                    for s in 0..n_act {
                        out.eri[((p * n_act + q) * n_act + r) * n_act + s] =
                            self.eri(p + n_frozen, q + n_frozen, r + n_frozen, s + n_frozen);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Transform to the orbital basis given by the columns of `u`:
    /// h' = Uᵀ h U and the matching four-index contraction of the two-body
    /// table. The core energy is unchanged.
    pub fn rotate(&self, u: &Array2<f64>) -> Result<Self> {
        let n = self.n_orb;
        if u.nrows() != n || u.ncols() != n {
            return Err(SqdError::DimensionMismatch {
                expected: n,
                found: u.nrows(),
            });
        }
        let orth = orthogonality_error(u);
        if orth > 1e-10 {
            return Err(SqdError::NotOrthogonal(orth));
        }
        let h = self.one_body();
        let h_rot = u.t().dot(&h).dot(u);

        // Four passes of "contract the leading index, rotate it to the back".
        let mut work = Array2::from_shape_vec((n, n * n * n), self.eri.clone()).expect("n x n^3");
        for _ in 0..4 {
            let next = work.t().dot(u);
            let flat: Vec<f64> = next.iter().copied().collect();
            work = Array2::from_shape_vec((n, n * n * n), flat).expect("n x n^3");
        }
        let mut out = self.clone();
        out.h = h_rot.iter().copied().collect();
        out.eri = work.into_raw_vec_and_offset().0;
        out.symmetrize();
        Ok(out)
    }

    /// Average symmetry partners to remove round-off asymmetry.
    fn symmetrize(&mut self) {
        let n = self.n_orb;
        for p in 0..n {
            for q in 0..p {
                let v = 0.5 * (self.h(p, q) + self.h(q, p));
                self.set_h(p, q, v);
            }
        }
        for (p, q, r, s) in canonical_eri_indices(n) {
            let orbit = eri_orbit(p, q, r, s);
            let mean = orbit.iter().map(|&(a, b, c, d)| self.eri(a, b, c, d)).sum::<f64>() / 8.0;
            self.set_eri(p, q, r, s, mean);
        }
    }
}

/// All eight index permutations that leave a real (pq|rs) invariant.
pub fn eri_orbit(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Canonical representative of (pq|rs): p ≥ q, r ≥ s, pair(pq) ≥ pair(rs).
pub fn canonical_eri(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let (p, q) = if p >= q { (p, q) } else { (q, p) };
    let (r, s) = if r >= s { (r, s) } else { (s, r) };
    if (p, q) >= (r, s) {
        (p, q, r, s)
    } else {
        (r, s, p, q)
    }
}

fn canonical_eri_indices(n: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    out.push((p, q, r, s));
                }
            }
        }
    }
    out
}

#[derive(Debug, Default)]
struct FcidumpHeader {
    norb: Option<usize>,
    nelec: Option<i64>,
    ms2: i64,
}

fn parse_header(text: &str, first_line: usize) -> Result<FcidumpHeader> {
    let cleaned = text.replace('=', " = ").replace(',', " ");
    let tokens: Vec<&str> = cleaned.split_whitespace().collect();
    let mut header = FcidumpHeader::default();
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && tokens[i + 1] == "=" {
            let key = tokens[i].to_ascii_uppercase();
            let value = tokens.get(i + 2).ok_or_else(|| {
                SqdError::parse(first_line, format!("header key {key} has no value"))
            })?;
            let as_int = |v: &str| -> Result<i64> {
                v.parse::<i64>().map_err(|_| {
                    SqdError::parse(first_line, format!("header key {key}: bad integer '{v}'"))
                })
            };
            match key.as_str() {
                "NORB" => {
                    let v = as_int(value)?;
                    if v <= 0 {
                        return Err(SqdError::parse(first_line, "NORB must be positive"));
                    }
                    header.norb = Some(v as usize);
                }
                "NELEC" => header.nelec = Some(as_int(value)?),
                "MS2" => header.ms2 = as_int(value)?,
                // ORBSYM, ISYM, UHF and friends are accepted and ignored.
                _ => {}
            }
            i += 3;
        } else {
            i += 1;
        }
    }
    Ok(header)
}

/// Parse FCIDUMP text (namelist header, then `value i j k l` lines with
/// 1-based orbital indices).
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| SqdError::parse(1, "empty FCIDUMP"))?;
    if !lines[start].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(SqdError::parse(start + 1, "header must start with &FCI"));
    }
    let mut header_text = String::new();
    let mut body_start = None;
    for (idx, line) in lines.iter().enumerate().skip(start) {
        let upper = line.trim().to_ascii_uppercase();
        let (content, done) = if let Some(pos) = upper.find("&END") {
            (&line.trim()[..pos], true)
        } else if upper == "/" || upper.ends_with('/') {
            (line.trim().trim_end_matches('/'), true)
        } else {
            (line.trim(), false)
        };
        let content = if idx == start { &content[4.min(content.len())..] } else { content };
        header_text.push_str(content);
        header_text.push(' ');
        if done {
            body_start = Some(idx + 1);
            break;
        }
    }
    let body_start = body_start.ok_or_else(|| SqdError::parse(start + 1, "unterminated namelist header"))?;
    let header = parse_header(&header_text, start + 1)?;
    let norb = header
        .norb
        .ok_or_else(|| SqdError::parse(start + 1, "header lacks NORB"))?;
    let nelec = header
        .nelec
        .ok_or_else(|| SqdError::parse(start + 1, "header lacks NELEC"))?;
    if (nelec + header.ms2).rem_euclid(2) != 0 {
        return Err(SqdError::parse(start + 1, "NELEC + MS2 must be even"));
    }
    let n_alpha = (nelec + header.ms2) / 2;
    let n_beta = (nelec - header.ms2) / 2;
    if n_alpha < 0 || n_beta < 0 || n_alpha as usize > norb || n_beta as usize > norb {
        return Err(SqdError::parse(
            start + 1,
            format!("electron counts ({n_alpha}, {n_beta}) incompatible with NORB={norb}"),
        ));
    }
    let mut ham = MolecularHamiltonian::zeros(norb, n_alpha as usize, n_beta as usize)
        .map_err(|e| SqdError::parse(start + 1, e.to_string()))?;

    let mut seen_eri: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut seen_h: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_core: Option<f64> = None;

    for (idx, line) in lines.iter().enumerate().skip(body_start) {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(SqdError::parse(lineno, "expected 'value i j k l'"));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| SqdError::parse(lineno, format!("bad value '{}'", fields[0])))?;
        let mut idx4 = [0usize; 4];
        for (slot, f) in idx4.iter_mut().zip(&fields[1..]) {
            let v: i64 = f
                .parse()
                .map_err(|_| SqdError::parse(lineno, format!("bad index '{f}'")))?;
            if v < 0 || v as usize > norb {
                return Err(SqdError::parse(lineno, format!("index {v} outside [1, {norb}]")));
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx4;
        let check = |old: Option<f64>| -> Result<()> {
            match old {
                Some(o) if (o - value).abs() > DUPLICATE_TOL => Err(SqdError::parse(
                    lineno,
                    format!("inconsistent duplicate entry ({o} vs {value})"),
                )),
                _ => Ok(()),
            }
        };
        match (i != 0, j != 0, k != 0, l != 0) {
            (true, true, true, true) => {
                let key = canonical_eri(i - 1, j - 1, k - 1, l - 1);
                check(seen_eri.insert(key, value))?;
                ham.set_eri(i - 1, j - 1, k - 1, l - 1, value);
            }
            (true, true, false, false) => {
                let key = if i >= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
                check(seen_h.insert(key, value))?;
                ham.set_h(i - 1, j - 1, value);
            }
            (false, false, false, false) => {
                check(seen_core.replace(value))?;
                ham.core_energy = value;
            }
            // Orbital-energy lines written by some programs.
            (true, false, false, false) => {}
            _ => return Err(SqdError::parse(lineno, "unrecognised index pattern")),
        }
    }
    Ok(ham)
}

/// Emit FCIDUMP text: one line per canonically unique nonzero slot, then the
/// core-energy line. Values are written with 17 significant digits so that
/// parsing the output reproduces every slot exactly.
pub fn write_fcidump(ham: &MolecularHamiltonian) -> String {
    let n = ham.n_orb;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(
        out,
        "&FCI NORB={},NELEC={},MS2={},\n ORBSYM={},\n ISYM=1,\n&END",
        n,
        ham.n_alpha + ham.n_beta,
        ham.n_alpha as i64 - ham.n_beta as i64,
        orbsym
    );
    for (p, q, r, s) in canonical_eri_indices(n) {
        let v = ham.eri(p, q, r, s);
        if v != 0.0 {
            let _ = writeln!(out, "{:>25.16e} {:>3} {:>3} {:>3} {:>3}", v, p + 1, q + 1, r + 1, s + 1);
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ham.h(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{:>25.16e} {:>3} {:>3} {:>3} {:>3}", v, p + 1, q + 1, 0, 0);
            }
        }
    }
    let _ = writeln!(out, "{:>25.16e} {:>3} {:>3} {:>3} {:>3}", ham.core_energy, 0, 0, 0, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_antisymmetric;
    use crate::testing::random_hamiltonian;
    use proptest::prelude::*;

    const ONE_ORBITAL: &str = "&FCI NORB=1,NELEC=2,MS2=0,\n ORBSYM=1,\n ISYM=1,\n&END\n\
        -1.25 1 1 0 0\n0.675 1 1 1 1\n0.71 0 0 0 0\n";

    #[test]
    fn parses_single_orbital() {
        let h = parse_fcidump(ONE_ORBITAL).unwrap();
        assert_eq!(h.n_orb, 1);
        assert_eq!((h.n_alpha, h.n_beta), (1, 1));
        assert_eq!(h.h(0, 0), -1.25);
        assert_eq!(h.eri(0, 0, 0, 0), 0.675);
        assert_eq!(h.core_energy, 0.71);
    }

    #[test]
    fn completes_one_body_symmetry() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 1 2 0 0\n";
        let h = parse_fcidump(text).unwrap();
        assert_eq!(h.h(0, 1), 0.5);
        assert_eq!(h.h(1, 0), 0.5);
    }

    #[test]
    fn completes_two_body_symmetry() {
        let text = "&FCI NORB=3,NELEC=2,MS2=0 &END\n0.25 3 1 2 1\n";
        let h = parse_fcidump(text).unwrap();
        for (a, b, c, d) in eri_orbit(2, 0, 1, 0) {
            assert_eq!(h.eri(a, b, c, d), 0.25);
        }
        assert_eq!(h.symmetry_error(), 0.0);
    }

    #[test]
    fn slash_terminated_header_and_fortran_exponent() {
        let text = "&FCI\n NORB=2,\n NELEC=3,\n MS2=1,\n/\n 1.5D-01 1 1 0 0\n";
        let h = parse_fcidump(text).unwrap();
        assert_eq!((h.n_alpha, h.n_beta), (2, 1));
        assert!((h.h(0, 0) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(parse_fcidump("NORB=1").is_err());
        assert!(parse_fcidump("&FCI NORB=1,NELEC=1,MS2=0 &END\n").is_err());
        assert!(parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0 &END\n1.0 2 1 0 0\n").is_err());
        let dup = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 1 2 0 0\n0.6 2 1 0 0\n";
        assert!(matches!(parse_fcidump(dup), Err(SqdError::Parse { line: 3, .. })));
        let ok_dup = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 1 2 0 0\n0.5 2 1 0 0\n";
        assert!(parse_fcidump(ok_dup).is_ok());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 1 2 1 0\n").is_err());
    }

    #[test]
    fn writes_core_line_for_zero_hamiltonian() {
        let h = MolecularHamiltonian::zeros(3, 1, 1).unwrap();
        let text = write_fcidump(&h);
        let body: Vec<&str> = text.lines().skip_while(|l| !l.contains("&END")).skip(1).collect();
        assert_eq!(body.len(), 1);
        assert!(body[0].trim().ends_with("0   0   0   0"));
    }

    #[test]
    fn writes_three_lines_for_single_orbital() {
        let h = parse_fcidump(ONE_ORBITAL).unwrap();
        let text = write_fcidump(&h);
        let body: Vec<&str> = text.lines().skip_while(|l| !l.contains("&END")).skip(1).collect();
        assert_eq!(body.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fcidump_round_trip(seed in 0u64..10_000, n in 1usize..6) {
            let h = random_hamiltonian(n, n.min(2), n.min(1), seed);
            let text = write_fcidump(&h);
            let back = parse_fcidump(&text).unwrap();
            prop_assert_eq!(back.n_orb, h.n_orb);
            prop_assert_eq!((back.n_alpha, back.n_beta), (h.n_alpha, h.n_beta));
            prop_assert!((back.core_energy - h.core_energy).abs() <= 1e-12);
            for (a, b) in back.h.iter().zip(&h.h) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for (a, b) in back.eri.iter().zip(&h.eri) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rotate_identity_and_permutation() {
        let h = random_hamiltonian(4, 2, 2, 11);
        let same = h.rotate(&Array2::eye(4)).unwrap();
        assert!((same.core_energy - h.core_energy).abs() == 0.0);
        for (a, b) in same.eri.iter().zip(&h.eri) {
            assert!((a - b).abs() < 1e-14);
        }
        // Columns of U are the new orbitals: new orbital j = old orbital perm[j].
        let perm = [2usize, 0, 3, 1];
        let mut u = Array2::zeros((4, 4));
        for (j, &p) in perm.iter().enumerate() {
            u[[p, j]] = 1.0;
        }
        let rot = h.rotate(&u).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                assert!((rot.h(p, q) - h.h(perm[p], perm[q])).abs() < 1e-14);
                for r in 0..4 {
                    for s in 0..4 {
                        let want = h.eri(perm[p], perm[q], perm[r], perm[s]);
                        assert!((rot.eri(p, q, r, s) - want).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn rotate_rejects_non_orthogonal() {
        let h = random_hamiltonian(2, 1, 1, 1);
        let u = ndarray::array![[1.0, 0.1], [0.0, 1.0]];
        assert!(matches!(h.rotate(&u), Err(SqdError::NotOrthogonal(_))));
    }

    #[test]
    fn rotations_compose() {
        let h = random_hamiltonian(5, 2, 2, 23);
        let k1 = crate::testing::random_antisymmetric(5, 0.7, 1);
        let k2 = crate::testing::random_antisymmetric(5, 0.7, 2);
        let u1 = expm_antisymmetric(&k1);
        let u2 = expm_antisymmetric(&k2);
        let a = h.rotate(&u1).unwrap().rotate(&u2).unwrap();
        let b = h.rotate(&u1.dot(&u2)).unwrap();
        for (x, y) in a.eri.iter().zip(&b.eri) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in a.h.iter().zip(&b.h) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(a.symmetry_error() < 1e-14);
    }

    #[test]
    fn freeze_zero_is_identity_and_errors_when_too_many() {
        let h = random_hamiltonian(4, 2, 1, 5);
        assert_eq!(h.freeze_core(0).unwrap(), h);
        assert!(h.freeze_core(2).is_err());
    }

    #[test]
    fn freeze_core_energy_of_closed_shell_core() {
        // Freezing every electron leaves the closed-shell mean-field energy.
        let h = random_hamiltonian(3, 2, 2, 8);
        let frozen = h.freeze_core(2).unwrap();
        assert_eq!(frozen.n_orb, 1);
        assert_eq!((frozen.n_alpha, frozen.n_beta), (0, 0));
        let mut e = h.core_energy;
        for i in 0..2 {
            e += 2.0 * h.h(i, i);
            for j in 0..2 {
                e += 2.0 * h.eri(i, i, j, j) - h.eri(i, j, j, i);
            }
        }
        assert!((frozen.core_energy - e).abs() < 1e-14);
    }
}
