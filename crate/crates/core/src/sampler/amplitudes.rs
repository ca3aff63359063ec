//! Cluster amplitudes: MP2 fallback, file format, reference orbital energies.
//!
//! Amplitude file layout (plain text, `#` starts a comment):
//!
//! ```text
//! spin = restricted          # or: unrestricted
//! n_orb = 6
//! n_occ_alpha = 3
//! n_occ_beta = 3
//! t1 3 3                     # block name, then its shape
//! 0.0 0.0 0.0 ...            # row-major values, any line breaks
//! t2 3 3 3 3
//! ...
//! ```
//!
//! Restricted files carry `t1` (occ × virt) and `t2` (occ, occ, virt, virt).
//! Unrestricted files carry `t1a`, `t1b`, `t2aa`, `t2bb` and `t2ab`, the last
//! indexed (i_α, j_β, a_α, b_β).

use std::collections::BTreeMap;

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqdError};
use crate::integrals::MolecularHamiltonian;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub n_orb: usize,
    pub n_occ_alpha: usize,
    pub n_occ_beta: usize,
    pub restricted: bool,
    pub t1_alpha: Array2<f64>,
    pub t1_beta: Array2<f64>,
    /// (i_α, j_β, a_α, b_β); for restricted amplitudes this is the t2 table.
    pub t2_ab: Array4<f64>,
    pub t2_aa: Option<Array4<f64>>,
    pub t2_bb: Option<Array4<f64>>,
}

impl Amplitudes {
    pub fn zeros_restricted(n_orb: usize, n_occ: usize) -> Self {
        let v = n_orb - n_occ;
        Self {
            n_orb,
            n_occ_alpha: n_occ,
            n_occ_beta: n_occ,
            restricted: true,
            t1_alpha: Array2::zeros((n_occ, v)),
            t1_beta: Array2::zeros((n_occ, v)),
            t2_ab: Array4::zeros((n_occ, n_occ, v, v)),
            t2_aa: None,
            t2_bb: None,
        }
    }

    pub fn zeros_unrestricted(n_orb: usize, n_occ_alpha: usize, n_occ_beta: usize) -> Self {
        let (va, vb) = (n_orb - n_occ_alpha, n_orb - n_occ_beta);
        Self {
            n_orb,
            n_occ_alpha,
            n_occ_beta,
            restricted: false,
            t1_alpha: Array2::zeros((n_occ_alpha, va)),
            t1_beta: Array2::zeros((n_occ_beta, vb)),
            t2_ab: Array4::zeros((n_occ_alpha, n_occ_beta, va, vb)),
            t2_aa: Some(Array4::zeros((n_occ_alpha, n_occ_alpha, va, va))),
            t2_bb: Some(Array4::zeros((n_occ_beta, n_occ_beta, vb, vb))),
        }
    }

    pub fn n_virt_alpha(&self) -> usize {
        self.n_orb - self.n_occ_alpha
    }

    pub fn n_virt_beta(&self) -> usize {
        self.n_orb - self.n_occ_beta
    }

    /// Largest violation of t2[i][j][a][b] = t2[j][i][b][a] (restricted only).
    pub fn pair_symmetry_error(&self) -> f64 {
        if !self.restricted {
            return 0.0;
        }
        let (o, v) = (self.n_occ_alpha, self.n_virt_alpha());
        let t = &self.t2_ab;
        let mut err = 0.0f64;
        for i in 0..o {
            for j in 0..o {
                for a in 0..v {
                    for b in 0..v {
                        err = err.max((t[[i, j, a, b]] - t[[j, i, b, a]]).abs());
                    }
                }
            }
        }
        err
    }
}

/// Diagonal Fock elements of the aufbau determinant with the lowest
/// `n_alpha` / `n_beta` orbitals occupied, per spin.
pub fn orbital_energies(ham: &MolecularHamiltonian, n_alpha: usize, n_beta: usize) -> (Vec<f64>, Vec<f64>) {
    let n = ham.n_orb;
    let eps = |same: usize, other: usize| -> Vec<f64> {
        (0..n)
            .map(|p| {
                let mut e = ham.h(p, p);
                for k in 0..same {
                    e += ham.eri(p, p, k, k) - ham.eri(p, k, k, p);
                }
                for k in 0..other {
                    e += ham.eri(p, p, k, k);
                }
                e
            })
            .collect()
    };
    (eps(n_alpha, n_beta), eps(n_beta, n_alpha))
}

fn denominator(d: f64) -> Result<f64> {
    if d.abs() <= 1e-8 {
        Err(SqdError::SmallDenominator(d))
    } else {
        Ok(d)
    }
}

/// First-order doubles amplitudes with t1 = 0.
///
/// Equal spin counts give restricted amplitudes
/// t2[i][j][a][b] = (ia|jb)/(ε_i+ε_j−ε_a−ε_b); otherwise opposite-spin
/// amplitudes use the per-spin energies and same-spin amplitudes the
/// antisymmetrized integrals.
pub fn mp2_amplitudes(ham: &MolecularHamiltonian, eps_alpha: &[f64], eps_beta: &[f64]) -> Result<Amplitudes> {
    let (n, na, nb) = (ham.n_orb, ham.n_alpha, ham.n_beta);
    if eps_alpha.len() != n || eps_beta.len() != n {
        return Err(SqdError::DimensionMismatch {
            expected: n,
            found: eps_alpha.len().min(eps_beta.len()),
        });
    }
    if na == nb {
        let mut amps = Amplitudes::zeros_restricted(n, na);
        for i in 0..na {
            for j in 0..na {
                for a in 0..n - na {
                    for b in 0..n - na {
                        let (pa, pb) = (na + a, na + b);
                        let d = denominator(eps_alpha[i] + eps_alpha[j] - eps_alpha[pa] - eps_alpha[pb])?;
                        amps.t2_ab[[i, j, a, b]] = ham.eri(i, pa, j, pb) / d;
                    }
                }
            }
        }
        return Ok(amps);
    }
    let mut amps = Amplitudes::zeros_unrestricted(n, na, nb);
    for i in 0..na {
        for j in 0..nb {
            for a in 0..n - na {
                for b in 0..n - nb {
                    let (pa, pb) = (na + a, nb + b);
                    let d = denominator(eps_alpha[i] + eps_beta[j] - eps_alpha[pa] - eps_beta[pb])?;
                    amps.t2_ab[[i, j, a, b]] = ham.eri(i, pa, j, pb) / d;
                }
            }
        }
    }
    let same = |nocc: usize, eps: &[f64]| -> Result<Array4<f64>> {
        let v = n - nocc;
        let mut t = Array4::zeros((nocc, nocc, v, v));
        for i in 0..nocc {
            for j in 0..nocc {
                if i == j {
                    continue;
                }
                for a in 0..v {
                    for b in 0..v {
                        if a == b {
                            continue;
                        }
                        let (pa, pb) = (nocc + a, nocc + b);
                        let d = denominator(eps[i] + eps[j] - eps[pa] - eps[pb])?;
                        t[[i, j, a, b]] = (ham.eri(i, pa, j, pb) - ham.eri(i, pb, j, pa)) / d;
                    }
                }
            }
        }
        Ok(t)
    };
    amps.t2_aa = Some(same(na, eps_alpha)?);
    amps.t2_bb = Some(same(nb, eps_beta)?);
    Ok(amps)
}

/// Second-order energy implied by the amplitudes.
pub fn mp2_energy(ham: &MolecularHamiltonian, amps: &Amplitudes) -> f64 {
    let (na, nb) = (amps.n_occ_alpha, amps.n_occ_beta);
    let mut e = 0.0;
    for ((i, j, a, b), &t) in amps.t2_ab.indexed_iter() {
        let (pa, pb) = (na + a, nb + b);
        e += if amps.restricted {
            t * (2.0 * ham.eri(i, pa, j, pb) - ham.eri(i, pb, j, pa))
        } else {
            t * ham.eri(i, pa, j, pb)
        };
    }
    for (t2, nocc) in [(&amps.t2_aa, na), (&amps.t2_bb, nb)] {
        if let Some(t2) = t2 {
            for ((i, j, a, b), &t) in t2.indexed_iter() {
                let (pa, pb) = (nocc + a, nocc + b);
                e += 0.25 * t * (ham.eri(i, pa, j, pb) - ham.eri(i, pb, j, pa));
            }
        }
    }
    e
}

fn write_block(out: &mut String, name: &str, shape: &[usize], values: impl Iterator<Item = f64>) {
    out.push_str(name);
    for d in shape {
        out.push_str(&format!(" {d}"));
    }
    out.push('\n');
    let row = shape.last().copied().unwrap_or(1).max(1);
    for (k, v) in values.enumerate() {
        out.push_str(&format!("{v:.17e}"));
        out.push(if (k + 1) % row == 0 { '\n' } else { ' ' });
    }
}

pub fn write_amplitudes(amps: &Amplitudes) -> String {
    let mut out = String::from("# cluster amplitudes\n");
    out.push_str(&format!(
        "spin = {}\nn_orb = {}\nn_occ_alpha = {}\nn_occ_beta = {}\n",
        if amps.restricted { "restricted" } else { "unrestricted" },
        amps.n_orb,
        amps.n_occ_alpha,
        amps.n_occ_beta
    ));
    if amps.restricted {
        write_block(&mut out, "t1", amps.t1_alpha.shape(), amps.t1_alpha.iter().copied());
        write_block(&mut out, "t2", amps.t2_ab.shape(), amps.t2_ab.iter().copied());
    } else {
        write_block(&mut out, "t1a", amps.t1_alpha.shape(), amps.t1_alpha.iter().copied());
        write_block(&mut out, "t1b", amps.t1_beta.shape(), amps.t1_beta.iter().copied());
        for (name, t) in [("t2aa", &amps.t2_aa), ("t2bb", &amps.t2_bb)] {
            if let Some(t) = t {
                write_block(&mut out, name, t.shape(), t.iter().copied());
            }
        }
        write_block(&mut out, "t2ab", amps.t2_ab.shape(), amps.t2_ab.iter().copied());
    }
    out
}

struct Block {
    line: usize,
    shape: Vec<usize>,
    values: Vec<f64>,
}

pub fn parse_amplitudes(text: &str) -> Result<Amplitudes> {
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    let mut blocks: BTreeMap<String, Block> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        if let Some((k, v)) = line.split_once('=') {
            keys.insert(k.trim().to_string(), v.trim().to_string());
            current = None;
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap_or_default();
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let shape = tokens
                .map(|t| t.parse::<usize>().map_err(|_| SqdError::parse(lineno, format!("bad dimension '{t}'"))))
                .collect::<Result<Vec<_>>>()?;
            blocks.insert(
                first.to_string(),
                Block {
                    line: lineno,
                    shape,
                    values: Vec::new(),
                },
            );
            current = Some(first.to_string());
            continue;
        }
        let name = current
            .as_ref()
            .ok_or_else(|| SqdError::parse(lineno, "values outside a block"))?;
        let block = blocks.get_mut(name).expect("current block exists");
        for t in line.split_whitespace() {
            let v = t
                .replace(['D', 'd'], "e")
                .parse::<f64>()
                .map_err(|_| SqdError::parse(lineno, format!("bad number '{t}'")))?;
            block.values.push(v);
        }
    }

    let key = |k: &str| -> Result<&String> {
        keys.get(k)
            .ok_or_else(|| SqdError::InvalidInput(format!("amplitude file is missing '{k}'")))
    };
    let num = |k: &str| -> Result<usize> {
        key(k)?
            .parse::<usize>()
            .map_err(|_| SqdError::InvalidInput(format!("'{k}' is not a count")))
    };
    let n_orb = num("n_orb")?;
    let n_occ_alpha = num("n_occ_alpha")?;
    let n_occ_beta = num("n_occ_beta")?;
    if n_occ_alpha > n_orb || n_occ_beta > n_orb {
        return Err(SqdError::InvalidInput("more occupied orbitals than orbitals".into()));
    }
    let restricted = match key("spin")?.as_str() {
        "restricted" => true,
        "unrestricted" => false,
        other => return Err(SqdError::InvalidInput(format!("unknown spin case '{other}'"))),
    };
    let take = |name: &str, shape: &[usize]| -> Result<Vec<f64>> {
        let b = blocks
            .get(name)
            .ok_or_else(|| SqdError::InvalidInput(format!("amplitude file is missing block '{name}'")))?;
        if b.shape != shape {
            return Err(SqdError::parse(
                b.line,
                format!("block '{name}' has shape {:?}, expected {shape:?}", b.shape),
            ));
        }
        let count: usize = shape.iter().product();
        if b.values.len() != count {
            return Err(SqdError::DimensionMismatch {
                expected: count,
                found: b.values.len(),
            });
        }
        Ok(b.values.clone())
    };
    let (oa, ob) = (n_occ_alpha, n_occ_beta);
    let (va, vb) = (n_orb - oa, n_orb - ob);
    let arr2 = |v: Vec<f64>, s: (usize, usize)| Array2::from_shape_vec(s, v).expect("checked shape");
    let arr4 = |v: Vec<f64>, s: (usize, usize, usize, usize)| Array4::from_shape_vec(s, v).expect("checked shape");
    let amps = if restricted {
        if oa != ob {
            return Err(SqdError::InvalidInput("restricted amplitudes need equal occupations".into()));
        }
        let t1 = arr2(take("t1", &[oa, va])?, (oa, va));
        Amplitudes {
            n_orb,
            n_occ_alpha: oa,
            n_occ_beta: ob,
            restricted,
            t1_beta: t1.clone(),
            t1_alpha: t1,
            t2_ab: arr4(take("t2", &[oa, oa, va, va])?, (oa, oa, va, va)),
            t2_aa: None,
            t2_bb: None,
        }
    } else {
        Amplitudes {
            n_orb,
            n_occ_alpha: oa,
            n_occ_beta: ob,
            restricted,
            t1_alpha: arr2(take("t1a", &[oa, va])?, (oa, va)),
            t1_beta: arr2(take("t1b", &[ob, vb])?, (ob, vb)),
            t2_ab: arr4(take("t2ab", &[oa, ob, va, vb])?, (oa, ob, va, vb)),
            t2_aa: Some(arr4(take("t2aa", &[oa, oa, va, va])?, (oa, oa, va, va))),
            t2_bb: Some(arr4(take("t2bb", &[ob, ob, vb, vb])?, (ob, ob, vb, vb))),
        }
    };
    let asym = amps.pair_symmetry_error();
    if asym > 1e-10 {
        return Err(SqdError::InvalidInput(format!("t2 violates pair symmetry by {asym:e}")));
    }
    Ok(amps)
}

pub fn load_amplitudes(path: &std::path::Path) -> Result<Amplitudes> {
    parse_amplitudes(&std::fs::read_to_string(path)?)
}
