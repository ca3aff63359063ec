//! Truncated local unitary cluster Jastrow parameters from t2 amplitudes.
//!
//! The doubles amplitudes are reshaped into a symmetric matrix T over
//! composite (occupied, virtual) indices and eigendecomposed,
//! T = Σ_l σ_l v_l v_lᵀ. Mode l gives the one-body matrix
//! X = M + Mᵀ with M[a][i] = v_l(i, a), diagonalized as X = U diag(d) Uᵀ;
//! the layer is then e^{K̂} e^{iĴ} e^{−K̂} with e^K = U and
//! J = (σ_l / 2) d dᵀ over spin-orbitals. Contracting J back through U
//! returns σ_l v_l v_lᵀ, so keeping every mode reproduces T exactly.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use super::amplitudes::Amplitudes;
use crate::error::{Result, SqdError};
use crate::linalg::{expm_antisymmetric, rotation_generator_for_eigenbasis, symmetric_eigen};

/// Which spin-orbital pairs may carry a Jastrow coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    AllToAll,
    /// Same-spin nearest neighbours along the orbital chain.
    Line,
    /// `Line` plus opposite-spin coupling on every k-th orbital.
    LineBridge(usize),
}

impl Connectivity {
    /// Boolean adjacency over 2n spin-orbitals (alpha block first).
    pub fn mask(&self, n_orb: usize) -> Array2<bool> {
        let m = 2 * n_orb;
        Array2::from_shape_fn((m, m), |(p, q)| {
            let (sp, op) = (p / n_orb, p % n_orb);
            let (sq, oq) = (q / n_orb, q % n_orb);
            match self {
                Connectivity::AllToAll => true,
                Connectivity::Line => sp == sq && op.abs_diff(oq) <= 1,
                Connectivity::LineBridge(k) => {
                    (sp == sq && op.abs_diff(oq) <= 1) || (sp != sq && op == oq && op % k.max(&1) == 0)
                }
            }
        })
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connectivity::AllToAll => write!(f, "all-to-all"),
            Connectivity::Line => write!(f, "line"),
            Connectivity::LineBridge(k) => write!(f, "line+bridge({k})"),
        }
    }
}

impl FromStr for Connectivity {
    type Err = SqdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "all-to-all" => return Ok(Connectivity::AllToAll),
            "line" => return Ok(Connectivity::Line),
            _ => {}
        }
        s.strip_prefix("line+bridge(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|k| k.trim().parse::<usize>().ok())
            .filter(|&k| k > 0)
            .map(Connectivity::LineBridge)
            .ok_or_else(|| SqdError::Config(format!("unknown connectivity '{s}'")))
    }
}

impl Serialize for Array2Bool {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Serializable wrapper for the connectivity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Array2Bool(pub Array2<bool>);

#[derive(Debug, Clone, Serialize)]
pub struct LucjLayer {
    pub k_alpha: Array2<f64>,
    pub k_beta: Array2<f64>,
    /// Symmetric 2n × 2n coupling over spin-orbitals.
    pub j: Array2<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LucjParameters {
    pub n_orb: usize,
    pub layers: Vec<LucjLayer>,
    pub final_k_alpha: Array2<f64>,
    pub final_k_beta: Array2<f64>,
    pub mask: Array2Bool,
    /// σ of the retained modes, largest |σ| first.
    pub kept: Vec<f64>,
    /// σ of the discarded modes.
    pub discarded: Vec<f64>,
}

impl LucjParameters {
    /// Σ σ² over discarded modes: the squared Frobenius norm of the
    /// truncation error in T.
    pub fn tail_norm_sq(&self) -> f64 {
        self.discarded.iter().map(|s| s * s).sum()
    }
}

/// Composite-index layout: (spin, occupied, virtual) triples in row order.
fn composite_index(amps: &Amplitudes) -> Vec<(usize, usize, usize)> {
    let mut idx = Vec::new();
    for i in 0..amps.n_occ_alpha {
        for a in 0..amps.n_virt_alpha() {
            idx.push((0, i, a));
        }
    }
    if !amps.restricted {
        for i in 0..amps.n_occ_beta {
            for a in 0..amps.n_virt_beta() {
                idx.push((1, i, a));
            }
        }
    }
    idx
}

/// The symmetric matrix T over composite indices.
///
/// Restricted: T[(ia),(jb)] = t2[i][j][a][b]. Unrestricted: same-spin blocks
/// hold ½ t2σσ and the alpha–beta block holds t2ab.
pub fn composite_t2(amps: &Amplitudes) -> Array2<f64> {
    let idx = composite_index(amps);
    Array2::from_shape_fn((idx.len(), idx.len()), |(r, c)| {
        let (s1, i, a) = idx[r];
        let (s2, j, b) = idx[c];
        if amps.restricted {
            return amps.t2_ab[[i, j, a, b]];
        }
        match (s1, s2) {
            (0, 0) => 0.5 * amps.t2_aa.as_ref().map_or(0.0, |t| t[[i, j, a, b]]),
            (1, 1) => 0.5 * amps.t2_bb.as_ref().map_or(0.0, |t| t[[i, j, a, b]]),
            (0, 1) => amps.t2_ab[[i, j, a, b]],
            _ => amps.t2_ab[[j, i, b, a]],
        }
    })
}

/// Eigenbasis of a symmetric matrix with columns permuted and sign-fixed to
/// stay close to the identity, so the rotation logarithm is well defined.
fn aligned_eigenbasis(x: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>, Array2<f64>)> {
    let n = x.nrows();
    let (w, v) = symmetric_eigen(x);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..n).map(move |k| (p, k))).collect();
    pairs.sort_by(|&(p1, k1), &(p2, k2)| v[[p2, k2]].abs().total_cmp(&v[[p1, k1]].abs()));
    let mut slot = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (p, k) in pairs {
        if slot[p] == usize::MAX && !used[k] {
            slot[p] = k;
            used[k] = true;
        }
    }
    let mut u = Array2::zeros((n, n));
    let mut d = vec![0.0; n];
    for p in 0..n {
        u.column_mut(p).assign(&v.column(slot[p]));
        d[p] = w[slot[p]];
    }
    let (u, k) = rotation_generator_for_eigenbasis(&u)?;
    Ok((d, u, k))
}

/// One-body matrix X = M + Mᵀ for one spin, M[a][i] = v(i, a).
fn mode_matrix(n_orb: usize, n_occ: usize, values: impl Iterator<Item = (usize, usize, f64)>) -> Array2<f64> {
    let mut x = Array2::zeros((n_orb, n_orb));
    for (i, a, val) in values {
        x[[n_occ + a, i]] += val;
        x[[i, n_occ + a]] += val;
    }
    x
}

/// Final orbital rotation absorbing t1: K[a][i] = t1[i][a], K[i][a] = −t1[i][a].
fn t1_generator(n_orb: usize, t1: &Array2<f64>) -> Array2<f64> {
    let n_occ = t1.nrows();
    let mut k = Array2::zeros((n_orb, n_orb));
    for ((i, a), &t) in t1.indexed_iter() {
        k[[n_occ + a, i]] = t;
        k[[i, n_occ + a]] = -t;
    }
    k
}

/// Factorize the amplitudes into `n_layers` LUCJ layers and apply the
/// connectivity mask to every J.
pub fn build_lucj(amps: &Amplitudes, n_layers: usize, connectivity: Connectivity) -> Result<LucjParameters> {
    if n_layers == 0 {
        return Err(SqdError::InvalidInput("at least one LUCJ layer is required".into()));
    }
    let n = amps.n_orb;
    let mask = connectivity.mask(n);
    let t = composite_t2(amps);
    let idx = composite_index(amps);
    let (w, v) = symmetric_eigen(&t);
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()).then(a.cmp(&b)));
    let largest = order.first().map_or(0.0, |&k| w[k].abs());
    let rank = order.iter().filter(|&&k| w[k].abs() > 1e-12 * largest.max(1.0)).count();
    if rank > 0 && n_layers > rank {
        return Err(SqdError::InvalidInput(format!(
            "{n_layers} layers requested but the amplitude matrix has rank {rank}"
        )));
    }

    let mut layers = Vec::with_capacity(n_layers);
    let mut kept = Vec::with_capacity(n_layers);
    for &mode in order.iter().take(n_layers) {
        let sigma = if rank == 0 { 0.0 } else { w[mode] };
        let col = if rank == 0 { v.column(mode).mapv(|_| 0.0) } else { v.column(mode).to_owned() };
        let col = &col;
        let idx = &idx;
        let entries = |spin: usize| {
            idx.iter()
                .enumerate()
                .filter(move |(_, &(s, _, _))| s == spin)
                .map(move |(r, &(_, i, a))| (i, a, col[r]))
        };
        let xa = mode_matrix(n, amps.n_occ_alpha, entries(0));
        let xb = if amps.restricted {
            xa.clone()
        } else {
            mode_matrix(n, amps.n_occ_beta, entries(1))
        };
        let (da, _, ka) = aligned_eigenbasis(&xa)?;
        let (db, kb) = if amps.restricted {
            (da.clone(), ka.clone())
        } else {
            let (db, _, kb) = aligned_eigenbasis(&xb)?;
            (db, kb)
        };
        let d: Vec<f64> = da.iter().chain(&db).copied().collect();
        let j = Array2::from_shape_fn((2 * n, 2 * n), |(p, q)| {
            if mask[[p, q]] {
                0.5 * sigma * (d[p] * d[q])
            } else {
                0.0
            }
        });
        layers.push(LucjLayer {
            k_alpha: ka,
            k_beta: kb,
            j,
        });
        kept.push(sigma);
    }
    let discarded = order.iter().skip(n_layers).map(|&k| w[k]).collect();
    Ok(LucjParameters {
        n_orb: n,
        layers,
        final_k_alpha: t1_generator(n, &amps.t1_alpha),
        final_k_beta: t1_generator(n, &amps.t1_beta),
        mask: Array2Bool(mask),
        kept,
        discarded,
    })
}

/// Rebuild the composite matrix T from the layer generators:
/// T[(iσ aσ),(jτ bτ)] = 2 Σ_l Σ_pq J^{στ}_pq U^σ_ap U^σ_ip U^τ_bq U^τ_jq with
/// U = exp(K). For restricted amplitudes the alpha–beta block is used.
pub fn reconstruct_composite(params: &LucjParameters, amps: &Amplitudes) -> Array2<f64> {
    let n = params.n_orb;
    let idx = composite_index(amps);
    let occ = [amps.n_occ_alpha, amps.n_occ_beta];
    let mut t = Array2::zeros((idx.len(), idx.len()));
    for layer in &params.layers {
        let u = [expm_antisymmetric(&layer.k_alpha), expm_antisymmetric(&layer.k_beta)];
        // w[(i,a)][p] = U^σ_ap U^σ_ip for the spin σ of the composite index
        let w: Vec<Vec<f64>> = idx
            .iter()
            .map(|&(s, i, a)| (0..n).map(|p| u[s][[occ[s] + a, p]] * u[s][[i, p]]).collect())
            .collect();
        for (r, &(s1, _, _)) in idx.iter().enumerate() {
            for (c, &(s2, _, _)) in idx.iter().enumerate() {
                let (s1, s2) = if amps.restricted { (0, 1) } else { (s1, s2) };
                let mut acc = 0.0;
                for p in 0..n {
                    let wp = w[r][p];
                    if wp == 0.0 {
                        continue;
                    }
                    for q in 0..n {
                        acc += layer.j[[s1 * n + p, s2 * n + q]] * wp * w[c][q];
                    }
                }
                t[[r, c]] += 2.0 * acc;
            }
        }
    }
    t
}

/// Restricted t2 table rebuilt from the parameters.
pub fn reconstruct_t2(params: &LucjParameters, amps: &Amplitudes) -> Result<Array4<f64>> {
    if !amps.restricted {
        return Err(SqdError::InvalidInput("t2 table reconstruction needs restricted amplitudes".into()));
    }
    let (o, v) = (amps.n_occ_alpha, amps.n_virt_alpha());
    let t = reconstruct_composite(params, amps);
    Ok(Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| t[[i * v + a, j * v + b]]))
}
