//! Davidson iteration for the lowest eigenpair of a real symmetric operator.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dot;
use crate::linalg::symmetric_eigen;

/// A real symmetric operator known only through its action and diagonal.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Dense matrix wrapper.
pub struct DenseOperator<'a>(pub &'a Array2<f64>);

impl LinearOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, row) in self.0.rows().into_iter().enumerate() {
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.0.diag().to_vec()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_subspace_vectors: usize,
    /// Ritz vectors kept on restart.
    pub restart_vectors: usize,
    /// Ritz values closer than this are reported as degenerate.
    pub degeneracy_tol: f64,
    /// Also expand along the second Ritz pair so near-degeneracy can be seen.
    pub track_second_root: bool,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 500,
            max_subspace_vectors: 20,
            restart_vectors: 3,
            degeneracy_tol: 1e-9,
            track_second_root: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DavidsonResult {
    pub eigenvalue: f64,
    /// Unit-norm eigenvector.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub degenerate: bool,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Two passes of Gram–Schmidt against `basis`; returns the remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    normalize(v)
}

/// Small deterministic perturbation so the guess is not confined to one
/// symmetry block of the operator.
fn seed_component(i: usize) -> f64 {
    let mut x = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Lowest eigenpair of `op`.
///
/// Starts from `guess` when given, else from the unit vector on the
/// smallest diagonal element. Corrections use the diagonal preconditioner.
pub fn davidson(op: &dyn LinearOperator, guess: Option<&[f64]>, opts: &DavidsonOptions) -> DavidsonResult {
    let n = op.dim();
    let diag = op.diagonal();
    if n == 1 {
        return DavidsonResult {
            eigenvalue: diag[0],
            eigenvector: vec![1.0],
            iterations: 0,
            residual: 0.0,
            converged: true,
            degenerate: false,
        };
    }
    let mut x0 = match guess {
        Some(g) => g.to_vec(),
        None => {
            let imin = (0..n).min_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap_or(0);
            let mut v: Vec<f64> = (0..n).map(|i| 1e-3 * seed_component(i)).collect();
            v[imin] = 1.0;
            v
        }
    };
    normalize(&mut x0);

    let max_vecs = opts.max_subspace_vectors.max(opts.restart_vectors + 2).min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_vecs);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_vecs);
    let mut pending = vec![x0];

    let mut theta = f64::INFINITY;
    let mut x = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut degenerate = false;
    let mut r = vec![0.0; n];

    for iter in 0..opts.max_iterations.max(1) {
        for mut v in pending.drain(..) {
            if orthogonalize(&mut v, &basis) < 1e-10 {
                continue;
            }
            let mut av = vec![0.0; n];
            op.apply(&v, &mut av);
            basis.push(v);
            images.push(av);
        }
        let k = basis.len();
        let mut t = Array2::<f64>::zeros((k, k));
        for i in 0..k {
            for j in 0..=i {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                t[[i, j]] = v;
                t[[j, i]] = v;
            }
        }
        let (w, y) = symmetric_eigen(&t);
        theta = w[0];
        degenerate = k > 1 && (w[1] - w[0]).abs() < opts.degeneracy_tol;

        x.iter_mut().for_each(|e| *e = 0.0);
        r.iter_mut().for_each(|e| *e = 0.0);
        for j in 0..k {
            let c = y[[j, 0]];
            for i in 0..n {
                x[i] += c * basis[j][i];
                r[i] += c * images[j][i];
            }
        }
        r.iter_mut().zip(&x).for_each(|(ri, xi)| *ri -= theta * xi);
        residual = dot(&r, &r).sqrt();
        if residual < opts.tol || k == n {
            normalize(&mut x);
            return DavidsonResult {
                eigenvalue: theta,
                eigenvector: x,
                iterations: iter + 1,
                residual,
                converged: true,
                degenerate,
            };
        }

        let precondition = |r: &[f64], theta: f64| -> Vec<f64> {
            r.iter()
                .zip(&diag)
                .map(|(ri, di)| {
                    let d = theta - di;
                    let d = if d.abs() < 1e-8 { 1e-8f64.copysign(d) } else { d };
                    ri / d
                })
                .collect()
        };
        let mut corr = precondition(&r, theta);
        let mut second = None;
        if opts.track_second_root && k > 1 {
            let mut x1 = vec![0.0; n];
            let mut r1 = vec![0.0; n];
            for j in 0..k {
                let c = y[[j, 1]];
                for i in 0..n {
                    x1[i] += c * basis[j][i];
                    r1[i] += c * images[j][i];
                }
            }
            r1.iter_mut().zip(&x1).for_each(|(ri, xi)| *ri -= w[1] * xi);
            if dot(&r1, &r1).sqrt() > opts.tol {
                second = Some(precondition(&r1, w[1]));
            }
        }
        if k >= max_vecs {
            let keep = opts.restart_vectors.min(k);
            let mut new_basis = Vec::with_capacity(max_vecs);
            let mut new_images = Vec::with_capacity(max_vecs);
            for col in 0..keep {
                let mut v = vec![0.0; n];
                let mut av = vec![0.0; n];
                for j in 0..k {
                    let c = y[[j, col]];
                    v.iter_mut().zip(&basis[j]).for_each(|(a, b)| *a += c * b);
                    av.iter_mut().zip(&images[j]).for_each(|(a, b)| *a += c * b);
                }
                new_basis.push(v);
                new_images.push(av);
            }
            reorthonormalize(&mut new_basis, &mut new_images);
            basis = new_basis;
            images = new_images;
        }
        if orthogonalize(&mut corr, &basis) < 1e-10 {
            corr = r.clone();
            if orthogonalize(&mut corr, &basis) < 1e-10 {
                break;
            }
        }
        pending.push(corr);
        if let Some(mut c) = second {
            if orthogonalize(&mut c, &basis) > 1e-10 {
                pending.push(c);
            }
        }
    }
    normalize(&mut x);
    DavidsonResult {
        eigenvalue: theta,
        eigenvector: x,
        iterations: opts.max_iterations,
        residual,
        converged: residual < opts.tol,
        degenerate,
    }
}

/// Modified Gram–Schmidt applied consistently to vectors and their images.
fn reorthonormalize(basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>) {
    let mut kept_b: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    let mut kept_i: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for (mut v, mut av) in basis.drain(..).zip(images.drain(..)) {
        for (b, ab) in kept_b.iter().zip(&kept_i) {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            av.iter_mut().zip(ab).for_each(|(x, y)| *x -= c * y);
        }
        let nrm = dot(&v, &v).sqrt();
        if nrm < 1e-10 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        av.iter_mut().for_each(|x| *x /= nrm);
        kept_b.push(v);
        kept_i.push(av);
    }
    *basis = kept_b;
    *images = kept_i;
}
