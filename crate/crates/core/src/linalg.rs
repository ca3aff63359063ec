//! Small dense linear-algebra kernels: symmetric eigensolver (cyclic Jacobi),
//! matrix exponential of real antisymmetric generators and the logarithm of
//! rotation matrices.

use ndarray::{Array1, Array2};

use crate::error::{Result, SqdError};

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// the columns of the second matrix. Only the symmetric part of the input
/// is meaningful; callers check symmetry.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let (values, rows) = jacobi(matrix, true);
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted = Array1::from_iter(order.iter().map(|&i| values[i]));
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = rows[src * n + row];
        }
    }
    (sorted, vectors)
}

/// Ascending eigenvalues only.
pub fn symmetric_eigenvalues(matrix: &Array2<f64>) -> Array1<f64> {
    let (mut values, _) = jacobi(matrix, false);
    values.sort_by(f64::total_cmp);
    Array1::from(values)
}

/// Cyclic Jacobi on a row-major copy, in round-robin order: each round
/// rotates n/2 disjoint index pairs, applied first to rows and then to
/// columns, so every pass over memory is contiguous. Eigenvectors are
/// accumulated as rows.
fn jacobi(matrix: &Array2<f64>, want_vectors: bool) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigen needs a square matrix");
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[[i, j]] + matrix[[j, i]]);
        }
    }
    let mut v = vec![0.0; if want_vectors { n * n } else { 0 }];
    if want_vectors {
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 2 || scale == 0.0 {
        return ((0..n).map(|i| a[i * n + i]).collect(), v);
    }

    let m = n + n % 2;
    let mut rotations: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(m / 2);
    for sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        // Early sweeps only touch the larger elements.
        let threshold = if sweep < 3 {
            0.2 * off.sqrt() / (n * n) as f64
        } else {
            1e-18 * scale
        };
        for round in 0..m - 1 {
            rotations.clear();
            for k in 0..m / 2 {
                let (x, y) = if k == 0 {
                    (round, m - 1)
                } else {
                    ((round + k) % (m - 1), (round + m - 1 - k) % (m - 1))
                };
                let (p, q) = (x.min(y), x.max(y));
                if q >= n {
                    continue;
                }
                let apq = a[p * n + q];
                if apq.abs() <= threshold {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push((p, q, c, t * c));
            }
            if rotations.is_empty() {
                continue;
            }
            for &(p, q, c, s) in &rotations {
                rotate_rows(&mut a, n, p, q, c, s);
                if want_vectors {
                    rotate_rows(&mut v, n, p, q, c, s);
                }
            }
            for row in a.chunks_exact_mut(n) {
                for &(p, q, c, s) in &rotations {
                    let (xp, yq) = (row[p], row[q]);
                    row[p] = c * xp - s * yq;
                    row[q] = s * xp + c * yq;
                }
            }
            for &(p, q, _, _) in &rotations {
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

fn rotate_rows(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (row_p, row_q) = split_rows(a, n, p, q);
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

fn split_rows(a: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * n);
    (&mut head[p * n..p * n + n], &mut tail[..n])
}

/// Largest entry of |Aᵀ - A|.
pub fn asymmetry(matrix: &Array2<f64>) -> f64 {
    let n = matrix.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((matrix[[i, j]] - matrix[[j, i]]).abs());
        }
    }
    worst
}

/// Largest entry of |UᵀU - I|.
pub fn orthogonality_error(u: &Array2<f64>) -> f64 {
    let utu = u.t().dot(u);
    let mut worst: f64 = 0.0;
    for ((i, j), x) in utu.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((x - target).abs());
    }
    worst
}

/// exp(K) for a real antisymmetric K by scaling and squaring of a Taylor series.
pub fn expm_antisymmetric(k: &Array2<f64>) -> Array2<f64> {
    let n = k.nrows();
    let norm = k
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = k * scale;
    let mut result = Array2::<f64>::eye(n);
    let mut term = Array2::<f64>::eye(n);
    for order in 1..40 {
        term = term.dot(&b) / order as f64;
        result += &term;
        if term.iter().all(|x| x.abs() < 1e-20) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Determinant by partial-pivot LU.
pub fn determinant(matrix: &Array2<f64>) -> f64 {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
            .unwrap_or(col);
        if a[[pivot, col]] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap([pivot, j], [col, j]);
            }
            det = -det;
        }
        let d = a[[col, col]];
        det *= d;
        for i in (col + 1)..n {
            let f = a[[i, col]] / d;
            if f != 0.0 {
                for j in col..n {
                    a[[i, j]] -= f * a[[col, j]];
                }
            }
        }
    }
    det
}

/// Real logarithm of a proper rotation (det = +1) returning an antisymmetric
/// generator K with exp(K) = U.
///
/// Uses the commuting split U = S + A with S symmetric and A antisymmetric:
/// on every invariant plane with rotation angle θ, log U = θ/sin θ · A.
/// Planes with θ ≈ π cannot be resolved this way and yield an error; the
/// caller may flip pairs of column signs and retry.
pub fn logm_rotation(u: &Array2<f64>) -> Result<Array2<f64>> {
    let n = u.nrows();
    let orth = orthogonality_error(u);
    if orth > 1e-10 {
        return Err(SqdError::NotOrthogonal(orth));
    }
    let sym = (u + &u.t()) * 0.5;
    let anti = (u - &u.t()) * 0.5;
    let (cosines, w) = symmetric_eigen(&sym);
    let mut weights = Array1::zeros(n);
    for (i, &c) in cosines.iter().enumerate() {
        let c = c.clamp(-1.0, 1.0);
        if c < -1.0 + 1e-8 {
            return Err(SqdError::InvalidInput(
                "rotation has an angle near pi; logarithm is ill-conditioned".into(),
            ));
        }
        let theta = c.acos();
        weights[i] = if theta < 1e-5 {
            1.0 + theta * theta / 6.0
        } else {
            theta / theta.sin()
        };
    }
    let scaled = &w * &weights.view().insert_axis(ndarray::Axis(0));
    let proj = scaled.dot(&w.t());
    let k = anti.dot(&proj);
    let k = (&k - &k.t()) * 0.5;
    let back = expm_antisymmetric(&k);
    let err = (&back - u).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if err > 1e-11 {
        return Err(SqdError::InvalidInput(format!(
            "rotation logarithm inaccurate (error {err:e})"
        )));
    }
    Ok(k)
}

/// Flip column signs of an orthogonal matrix so that it is a proper
/// rotation close to the identity, then take its logarithm. Column sign
/// flips leave U diag(d) Uᵀ unchanged, so the result is interchangeable with
/// the input for similarity transforms of diagonal matrices.
pub fn rotation_generator_for_eigenbasis(u: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = u.nrows();
    let mut base = u.clone();
    for j in 0..n {
        if base[[j, j]] < 0.0 {
            base.column_mut(j).mapv_inplace(|x| -x);
        }
    }
    if n > 0 && determinant(&base) < 0.0 {
        let j = (0..n)
            .min_by(|&a, &b| base[[a, a]].abs().total_cmp(&base[[b, b]].abs()))
            .unwrap();
        base.column_mut(j).mapv_inplace(|x| -x);
    }
    if let Ok(k) = logm_rotation(&base) {
        return Ok((base, k));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut trial = base.clone();
            trial.column_mut(i).mapv_inplace(|x| -x);
            trial.column_mut(j).mapv_inplace(|x| -x);
            if let Ok(k) = logm_rotation(&trial) {
                return Ok((trial, k));
            }
        }
    }
    Err(SqdError::InvalidInput(
        "could not find a rotation generator for the eigenbasis".into(),
    ))
}
