//! Symmetric eigensolvers shared by the spectral and matching code.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Eigenpairs of a dense symmetric matrix given column-major, in ascending order.
/// Eigenvectors are returned column-major.
pub(crate) fn dense_symmetric_eigen(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[j * n + i]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("dense eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            vectors[j * n + i] = u[(i, j)];
        }
    }
    Ok((values, vectors))
}

#[derive(Debug, Clone)]
pub(crate) struct LanczosOptions {
    /// Krylov basis size per restart cycle.
    pub max_dim: usize,
    /// Relative residual target, `|A y - θ y| <= tol * |θ|`.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed for vectors injected after an early breakdown.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct LanczosResult {
    /// Largest eigenvalues, descending.
    pub values: Vec<f64>,
    /// Matching unit eigenvectors, column-major `n x values.len()`.
    pub vectors: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in chunks * 4..a.len() {
        s += a[k] * b[k];
    }
    s
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn project_out(basis: &[f64], n: usize, cols: usize, w: &mut [f64], h: &mut [f64]) {
    let v = MatRef::from_column_major_slice(&basis[..n * cols], n, cols);
    let mut c = vec![0.0; cols];
    matmul(
        MatMut::from_column_major_slice_mut(&mut c, cols, 1),
        Accum::Replace,
        v.transpose(),
        MatRef::from_column_major_slice(&*w, n, 1),
        1.0,
        Par::Seq,
    );
    matmul(
        MatMut::from_column_major_slice_mut(&mut *w, n, 1),
        Accum::Add,
        v,
        MatRef::from_column_major_slice(&c, cols, 1),
        -1.0,
        Par::Seq,
    );
    for (hi, ci) in h.iter_mut().zip(&c) {
        *hi += ci;
    }
}

/// Orthogonalizes `w` against the first `cols` basis columns and returns the
/// accumulated coefficients. The newest one or two columns are removed first,
/// then full passes repeat while they still shrink `w` noticeably.
fn orthogonalize(basis: &[f64], n: usize, cols: usize, w: &mut [f64]) -> Vec<f64> {
    let mut h = vec![0.0; cols];
    for i in (cols.saturating_sub(2)..cols).rev() {
        let col = &basis[i * n..(i + 1) * n];
        let c = dot(col, w);
        for (wk, vk) in w.iter_mut().zip(col) {
            *wk -= c * vk;
        }
        h[i] += c;
    }
    for _ in 0..3 {
        let before = norm(w);
        project_out(basis, n, cols, w, &mut h);
        if norm(w) > std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
    }
    h
}

/// Thick-restart Lanczos with full reorthogonalization for the `nev` largest
/// eigenpairs of the symmetric operator `apply` (writes `A x` into its second
/// argument).
pub(crate) fn lanczos_largest(
    n: usize,
    nev: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<LanczosResult> {
    assert!(nev >= 1 && nev <= n, "requested {nev} eigenpairs of a {n}x{n} operator");
    assert_eq!(start.len(), n);
    let m = opts.max_dim.clamp(nev + 1, n.max(nev + 1)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_unit = |basis: &[f64], cols: usize| -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            orthogonalize(basis, n, cols, &mut v);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return v;
            }
        }
    };

    let mut basis = vec![0.0; n * m];
    let mut t = vec![0.0; m * m];
    let mut w = vec![0.0; n];
    let start_norm = norm(start);
    if start_norm > 0.0 && start_norm.is_finite() {
        for (b, s) in basis[..n].iter_mut().zip(start) {
            *b = s / start_norm;
        }
    } else {
        let v = random_unit(&basis, 0);
        basis[..n].copy_from_slice(&v);
    }

    let mut kept = 0;
    let mut worst = f64::INFINITY;
    for cycle in 0..=opts.max_restarts {
        let mut dim = m;
        let mut beta = 0.0;
        for j in kept..m {
            apply(&basis[j * n..(j + 1) * n], &mut w);
            let h = orthogonalize(&basis, n, j + 1, &mut w);
            for (i, &hi) in h.iter().enumerate() {
                t[j * m + i] = hi;
                t[i * m + j] = hi;
            }
            beta = norm(&w);
            let scale = h.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
            if beta <= 1e-13 * scale {
                // invariant subspace reached
                if j + 1 >= nev || j + 1 == m {
                    dim = j + 1;
                    beta = 0.0;
                    break;
                }
                let v = random_unit(&basis, j + 1);
                basis[(j + 1) * n..(j + 2) * n].copy_from_slice(&v);
                continue;
            }
            if j + 1 < m {
                for (b, wi) in basis[(j + 1) * n..(j + 2) * n].iter_mut().zip(&w) {
                    *b = wi / beta;
                }
            }
        }

        let small: Vec<f64> = (0..dim)
            .flat_map(|j| (0..dim).map(move |i| (i, j)))
            .map(|(i, j)| t[j * m + i])
            .collect();
        let (vals, vecs) = dense_symmetric_eigen(dim, &small)?;
        // descending order
        let order: Vec<usize> = (0..dim).rev().collect();
        let ritz: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
        let last_row: Vec<f64> = order.iter().map(|&k| vecs[k * dim + dim - 1]).collect();
        let residuals: Vec<f64> = last_row.iter().map(|s| (beta * s).abs()).collect();

        let converged = (0..nev).all(|i| residuals[i] <= opts.tol * ritz[i].abs().max(1e-300));
        worst = (0..nev)
            .map(|i| residuals[i] / ritz[i].abs().max(1e-300))
            .fold(0.0, f64::max);
        let keep = if converged || cycle == opts.max_restarts {
            nev
        } else {
            (nev + (m - nev) / 2).clamp(nev, dim.saturating_sub(1).max(nev))
        };

        let selected: Vec<f64> = order
            .iter()
            .take(keep)
            .flat_map(|&k| vecs[k * dim..(k + 1) * dim].iter().copied())
            .collect();
        let mut ritz_vectors = vec![0.0; n * keep];
        matmul(
            MatMut::from_column_major_slice_mut(&mut ritz_vectors, n, keep),
            Accum::Replace,
            MatRef::from_column_major_slice(&basis[..n * dim], n, dim),
            MatRef::from_column_major_slice(&selected, dim, keep),
            1.0,
            Par::Seq,
        );

        if converged || dim < m {
            if !converged {
                return Err(Error::NotConverged {
                    iterations: cycle,
                    worst_residual: worst,
                    residuals: residuals[..nev].to_vec(),
                });
            }
            return Ok(LanczosResult {
                values: ritz[..nev].to_vec(),
                vectors: ritz_vectors,
            });
        }
        if cycle == opts.max_restarts {
            break;
        }

        basis[..n * keep].copy_from_slice(&ritz_vectors);
        for (b, wi) in basis[keep * n..(keep + 1) * n].iter_mut().zip(&w) {
            *b = wi / beta;
        }
        t.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..keep {
            t[i * m + i] = ritz[i];
        }
        kept = keep;
    }
    Err(Error::NotConverged {
        iterations: opts.max_restarts,
        worst_residual: worst,
        residuals: Vec::new(),
    })
}
