use super::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, lanczos_largest, LanczosOptions};

/// Active blocks up to this size are decomposed densely.
pub const DENSE_BLOCK_LIMIT: usize = 1200;

/// Eigenvalues this close to the largest (relative) count as equal to it.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeadingEigen {
    /// One entry per candidate, nonnegative, largest entry 1.
    pub vector: Vec<f64>,
    pub value: f64,
    /// `|M x - λ x| / (λ |x|)`.
    pub residual: f64,
}

/// Leading eigenvector of `m`, taken as the projection of the all-ones vector
/// onto the eigenspace of the largest eigenvalue. This is the fixed point
/// power iteration from all-ones approaches, so symmetric candidates receive
/// identical weight even when the eigenvalue is repeated.
pub fn leading_eigenvector(m: &AffinityMatrix) -> Result<LeadingEigen> {
    let n = m.dim();
    let k = m.active.len();
    let mut vector = vec![0.0; n];
    if k == 0 {
        // only isolated diagonal entries remain
        let top = m.unary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (x, &u) in vector.iter_mut().zip(&m.unary) {
            if u >= top * (1.0 - DEGENERACY_TOL) {
                *x = 1.0;
            }
        }
        return Ok(LeadingEigen {
            vector,
            value: top,
            residual: 0.0,
        });
    }

    let (value, local) = if k <= DENSE_BLOCK_LIMIT {
        top_eigenspace_projection(k, &m.block)?
    } else {
        let block = &m.block;
        let apply = |x: &[f64], y: &mut [f64]| {
            for (p, yp) in y.iter_mut().enumerate() {
                *yp = block[p * k..(p + 1) * k].iter().zip(x).map(|(a, b)| a * b).sum();
            }
        };
        let opts = LanczosOptions {
            max_dim: 40,
            tol: 1e-12,
            max_restarts: 2000,
            seed: 0x5eed,
        };
        let res = lanczos_largest(k, 1, apply, &vec![1.0; k], &opts)?;
        (res.values[0], res.vectors)
    };

    let sign = if local.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let peak = local.iter().fold(0.0f64, |a, x| a.max(sign * x));
    if !(peak > 0.0) {
        return Err(Error::InvalidInput("affinity matrix has no positive leading direction".into()));
    }
    // rounding can leave tiny negatives where the Perron vector is zero
    let local: Vec<f64> = local.iter().map(|x| (sign * x / peak).max(0.0)).collect();

    let mut r2 = 0.0;
    let mut x2 = 0.0;
    for p in 0..k {
        let mx: f64 = m.block[p * k..(p + 1) * k].iter().zip(&local).map(|(a, b)| a * b).sum();
        r2 += (mx - value * local[p]).powi(2);
        x2 += local[p] * local[p];
    }
    for (p, &r) in m.active.iter().enumerate() {
        vector[r] = local[p];
    }
    Ok(LeadingEigen {
        vector,
        value,
        residual: r2.sqrt() / (value.abs() * x2.sqrt()),
    })
}

/// Largest eigenvalue of a dense symmetric matrix and the projection of the
/// all-ones vector onto its eigenspace.
fn top_eigenspace_projection(k: usize, a: &[f64]) -> Result<(f64, Vec<f64>)> {
    // symmetric, so row-major and column-major coincide
    let (vals, vecs) = dense_symmetric_eigen(k, a)?;
    let top = vals[k - 1];
    let mut x = vec![0.0; k];
    for l in (0..k).rev() {
        if vals[l] < top - DEGENERACY_TOL * top.abs().max(1e-300) {
            break;
        }
        let u = &vecs[l * k..(l + 1) * k];
        let c: f64 = u.iter().sum();
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi += c * ui;
        }
    }
    if x.iter().all(|&v| v == 0.0) {
        // all-ones orthogonal to the eigenspace; fall back to the dense vector
        x.copy_from_slice(&vecs[(k - 1) * k..k * k]);
    }
    Ok((top, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{assemble_affinity, MatchingParams, NodeGraph};
    use nalgebra::DMatrix;

    fn from_dense(n: usize, values: Vec<f64>) -> AffinityMatrix {
        AffinityMatrix {
            n_a: 1,
            n_b: n,
            unary: (0..n).map(|i| values[i * n + i]).collect(),
            active: (0..n).collect(),
            block: values,
            nnz: 0,
            scale: 1.0,
        }
    }

    #[test]
    fn matches_nalgebra_on_random_positive_matrices() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in [2usize, 5, 11, 20] {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = next();
                    a[i * n + j] = v;
                    a[j * n + i] = v;
                }
            }
            let got = leading_eigenvector(&from_dense(n, a.clone())).unwrap();
            let eig = DMatrix::from_row_slice(n, n, &a).symmetric_eigen();
            let (imax, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let col = eig.eigenvectors.column(imax);
            let peak = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                assert!((got.vector[i] - sign * col[i] / peak).abs() < 1e-6);
            }
            assert!((got.value - eig.eigenvalues[imax]).abs() < 1e-9);
            assert!(got.residual < 1e-8);
        }
    }

    #[test]
    fn diagonal_dominance_concentrates_on_largest_diagonal() {
        let n = 6;
        let diag = [0.2, 1.0, 0.5, 1.0, 0.1, 0.3];
        let mut a = vec![1e-4; n * n];
        for i in 0..n {
            a[i * n + i] = diag[i];
        }
        let x = leading_eigenvector(&from_dense(n, a)).unwrap().vector;
        assert!((x[1] - 1.0).abs() < 1e-12 && (x[3] - 1.0).abs() < 1e-12);
        for i in [0, 2, 4, 5] {
            assert!(x[i] < 0.01);
        }
    }

    #[test]
    fn repeated_top_eigenvalue_keeps_symmetric_weights() {
        // two identical disconnected blocks
        let n = 4;
        let a = vec![
            1.0, 0.5, 0.0, 0.0, //
            0.5, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.5, //
            0.0, 0.0, 0.5, 1.0,
        ];
        let x = leading_eigenvector(&from_dense(n, a)).unwrap().vector;
        for v in x {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_path_agrees_with_dense_path() {
        // a block above the dense limit, built from a structured matrix
        let k = DENSE_BLOCK_LIMIT + 30;
        let mut a = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let d = (i as f64 - j as f64).abs();
                a[i * k + j] = if i == j { 1.0 - 0.3 * ((i % 7) as f64 / 7.0) } else { 1e-4 * (-d / 40.0).exp() };
            }
        }
        let big = leading_eigenvector(&from_dense(k, a.clone())).unwrap();
        let (value, local) = top_eigenspace_projection(k, &a).unwrap();
        let peak = local.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sign = if local.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        assert!((big.value - value).abs() < 1e-10);
        for i in 0..k {
            assert!((big.vector[i] - sign * local[i] / peak).abs() < 1e-6);
        }
        assert!(big.residual < 1e-8);
    }

    #[test]
    fn p3_vector_favors_like_for_like() {
        let p3 = NodeGraph::path(3);
        let m = assemble_affinity(&p3, &p3, &MatchingParams::default()).unwrap();
        let x = leading_eigenvector(&m).unwrap().vector;
        assert!((x[0] - x[8]).abs() < 1e-12);
        assert!((x[2] - x[6]).abs() < 1e-12);
        assert!(x[1] < 0.2 && x[3] < 0.2);
    }
}
