use faer::linalg::solvers::Solve;
use faer::{MatMut, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LaplacianPair;
use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, lanczos_largest, LanczosOptions};

/// Problems up to this size use a dense solver.
pub const DENSE_LIMIT: usize = 800;
pub const MAX_EIGENPAIRS: usize = 150;

/// Number of eigenpairs used for a shape with `n` vertices.
pub fn default_eigen_count(n: usize) -> usize {
    n.saturating_sub(1).min(MAX_EIGENPAIRS)
}

/// Mass-orthonormal generalized eigenpairs, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column-major `n x m`.
    vectors: Vec<f64>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, l: usize) -> &[f64] {
        &self.vectors[l * self.n..(l + 1) * self.n]
    }
}

/// First `m` eigenpairs of `c S φ = λ M φ`, `c` the pair's eigenvalue scale.
///
/// Large problems run Lanczos on `M^½ (S + σM)⁻¹ M^½` with a tiny shift `σ`, so
/// the smallest eigenvalues become the best separated.
pub fn eigendecompose(lap: &LaplacianPair, m: usize) -> Result<EigenBasis> {
    let n = lap.len();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "cannot compute {m} eigenpairs of a {n}-vertex Laplacian"
        )));
    }
    if let Some(i) = lap.mass.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive mass at vertex {i}")));
    }
    let sqrt_mass: Vec<f64> = lap.mass.iter().map(|x| x.sqrt()).collect();

    let psi: Vec<f64> = if n <= DENSE_LIMIT {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in lap.stiffness.row(i) {
                a[j * n + i] = v / (sqrt_mass[i] * sqrt_mass[j]);
            }
        }
        let (_, vecs) = dense_symmetric_eigen(n, &a)?;
        vecs[..n * m].to_vec()
    } else {
        shift_invert_lanczos(lap, &sqrt_mass, m)?
    };

    let mut vectors: Vec<f64> = Vec::with_capacity(n * m);
    let mut eigenvalues: Vec<f64> = Vec::with_capacity(m);
    let scale = spectral_scale(lap);
    let mut residuals = Vec::with_capacity(m);
    let mut s_phi = vec![0.0; n];
    for l in 0..m {
        let mut phi: Vec<f64> = psi[l * n..(l + 1) * n]
            .iter()
            .zip(&sqrt_mass)
            .map(|(p, s)| p / s)
            .collect();
        let mass_norm = phi
            .iter()
            .zip(&lap.mass)
            .map(|(p, w)| p * p * w)
            .sum::<f64>()
            .sqrt();
        phi.iter_mut().for_each(|p| *p /= mass_norm);
        let peak = phi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
        if let Some(first) = phi.iter().find(|p| p.abs() > 1e-10 * peak) {
            if *first < 0.0 {
                phi.iter_mut().for_each(|p| *p = -*p);
            }
        }
        lap.stiffness.mul_vec(&phi, &mut s_phi);
        let lambda: f64 = phi.iter().zip(&s_phi).map(|(a, b)| a * b).sum();
        residuals.push(relative_residual(&s_phi, lambda, &lap.mass, &phi, scale));
        eigenvalues.push(lambda * lap.eigenvalue_scale);
        vectors.extend_from_slice(&phi);
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst < RESIDUAL_LIMIT) {
        return Err(Error::NotConverged {
            iterations: 0,
            worst_residual: worst,
            residuals,
        });
    }

    // Rayleigh refinement can reorder nearly equal pairs
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]).then(a.cmp(&b)));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let vals = order.iter().map(|&o| eigenvalues[o]).collect();
        let vecs = order
            .iter()
            .flat_map(|&o| vectors[o * n..(o + 1) * n].iter().copied())
            .collect();
        eigenvalues = vals;
        vectors = vecs;
    }
    Ok(EigenBasis {
        n,
        eigenvalues,
        vectors,
    })
}

/// Accepted `|Sφ - λMφ| / (|Sφ| + |λMφ|)` for a returned pair.
const RESIDUAL_LIMIT: f64 = 1e-6;

/// Mean of `S_ii / M_ii`, the operator's natural eigenvalue scale.
fn spectral_scale(lap: &LaplacianPair) -> f64 {
    let diag = lap.stiffness.diagonal();
    diag.iter().zip(&lap.mass).map(|(s, w)| s / w).sum::<f64>() / lap.len() as f64
}

/// Residual relative to the size of both sides, with a floor at `scale`
/// so near-null pairs are judged against the operator rather than zero.
fn relative_residual(s_phi: &[f64], lambda: f64, mass: &[f64], phi: &[f64], scale: f64) -> f64 {
    let mut r = 0.0;
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = 0.0;
    for i in 0..phi.len() {
        let m_phi = mass[i] * phi[i];
        r += (s_phi[i] - lambda * m_phi).powi(2);
        a += s_phi[i] * s_phi[i];
        b += (lambda * m_phi).powi(2);
        c += m_phi * m_phi;
    }
    let denom = a.sqrt() + b.sqrt() + 1e-6 * scale * c.sqrt();
    r.sqrt() / denom.max(f64::MIN_POSITIVE)
}

fn shift_invert_lanczos(lap: &LaplacianPair, sqrt_mass: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = lap.len();
    let sigma = 1e-8 * spectral_scale(lap).max(1e-300);
    let shifted = lap.stiffness.shifted_lower(sigma, &lap.mass);
    let llt = shifted
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Factorization(format!("sparse Cholesky failed: {e:?}")))?;

    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            y[i] = x[i] * sqrt_mass[i];
        }
        llt.solve_in_place(MatMut::from_column_major_slice_mut(y, n, 1));
        for i in 0..n {
            y[i] *= sqrt_mass[i];
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x4b5);
    let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let opts = LanczosOptions {
        max_dim: (m * 3 / 2).max(m + 40).min(n),
        tol: 1e-10,
        max_restarts: 200,
        seed: 0x4b6,
    };
    Ok(lanczos_largest(n, m, apply, &start, &opts)?.vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_laplacian, SparseSymmetric};
    use crate::synthetic;
    use std::f64::consts::PI;

    fn path_pair(n: usize, mass: f64) -> LaplacianPair {
        let edges = (0..n - 1).flat_map(|i| [(i, i + 1, -1.0), (i, i, 1.0), (i + 1, i + 1, 1.0)]);
        LaplacianPair {
            stiffness: SparseSymmetric::from_entries(n, edges),
            mass: vec![mass; n],
            bandwidth: None,
            eigenvalue_scale: 1.0,
        }
    }

    fn check_pairs(lap: &LaplacianPair, basis: &EigenBasis) {
        let n = lap.len();
        let mut s_phi = vec![0.0; n];
        for l in 0..basis.len() {
            let phi = basis.eigenvector(l);
            let lambda = basis.eigenvalues()[l];
            lap.stiffness.mul_vec(phi, &mut s_phi);
            let res: f64 = (0..n)
                .map(|i| (s_phi[i] - lambda * lap.mass[i] * phi[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            let phi_norm = phi.iter().map(|p| p * p).sum::<f64>().sqrt();
            assert!(res / phi_norm < 1e-6, "pair {l}: residual {}", res / phi_norm);
            for k in 0..l.min(5) {
                let other = basis.eigenvector(k);
                let ip: f64 = (0..n).map(|i| phi[i] * lap.mass[i] * other[i]).sum();
                assert!(ip.abs() < 1e-6, "pairs {l},{k} not orthogonal: {ip}");
            }
        }
        assert!(basis.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        assert!(basis.eigenvalues()[0].abs() < 1e-6);
    }

    #[test]
    fn dense_path_matches_closed_form() {
        let n = 40;
        let lap = path_pair(n, 1.0 / n as f64);
        let basis = eigendecompose(&lap, 10).unwrap();
        for (k, v) in basis.eigenvalues().iter().enumerate() {
            let exact = n as f64 * (2.0 - 2.0 * (PI * k as f64 / n as f64).cos());
            assert!((v - exact).abs() < 1e-9 * exact.max(1.0), "{k}: {v} vs {exact}");
        }
        check_pairs(&lap, &basis);
    }

    #[test]
    fn sparse_path_matches_closed_form() {
        let n = 2000;
        let lap = path_pair(n, 1.0);
        let basis = eigendecompose(&lap, 12).unwrap();
        for (k, v) in basis.eigenvalues().iter().enumerate() {
            let exact = 2.0 - 2.0 * (PI * k as f64 / n as f64).cos();
            assert!((v - exact).abs() < 1e-10, "{k}: {v} vs {exact}");
        }
        check_pairs(&lap, &basis);
    }

    #[test]
    fn first_eigenfunction_is_constant_one_on_unit_area() {
        let mesh = synthetic::icosphere(10);
        let lap = build_laplacian(&mesh).unwrap();
        let basis = eigendecompose(&lap, 20).unwrap();
        let phi0 = basis.eigenvector(0);
        assert!(phi0.iter().all(|p| (p - 1.0).abs() < 1e-6));
        check_pairs(&lap, &basis);
        // sphere: λ_1..λ_3 degenerate
        let ev = basis.eigenvalues();
        assert!((ev[1] - ev[3]).abs() < 1e-3 * ev[1]);
        assert!(ev[4] > 2.5 * ev[3]);
    }

    #[test]
    fn rejects_oversized_request() {
        let lap = path_pair(5, 1.0);
        assert!(eigendecompose(&lap, 6).is_err());
        assert!(eigendecompose(&lap, 0).is_err());
    }
}
