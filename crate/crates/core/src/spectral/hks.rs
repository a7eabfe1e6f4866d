use std::io::Write;
use std::path::Path;

use super::EigenBasis;
use crate::error::{Error, Result};

/// Per-vertex descriptor vectors, one column per diffusion time.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorField {
    n: usize,
    times: Vec<f64>,
    /// Row-major `n x d`.
    values: Vec<f64>,
}

impl DescriptorField {
    /// Builds a field from row-major values.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = times.len();
        if d == 0 || values.len() % d != 0 {
            return Err(Error::InvalidInput(format!(
                "{} descriptor values do not fill rows of width {d}",
                values.len()
            )));
        }
        Ok(DescriptorField {
            n: values.len() / d,
            times,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dims(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dims();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dims()).copied().collect()
    }

    /// Writes an `n x d` CSV with a header row of times.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let header: Vec<String> = self.times.iter().map(|t| format!("t={t}")).collect();
        let mut write = || -> std::io::Result<()> {
            writeln!(w, "{}", header.join(","))?;
            for i in 0..self.n {
                let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", row.join(","))?;
            }
            w.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

/// Diffusion time schedule for the heat kernel signature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeSteps {
    pub count: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeSteps {
    pub const DEFAULT: TimeSteps = TimeSteps {
        count: 15,
        t_min: 0.03,
        t_max: 0.25,
    };
    /// Ten steps over a slightly wider range.
    pub const WIDE: TimeSteps = TimeSteps {
        count: 10,
        t_min: 0.03,
        t_max: 0.3,
    };

    /// Log-spaced times from `t_min` to `t_max` inclusive.
    pub fn times(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.t_min];
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.count)
            .map(|i| (a + (b - a) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || !(self.t_min > 0.0) || !(self.t_max >= self.t_min) {
            return Err(Error::InvalidInput(format!(
                "invalid time steps: {} in [{}, {}]",
                self.count, self.t_min, self.t_max
            )));
        }
        Ok(())
    }
}

impl Default for TimeSteps {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// `HKS_t(x) = Σ_l exp(-λ_l t) φ_l(x)²` for each time.
pub fn compute_hks(basis: &EigenBasis, times: &[f64]) -> Result<DescriptorField> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("HKS times must be positive and ascending".into()));
    }
    let n = basis.dim();
    let d = times.len();
    let mut values = vec![0.0; n * d];
    for (l, &lambda) in basis.eigenvalues().iter().enumerate() {
        let decay: Vec<f64> = times.iter().map(|t| (-lambda.max(0.0) * t).exp()).collect();
        for (i, &p) in basis.eigenvector(l).iter().enumerate() {
            let p2 = p * p;
            for (v, e) in values[i * d..(i + 1) * d].iter_mut().zip(&decay) {
                *v += e * p2;
            }
        }
    }
    DescriptorField::new(times.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_laplacian, eigendecompose};
    use crate::synthetic;

    #[test]
    fn default_times_are_log_spaced() {
        let t = TimeSteps::DEFAULT.times();
        assert_eq!(t.len(), 15);
        assert!((t[0] - 0.03).abs() < 1e-15 && (t[14] - 0.25).abs() < 1e-14);
        let r = t[1] / t[0];
        assert!(t.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert_eq!(TimeSteps::WIDE.times().len(), 10);
    }

    #[test]
    fn sphere_hks_trace_and_limits() {
        let mesh = synthetic::icosphere(8);
        let lap = build_laplacian(&mesh).unwrap();
        let basis = eigendecompose(&lap, 100).unwrap();
        let times = TimeSteps::DEFAULT.times();
        let hks = compute_hks(&basis, &times).unwrap();
        assert!(hks.values().iter().all(|&v| v > 0.0));

        let mut previous = f64::INFINITY;
        for (c, &t) in times.iter().enumerate() {
            let col = hks.column(c);
            let total: f64 = col.iter().zip(&lap.mass).map(|(h, a)| h * a).sum();
            let trace: f64 = basis.eigenvalues().iter().map(|l| (-l.max(0.0) * t).exp()).sum();
            assert!((total - trace).abs() < 1e-6);
            assert!(total < previous);
            previous = total;

            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let dev = col.iter().fold(0.0f64, |a, v| a.max((v - mean).abs() / mean));
            assert!(dev < 0.02, "t={t}: relative deviation {dev}");
        }

        let late = compute_hks(&basis, &[50.0]).unwrap();
        assert!(late.values().iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn rejects_bad_times() {
        let lap = build_laplacian(&synthetic::icosphere(2)).unwrap();
        let basis = eigendecompose(&lap, 5).unwrap();
        assert!(compute_hks(&basis, &[]).is_err());
        assert!(compute_hks(&basis, &[0.1, 0.05]).is_err());
        assert!(compute_hks(&basis, &[0.0]).is_err());
    }
}
