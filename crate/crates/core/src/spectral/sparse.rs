use faer::sparse::{SparseColMat, Triplet};

/// Symmetric sparse matrix stored as full rows (both triangles).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Sums duplicate entries. Each off-diagonal `(i, j, v)` is mirrored to
    /// `(j, i, v)`, so pass each unordered pair once.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) out of range");
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.iter().peekable();
            while let Some(&(c, mut v)) = iter.next() {
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        SparseSymmetric {
            n,
            offsets,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `self + shift * diag(d)` as a faer matrix holding only the lower triangle.
    pub(crate) fn shifted_lower(&self, shift: f64, d: &[f64]) -> SparseColMat<usize, f64> {
        let mut triplets = Vec::with_capacity(self.nnz() / 2 + self.n);
        for i in 0..self.n {
            let mut has_diag = false;
            for (j, v) in self.row(i) {
                if j < i {
                    continue;
                }
                if j == i {
                    has_diag = true;
                    triplets.push(Triplet::new(j, i, v + shift * d[i]));
                } else {
                    triplets.push(Triplet::new(j, i, v));
                }
            }
            if !has_diag {
                triplets.push(Triplet::new(i, i, shift * d[i]));
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .expect("valid triplets")
    }
}
