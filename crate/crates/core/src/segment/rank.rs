use crate::error::{Error, Result};
use crate::spectral::DescriptorField;

/// Values closer than this fraction of their magnitude count as tied, so
/// rounding-level differences (mirror-symmetric vertices) cannot reorder ranks.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Area-weighted CDF value of each sample: area strictly below plus half the
/// area of its tie group, over total area.
pub fn area_cdf(values: &[f64], areas: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), areas.len());
    let total: f64 = areas.iter().sum();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut cdf = vec![0.0; values.len()];
    let mut below = 0.0;
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start]];
        let mut end = start;
        let mut group = 0.0;
        while end < order.len() && values[order[end]] - v <= TIE_TOLERANCE * v.abs().max(values[order[end]].abs()) {
            group += areas[order[end]];
            end += 1;
        }
        let mid = (below + 0.5 * group) / total;
        for &i in &order[start..end] {
            cdf[i] = mid;
        }
        below += group;
        start = end;
    }
    cdf
}

/// Area-weighted quantile function of one sample: piecewise linear through
/// `(area below + own area / 2, value)` nodes, clamped at both ends.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    probs: Vec<f64>,
    values: Vec<f64>,
}

impl QuantileTable {
    pub fn new(values: &[f64], areas: &[f64]) -> Self {
        let total: f64 = areas.iter().sum();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut probs = Vec::with_capacity(values.len());
        let mut sorted = Vec::with_capacity(values.len());
        let mut below = 0.0;
        for &i in &order {
            probs.push((below + 0.5 * areas[i]) / total);
            sorted.push(values[i]);
            below += areas[i];
        }
        QuantileTable {
            probs,
            values: sorted,
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.probs.partition_point(|&q| q < p);
        if k == 0 {
            return self.values[0];
        }
        if k == self.probs.len() {
            return self.values[k - 1];
        }
        if self.probs[k] == p {
            return self.values[k];
        }
        let (p0, p1) = (self.probs[k - 1], self.probs[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        if p1 <= p0 {
            return v1;
        }
        v0 + (v1 - v0) * (p - p0) / (p1 - p0)
    }
}

/// Per-dimension monotone maps from the second shape's descriptor values to
/// the first shape's values of equal area rank.
#[derive(Debug, Clone)]
pub struct RankAligner {
    tables: Vec<QuantileTable>,
}

impl RankAligner {
    pub fn new(reference: &DescriptorField, areas: &[f64]) -> Result<Self> {
        check_areas(reference, areas)?;
        let tables = (0..reference.dims())
            .map(|c| QuantileTable::new(&reference.column(c), areas))
            .collect();
        Ok(RankAligner { tables })
    }

    pub fn table(&self, dim: usize) -> &QuantileTable {
        &self.tables[dim]
    }

    pub fn align(&self, field: &DescriptorField, areas: &[f64]) -> Result<DescriptorField> {
        check_areas(field, areas)?;
        if field.dims() != self.tables.len() {
            return Err(Error::InvalidInput(format!(
                "descriptor dimensions differ: {} vs {}",
                self.tables.len(),
                field.dims()
            )));
        }
        let d = field.dims();
        let mut out = vec![0.0; field.len() * d];
        for (c, table) in self.tables.iter().enumerate() {
            let cdf = area_cdf(&field.column(c), areas);
            for (i, p) in cdf.into_iter().enumerate() {
                out[i * d + c] = table.quantile(p);
            }
        }
        DescriptorField::new(field.times().to_vec(), out)
    }
}

fn check_areas(field: &DescriptorField, areas: &[f64]) -> Result<()> {
    if field.len() != areas.len() || field.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} descriptor rows but {} area weights",
            field.len(),
            areas.len()
        )));
    }
    if areas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidInput("area weights must be positive".into()));
    }
    Ok(())
}

/// Replaces each descriptor dimension of `n` by the values of `m` with the
/// same area-weighted rank.
pub fn align_ranks(
    m: &DescriptorField,
    areas_m: &[f64],
    n: &DescriptorField,
    areas_n: &[f64],
) -> Result<DescriptorField> {
    RankAligner::new(m, areas_m)?.align(n, areas_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(values: Vec<f64>) -> DescriptorField {
        DescriptorField::new(vec![1.0], values).unwrap()
    }

    #[test]
    fn hand_quantile_example() {
        let m = field(vec![1.0, 2.0, 3.0, 4.0]);
        let n = field(vec![30.0, 10.0, 40.0, 20.0]);
        let h = align_ranks(&m, &[1.0; 4], &n, &[1.0; 4]).unwrap();
        assert_eq!(h.values(), &[3.0, 1.0, 4.0, 2.0]);
    }

    #[test]
    fn interpolates_between_and_clamps_outside() {
        let t = QuantileTable::new(&[0.0, 10.0], &[1.0, 1.0]);
        // nodes at p = 0.25, 0.75
        assert_eq!(t.quantile(0.1), 0.0);
        assert_eq!(t.quantile(0.5), 5.0);
        assert_eq!(t.quantile(0.9), 10.0);
    }

    #[test]
    fn ties_share_the_midpoint() {
        let cdf = area_cdf(&[5.0, 1.0, 5.0, 5.0], &[1.0; 4]);
        assert_eq!(cdf, vec![0.625, 0.125, 0.625, 0.625]);
    }

    #[test]
    fn rounding_level_differences_tie() {
        let v = [1.0, 1.0 + 1e-15, 2.0, 1.0 - 1e-15];
        let cdf = area_cdf(&v, &[1.0; 4]);
        assert_eq!(cdf[0], cdf[1]);
        assert_eq!(cdf[0], cdf[3]);
        assert_eq!(cdf[2], 0.875);
    }

    #[test]
    fn area_weighting_shifts_ranks() {
        // N's first sample carries most of the area
        let m = field(vec![0.0, 1.0, 2.0, 3.0]);
        let n = field(vec![0.0, 1.0]);
        let h = align_ranks(&m, &[1.0; 4], &n, &[3.0, 1.0]).unwrap();
        // F_N = {0.375, 0.875}; M nodes at 0.125, 0.375, 0.625, 0.875
        assert_eq!(h.values(), &[1.0, 3.0]);
    }

    proptest! {
        #[test]
        fn self_alignment_is_identity(
            rows in prop::collection::vec((0.0..10.0f64, 0.1..2.0f64), 1..60)
        ) {
            let (vals, areas): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            let f = field(vals.clone());
            let h = align_ranks(&f, &areas, &f, &areas).unwrap();
            for (a, b) in h.values().iter().zip(&vals) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn invariant_under_monotone_transforms(
            rows in prop::collection::vec((0.0..10.0f64, 0.1..2.0f64), 2..60),
            scale in 0.1..5.0f64,
            shift in -10.0..10.0f64,
        ) {
            let (vals, areas): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            let f = field(vals.clone());
            let g1 = field(vals.iter().map(|v| scale * v + shift).collect());
            let g2 = field(vals.iter().map(|v| (v * 0.3).exp()).collect());
            let h1 = align_ranks(&f, &areas, &g1, &areas).unwrap();
            let h2 = align_ranks(&f, &areas, &g2, &areas).unwrap();
            for ((a, b), v) in h1.values().iter().zip(h2.values()).zip(&vals) {
                prop_assert!((a - b).abs() < 1e-6);
                prop_assert!((a - v).abs() < 1e-6);
            }
        }

        #[test]
        fn output_is_monotone_in_input(
            m_vals in prop::collection::vec(-5.0..5.0f64, 1..40),
            n_vals in prop::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            let m = field(m_vals.clone());
            let n = field(n_vals.clone());
            let h = align_ranks(&m, &vec![1.0; m_vals.len()], &n, &vec![1.0; n_vals.len()]).unwrap();
            let lo = m_vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = m_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..n_vals.len() {
                prop_assert!(h.values()[i] >= lo && h.values()[i] <= hi);
                for j in 0..n_vals.len() {
                    if n_vals[i] < n_vals[j] {
                        prop_assert!(h.values()[i] <= h.values()[j]);
                    }
                }
            }
        }
    }
}
