//! Region indicator constraints for functional-map solvers.
//!
//! A constraint directory holds five whitespace-separated text files:
//! `pairs.txt` (one `a b` region pair per line), `indicators_a.txt` and
//! `indicators_b.txt` (one row per vertex, one column per pair), and
//! `areas_a.txt`, `areas_b.txt` (one vertex area per line). Column `j` of the
//! indicator matrices is the 0/1 characteristic vector of pair `j`'s regions
//! on the unit-area shapes, so its area-weighted sum is the region's area.

use std::fmt::Write as _;
use std::path::Path;

use super::CorrespondenceReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorConstraints {
    pub pairs: Vec<(usize, usize)>,
    /// Row-major `n_a x pairs`.
    pub indicators_a: Vec<f64>,
    /// Row-major `n_b x pairs`.
    pub indicators_b: Vec<f64>,
    pub areas_a: Vec<f64>,
    pub areas_b: Vec<f64>,
}

impl IndicatorConstraints {
    pub fn from_report(report: &CorrespondenceReport, one_to_one: bool) -> Result<Self> {
        let pairs = report.matched_pairs(one_to_one);
        if pairs.is_empty() {
            return Err(Error::InvalidInput("report has no matched regions".into()));
        }
        let indicators = |labels: &[usize], side: fn(&(usize, usize)) -> usize| {
            let mut out = vec![0.0; labels.len() * pairs.len()];
            for (v, &l) in labels.iter().enumerate() {
                for (j, p) in pairs.iter().enumerate() {
                    if side(p) == l {
                        out[v * pairs.len() + j] = 1.0;
                    }
                }
            }
            out
        };
        Ok(IndicatorConstraints {
            indicators_a: indicators(&report.labels_a, |p| p.0),
            indicators_b: indicators(&report.labels_b, |p| p.1),
            pairs,
            areas_a: report.vertex_areas_a.clone(),
            areas_b: report.vertex_areas_b.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn column_a(&self, j: usize) -> Vec<f64> {
        self.indicators_a.iter().skip(j).step_by(self.len()).copied().collect()
    }

    pub fn column_b(&self, j: usize) -> Vec<f64> {
        self.indicators_b.iter().skip(j).step_by(self.len()).copied().collect()
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn matrix_text(values: &[f64], cols: usize) -> String {
    let mut s = String::new();
    for row in values.chunks(cols) {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                s.push(' ');
            }
            write!(s, "{x}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn export_indicator_constraints(dir: &Path, c: &IndicatorConstraints) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pairs: String = c.pairs.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    write_text(&dir.join("pairs.txt"), &pairs)?;
    write_text(&dir.join("indicators_a.txt"), &matrix_text(&c.indicators_a, c.len()))?;
    write_text(&dir.join("indicators_b.txt"), &matrix_text(&c.indicators_b, c.len()))?;
    write_text(&dir.join("areas_a.txt"), &matrix_text(&c.areas_a, 1))?;
    write_text(&dir.join("areas_b.txt"), &matrix_text(&c.areas_b, 1))
}

fn read_matrix<T: std::str::FromStr>(path: &Path, cols: Option<usize>) -> Result<Vec<Vec<T>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| Error::parse(path, i + 1, format!("bad number `{t}`"))))
            .collect::<Result<Vec<T>>>()?;
        if let Some(c) = cols {
            if row.len() != c {
                return Err(Error::parse(path, i + 1, format!("expected {c} columns, found {}", row.len())));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_indicator_constraints(dir: &Path) -> Result<IndicatorConstraints> {
    let pairs: Vec<(usize, usize)> = read_matrix::<usize>(&dir.join("pairs.txt"), Some(2))?
        .into_iter()
        .map(|r| (r[0], r[1]))
        .collect();
    let cols = Some(pairs.len());
    let flat = |rows: Vec<Vec<f64>>| rows.into_iter().flatten().collect::<Vec<f64>>();
    let indicators_a = flat(read_matrix(&dir.join("indicators_a.txt"), cols)?);
    let indicators_b = flat(read_matrix(&dir.join("indicators_b.txt"), cols)?);
    let areas_a = flat(read_matrix(&dir.join("areas_a.txt"), Some(1))?);
    let areas_b = flat(read_matrix(&dir.join("areas_b.txt"), Some(1))?);
    if indicators_a.len() != areas_a.len() * pairs.len() || indicators_b.len() != areas_b.len() * pairs.len() {
        return Err(Error::InvalidInput(format!(
            "indicator rows do not match area rows in {}",
            dir.display()
        )));
    }
    Ok(IndicatorConstraints {
        pairs,
        indicators_a,
        indicators_b,
        areas_a,
        areas_b,
    })
}
