use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once an iteration lowers inertia by less than this fraction.
    pub tolerance: f64,
    /// Extra attempts allowed when a run ends with an empty cluster.
    pub max_retries: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: 10,
            max_iterations: 100,
            tolerance: 1e-7,
            max_retries: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub k: usize,
    pub dims: usize,
    /// Row-major `k x dims`.
    pub centroids: Vec<f64>,
    pub nearest: Vec<usize>,
    pub second: Vec<usize>,
    pub inertia: f64,
}

impl KMeansResult {
    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.dims..(j + 1) * self.dims]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest and second-nearest centroid of `p`, ties to the lower index.
fn two_nearest(p: &[f64], centroids: &[f64], dims: usize) -> (usize, usize, f64) {
    let (mut best, mut second) = (0, 0);
    let (mut d_best, mut d_second) = (f64::INFINITY, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dims).enumerate() {
        let d = sq_dist(p, c);
        if d < d_best {
            second = best;
            d_second = d_best;
            best = j;
            d_best = d;
        } else if d < d_second {
            second = j;
            d_second = d;
        }
    }
    if centroids.len() == dims {
        second = best;
    }
    (best, second, d_best)
}

fn plus_plus_init(points: &[f64], dims: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / dims;
    let mut centroids = Vec::with_capacity(k * dims);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&points[first * dims..(first + 1) * dims]);
    let mut d2: Vec<f64> = points
        .chunks_exact(dims)
        .map(|p| sq_dist(p, &centroids[..dims]))
        .collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > r {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick * dims..(pick + 1) * dims].to_vec();
        for (p, d) in points.chunks_exact(dims).zip(d2.iter_mut()) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.extend_from_slice(&c);
    }
    centroids
}

struct Run {
    centroids: Vec<f64>,
    nearest: Vec<usize>,
    inertia: f64,
    empty: bool,
}

fn lloyd(points: &[f64], dims: usize, mut centroids: Vec<f64>, opts: &KMeansOptions) -> Run {
    let n = points.len() / dims;
    let k = centroids.len() / dims;
    let mut nearest = vec![usize::MAX; n];
    let mut previous = f64::INFINITY;
    let mut inertia;
    let mut sums = vec![0.0; k * dims];
    let mut counts = vec![0usize; k];
    let mut iteration = 0;
    loop {
        inertia = 0.0;
        let mut changed = false;
        for (i, p) in points.chunks_exact(dims).enumerate() {
            let mut best = 0;
            let mut d_best = f64::INFINITY;
            for (j, c) in centroids.chunks_exact(dims).enumerate() {
                let d = sq_dist(p, c);
                if d < d_best {
                    best = j;
                    d_best = d;
                }
            }
            if nearest[i] != best {
                nearest[i] = best;
                changed = true;
            }
            inertia += d_best;
        }
        iteration += 1;
        let stalled = previous.is_finite() && previous - inertia <= opts.tolerance * previous;
        if !changed || stalled || iteration >= opts.max_iterations {
            break;
        }
        previous = inertia;

        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for (p, &j) in points.chunks_exact(dims).zip(&nearest) {
            counts[j] += 1;
            for (s, x) in sums[j * dims..(j + 1) * dims].iter_mut().zip(p) {
                *s += x;
            }
        }
        for j in 0..k {
            // an emptied cluster keeps its previous centroid
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                for (c, s) in centroids[j * dims..(j + 1) * dims]
                    .iter_mut()
                    .zip(&sums[j * dims..(j + 1) * dims])
                {
                    *c = s * inv;
                }
            }
        }
    }
    let mut used = vec![false; k];
    nearest.iter().for_each(|&j| used[j] = true);
    Run {
        centroids,
        nearest,
        inertia,
        empty: used.iter().any(|u| !u),
    }
}

/// Lloyd's algorithm from k-means++ seeds, best of several restarts.
/// `points` is row-major with `dims` columns.
pub fn kmeans(
    points: &[f64],
    dims: usize,
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<KMeansResult> {
    if dims == 0 || points.len() % dims != 0 {
        return Err(Error::KMeans(format!(
            "{} values do not form rows of width {dims}",
            points.len()
        )));
    }
    let n = points.len() / dims;
    if k == 0 || k > n {
        return Err(Error::KMeans(format!("cannot form {k} clusters from {n} points")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::KMeans("non-finite input value".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Run> = None;
    let mut valid = 0;
    let mut attempts = 0;
    while valid < opts.restarts.max(1) {
        if attempts >= opts.restarts.max(1) + opts.max_retries {
            break;
        }
        attempts += 1;
        let init = plus_plus_init(points, dims, k, &mut rng);
        let run = lloyd(points, dims, init, opts);
        if run.empty {
            continue;
        }
        valid += 1;
        if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| {
        Error::KMeans(format!(
            "every attempt left an empty cluster (k = {k}, {attempts} attempts)"
        ))
    })?;

    let mut nearest = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut inertia = 0.0;
    for p in points.chunks_exact(dims) {
        let (a, b, d) = two_nearest(p, &best.centroids, dims);
        nearest.push(a);
        second.push(b);
        inertia += d;
    }
    debug_assert_eq!(nearest, best.nearest);
    Ok(KMeansResult {
        k,
        dims,
        centroids: best.centroids,
        nearest,
        second,
        inertia,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_one_dimensional_clusters() {
        let pts = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let r = kmeans(&pts, 1, 2, 1, &KMeansOptions::default()).unwrap();
        let mut c = r.centroids.clone();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.0, 10.0]);
        assert_eq!(r.nearest[0], r.nearest[2]);
        assert_eq!(r.nearest[3], r.nearest[5]);
        assert_ne!(r.nearest[0], r.nearest[3]);
        assert_eq!(r.second[0], r.nearest[3]);
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let pts: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let a = kmeans(&pts, 3, 5, 42, &KMeansOptions::default()).unwrap();
        let b = kmeans(&pts, 3, 5, 42, &KMeansOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn second_nearest_differs_from_nearest() {
        let pts: Vec<f64> = (0..200).map(|i| (i as f64 * 0.618).fract()).collect();
        let r = kmeans(&pts, 2, 6, 3, &KMeansOptions::default()).unwrap();
        for i in 0..100 {
            assert_ne!(r.nearest[i], r.second[i]);
            let p = &pts[i * 2..i * 2 + 2];
            assert!(sq_dist(p, r.centroid(r.nearest[i])) <= sq_dist(p, r.centroid(r.second[i])));
        }
    }

    fn sse(points: &[f64], dims: usize, labels: &[usize], k: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..k {
            let members: Vec<&[f64]> = points
                .chunks_exact(dims)
                .zip(labels)
                .filter(|(_, &l)| l == j)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                return f64::INFINITY;
            }
            let mean: Vec<f64> = (0..dims)
                .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
                .collect();
            total += members.iter().map(|p| sq_dist(p, &mean)).sum::<f64>();
        }
        total
    }

    #[test]
    fn one_dimensional_optimum_over_contiguous_splits() {
        // optimal 1-D clusters are intervals of the sorted values
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pts: Vec<f64> = (0..30)
            .map(|i| (i % 3) as f64 * 4.0 + rng.random_range(-1.5..1.5))
            .collect();
        pts.sort_by(f64::total_cmp);
        let cost = |a: usize, b: usize| {
            let s = &pts[a..b];
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        };
        let mut best = f64::INFINITY;
        for i in 1..29 {
            for j in i + 1..30 {
                best = best.min(cost(0, i) + cost(i, j) + cost(j, 30));
            }
        }
        let r = kmeans(&pts, 1, 3, 42, &KMeansOptions::default()).unwrap();
        assert!((r.inertia - best).abs() < 1e-9 * best, "{} vs {best}", r.inertia);
    }

    #[test]
    fn two_dimensional_optimum_by_exhaustive_labelling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<f64> = (0..24).map(|_| rng.random_range(0.0..1.0)).collect();
        let (n, k) = (12, 3);
        let mut best = f64::INFINITY;
        let mut labels = vec![0; n];
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            for l in labels.iter_mut() {
                *l = c % k;
                c /= k;
            }
            best = best.min(sse(&pts, 2, &labels, k));
        }
        let r = kmeans(&pts, 2, k, 42, &KMeansOptions::default()).unwrap();
        assert!((r.inertia - best).abs() < 1e-9 * best, "{} vs {best}", r.inertia);
        assert!((sse(&pts, 2, &r.nearest, k) - r.inertia).abs() < 1e-12);
    }

    #[test]
    fn too_few_distinct_points_is_an_error() {
        let pts = [1.0, 1.0, 1.0, 2.0];
        assert!(kmeans(&pts, 1, 3, 0, &KMeansOptions::default()).is_err());
        assert!(kmeans(&pts, 1, 5, 0, &KMeansOptions::default()).is_err());
    }
}
