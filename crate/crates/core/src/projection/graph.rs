//! Exact cosine k-nearest neighbours and the fuzzy neighbour graph built on them.

use rayon::prelude::*;

use crate::matrix::Matrix;

/// `1 − cos(a, b)`, with any zero vector at distance 1 from everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb).sqrt()).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    /// Neighbour indices per point, nearest first, self excluded.
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl KnnGraph {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn k(&self) -> usize {
        self.indices.first().map_or(0, Vec::len)
    }
}

/// Brute force over all pairs; equal distances resolve to the lower index.
/// `k` must be below the point count.
pub fn knn_graph(x: &Matrix, k: usize) -> KnnGraph {
    let n = x.rows();
    assert!(k < n, "k = {k} needs at least {} points", k + 1);
    let (indices, distances) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (cosine_distance(x.row(i), x.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            (d.iter().map(|p| p.1).collect(), d.iter().map(|p| p.0).collect())
        })
        .unzip();
    KnnGraph { indices, distances }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph {
    pub n: usize,
    /// Undirected edges `(i, j, w)` with `i < j` and `w > 0`, sorted.
    pub edges: Vec<(usize, usize, f64)>,
    pub rhos: Vec<f64>,
    pub sigmas: Vec<f64>,
}

const BISECTION_STEPS: usize = 200;
const SIGMA_TOL: f64 = 1e-5;
const MIN_SIGMA_SCALE: f64 = 1e-3;

/// Solves `Σ_j exp(−max(0, d_j − ρ)/σ) = log2(k)` for σ by bisection.
pub fn smooth_sigma(distances: &[f64], rho: f64) -> f64 {
    let target = (distances.len() as f64).log2();
    let sum = |sigma: f64| -> f64 {
        distances
            .iter()
            .map(|d| (-(d - rho).max(0.0) / sigma).exp())
            .sum()
    };
    let (mut lo, mut hi, mut mid) = (0.0, f64::INFINITY, 1.0);
    for _ in 0..BISECTION_STEPS {
        let s = sum(mid);
        if (s - target).abs() < SIGMA_TOL * 1e-3 {
            break;
        }
        if s > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    let mean = distances.iter().sum::<f64>() / distances.len().max(1) as f64;
    mid.max(MIN_SIGMA_SCALE * mean).max(f64::MIN_POSITIVE)
}

/// Membership strengths per directed kNN edge, then symmetrized with
/// `w = w₁ + w₂ − w₁·w₂`.
pub fn fuzzy_graph(knn: &KnnGraph) -> FuzzyGraph {
    let n = knn.len();
    let rhos: Vec<f64> = knn.distances.iter().map(|d| d.first().copied().unwrap_or(0.0)).collect();
    let sigmas: Vec<f64> = knn
        .distances
        .par_iter()
        .zip(&rhos)
        .map(|(d, &rho)| smooth_sigma(d, rho))
        .collect();
    let mut directed = std::collections::BTreeMap::new();
    for i in 0..n {
        for (&j, &d) in knn.indices[i].iter().zip(&knn.distances[i]) {
            let w = (-(d - rhos[i]).max(0.0) / sigmas[i]).exp();
            directed.insert((i, j), w);
        }
    }
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j) in directed.keys() {
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            continue;
        }
        let a = directed.get(&(key.0, key.1)).copied().unwrap_or(0.0);
        let b = directed.get(&(key.1, key.0)).copied().unwrap_or(0.0);
        let w = 1.0 - (1.0 - a) * (1.0 - b);
        if w > 0.0 {
            edges.push((key.0, key.1, w));
        }
    }
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    FuzzyGraph {
        n,
        edges,
        rhos,
        sigmas,
    }
}
