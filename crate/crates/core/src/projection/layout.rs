//! Spectral initialization, the neighbour-embedding layout optimizer and PCA.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::graph::FuzzyGraph;
use crate::matrix::Matrix;
use crate::seeding::rng_for;

pub type Point = [f64; 2];

/// Least-squares fit of `1 / (1 + a·x^(2b))` to the target membership curve
/// (1 below `min_dist`, `exp(−(x − min_dist)/spread)` above) on 300 points in [0, 3·spread].
pub fn fit_ab(min_dist: f64, spread: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    let eval = |a: f64, b: f64| -> (f64, Vec<f64>, Vec<[f64; 2]>) {
        let mut sse = 0.0;
        let mut r = Vec::with_capacity(xs.len());
        let mut jac = Vec::with_capacity(xs.len());
        for (&x, &y) in xs.iter().zip(&ys) {
            let (p, lnx) = if x > 0.0 { (x.powf(2.0 * b), x.ln()) } else { (0.0, 0.0) };
            let den = 1.0 + a * p;
            let f = 1.0 / den;
            r.push(f - y);
            sse += (f - y) * (f - y);
            let d = den * den;
            jac.push([-p / d, -a * p * 2.0 * lnx / d]);
        }
        (sse, r, jac)
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let (mut sse, mut r, mut jac) = eval(a, b);
    for _ in 0..500 {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (ri, ji) in r.iter().zip(&jac) {
            for u in 0..2 {
                jtr[u] += ji[u] * ri;
                for v in 0..2 {
                    jtj[u][v] += ji[u] * ji[v];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let db = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            let (nsse, nr, nj) = eval(na, nb);
            if nsse.is_finite() && nsse < sse {
                let done = (da.abs() < 1e-14 * a.abs()) && (db.abs() < 1e-14 * b.abs());
                (a, b, sse, r, jac) = (na, nb, nsse, nr, nj);
                lambda = (lambda / 10.0).max(1e-15);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn min_max_scale(col: &mut [f64], range: f64) {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in col.iter_mut() {
        *v = if span > 0.0 { range * (*v - lo) / span } else { 0.0 };
    }
}

/// Eigenvalue order with index tie-breaking, ascending.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, Vec<usize>) {
    let eig = SymmetricEigen::new(m);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    (vals, eig.eigenvectors, order)
}

/// Eigenvectors 2 and 3 of the symmetric normalized Laplacian, each scaled to [0, 10].
pub fn spectral_init(graph: &FuzzyGraph) -> Vec<Point> {
    let n = graph.n;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(i, j, v) in &graph.edges {
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = w.row(i).iter().sum();
            if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }
        })
        .collect();
    let mut lap = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                lap[(i, j)] -= inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
            }
        }
    }
    let (_, vecs, order) = sorted_eigen(lap);
    let mut cols: Vec<Vec<f64>> = order[1..3.min(n)]
        .iter()
        .map(|&k| vecs.column(k).iter().copied().collect())
        .collect();
    while cols.len() < 2 {
        cols.push(vec![0.0; n]);
    }
    for c in &mut cols {
        fix_sign(c);
        min_max_scale(c, 10.0);
    }
    (0..n).map(|i| [cols[0][i], cols[1][i]]).collect()
}

/// Centred data projected on the two leading principal axes.
pub fn pca(x: &Matrix) -> Vec<Point> {
    let n = x.rows();
    let p = x.cols();
    let means: Vec<f64> = (0..p).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let centred = DMatrix::from_fn(n, p, |i, j| x.get(i, j) - means[j]);
    let cov = centred.transpose() * &centred / n as f64;
    let (vals, vecs, mut order) = sorted_eigen(cov);
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&k| vecs.column(k).iter().copied().collect())
        .collect();
    while axes.len() < 2 {
        axes.push(vec![0.0; p]);
    }
    for a in &mut axes {
        fix_sign(a);
    }
    (0..n)
        .map(|i| {
            let row = centred.row(i);
            let proj = |a: &[f64]| row.iter().zip(a).map(|(x, w)| x * w).sum::<f64>();
            [proj(&axes[0]), proj(&axes[1])]
        })
        .collect()
}

pub struct LayoutParams {
    pub a: f64,
    pub b: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub seed: u64,
}

fn clip(v: f64) -> f64 {
    v.clamp(-4.0, 4.0)
}

/// Stochastic gradient layout of the attract/repel cross-entropy. Both
/// endpoints of every sampled edge move; the learning rate decays linearly to 0.
pub fn optimize_layout(graph: &FuzzyGraph, init: &[Point], params: &LayoutParams) -> Vec<Point> {
    let mut emb = init.to_vec();
    if params.n_epochs == 0 || graph.edges.is_empty() {
        return emb;
    }
    let n_epochs = params.n_epochs as f64;
    let max_w = graph.edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut eps = Vec::new();
    for &(i, j, w) in &graph.edges {
        if w < max_w / n_epochs {
            continue;
        }
        let period = max_w / w;
        for (h, t) in [(i, j), (j, i)] {
            heads.push(h);
            tails.push(t);
            eps.push(period);
        }
    }
    let neg_rate = params.negative_sample_rate as f64;
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / neg_rate).collect();
    let mut next = eps.clone();
    let mut next_neg = eps_neg.clone();
    let (a, b) = (params.a, params.b);
    let n = emb.len();
    let mut rng = rng_for(params.seed, "layout-negative-sampling");
    for epoch in 0..params.n_epochs {
        let alpha = 1.0 - epoch as f64 / n_epochs;
        let e = epoch as f64;
        for k in 0..heads.len() {
            if next[k] > e {
                continue;
            }
            let (j, t) = (heads[k], tails[k]);
            let d2 = (emb[j][0] - emb[t][0]).powi(2) + (emb[j][1] - emb[t][1]).powi(2);
            if d2 > 0.0 {
                let coeff = -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0);
                for d in 0..2 {
                    let g = clip(coeff * (emb[j][d] - emb[t][d])) * alpha;
                    emb[j][d] += g;
                    emb[t][d] -= g;
                }
            }
            next[k] += eps[k];
            let n_neg = ((e - next_neg[k]) / eps_neg[k]).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let o = rng.random_range(0..n);
                if o == j {
                    continue;
                }
                let d2 = (emb[j][0] - emb[o][0]).powi(2) + (emb[j][1] - emb[o][1]).powi(2);
                for d in 0..2 {
                    let g = if d2 > 0.0 {
                        let coeff = 2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0));
                        clip(coeff * (emb[j][d] - emb[o][d]))
                    } else {
                        4.0
                    };
                    emb[j][d] += g * alpha;
                }
            }
            next_neg[k] += n_neg as f64 * eps_neg[k];
        }
    }
    emb
}
