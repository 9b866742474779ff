//! Independent reference implementations used as test oracles. None of these
//! call into the library's own numerics.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 1-based ranks with ties averaged.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Magnitude spectrum of bins 0..=N/2 by the O(N²) definition.
pub fn naive_dft_magnitudes(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, x) in frame.iter().enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                re += x * ang.cos();
                im += x * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Mean over Hann-windowed frames of the magnitude-weighted mean frequency.
pub fn centroid_oracle(signal: &[f64], sample_rate: f64, size: usize, hop: usize) -> f64 {
    let window: Vec<f64> = (0..size).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / size as f64).cos()).collect();
    let mut total = 0.0;
    let mut count = 0;
    let mut start = 0;
    while start + size <= signal.len() {
        let frame: Vec<f64> = (0..size).map(|i| signal[start + i] * window[i]).collect();
        let mag = naive_dft_magnitudes(&frame);
        let s: f64 = mag.iter().sum();
        let c = if s > 0.0 {
            mag.iter().enumerate().map(|(k, a)| k as f64 * sample_rate / size as f64 * a).sum::<f64>() / s
        } else {
            0.0
        };
        total += c;
        count += 1;
        start += hop;
    }
    total / count as f64
}

pub fn mse(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

pub fn mae(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
}

/// 1 - SSres/SStot, reported as 0 for zero-variance truth.
pub fn r2(y: &[f64], p: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - m).powi(2)).sum();
    if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// (accuracy, weighted precision, weighted recall, weighted F1, macro F1).
pub fn classification_oracle(truth: &[&str], pred: &[&str]) -> (f64, f64, f64, f64, f64) {
    let mut labels: Vec<&str> = truth.iter().chain(pred).copied().collect();
    labels.sort();
    labels.dedup();
    let n = truth.len() as f64;
    let mut support: BTreeMap<&str, f64> = BTreeMap::new();
    for t in truth {
        *support.entry(t).or_default() += 1.0;
    }
    let (mut wp, mut wr, mut wf, mut mf) = (0.0, 0.0, 0.0, 0.0);
    for l in &labels {
        let tp = truth.iter().zip(pred).filter(|(t, p)| *t == l && *p == l).count() as f64;
        let predicted = pred.iter().filter(|p| *p == l).count() as f64;
        let actual = support.get(l).copied().unwrap_or(0.0);
        let prec = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let rec = if actual > 0.0 { tp / actual } else { 0.0 };
        let f = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
        wp += actual / n * prec;
        wr += actual / n * rec;
        wf += actual / n * f;
        mf += f;
    }
    let acc = truth.iter().zip(pred).filter(|(t, p)| t == p).count() as f64 / n;
    (acc, wp, wr, wf, mf / labels.len() as f64)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        1.0
    } else {
        1.0 - dot / (na * nb)
    }
}

/// Exhaustive cosine kNN excluding self; ties broken by index.
pub fn brute_knn(x: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..x.len())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..x.len()).filter(|&j| j != i).map(|j| (cosine(&x[i], &x[j]), j)).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d.into_iter().take(k).map(|p| p.1).collect()
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn neighbour_order(points: &[Vec<f64>], i: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| (euclid(&points[i], &points[j]), j))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d.into_iter().map(|p| p.1).collect()
}

/// Trustworthiness with Euclidean distances in both spaces.
pub fn trustworthiness(high: &[Vec<f64>], low: &[[f64; 2]], k: usize) -> f64 {
    let n = high.len();
    let low: Vec<Vec<f64>> = low.iter().map(|p| p.to_vec()).collect();
    let mut penalty = 0.0;
    for i in 0..n {
        let high_order = neighbour_order(high, i);
        let mut rank = vec![0usize; n];
        for (r, &j) in high_order.iter().enumerate() {
            rank[j] = r + 1;
        }
        for &j in neighbour_order(&low, i).iter().take(k) {
            if rank[j] > k {
                penalty += (rank[j] - k) as f64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty
}

/// Gaussian blobs around the given centres, `per` points each.
pub fn blobs(centres: &[Vec<f64>], per: usize, sd: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.random_range(f64::EPSILON..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per {
            x.push(centre.iter().map(|m| m + sd * gauss()).collect());
            y.push(c);
        }
    }
    (x, y)
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    cov / (variance(a) * n * variance(b) * n).sqrt()
}

/// Features kept by a strict-below variance cut.
pub fn variance_oracle(cols: &[Vec<f64>], eps: f64) -> Vec<usize> {
    (0..cols.len()).filter(|&j| variance(&cols[j]) >= eps).collect()
}

/// Greedy pruning that repeats until no pair among the survivors has |r| above the threshold.
pub fn correlation_oracle(cols: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..cols.len()).collect();
    loop {
        let mut victim = None;
        'scan: for a in 0..keep.len() {
            for b in a + 1..keep.len() {
                if pearson(&cols[keep[a]], &cols[keep[b]]).abs() > threshold {
                    victim = Some(b);
                    break 'scan;
                }
            }
        }
        match victim {
            Some(b) => {
                keep.remove(b);
            }
            None => return keep,
        }
    }
}

/// (micro F1, macro F1) over label columns.
pub fn multilabel_oracle(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> (f64, f64) {
    let f = |tp: f64, fp: f64, fn_: f64| if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
    let cols = truth[0].len();
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    let mut macro_sum = 0.0;
    for j in 0..cols {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (t, p) in truth.iter().zip(pred) {
            match (t[j], p[j]) {
                (true, true) => a += 1.0,
                (false, true) => b += 1.0,
                (true, false) => c += 1.0,
                (false, false) => {}
            }
        }
        macro_sum += f(a, b, c);
        tp += a;
        fp += b;
        fn_ += c;
    }
    (f(tp, fp, fn_), macro_sum / cols as f64)
}
