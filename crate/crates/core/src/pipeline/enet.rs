//! Elastic-net solvers: cyclic coordinate descent for squared error and
//! proximal gradient for the logistic loss.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::probe::sigmoid;
use crate::seeding::rng_for;

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// `n` values log-spaced from `lo` to `hi`, inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnetFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Objective after each full sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
}

impl EnetFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// `(1/2n)‖r‖² + α·l1·‖β‖₁ + ½·α·(1−l1)·‖β‖²`
pub fn enet_objective(residual: &[f64], beta: &[f64], alpha: f64, l1_ratio: f64) -> f64 {
    let n = residual.len() as f64;
    let rss: f64 = residual.iter().map(|r| r * r).sum();
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    rss / (2.0 * n) + alpha * l1_ratio * l1 + 0.5 * alpha * (1.0 - l1_ratio) * l2
}

/// Fits with an unpenalised intercept by centring `x` and `y`.
pub fn elastic_net(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    max_iter: usize,
    tol: f64,
) -> EnetFit {
    let n = x.rows();
    let p = x.cols();
    let nf = n as f64;
    let x_means: Vec<f64> = (0..p).map(|j| x.column(j).iter().sum::<f64>() / nf).collect();
    let y_mean = y.iter().sum::<f64>() / nf;
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|i| x.get(i, j) - x_means[j]).collect())
        .collect();
    let sq: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();
    let mut r: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut beta = vec![0.0; p];
    let l1_pen = alpha * l1_ratio;
    let l2_pen = alpha * (1.0 - l1_ratio);
    let mut trace = Vec::new();
    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let denom = sq[j] + l2_pen;
            if denom == 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = cols[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf + sq[j] * old;
            let new = soft_threshold(rho, l1_pen) / denom;
            if new != old {
                let d = new - old;
                for (ri, xi) in r.iter_mut().zip(&cols[j]) {
                    *ri -= xi * d;
                }
                beta[j] = new;
                max_change = max_change.max(d.abs());
            }
        }
        trace.push(enet_objective(&r, &beta, alpha, l1_ratio));
        if max_change < tol {
            break;
        }
    }
    let intercept = y_mean - x_means.iter().zip(&beta).map(|(m, b)| m * b).sum::<f64>();
    EnetFit {
        coefficients: beta,
        intercept,
        objective_trace: trace,
        sweeps,
    }
}

/// Seeded shuffle followed by contiguous blocks; earlier folds take the remainder.
pub fn cv_folds(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let k = k.clamp(1, n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, "enet-cv-folds"));
    let base = n / k;
    let extra = n % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnetCv {
    pub fit: EnetFit,
    pub alpha: f64,
    pub l1_ratio: f64,
    /// Mean validation MSE for every `(alpha, l1_ratio)` pair, grid order.
    pub scores: Vec<(f64, f64, f64)>,
}

/// Grid search over `alphas × l1_ratios` with k-fold CV, then a refit on all rows.
pub fn elastic_net_cv(
    x: &Matrix,
    y: &[f64],
    alphas: &[f64],
    l1_ratios: &[f64],
    folds: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> EnetCv {
    let n = x.rows();
    let folds = cv_folds(n, folds, seed);
    let grid: Vec<(f64, f64)> = l1_ratios
        .iter()
        .flat_map(|&l1| alphas.iter().map(move |&a| (a, l1)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..folds.len()).map(move |f| (g, f)))
        .collect();
    let split: Vec<(Matrix, Vec<f64>, Matrix, Vec<f64>)> = folds
        .iter()
        .map(|val| {
            let mut is_val = vec![false; n];
            for &i in val {
                is_val[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !is_val[i]).collect();
            (
                x.select_rows(&train),
                train.iter().map(|&i| y[i]).collect(),
                x.select_rows(val),
                val.iter().map(|&i| y[i]).collect(),
            )
        })
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (alpha, l1) = grid[g];
            let (xt, yt, xv, yv) = &split[f];
            if xt.rows() == 0 || xv.rows() == 0 {
                return 0.0;
            }
            let fit = elastic_net(xt, yt, alpha, l1, max_iter, tol);
            xv.row_iter()
                .zip(yv)
                .map(|(row, t)| (fit.predict(row) - t).powi(2))
                .sum::<f64>()
                / yv.len() as f64
        })
        .collect();
    let k = folds.len() as f64;
    let scores: Vec<(f64, f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(g, &(a, l1))| {
            let total: f64 = errors[g * folds.len()..(g + 1) * folds.len()].iter().sum();
            (a, l1, total / k)
        })
        .collect();
    let &(alpha, l1_ratio, _) = scores
        .iter()
        .min_by(|a, b| {
            a.2.total_cmp(&b.2)
                .then(b.0.total_cmp(&a.0))
                .then(b.1.total_cmp(&a.1))
        })
        .expect("non-empty grid");
    let fit = elastic_net(x, y, alpha, l1_ratio, max_iter, tol);
    EnetCv {
        fit,
        alpha,
        l1_ratio,
        scores,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Objective after each accepted step, starting at β = 0, b = 0.
    pub objective_trace: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Logistic<'a> {
    x: &'a Matrix,
    sign: Vec<f64>,
    inv_c: f64,
    l1_ratio: f64,
}

impl Logistic<'_> {
    fn margins(&self, beta: &[f64], b: f64) -> Vec<f64> {
        self.x
            .row_iter()
            .map(|row| b + row.iter().zip(beta).map(|(v, w)| v * w).sum::<f64>())
            .collect()
    }

    /// Loss plus the ridge part of the penalty.
    fn smooth(&self, beta: &[f64], b: f64) -> f64 {
        let loss: f64 = self
            .margins(beta, b)
            .iter()
            .zip(&self.sign)
            .map(|(m, s)| softplus(-s * m))
            .sum();
        let l2: f64 = beta.iter().map(|w| w * w).sum();
        loss + self.inv_c * 0.5 * (1.0 - self.l1_ratio) * l2
    }

    fn l1(&self, beta: &[f64]) -> f64 {
        self.inv_c * self.l1_ratio * beta.iter().map(|w| w.abs()).sum::<f64>()
    }

    fn gradient(&self, beta: &[f64], b: f64) -> (Vec<f64>, f64) {
        let m = self.margins(beta, b);
        let mut g = vec![0.0; beta.len()];
        let mut gb = 0.0;
        for (i, row) in self.x.row_iter().enumerate() {
            let s = self.sign[i];
            let coef = -s * sigmoid(-s * m[i]);
            gb += coef;
            for (gj, v) in g.iter_mut().zip(row) {
                *gj += coef * v;
            }
        }
        for (gj, w) in g.iter_mut().zip(beta) {
            *gj += self.inv_c * (1.0 - self.l1_ratio) * w;
        }
        (g, gb)
    }
}

/// `(1/C)·[l1·‖β‖₁ + ½(1−l1)‖β‖²] + Σ log(1 + exp(−ỹ(xβ + b)))`, solved by
/// proximal gradient with backtracking. Stops once the relative objective
/// change drops below `tol`.
pub fn logistic_elastic_net(
    x: &Matrix,
    y: &[bool],
    c: f64,
    l1_ratio: f64,
    max_iter: usize,
    tol: f64,
) -> LogisticFit {
    let prob = Logistic {
        x,
        sign: y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect(),
        inv_c: 1.0 / c,
        l1_ratio,
    };
    let p = x.cols();
    let mut beta = vec![0.0; p];
    let mut b = 0.0;
    let mut f = prob.smooth(&beta, b);
    let mut obj = f;
    let mut trace = vec![obj];
    let mut step = 1.0;
    for _ in 0..max_iter {
        let (g, gb) = prob.gradient(&beta, b);
        let accepted = loop {
            let cand: Vec<f64> = beta
                .iter()
                .zip(&g)
                .map(|(w, gj)| soft_threshold(w - step * gj, step * prob.inv_c * l1_ratio))
                .collect();
            let cand_b = b - step * gb;
            let diff: Vec<f64> = cand.iter().zip(&beta).map(|(a, w)| a - w).collect();
            let db = cand_b - b;
            let lin: f64 = diff.iter().zip(&g).map(|(d, gj)| d * gj).sum::<f64>() + db * gb;
            let sq: f64 = diff.iter().map(|d| d * d).sum::<f64>() + db * db;
            let f_cand = prob.smooth(&cand, cand_b);
            if f_cand <= f + lin + sq / (2.0 * step) + 1e-12 * f.abs() {
                break Some((cand, cand_b, f_cand));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((cand, cand_b, f_cand)) = accepted else { break };
        let new_obj = f_cand + prob.l1(&cand);
        if new_obj > obj {
            break;
        }
        let change = (obj - new_obj).abs() / obj.abs().max(f64::MIN_POSITIVE);
        beta = cand;
        b = cand_b;
        f = f_cand;
        obj = new_obj;
        trace.push(obj);
        if change < tol {
            break;
        }
    }
    LogisticFit {
        coefficients: beta,
        intercept: b,
        objective_trace: trace,
    }
}

/// Full objective for a given solution, for checks.
pub fn logistic_objective(x: &Matrix, y: &[bool], c: f64, l1_ratio: f64, beta: &[f64], b: f64) -> f64 {
    let prob = Logistic {
        x,
        sign: y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect(),
        inv_c: 1.0 / c,
        l1_ratio,
    };
    prob.smooth(beta, b) + prob.l1(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_column(n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (m, v) = crate::matrix::mean_var(&raw);
        raw.iter().map(|x| (x - m) / v.sqrt()).collect()
    }

    #[test]
    fn one_feature_closed_form() {
        let col = standard_column(10);
        let x = Matrix::from_columns(&[col.clone()]).unwrap();
        let fit = elastic_net(&x, &col, 0.1, 0.5, 1000, 1e-12);
        let expected = soft_threshold(1.0, 0.05) / 1.05;
        assert!((fit.coefficients[0] - expected).abs() < 1e-12);
        assert!((expected - 0.904762).abs() < 1e-6);
    }

    #[test]
    fn zero_target_zero_coefficients() {
        let x = Matrix::from_rows(&(0..8).map(|i| vec![i as f64, (i * i) as f64]).collect::<Vec<_>>())
            .unwrap();
        let y = vec![0.0; 8];
        for a in log_space(1e-3, 1e2, 5) {
            assert_eq!(elastic_net(&x, &y, a, 0.8, 100, 1e-6).coefficients, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = log_space(1e-3, 1e2, 50);
        assert_eq!(g.len(), 50);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[49] - 1e2).abs() < 1e-9);
    }

    #[test]
    fn folds_partition() {
        let f = cv_folds(12, 5, 42);
        assert_eq!(f.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 2, 2, 2]);
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        assert_eq!(f, cv_folds(12, 5, 42));
    }

    #[test]
    fn balanced_featureless_logistic() {
        let x = Matrix::zeros(4, 2);
        let fit = logistic_elastic_net(&x, &[true, false, true, false], 0.5, 0.5, 100, 2e-3);
        assert_eq!(fit.coefficients, vec![0.0, 0.0]);
        assert_eq!(fit.intercept, 0.0);
    }

    #[test]
    fn separable_sign() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64 - 4.5]).collect::<Vec<_>>()).unwrap();
        let up: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let down: Vec<bool> = up.iter().map(|v| !v).collect();
        let a = logistic_elastic_net(&x, &up, 0.5, 0.5, 6000, 2e-3);
        let b = logistic_elastic_net(&x, &down, 0.5, 0.5, 6000, 2e-3);
        assert!(a.coefficients[0] > 0.0);
        assert!(b.coefficients[0] < 0.0);
        let zero = logistic_objective(&x, &up, 0.5, 0.5, &[0.0], 0.0);
        assert!(*a.objective_trace.last().unwrap() <= zero);
        assert!(a.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
