//! Feature selection ahead of projection:
//! standardize → variance threshold → correlation pruning → elastic net → top-K.

mod enet;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{mean_var, pearson, Matrix};

pub use enet::{
    cv_folds, elastic_net, elastic_net_cv, enet_objective, log_space, logistic_elastic_net,
    logistic_objective, soft_threshold, EnetCv, EnetFit, LogisticFit,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub variance_eps: f64,
    pub corr_threshold: f64,
    pub l1_ratios: Vec<f64>,
    pub classification_l1_ratio: f64,
    pub n_alphas: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub cv_folds: usize,
    pub max_iter_regression: usize,
    pub max_iter_classification: usize,
    pub tol: f64,
    pub c: f64,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            variance_eps: 1e-6,
            corr_threshold: 0.95,
            l1_ratios: vec![0.5, 0.8],
            classification_l1_ratio: 0.5,
            n_alphas: 50,
            alpha_min: 1e-3,
            alpha_max: 1e2,
            cv_folds: 5,
            max_iter_regression: 60000,
            max_iter_classification: 6000,
            tol: 2e-3,
            c: 0.5,
            top_k: 25,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("variance_eps", self.variance_eps),
            ("corr_threshold", self.corr_threshold),
            ("classification_l1_ratio", self.classification_l1_ratio),
            ("alpha_min", self.alpha_min),
            ("alpha_max", self.alpha_max),
            ("tol", self.tol),
            ("c", self.c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("n_alphas", self.n_alphas),
            ("cv_folds", self.cv_folds),
            ("max_iter_regression", self.max_iter_regression),
            ("max_iter_classification", self.max_iter_classification),
            ("top_k", self.top_k),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.l1_ratios.is_empty()
            || self.l1_ratios.iter().chain([&self.classification_l1_ratio]).any(|r| !(*r > 0.0 && *r <= 1.0))
        {
            return Err(Error::InvalidConfig("l1 ratios must lie in (0, 1]".into()));
        }
        if self.alpha_min > self.alpha_max {
            return Err(Error::InvalidConfig("alpha_min exceeds alpha_max".into()));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        log_space(self.alpha_min, self.alpha_max, self.n_alphas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum DropReason {
    Variance { variance: f64 },
    Correlation { kept: usize, r: f64 },
    TopK { score: f64 },
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::Variance { variance } => write!(f, "variance variance={variance:.6e}"),
            DropReason::Correlation { kept, r } => write!(f, "correlation with={kept} r={r:.6}"),
            DropReason::TopK { score } => write!(f, "top_k score={score:.6e}"),
        }
    }
}

/// Which columns of a matrix survive, with a reason for each one that did not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMask {
    n_columns: usize,
    kept: Vec<usize>,
    dropped: BTreeMap<usize, DropReason>,
    warnings: Vec<String>,
}

impl FeatureMask {
    pub fn all(n_columns: usize) -> Self {
        Self {
            n_columns,
            kept: (0..n_columns).collect(),
            dropped: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn from_dropped(n_columns: usize, dropped: BTreeMap<usize, DropReason>) -> Self {
        Self {
            n_columns,
            kept: (0..n_columns).filter(|j| !dropped.contains_key(j)).collect(),
            dropped,
            warnings: Vec::new(),
        }
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    /// Strictly increasing column indices.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped(&self) -> &BTreeMap<usize, DropReason> {
        &self.dropped
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        x.select_columns(&self.kept)
    }

    /// Chains a mask computed on `self.apply(x)` back onto the original columns.
    pub fn compose(&self, inner: &FeatureMask) -> FeatureMask {
        assert_eq!(inner.n_columns, self.kept.len(), "inner mask width");
        let mut dropped = self.dropped.clone();
        for (&j, reason) in &inner.dropped {
            let reason = match *reason {
                DropReason::Correlation { kept, r } => DropReason::Correlation {
                    kept: self.kept[kept],
                    r,
                },
                other => other,
            };
            dropped.insert(self.kept[j], reason);
        }
        let mut out = FeatureMask::from_dropped(self.n_columns, dropped);
        out.warnings = self.warnings.iter().chain(&inner.warnings).cloned().collect();
        out
    }
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() < 2 {
            return Err(Error::InvalidData("standardize needs at least two rows".into()));
        }
        if !x.is_finite() {
            return Err(Error::InvalidData("non-finite value in feature matrix".into()));
        }
        let (means, stds) = (0..x.cols())
            .map(|j| {
                let (m, v) = mean_var(&x.column(j));
                (m, v.sqrt())
            })
            .unzip();
        Ok(Self { means, stds })
    }

    /// Columns whose standard deviation is zero; they are only centred.
    pub fn zero_std(&self) -> Vec<usize> {
        (0..self.stds.len()).filter(|&j| self.stds[j] == 0.0).collect()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                actual: x.cols(),
            });
        }
        let mut out = x.clone();
        for i in 0..x.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let centred = *v - self.means[j];
                *v = if self.stds[j] == 0.0 { centred } else { centred / self.stds[j] };
            }
        }
        Ok(out)
    }
}

/// Returns the standardized matrix and its scaler.
pub fn standardize(x: &Matrix) -> Result<(Matrix, Scaler)> {
    let s = Scaler::fit(x)?;
    Ok((s.transform(x)?, s))
}

/// Drops columns whose population variance is strictly below `eps`.
pub fn variance_threshold(x: &Matrix, eps: f64) -> FeatureMask {
    let dropped = (0..x.cols())
        .filter_map(|j| {
            let (_, var) = mean_var(&x.column(j));
            (var < eps).then_some((j, DropReason::Variance { variance: var }))
        })
        .collect();
    FeatureMask::from_dropped(x.cols(), dropped)
}

/// Pairwise scan in lexicographic order; the later column of any pair with
/// `|r| > threshold` is dropped. Passes repeat until one drops nothing.
pub fn correlation_prune(x: &Matrix, threshold: f64) -> FeatureMask {
    let p = x.cols();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let corr: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| (0..p).map(|j| if j > i { pearson(&cols[i], &cols[j]) } else { 0.0 }).collect())
        .collect();
    let mut alive = vec![true; p];
    let mut dropped = BTreeMap::new();
    loop {
        let mut changed = false;
        for i in 0..p {
            for j in i + 1..p {
                if alive[i] && alive[j] && corr[i][j].abs() > threshold {
                    alive[j] = false;
                    dropped.insert(j, DropReason::Correlation { kept: i, r: corr[i][j] });
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    FeatureMask::from_dropped(p, dropped)
}

/// Keeps the `k` columns with the largest `|coefficient|`, ties to the lower
/// index. Zero coefficients fill remaining slots in index order with a warning.
pub fn select_top_k(coefficients: &[f64], k: usize) -> FeatureMask {
    let p = coefficients.len();
    let mut warnings = Vec::new();
    let k = if k > p {
        warnings.push(format!("top_k {k} clamped to {p} available features"));
        p
    } else {
        k
    };
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        coefficients[b]
            .abs()
            .total_cmp(&coefficients[a].abs())
            .then(a.cmp(&b))
    });
    let nonzero = coefficients.iter().filter(|c| **c != 0.0).count();
    if nonzero < k {
        warnings.push(format!(
            "only {nonzero} nonzero coefficients; filled {} slots with zero-weight features",
            k - nonzero
        ));
    }
    let dropped = order[k..]
        .iter()
        .map(|&j| (j, DropReason::TopK { score: coefficients[j].abs() }))
        .collect();
    let mut mask = FeatureMask::from_dropped(p, dropped);
    mask.warnings = warnings;
    mask
}

/// Supervision for the elastic-net stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Named real targets, one value per row each.
    Regression(Vec<(String, Vec<f64>)>),
    Classes(Vec<String>),
    /// Named binary columns; `rows[i][j]` is label `j` on row `i`.
    Labels { names: Vec<String>, rows: Vec<Vec<bool>> },
}

impl Targets {
    fn len(&self) -> usize {
        match self {
            Targets::Regression(t) => t.first().map_or(0, |(_, v)| v.len()),
            Targets::Classes(c) => c.len(),
            Targets::Labels { rows, .. } => rows.len(),
        }
    }
}

/// Elastic-net outcome for one target (or one binary problem).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFit {
    pub name: String,
    /// Coefficients on the original columns; dropped columns hold 0.
    pub coefficients: Vec<f64>,
    pub alpha: Option<f64>,
    pub l1_ratio: f64,
    /// This target's own top-K mask.
    pub mask: FeatureMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub scaler: Scaler,
    pub variance: FeatureMask,
    pub correlation: FeatureMask,
    pub fits: Vec<TargetFit>,
    /// Per-column max |β| across all fits.
    pub aggregate: Vec<f64>,
    /// Final mask, built from `aggregate`.
    pub mask: FeatureMask,
    pub stage_log: Vec<String>,
}

fn scatter(survivors: &[usize], n: usize, coef: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; n];
    for (&j, &c) in survivors.iter().zip(coef) {
        full[j] = c;
    }
    full
}

/// Runs every stage on `x` (raw, unstandardized rows) against `targets`.
pub fn select_features(x: &Matrix, targets: &Targets, cfg: &PipelineConfig) -> Result<Selection> {
    cfg.validate()?;
    if targets.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: targets.len(),
        });
    }
    let p = x.cols();
    let mut log = Vec::new();
    let (z, scaler) = standardize(x)?;
    log.push(format!("standardize columns={p} zero_std={}", scaler.zero_std().len()));

    let variance = variance_threshold(x, cfg.variance_eps);
    log.push(format!("variance eps={:e} dropped={}", cfg.variance_eps, variance.dropped().len()));

    let inner = correlation_prune(&variance.apply(&z), cfg.corr_threshold);
    let correlation = variance.compose(&inner);
    log.push(format!(
        "correlation threshold={} dropped={}",
        cfg.corr_threshold,
        inner.dropped().len()
    ));
    let survivors = correlation.kept().to_vec();
    let zs = correlation.apply(&z);

    let mut fits = Vec::new();
    match targets {
        Targets::Regression(named) => {
            let alphas = cfg.alphas();
            for (name, y) in named {
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidData(format!("non-finite value in target {name}")));
                }
                let cv = elastic_net_cv(
                    &zs,
                    y,
                    &alphas,
                    &cfg.l1_ratios,
                    cfg.cv_folds,
                    cfg.max_iter_regression,
                    cfg.tol,
                    cfg.seed,
                );
                log.push(format!(
                    "elastic_net target={name} alpha={:.6e} l1_ratio={} sweeps={}",
                    cv.alpha, cv.l1_ratio, cv.fit.sweeps
                ));
                fits.push((name.clone(), cv.fit.coefficients, Some(cv.alpha), cv.l1_ratio));
            }
        }
        Targets::Classes(labels) => {
            let classes: std::collections::BTreeSet<&String> = labels.iter().collect();
            if classes.len() < 2 {
                return Err(Error::DegenerateLabels("need at least two classes".into()));
            }
            let problems: Vec<(String, Vec<bool>)> = classes
                .iter()
                .map(|c| ((*c).clone(), labels.iter().map(|l| l == *c).collect()))
                .collect();
            fits.extend(logistic_fits(&zs, problems, cfg, &mut log));
        }
        Targets::Labels { names, rows } => {
            let problems = names
                .iter()
                .enumerate()
                .filter_map(|(j, name)| {
                    let col: Vec<bool> = rows.iter().map(|r| r[j]).collect();
                    let positives = col.iter().filter(|v| **v).count();
                    if positives == 0 || positives == col.len() {
                        log.push(format!("logistic label={name} skipped constant column"));
                        None
                    } else {
                        Some((name.clone(), col))
                    }
                })
                .collect();
            fits.extend(logistic_fits(&zs, problems, cfg, &mut log));
        }
    }

    let mut aggregate = vec![0.0; p];
    let mut target_fits = Vec::with_capacity(fits.len());
    for (name, coef, alpha, l1_ratio) in fits {
        let top = select_top_k(&coef, cfg.top_k);
        for (j, c) in survivors.iter().zip(&coef) {
            aggregate[*j] = f64::max(aggregate[*j], c.abs());
        }
        target_fits.push(TargetFit {
            name,
            coefficients: scatter(&survivors, p, &coef),
            alpha,
            l1_ratio,
            mask: correlation.compose(&top),
        });
    }
    let agg_survivors: Vec<f64> = survivors.iter().map(|&j| aggregate[j]).collect();
    let mask = correlation.compose(&select_top_k(&agg_survivors, cfg.top_k));
    log.push(format!("top_k k={} kept={}", cfg.top_k, mask.kept().len()));
    Ok(Selection {
        scaler,
        variance,
        correlation,
        fits: target_fits,
        aggregate,
        mask,
        stage_log: log,
    })
}

type RawFit = (String, Vec<f64>, Option<f64>, f64);

fn logistic_fits(
    zs: &Matrix,
    problems: Vec<(String, Vec<bool>)>,
    cfg: &PipelineConfig,
    log: &mut Vec<String>,
) -> Vec<RawFit> {
    let l1 = cfg.classification_l1_ratio;
    let fits: Vec<LogisticFit> = problems
        .par_iter()
        .map(|(_, y)| logistic_elastic_net(zs, y, cfg.c, l1, cfg.max_iter_classification, cfg.tol))
        .collect();
    problems
        .into_iter()
        .zip(fits)
        .map(|((name, _), fit)| {
            log.push(format!(
                "logistic target={name} c={} l1_ratio={l1} steps={}",
                cfg.c,
                fit.objective_trace.len() - 1
            ));
            (name, fit.coefficients, None, l1)
        })
        .collect()
}

impl Selection {
    /// Standardizes `x` with the fitted scaler and keeps the final columns.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.mask.apply(&self.scaler.transform(x)?))
    }

    /// Structured text listing every stage, every dropped column and the kept set.
    pub fn provenance(&self) -> String {
        let mut out = String::from("#fxprobe-provenance v1\n");
        for line in &self.stage_log {
            let _ = writeln!(out, "stage {line}");
        }
        for (j, reason) in self.mask.dropped() {
            let _ = writeln!(out, "drop {j} {reason}");
        }
        for fit in &self.fits {
            let kept: Vec<String> = fit.mask.kept().iter().map(usize::to_string).collect();
            let _ = writeln!(out, "target {} kept={}", fit.name, kept.join(","));
        }
        let kept: Vec<String> = self.mask.kept().iter().map(usize::to_string).collect();
        let _ = writeln!(out, "kept {}", kept.join(","));
        for w in self.mask.warnings() {
            let _ = writeln!(out, "warning {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_hand_values() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]]).unwrap();
        let (z, s) = standardize(&x).unwrap();
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (i, e) in expect.iter().enumerate() {
            assert!((z.get(i, 0) - e).abs() < 1e-12);
            assert_eq!(z.get(i, 1), 0.0);
        }
        assert_eq!(s.zero_std(), vec![1]);
        let (again, _) = standardize(&z.select_columns(&[0])).unwrap();
        for i in 0..3 {
            assert!((again.get(i, 0) - z.get(i, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_boundary_is_strict() {
        // population variance of [0, 2e-3] is exactly (1e-3)^2 = 1e-6
        let x = Matrix::from_columns(&[vec![0.0, 2e-3], vec![7.0, 7.0], vec![0.0, 1.0]]).unwrap();
        let (_, v) = mean_var(&x.column(0));
        let m = variance_threshold(&x, v);
        assert_eq!(m.kept(), &[0, 2]);
    }

    #[test]
    fn correlation_duplicates_and_negation() {
        let a = vec![1.0, 2.0, 3.0, 5.0];
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let other = vec![1.0, -1.0, 1.0, -1.0];
        let x = Matrix::from_columns(&[a.clone(), a, neg, other]).unwrap();
        let m = correlation_prune(&x, 0.95);
        assert_eq!(m.kept(), &[0, 3]);
        assert!(matches!(m.dropped()[&2], DropReason::Correlation { kept: 0, .. }));
    }

    #[test]
    fn top_k_rules() {
        assert_eq!(select_top_k(&[0.5, -0.9, 0.1], 2).kept(), &[0, 1]);
        let z = select_top_k(&[0.0, 0.0, 0.0], 2);
        assert_eq!(z.kept(), &[0, 1]);
        assert_eq!(z.warnings().len(), 1);
        let c = select_top_k(&[1.0, 2.0], 5);
        assert_eq!(c.kept(), &[0, 1]);
        assert!(c.warnings()[0].contains("clamped"));
        assert_eq!(select_top_k(&[0.3, 0.3, 0.3], 1).kept(), &[0]);
    }

    #[test]
    fn compose_maps_back() {
        let outer = FeatureMask::from_dropped(
            4,
            [(1, DropReason::Variance { variance: 0.0 })].into_iter().collect(),
        );
        let inner = FeatureMask::from_dropped(
            3,
            [(2, DropReason::Correlation { kept: 1, r: 1.0 })].into_iter().collect(),
        );
        let c = outer.compose(&inner);
        assert_eq!(c.kept(), &[0, 2]);
        assert_eq!(c.dropped()[&3], DropReason::Correlation { kept: 2, r: 1.0 });
    }

    #[test]
    fn config_defaults_validate() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!(c.alphas().len(), 50);
        let bad = PipelineConfig { top_k: 0, ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn end_to_end_regression() {
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64;
                vec![t, 2.0 * t + 1.0, (t * 0.7).sin(), 3.0, (t * 1.3).cos()]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..n).map(|i| 0.5 * i as f64).collect();
        let cfg = PipelineConfig { top_k: 2, ..Default::default() };
        let sel = select_features(&x, &Targets::Regression(vec![("valence".into(), y)]), &cfg).unwrap();
        assert!(matches!(sel.mask.dropped()[&3], DropReason::Variance { .. }));
        assert!(matches!(sel.mask.dropped()[&1], DropReason::Correlation { kept: 0, .. }));
        assert!(sel.mask.kept().contains(&0));
        assert_eq!(sel.mask.kept().len(), 2);
        let text = sel.provenance();
        let stages: Vec<&str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("stage "))
            .map(|l| l.split(' ').next().unwrap())
            .collect();
        assert_eq!(stages, vec!["standardize", "variance", "correlation", "elastic_net", "top_k"]);
        assert_eq!(sel.transform(&x).unwrap().cols(), 2);
    }

    #[test]
    fn end_to_end_classes() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64 + 0.01 * i as f64, (i * 7 % 5) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let labels: Vec<String> = (0..30).map(|i| ["Anger", "Calmness", "Sadness"][i % 3].into()).collect();
        let cfg = PipelineConfig { top_k: 1, ..Default::default() };
        let sel = select_features(&x, &Targets::Classes(labels), &cfg).unwrap();
        assert_eq!(sel.fits.len(), 3);
        assert_eq!(sel.mask.kept(), &[0]);
    }
}
