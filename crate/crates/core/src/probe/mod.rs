//! Shallow gradient-boosted probes over frozen embeddings.
//!
//! Plain first-order boosting: squared error for regression, logistic loss
//! one-vs-rest for classification. Leaves hold the mean pseudo-residual.

mod metrics;
mod tree;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use metrics::{
    classification_metrics, multilabel_metrics, regression_metrics, ClassificationMetrics,
    MetricReport, MultiLabelMetrics, RegressionMetrics,
};
pub use tree::{sigmoid, Booster, Tree, TreeNode};
use tree::{boost, Loss, TreeParams};

pub const MULTILABEL_THRESHOLD: f64 = 0.5;
const MODEL_HEADER: &str = "#fxprobe-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 2,
            seed: 42,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeTask {
    Regression { target: String },
    SingleLabel { classes: Vec<String> },
    MultiLabel { labels: Vec<String>, threshold: f64 },
}

/// A trained head: one booster for regression, one per class / label otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    task: ProbeTask,
    n_features: usize,
    boosters: Vec<Booster>,
}

/// Ground truth for [`ProbeModel::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Targets(Vec<f64>),
    Labels(Vec<String>),
    LabelSets(Vec<Vec<bool>>),
}

/// Model output for a batch of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Values(Vec<f64>),
    Labels(Vec<String>),
    LabelSets(Vec<Vec<bool>>),
}

fn check_xy(x: &Matrix, n: usize) -> Result<()> {
    if x.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: n,
        });
    }
    if x.rows() < 2 {
        return Err(Error::InvalidData("need at least two training rows".into()));
    }
    if !x.is_finite() {
        return Err(Error::InvalidData("non-finite feature value".into()));
    }
    Ok(())
}

fn check_label_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(char::is_whitespace) {
        Err(Error::InvalidData(format!("label `{name}` must be non-empty without whitespace")))
    } else {
        Ok(())
    }
}

/// Training-loss trace of a regression fit: loss after the base score, then after each tree.
pub fn regression_loss_trace(x: &Matrix, y: &[f64], cfg: &ProbeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_xy(x, y.len())?;
    Ok(boost(x, y, Loss::Squared, cfg.n_trees, cfg.learning_rate, cfg.tree_params()).1)
}

pub fn train_regressor(
    x: &Matrix,
    y: &[f64],
    target: &str,
    cfg: &ProbeConfig,
) -> Result<ProbeModel> {
    cfg.validate()?;
    check_xy(x, y.len())?;
    check_label_name(target)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite target".into()));
    }
    let (booster, _) = boost(x, y, Loss::Squared, cfg.n_trees, cfg.learning_rate, cfg.tree_params());
    Ok(ProbeModel {
        task: ProbeTask::Regression {
            target: target.to_string(),
        },
        n_features: x.cols(),
        boosters: vec![booster],
    })
}

pub fn train_classifier(x: &Matrix, y: &[String], cfg: &ProbeConfig) -> Result<ProbeModel> {
    cfg.validate()?;
    check_xy(x, y.len())?;
    let classes: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "need at least two classes, found {}",
            classes.len()
        )));
    }
    for c in &classes {
        check_label_name(c)?;
    }
    let boosters = classes
        .par_iter()
        .map(|c| {
            let target: Vec<f64> = y.iter().map(|l| if l == c { 1.0 } else { 0.0 }).collect();
            boost(x, &target, Loss::Logistic, cfg.n_trees, cfg.learning_rate, cfg.tree_params()).0
        })
        .collect();
    Ok(ProbeModel {
        task: ProbeTask::SingleLabel { classes },
        n_features: x.cols(),
        boosters,
    })
}

pub fn train_multilabel(
    x: &Matrix,
    y: &[Vec<bool>],
    labels: &[String],
    cfg: &ProbeConfig,
) -> Result<ProbeModel> {
    cfg.validate()?;
    check_xy(x, y.len())?;
    if labels.is_empty() {
        return Err(Error::DegenerateLabels("need at least one label column".into()));
    }
    for l in labels {
        check_label_name(l)?;
    }
    if y.iter().any(|row| row.len() != labels.len()) {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: y.iter().map(Vec::len).find(|&l| l != labels.len()).unwrap_or(0),
        });
    }
    let boosters = (0..labels.len())
        .into_par_iter()
        .map(|j| {
            let target: Vec<f64> = y.iter().map(|row| if row[j] { 1.0 } else { 0.0 }).collect();
            boost(x, &target, Loss::Logistic, cfg.n_trees, cfg.learning_rate, cfg.tree_params()).0
        })
        .collect();
    Ok(ProbeModel {
        task: ProbeTask::MultiLabel {
            labels: labels.to_vec(),
            threshold: MULTILABEL_THRESHOLD,
        },
        n_features: x.cols(),
        boosters,
    })
}

impl ProbeModel {
    pub fn task(&self) -> &ProbeTask {
        &self.task
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn boosters(&self) -> &[Booster] {
        &self.boosters
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Raw additive scores, one column per booster.
    pub fn scores(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        self.check_width(x)?;
        Ok(x.row_iter()
            .map(|row| self.boosters.iter().map(|b| b.score(row)).collect())
            .collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Predictions> {
        let scores = self.scores(x)?;
        Ok(match &self.task {
            ProbeTask::Regression { .. } => {
                Predictions::Values(scores.into_iter().map(|s| s[0]).collect())
            }
            ProbeTask::SingleLabel { classes } => Predictions::Labels(
                scores
                    .iter()
                    .map(|s| {
                        // first maximum wins, so ties go to the earlier class
                        let mut best = 0;
                        for (i, v) in s.iter().enumerate() {
                            if *v > s[best] {
                                best = i;
                            }
                        }
                        classes[best].clone()
                    })
                    .collect(),
            ),
            ProbeTask::MultiLabel { threshold, .. } => Predictions::LabelSets(
                scores
                    .iter()
                    .map(|s| s.iter().map(|&v| sigmoid(v) >= *threshold).collect())
                    .collect(),
            ),
        })
    }

    pub fn evaluate(&self, x: &Matrix, truth: &Truth) -> Result<MetricReport> {
        let pred = self.predict(x)?;
        let n = x.rows();
        let mismatch = |actual| Error::DimensionMismatch { expected: n, actual };
        match (pred, truth) {
            (Predictions::Values(p), Truth::Targets(t)) => {
                if t.len() != n {
                    return Err(mismatch(t.len()));
                }
                Ok(MetricReport::Regression(regression_metrics(t, &p)))
            }
            (Predictions::Labels(p), Truth::Labels(t)) => {
                if t.len() != n {
                    return Err(mismatch(t.len()));
                }
                Ok(MetricReport::Classification(classification_metrics(t, &p)))
            }
            (Predictions::LabelSets(p), Truth::LabelSets(t)) => {
                if t.len() != n {
                    return Err(mismatch(t.len()));
                }
                Ok(MetricReport::MultiLabel(multilabel_metrics(t, &p)))
            }
            _ => Err(Error::InvalidData("truth kind does not match the probe task".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        match &self.task {
            ProbeTask::Regression { target } => {
                let _ = writeln!(out, "task regression {target}");
            }
            ProbeTask::SingleLabel { classes } => {
                let _ = writeln!(out, "task single_label {}", classes.join(" "));
            }
            ProbeTask::MultiLabel { labels, threshold } => {
                let _ = writeln!(out, "task multi_label {threshold:.16e} {}", labels.join(" "));
            }
        }
        let _ = writeln!(out, "features {}", self.n_features);
        let _ = writeln!(out, "boosters {}", self.boosters.len());
        for b in &self.boosters {
            let _ = writeln!(
                out,
                "booster base {:.16e} lr {:.16e} trees {}",
                b.base_score,
                b.learning_rate,
                b.trees.len()
            );
            for t in &b.trees {
                let _ = writeln!(out, "tree {}", t.nodes.len());
                for node in &t.nodes {
                    match node {
                        TreeNode::Leaf { value } => {
                            let _ = writeln!(out, "leaf {value:.16e}");
                        }
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let _ = writeln!(out, "split {feature} {threshold:.16e} {left} {right}");
                        }
                    }
                }
            }
        }
        out
    }
}

/// Writes one or more models into a single text artifact.
pub fn models_to_text(models: &[ProbeModel]) -> String {
    models.iter().map(ProbeModel::to_text).collect()
}

pub fn save_models(models: &[ProbeModel], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, models_to_text(models)).map_err(|e| Error::io(path, e))
}

pub fn load_models(path: impl AsRef<Path>) -> Result<Vec<ProbeModel>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_models(&text)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if !line.trim().is_empty() {
                return Ok(line.split_whitespace().collect());
            }
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: "unexpected end of model file".into(),
        })
    }

    fn at_end(&mut self) -> bool {
        while let Some((_, l)) = self.inner.peek() {
            if l.trim().is_empty() {
                self.inner.next();
            } else {
                return false;
            }
        }
        true
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.last,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, key: &str, arity: usize) -> Result<Vec<&'a str>> {
        let t = self.next_tokens()?;
        if t.first() != Some(&key) || t.len() != arity + 1 {
            return Err(self.err(format!("expected `{key}` with {arity} value(s)")));
        }
        Ok(t[1..].to_vec())
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }
}

pub fn parse_models(text: &str) -> Result<Vec<ProbeModel>> {
    let mut lines = Lines::new(text);
    let mut models = Vec::new();
    while !lines.at_end() {
        let header = lines.next_tokens()?.join(" ");
        if header != MODEL_HEADER {
            return Err(lines.err(format!("expected `{MODEL_HEADER}`")));
        }
        let t = lines.next_tokens()?;
        let task = match t.as_slice() {
            ["task", "regression", target] => ProbeTask::Regression {
                target: target.to_string(),
            },
            ["task", "single_label", classes @ ..] if classes.len() >= 2 => ProbeTask::SingleLabel {
                classes: classes.iter().map(|s| s.to_string()).collect(),
            },
            ["task", "multi_label", thr, labels @ ..] if !labels.is_empty() => {
                ProbeTask::MultiLabel {
                    threshold: lines.num(thr)?,
                    labels: labels.iter().map(|s| s.to_string()).collect(),
                }
            }
            _ => return Err(lines.err("bad task line")),
        };
        let t = lines.expect("features", 1)?;
        let n_features: usize = lines.num(t[0])?;
        let t = lines.expect("boosters", 1)?;
        let n_boosters: usize = lines.num(t[0])?;
        let mut boosters = Vec::with_capacity(n_boosters);
        for _ in 0..n_boosters {
            let t = lines.next_tokens()?;
            let ["booster", "base", base, "lr", lr, "trees", nt] = t.as_slice() else {
                return Err(lines.err("bad booster line"));
            };
            let (base_score, learning_rate, n_trees): (f64, f64, usize) =
                (lines.num(base)?, lines.num(lr)?, lines.num(nt)?);
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let t = lines.expect("tree", 1)?;
                let n_nodes: usize = lines.num(t[0])?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    let t = lines.next_tokens()?;
                    let node = match t.as_slice() {
                        ["leaf", v] => TreeNode::Leaf {
                            value: lines.num(v)?,
                        },
                        ["split", f, thr, l, r] => {
                            let (feature, left, right): (usize, usize, usize) =
                                (lines.num(f)?, lines.num(l)?, lines.num(r)?);
                            if feature >= n_features || left >= n_nodes || right >= n_nodes {
                                return Err(lines.err("split references out of range"));
                            }
                            TreeNode::Split {
                                feature,
                                threshold: lines.num(thr)?,
                                left,
                                right,
                            }
                        }
                        _ => return Err(lines.err("bad node line")),
                    };
                    nodes.push(node);
                }
                if nodes.is_empty() {
                    return Err(lines.err("empty tree"));
                }
                trees.push(Tree { nodes });
            }
            boosters.push(Booster {
                base_score,
                learning_rate,
                trees,
            });
        }
        let expected = match &task {
            ProbeTask::Regression { .. } => 1,
            ProbeTask::SingleLabel { classes } => classes.len(),
            ProbeTask::MultiLabel { labels, .. } => labels.len(),
        };
        if boosters.len() != expected {
            return Err(lines.err(format!("task needs {expected} boosters, found {}", boosters.len())));
        }
        models.push(ProbeModel {
            task,
            n_features,
            boosters,
        });
    }
    Ok(models)
}
