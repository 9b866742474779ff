//! 2-D projection (neighbour embedding or PCA) and trajectory metrics.

mod graph;
mod layout;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::matrix::{euclidean, Matrix};

pub use graph::{cosine_distance, fuzzy_graph, knn_graph, smooth_sigma, FuzzyGraph, KnnGraph};
pub use layout::{fit_ab, optimize_layout, pca, spectral_init, LayoutParams, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NeighborEmbed,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub method: Method,
    pub metric: Metric,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub init: Init,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            method: Method::NeighborEmbed,
            metric: Metric::Cosine,
            n_neighbors: 30,
            min_dist: 0.5,
            spread: 1.0,
            n_epochs: 200,
            negative_sample_rate: 5,
            init: Init::Spectral,
            seed: 42,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_dist > 0.0 && self.min_dist <= 1.0) {
            return Err(Error::InvalidConfig(format!("min_dist {} outside (0, 1]", self.min_dist)));
        }
        if !(self.spread > 0.0) {
            return Err(Error::InvalidConfig("spread must be positive".into()));
        }
        if self.n_neighbors < 2 {
            return Err(Error::InvalidConfig("n_neighbors must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub points: Vec<Point>,
    /// Neighbour count actually used (neighbour embedding only).
    pub n_neighbors: Option<usize>,
    pub warnings: Vec<String>,
}

/// Projects the rows of `x` to 2-D.
pub fn project(x: &Matrix, cfg: &ProjectionConfig) -> Result<Projection> {
    cfg.validate()?;
    if x.cols() < 2 {
        return Err(Error::InvalidData(format!("projection needs at least 2 features, got {}", x.cols())));
    }
    if !x.is_finite() {
        return Err(Error::InvalidData("non-finite value in projection input".into()));
    }
    match cfg.method {
        Method::Pca => {
            if x.rows() < 2 {
                return Err(Error::InvalidData("pca needs at least 2 points".into()));
            }
            Ok(Projection {
                points: pca(x),
                n_neighbors: None,
                warnings: Vec::new(),
            })
        }
        Method::NeighborEmbed => {
            let n = x.rows();
            if n < 3 {
                return Err(Error::InvalidData("neighbour embedding needs at least 3 points".into()));
            }
            let mut warnings = Vec::new();
            let k = if cfg.n_neighbors >= n {
                warnings.push(format!("n_neighbors {} reduced to {}", cfg.n_neighbors, n - 1));
                n - 1
            } else {
                cfg.n_neighbors
            };
            let graph = fuzzy_graph(&knn_graph(x, k));
            let init = spectral_init(&graph);
            let (a, b) = fit_ab(cfg.min_dist, cfg.spread);
            let points = optimize_layout(
                &graph,
                &init,
                &LayoutParams {
                    a,
                    b,
                    n_epochs: cfg.n_epochs,
                    negative_sample_rate: cfg.negative_sample_rate,
                    seed: cfg.seed,
                },
            );
            Ok(Projection {
                points,
                n_neighbors: Some(k),
                warnings,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub length: f64,
    pub net_displacement: f64,
    pub straightness: f64,
    pub point_variance: f64,
}

pub fn trajectory_metrics(points: &[Point]) -> TrajectoryMetrics {
    let length: f64 = points.windows(2).map(|w| euclidean(&w[0], &w[1])).sum();
    let net = match (points.first(), points.last()) {
        (Some(a), Some(b)) => euclidean(a, b),
        _ => 0.0,
    };
    let n = points.len().max(1) as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let point_variance = points
        .iter()
        .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
        .sum::<f64>()
        / n;
    TrajectoryMetrics {
        length,
        net_displacement: net,
        straightness: if length == 0.0 { 1.0 } else { (net / length).min(1.0) },
        point_variance,
    }
}

/// One ordered path: a track under one effect ladder or one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub track_id: String,
    /// Effect kind or scenario name.
    pub group: String,
    pub conditions: Vec<Condition>,
    pub points: Vec<Point>,
    pub metrics: TrajectoryMetrics,
}

impl Trajectory {
    pub fn new(track_id: &str, group: &str, conditions: Vec<Condition>, points: Vec<Point>) -> Self {
        let metrics = trajectory_metrics(&points);
        Self {
            track_id: track_id.to_string(),
            group: group.to_string(),
            conditions,
            points,
            metrics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySet {
    pub model_id: String,
    pub trajectories: Vec<Trajectory>,
}

/// Mean metrics over the trajectories of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub count: usize,
    pub mean_length: f64,
    pub mean_point_variance: f64,
    pub mean_straightness: f64,
    pub median_straightness: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[m - 1] + xs[m]) / 2.0
    } else {
        xs[m]
    }
}

impl TrajectorySet {
    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = self.trajectories.iter().map(|t| t.group.clone()).collect();
        g.sort();
        g.dedup();
        g
    }

    pub fn summary(&self) -> Vec<GroupSummary> {
        self.groups()
            .into_iter()
            .map(|group| {
                let ts: Vec<&Trajectory> = self.trajectories.iter().filter(|t| t.group == group).collect();
                let n = ts.len() as f64;
                let mut straight: Vec<f64> = ts.iter().map(|t| t.metrics.straightness).collect();
                GroupSummary {
                    count: ts.len(),
                    mean_length: ts.iter().map(|t| t.metrics.length).sum::<f64>() / n,
                    mean_point_variance: ts.iter().map(|t| t.metrics.point_variance).sum::<f64>() / n,
                    mean_straightness: straight.iter().sum::<f64>() / n,
                    median_straightness: median(&mut straight),
                    group,
                }
            })
            .collect()
    }

    /// `model_id,track_id,condition,x,y`, one row per point.
    pub fn points_table(&self) -> String {
        let mut out = String::from("model_id,track_id,condition,x,y\n");
        for t in &self.trajectories {
            for (c, p) in t.conditions.iter().zip(&t.points) {
                let _ = writeln!(out, "{},{},{},{:.9},{:.9}", self.model_id, t.track_id, c, p[0], p[1]);
            }
        }
        out
    }

    pub fn metrics_table(&self) -> String {
        let mut out =
            String::from("model_id,track_id,group,n_points,length,net_displacement,straightness,point_variance\n");
        for t in &self.trajectories {
            let m = &t.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.9},{:.9},{:.9},{:.9}",
                self.model_id,
                t.track_id,
                t.group,
                t.points.len(),
                m.length,
                m.net_displacement,
                m.straightness,
                m.point_variance
            );
        }
        out
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::from(
            "model_id,group,count,mean_length,mean_point_variance,mean_straightness,median_straightness\n",
        );
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9},{:.9},{:.9}",
                self.model_id,
                s.group,
                s.count,
                s.mean_length,
                s.mean_point_variance,
                s.mean_straightness,
                s.median_straightness
            );
        }
        out
    }
}
