//! The four experiments.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::Sampling;
use super::manifest::{DatasetManifest, Labels, Task, EMOPIA_CLASSES};
use super::session::{evaluate_heads, predicted_counts, train_heads, Session};
use super::tables::{DeltaTable, MetricRow, RadarData, RadarPlot};
use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::fx::{scenario_preset, FxKind, IntensityLevel};
use crate::pipeline::{select_features, Selection};
use crate::projection::{project, Point, Trajectory, TrajectorySet};
use crate::seeding::rng_for;

/// Seeded track sample for one group key (an effect or scenario name).
///
/// Regression takes `sampling.regression` tracks overall; label tasks take
/// the per-label count from each class (or each tag's positives). Tracks
/// come back in manifest order.
pub fn sample_tracks(manifest: &DatasetManifest, sampling: &Sampling, seed: u64, key: &str) -> Vec<String> {
    let draw = |pool: Vec<&str>, n: usize, sub: &str| -> Vec<String> {
        let mut pool = pool;
        pool.shuffle(&mut rng_for(seed, &format!("sample:{key}:{sub}")));
        pool.into_iter().take(n).map(str::to_string).collect()
    };
    let rows = &manifest.rows;
    let mut picked: Vec<String> = match manifest.task {
        Task::VaRegression => draw(rows.iter().map(|r| r.track_id.as_str()).collect(), sampling.regression, "all"),
        Task::FourClass => EMOPIA_CLASSES
            .iter()
            .flat_map(|class| {
                let pool = rows
                    .iter()
                    .filter(|r| matches!(&r.labels, Labels::Class(c) if c == class))
                    .map(|r| r.track_id.as_str())
                    .collect();
                draw(pool, sampling.classification, class)
            })
            .collect(),
        Task::Gems9Multilabel => manifest
            .label_names
            .iter()
            .enumerate()
            .flat_map(|(j, tag)| {
                let pool = rows
                    .iter()
                    .filter(|r| matches!(&r.labels, Labels::Tags(t) if t[j]))
                    .map(|r| r.track_id.as_str())
                    .collect();
                draw(pool, sampling.multilabel, tag)
            })
            .collect(),
    };
    let order: BTreeMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.track_id.as_str(), i)).collect();
    picked.sort_by_key(|t| order[t.as_str()]);
    picked.dedup();
    picked
}

fn level_conditions(kind: FxKind, levels: &[u8]) -> Vec<Condition> {
    levels
        .iter()
        .map(|&l| Condition::Fx {
            kind,
            level: IntensityLevel::new(l as i64).expect("validated config"),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp1Output {
    pub metrics: Vec<MetricRow>,
    pub delta: DeltaTable,
}

/// Clean-trained, frozen heads scored on the processed test split at every
/// (effect, level), plus the level-10-minus-level-1 table.
pub fn exp1_performance_impact(session: &mut Session) -> Result<Exp1Output> {
    let cfg = session.cfg;
    if !(cfg.levels.contains(&1) && cfg.levels.contains(&10)) {
        return Err(Error::InvalidConfig("exp1 needs levels 1 and 10 for the delta table".into()));
    }
    let dataset = session.manifest.dataset_id.clone();
    let test = session.test_ids().to_vec();
    let mut metrics = Vec::new();
    for m in 0..session.n_models() {
        let model = session.model_id(m).to_string();
        let heads = train_heads(session, m, &cfg.probe)?;
        let mut conditions = vec![Condition::Clean];
        for &fx in &cfg.fx {
            conditions.extend(level_conditions(fx, &cfg.levels));
        }
        session.ensure(m, &test, &conditions)?;
        for c in &conditions {
            let x = session.matrix(m, &test, c)?;
            let (fx, level) = match c {
                Condition::Fx { kind, level } => (Some(*kind), level.get()),
                _ => (None, 0),
            };
            for (metric, value) in evaluate_heads(session, &heads, &x, &test)? {
                metrics.push(MetricRow {
                    dataset: dataset.clone(),
                    model: model.clone(),
                    fx,
                    level,
                    metric,
                    value,
                });
            }
        }
    }
    let delta = DeltaTable::from_metrics(&metrics)?;
    Ok(Exp1Output { metrics, delta })
}

/// Predicted-label counts per level (0 = clean), normalized per plot.
pub fn exp2_prediction_shifts(session: &mut Session) -> Result<RadarData> {
    let cfg = session.cfg;
    if session.manifest.task == Task::VaRegression {
        return Err(Error::Unsupported("prediction shifts need a label task, not va_regression".into()));
    }
    let dataset = session.manifest.dataset_id.clone();
    let labels = session.manifest.label_names.clone();
    let mut levels = vec![0u8];
    levels.extend(&cfg.levels);
    let mut plots = Vec::new();
    for m in 0..session.n_models() {
        let model = session.model_id(m).to_string();
        let heads = train_heads(session, m, &cfg.probe)?;
        let head = &heads[0];
        for &fx in &cfg.fx {
            let tracks = if cfg.exp2_use_sample {
                sample_tracks(session.manifest, &cfg.sampling, cfg.seed, fx.as_str())
            } else {
                session.test_ids().to_vec()
            };
            let mut conditions = vec![Condition::Clean];
            conditions.extend(level_conditions(fx, &cfg.levels));
            session.ensure(m, &tracks, &conditions)?;
            let counts = conditions
                .iter()
                .map(|c| predicted_counts(head, &session.matrix(m, &tracks, c)?, &labels))
                .collect::<Result<Vec<_>>>()?;
            plots.push(RadarPlot::new(&dataset, &model, fx, labels.clone(), levels.clone(), counts));
        }
    }
    Ok(RadarData { plots })
}

/// Projected trajectories of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub model: String,
    pub set: TrajectorySet,
    /// Isolated-stage paths `[clean, stage k alone]`, when the model has them.
    pub baseline: Option<TrajectorySet>,
    pub provenance: String,
    pub warnings: Vec<String>,
}

/// Feature selection fitted on clean train-split vectors.
pub fn fit_selection(session: &mut Session, m: usize) -> Result<Selection> {
    let train = session.train_ids().to_vec();
    let x = session.matrix(m, &train, &Condition::Clean)?;
    select_features(&x, &session.targets(&train), &session.cfg.pipeline)
}

/// Selects, transforms and projects all `keys` jointly; returns one point per key.
fn project_keys(
    session: &mut Session,
    m: usize,
    keys: &[(String, Condition)],
) -> Result<(BTreeMap<(String, Condition), Point>, Selection, Vec<String>)> {
    let selection = fit_selection(session, m)?;
    let x = session.rows(m, keys)?;
    let z = selection.transform(&x)?;
    let projection = project(&z, &session.cfg.projection)?;
    let mut warnings = selection.mask.warnings().to_vec();
    warnings.extend(projection.warnings);
    let map = keys.iter().cloned().zip(projection.points).collect();
    Ok((map, selection, warnings))
}

fn unique_keys(groups: &[(Vec<String>, Vec<Condition>)]) -> Vec<(String, Condition)> {
    let mut seen = std::collections::BTreeSet::new();
    let mut keys = Vec::new();
    for (tracks, conds) in groups {
        for t in tracks {
            for c in conds {
                if seen.insert((t.clone(), c.clone())) {
                    keys.push((t.clone(), c.clone()));
                }
            }
        }
    }
    keys
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3Output {
    pub samples: Vec<(FxKind, Vec<String>)>,
    pub runs: Vec<TrajectoryRun>,
}

/// Per-(track, effect) paths `[clean, L1..L10]` in a joint projection per model.
pub fn exp3_trajectories(session: &mut Session) -> Result<Exp3Output> {
    let cfg = session.cfg;
    let samples: Vec<(FxKind, Vec<String>)> = cfg
        .fx
        .iter()
        .map(|&fx| (fx, sample_tracks(session.manifest, &cfg.sampling, cfg.seed, fx.as_str())))
        .collect();
    let groups: Vec<(Vec<String>, Vec<Condition>)> = samples
        .iter()
        .map(|(fx, tracks)| {
            let mut conds = vec![Condition::Clean];
            conds.extend(level_conditions(*fx, &cfg.levels));
            (tracks.clone(), conds)
        })
        .collect();
    let keys = unique_keys(&groups);
    let mut runs = Vec::new();
    for m in 0..session.n_models() {
        for (tracks, conds) in &groups {
            session.ensure(m, tracks, conds)?;
        }
        let (points, selection, warnings) = project_keys(session, m, &keys)?;
        let model = session.model_id(m).to_string();
        let mut set = TrajectorySet {
            model_id: model.clone(),
            trajectories: Vec::new(),
        };
        for ((fx, tracks), (_, conds)) in samples.iter().zip(&groups) {
            for t in tracks {
                let pts = conds.iter().map(|c| points[&(t.clone(), c.clone())]).collect();
                set.trajectories.push(Trajectory::new(t, fx.as_str(), conds.clone(), pts));
            }
        }
        runs.push(TrajectoryRun {
            model,
            set,
            baseline: None,
            provenance: selection.provenance(),
            warnings,
        });
    }
    Ok(Exp3Output { samples, runs })
}

/// Full-chain versus best isolated stage, per model and scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub model: String,
    pub scenario: String,
    pub n_tracks: usize,
    pub n_stages: usize,
    pub mean_chain_length: f64,
    pub median_straightness: f64,
    pub best_stage: Option<usize>,
    pub best_stage_mean_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp4Output {
    pub samples: Vec<(String, Vec<String>)>,
    pub runs: Vec<TrajectoryRun>,
    pub comparison: Vec<ScenarioComparison>,
}

/// Per-(track, scenario) paths `[clean, stage 1, stages 1..2, ..., full chain]`,
/// with isolated single stages as the baseline.
pub fn exp4_scenarios(session: &mut Session) -> Result<Exp4Output> {
    let cfg = session.cfg;
    let mut samples = Vec::new();
    let mut chain_groups = Vec::new();
    let mut stage_groups = Vec::new();
    for name in &cfg.scenarios {
        let n = scenario_preset(name)?.len();
        let tracks = sample_tracks(session.manifest, &cfg.sampling, cfg.seed, &format!("scenario:{name}"));
        let mut chain = vec![Condition::Clean];
        chain.extend((1..=n).map(|k| Condition::ChainStage { name: name.clone(), stages: k }));
        let stages: Vec<Condition> = (1..=n).map(|k| Condition::StageOnly { name: name.clone(), stage: k }).collect();
        chain_groups.push((tracks.clone(), chain));
        stage_groups.push((tracks.clone(), stages));
        samples.push((name.clone(), tracks));
    }
    let mut runs = Vec::new();
    let mut comparison = Vec::new();
    for m in 0..session.n_models() {
        let model = session.model_id(m).to_string();
        let has_stages = stage_groups
            .iter()
            .all(|(tracks, conds)| tracks.iter().all(|t| conds.iter().all(|c| session.available(m, t, c))));
        let mut groups = chain_groups.clone();
        if has_stages {
            groups.extend(stage_groups.iter().cloned());
        }
        for (tracks, conds) in &groups {
            session.ensure(m, tracks, conds)?;
        }
        let keys = unique_keys(&groups);
        let (points, selection, mut warnings) = project_keys(session, m, &keys)?;
        if !has_stages {
            warnings.push(format!("model {model} lacks isolated-stage vectors; no single-stage baseline"));
        }
        let mut set = TrajectorySet {
            model_id: model.clone(),
            trajectories: Vec::new(),
        };
        let mut baseline = TrajectorySet {
            model_id: model.clone(),
            trajectories: Vec::new(),
        };
        for (i, (name, tracks)) in samples.iter().enumerate() {
            let chain = &chain_groups[i].1;
            for t in tracks {
                let pts = chain.iter().map(|c| points[&(t.clone(), c.clone())]).collect();
                set.trajectories.push(Trajectory::new(t, name, chain.clone(), pts));
                if has_stages {
                    for c in &stage_groups[i].1 {
                        let Condition::StageOnly { stage, .. } = c else { unreachable!() };
                        let conds = vec![Condition::Clean, c.clone()];
                        let pts = conds.iter().map(|c| points[&(t.clone(), c.clone())]).collect();
                        baseline
                            .trajectories
                            .push(Trajectory::new(t, &format!("{name}/stage{stage}"), conds, pts));
                    }
                }
            }
        }
        let summary = set.summary();
        let base_summary = baseline.summary();
        for (i, (name, tracks)) in samples.iter().enumerate() {
            let s = summary.iter().find(|s| s.group == *name).expect("every scenario has tracks");
            let best = base_summary
                .iter()
                .filter(|b| b.group.starts_with(&format!("{name}/stage")))
                .map(|b| {
                    let k: usize = b.group.rsplit("stage").next().and_then(|v| v.parse().ok()).unwrap_or(0);
                    (k, b.mean_length)
                })
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            comparison.push(ScenarioComparison {
                model: model.clone(),
                scenario: name.clone(),
                n_tracks: tracks.len(),
                n_stages: chain_groups[i].1.len() - 1,
                mean_chain_length: s.mean_length,
                median_straightness: s.median_straightness,
                best_stage: best.map(|b| b.0),
                best_stage_mean_length: best.map(|b| b.1),
            });
        }
        runs.push(TrajectoryRun {
            model,
            set,
            baseline: has_stages.then_some(baseline),
            provenance: selection.provenance(),
            warnings,
        });
    }
    Ok(Exp4Output {
        samples,
        runs,
        comparison,
    })
}
