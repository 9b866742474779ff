//! Shared state for one experiment run: the manifest, the models and a
//! cache of every `(track, condition)` vector computed so far.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::RunConfig;
use super::manifest::{DatasetManifest, Labels, Task};
use crate::audio::{read_wav, AudioBuffer};
use crate::condition::Condition;
use crate::embed::{embed_builtin, load_embeddings, EmbeddingSet, EmbeddingSource, BUILTIN_DIM, BUILTIN_MODEL};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::Targets;
use crate::probe::{
    train_classifier, train_multilabel, train_regressor, MetricReport, Predictions, ProbeConfig, ProbeModel,
    ProbeTask, Truth,
};

pub struct Session<'a> {
    pub manifest: &'a DatasetManifest,
    pub cfg: &'a RunConfig,
    sources: Vec<EmbeddingSource>,
    cache: Vec<EmbeddingSet>,
    audio: BTreeMap<String, AudioBuffer>,
    train: Vec<String>,
    test: Vec<String>,
}

/// Loads every model named by the config: builtin first, then exchange files in order.
pub fn model_sources(cfg: &RunConfig) -> Result<Vec<EmbeddingSource>> {
    let mut out = Vec::new();
    if cfg.builtin {
        out.push(EmbeddingSource::Builtin);
    }
    for path in &cfg.embeddings {
        out.push(EmbeddingSource::External(load_embeddings(path)?));
    }
    let mut ids: Vec<&str> = out.iter().map(EmbeddingSource::model_id).collect();
    ids.sort();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("two models share one model id".into()));
    }
    Ok(out)
}

impl<'a> Session<'a> {
    pub fn new(manifest: &'a DatasetManifest, cfg: &'a RunConfig, sources: Vec<EmbeddingSource>) -> Result<Self> {
        cfg.validate()?;
        let (train, test) = manifest.split(cfg.seed)?;
        let cache = sources
            .iter()
            .map(|s| match s {
                EmbeddingSource::Builtin => EmbeddingSet::new(BUILTIN_MODEL, BUILTIN_DIM),
                EmbeddingSource::External(e) => EmbeddingSet::new(e.model_id(), e.dimension()),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            manifest,
            cfg,
            sources,
            cache,
            audio: BTreeMap::new(),
            train,
            test,
        })
    }

    pub fn n_models(&self) -> usize {
        self.sources.len()
    }

    pub fn model_id(&self, m: usize) -> &str {
        self.sources[m].model_id()
    }

    pub fn is_builtin(&self, m: usize) -> bool {
        matches!(self.sources[m], EmbeddingSource::Builtin)
    }

    pub fn train_ids(&self) -> &[String] {
        &self.train
    }

    pub fn test_ids(&self) -> &[String] {
        &self.test
    }

    fn load_audio(&mut self, tracks: &[String]) -> Result<()> {
        let missing: Vec<&String> = tracks.iter().filter(|t| !self.audio.contains_key(*t)).collect();
        let loaded: Vec<Result<(String, AudioBuffer)>> = missing
            .par_iter()
            .map(|t| {
                let row = self
                    .manifest
                    .row(t)
                    .ok_or_else(|| Error::InvalidData(format!("track `{t}` not in manifest")))?;
                Ok(((*t).clone(), read_wav(&row.audio_path)?))
            })
            .collect();
        for r in loaded {
            let (id, buf) = r?;
            self.audio.insert(id, buf);
        }
        Ok(())
    }

    /// Makes sure every `(track, condition)` pair has a vector for model `m`.
    pub fn ensure(&mut self, m: usize, tracks: &[String], conditions: &[Condition]) -> Result<()> {
        let jobs: Vec<(String, Condition)> = tracks
            .iter()
            .flat_map(|t| conditions.iter().map(move |c| (t.clone(), c.clone())))
            .filter(|(t, c)| self.cache[m].get(t, c).is_none())
            .collect();
        if jobs.is_empty() {
            return Ok(());
        }
        if self.is_builtin(m) {
            let mut needed: Vec<String> = jobs.iter().map(|j| j.0.clone()).collect();
            needed.sort();
            needed.dedup();
            self.load_audio(&needed)?;
            let audio = &self.audio;
            let vectors: Vec<Result<Vec<f64>>> = jobs
                .par_iter()
                .map(|(t, c)| embed_builtin(&c.render(&audio[t])?))
                .collect();
            for ((t, c), v) in jobs.into_iter().zip(vectors) {
                self.cache[m].insert(&t, c, v?)?;
            }
        } else if let EmbeddingSource::External(ext) = &self.sources[m] {
            for (t, c) in jobs {
                let v = ext.require(&t, &c)?.to_vec();
                self.cache[m].insert(&t, c, v)?;
            }
        }
        Ok(())
    }

    /// True when model `m` can supply the pair (always for builtin).
    pub fn available(&self, m: usize, track: &str, condition: &Condition) -> bool {
        match &self.sources[m] {
            EmbeddingSource::Builtin => true,
            EmbeddingSource::External(ext) => ext.get(track, condition).is_some(),
        }
    }

    pub fn vector(&self, m: usize, track: &str, condition: &Condition) -> Result<&[f64]> {
        self.cache[m].require(track, condition)
    }

    /// One row per track, all under `condition`.
    pub fn matrix(&mut self, m: usize, tracks: &[String], condition: &Condition) -> Result<Matrix> {
        self.ensure(m, tracks, std::slice::from_ref(condition))?;
        self.rows(m, &tracks.iter().map(|t| (t.clone(), condition.clone())).collect::<Vec<_>>())
    }

    pub fn rows(&self, m: usize, keys: &[(String, Condition)]) -> Result<Matrix> {
        let dim = self.cache[m].dimension();
        let mut data = Vec::with_capacity(keys.len() * dim);
        for (t, c) in keys {
            data.extend_from_slice(self.vector(m, t, c)?);
        }
        Matrix::from_vec(keys.len(), dim, data)
    }

    fn labels(&self, track: &str) -> &Labels {
        &self.manifest.row(track).expect("track ids come from the manifest").labels
    }

    /// Elastic-net targets for feature selection on `tracks`.
    pub fn targets(&self, tracks: &[String]) -> Targets {
        match self.manifest.task {
            Task::VaRegression => {
                let (v, a): (Vec<f64>, Vec<f64>) = tracks
                    .iter()
                    .map(|t| match self.labels(t) {
                        Labels::Va { valence, arousal } => (*valence, *arousal),
                        _ => unreachable!("task checked at load"),
                    })
                    .unzip();
                Targets::Regression(vec![("valence".into(), v), ("arousal".into(), a)])
            }
            Task::FourClass => Targets::Classes(tracks.iter().map(|t| self.class_of(t)).collect()),
            Task::Gems9Multilabel => Targets::Labels {
                names: self.manifest.label_names.clone(),
                rows: tracks.iter().map(|t| self.tags_of(t)).collect(),
            },
        }
    }

    pub fn class_of(&self, track: &str) -> String {
        match self.labels(track) {
            Labels::Class(c) => c.clone(),
            _ => unreachable!("task checked at load"),
        }
    }

    pub fn tags_of(&self, track: &str) -> Vec<bool> {
        match self.labels(track) {
            Labels::Tags(t) => t.clone(),
            _ => unreachable!("task checked at load"),
        }
    }
}

/// A trained head and the truth it is scored against.
#[derive(Debug, Clone)]
pub struct Head {
    /// `valence`, `arousal`, `label` or `tags`.
    pub target: String,
    pub model: ProbeModel,
}

impl Head {
    /// Recovers the head name from a stored model's task.
    pub fn from_model(model: ProbeModel) -> Self {
        let target = match model.task() {
            ProbeTask::Regression { target } => target.clone(),
            ProbeTask::SingleLabel { .. } => "label".into(),
            ProbeTask::MultiLabel { .. } => "tags".into(),
        };
        Self { target, model }
    }
}

/// Trains the task's heads on clean train-split vectors of model `m`.
pub fn train_heads(session: &mut Session, m: usize, probe: &ProbeConfig) -> Result<Vec<Head>> {
    let train = session.train_ids().to_vec();
    let x = session.matrix(m, &train, &Condition::Clean)?;
    match session.targets(&train) {
        Targets::Regression(named) => named
            .iter()
            .map(|(name, y)| {
                Ok(Head {
                    target: name.clone(),
                    model: train_regressor(&x, y, name, probe)?,
                })
            })
            .collect(),
        Targets::Classes(y) => Ok(vec![Head {
            target: "label".into(),
            model: train_classifier(&x, &y, probe)?,
        }]),
        Targets::Labels { names, rows } => Ok(vec![Head {
            target: "tags".into(),
            model: train_multilabel(&x, &rows, &names, probe)?,
        }]),
    }
}

fn truth(session: &Session, head: &Head, tracks: &[String]) -> Truth {
    match head.target.as_str() {
        "label" => Truth::Labels(tracks.iter().map(|t| session.class_of(t)).collect()),
        "tags" => Truth::LabelSets(tracks.iter().map(|t| session.tags_of(t)).collect()),
        target => Truth::Targets(
            tracks
                .iter()
                .map(|t| match session.labels(t) {
                    Labels::Va { valence, arousal } => {
                        if target == "valence" {
                            *valence
                        } else {
                            *arousal
                        }
                    }
                    _ => unreachable!("task checked at load"),
                })
                .collect(),
        ),
    }
}

/// Named metric values; regression names carry a `<target>.` prefix.
pub fn evaluate_heads(session: &Session, heads: &[Head], x: &Matrix, tracks: &[String]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for h in heads {
        let report = h.model.evaluate(x, &truth(session, h, tracks))?;
        let prefix = match report {
            MetricReport::Regression(_) => format!("{}.", h.target),
            _ => String::new(),
        };
        out.extend(report.entries().into_iter().map(|(k, v)| (format!("{prefix}{k}"), v)));
    }
    Ok(out)
}

/// Predicted label counts in `labels` order.
pub fn predicted_counts(head: &Head, x: &Matrix, labels: &[String]) -> Result<Vec<usize>> {
    let mut counts = vec![0; labels.len()];
    match head.model.predict(x)? {
        Predictions::Labels(p) => {
            for l in p {
                if let Some(i) = labels.iter().position(|c| *c == l) {
                    counts[i] += 1;
                }
            }
        }
        Predictions::LabelSets(sets) => {
            for s in sets {
                for (i, on) in s.iter().enumerate() {
                    if *on {
                        counts[i] += 1;
                    }
                }
            }
        }
        Predictions::Values(_) => {
            return Err(Error::Unsupported("prediction counts need a label task".into()));
        }
    }
    Ok(counts)
}
