//! Embedding sets: the built-in embedder, the `#fxemb v1` exchange format and
//! condition-grid embedding.

mod builtin;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::audio::AudioBuffer;
use crate::condition::Condition;
use crate::error::{Error, Result};

pub use builtin::{
    embed_builtin, hz_to_mel, magnitude_frames, mel_edges, mel_filterbank, mel_to_hz,
    BUILTIN_DIM, CENTROID_MEAN, CENTROID_STD, FFT_SIZE, FLUX_MEAN, FLUX_STD, HOP, LOG_FLOOR,
    MEL_BANDS,
};

pub const BUILTIN_MODEL: &str = "builtin";
const HEADER_TAG: &str = "#fxemb";
const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub track_id: String,
    pub condition: Condition,
    pub vector: Vec<f64>,
}

/// All vectors produced by one model, keyed by `(track_id, condition)`.
///
/// Iteration order is the key order, so anything derived from a set is
/// independent of how the records were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    model_id: String,
    dimension: usize,
    meta: BTreeMap<String, String>,
    records: BTreeMap<(String, Condition), Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(model_id: impl Into<String>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidData("embedding dimension must be positive".into()));
        }
        let model_id = model_id.into();
        if model_id.is_empty() || model_id.contains(char::is_whitespace) {
            return Err(Error::InvalidData(format!("bad model id `{model_id}`")));
        }
        Ok(Self {
            model_id,
            dimension,
            meta: BTreeMap::new(),
            records: BTreeMap::new(),
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Extra header fields (for example the adapter's pooling choice).
    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: &str, value: &str) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    pub fn insert(&mut self, track_id: &str, condition: Condition, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value for track `{track_id}`, condition `{condition}`"
            )));
        }
        let key = (track_id.to_string(), condition);
        if self.records.contains_key(&key) {
            return Err(Error::DuplicateRecord {
                track: key.0,
                condition: key.1.to_string(),
            });
        }
        self.records.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, track_id: &str, condition: &Condition) -> Option<&[f64]> {
        self.records
            .get(&(track_id.to_string(), condition.clone()))
            .map(Vec::as_slice)
    }

    pub fn require(&self, track_id: &str, condition: &Condition) -> Result<&[f64]> {
        self.get(track_id, condition)
            .ok_or_else(|| Error::MissingEmbedding {
                track: track_id.to_string(),
                condition: condition.to_string(),
            })
    }

    pub fn records(&self) -> impl Iterator<Item = EmbeddingRecord> + '_ {
        self.records.iter().map(|((t, c), v)| EmbeddingRecord {
            track_id: t.clone(),
            condition: c.clone(),
            vector: v.clone(),
        })
    }

    /// Merges `other` into `self`; both must come from the same model.
    pub fn extend(&mut self, other: EmbeddingSet) -> Result<()> {
        if other.model_id != self.model_id {
            return Err(Error::InvalidData(format!(
                "cannot merge model `{}` into `{}`",
                other.model_id, self.model_id
            )));
        }
        for ((t, c), v) in other.records {
            self.insert(&t, c, v)?;
        }
        Ok(())
    }

    pub fn to_exchange_string(&self) -> String {
        let mut out = format!(
            "{HEADER_TAG} {FORMAT_VERSION} model={} dim={}",
            self.model_id, self.dimension
        );
        for (k, v) in &self.meta {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        for ((track, cond), vector) in &self.records {
            let _ = write!(out, "{track}\t{cond}\t");
            for (i, v) in vector.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_exchange(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let mut set = parse_header(header)?;
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut fields = line.split('\t');
            let (Some(track), Some(cond), Some(values), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(perr("expected three tab-separated fields"));
            };
            if track.is_empty() {
                return Err(perr("empty track id"));
            }
            let condition: Condition = cond.parse().map_err(|e: Error| perr(&e.to_string()))?;
            let vector = values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| perr(&format!("bad number: {e}")))?;
            match set.insert(track, condition, vector) {
                Err(Error::InvalidData(msg)) => return Err(perr(&msg)),
                other => other?,
            }
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_exchange_string()).map_err(|e| Error::io(path, e))
    }
}

fn parse_header(line: &str) -> Result<EmbeddingSet> {
    let perr = |msg: String| Error::Parse { line: 1, msg };
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(HEADER_TAG) || tokens.next() != Some(FORMAT_VERSION) {
        return Err(perr(format!("expected `{HEADER_TAG} {FORMAT_VERSION}` header")));
    }
    let mut model = None;
    let mut dim = None;
    let mut meta = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(format!("header token `{tok}` is not key=value")))?;
        match k {
            "model" => model = Some(v.to_string()),
            "dim" => {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|_| perr(format!("bad dim `{v}`")))?,
                )
            }
            _ => {
                meta.insert(k.to_string(), v.to_string());
            }
        }
    }
    let model = model.ok_or_else(|| perr("header lacks model=".into()))?;
    let dim = dim.ok_or_else(|| perr("header lacks dim=".into()))?;
    let mut set = EmbeddingSet::new(model, dim).map_err(|e| perr(e.to_string()))?;
    set.meta = meta;
    Ok(set)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EmbeddingSet::parse_exchange(&text)
}

/// Where vectors come from.
#[derive(Debug, Clone)]
pub enum EmbeddingSource {
    /// Render with the FX engine, then run the built-in embedder.
    Builtin,
    /// Look vectors up in a pre-computed set.
    External(EmbeddingSet),
}

impl EmbeddingSource {
    pub fn model_id(&self) -> &str {
        match self {
            EmbeddingSource::Builtin => BUILTIN_MODEL,
            EmbeddingSource::External(set) => set.model_id(),
        }
    }
}

/// One record per `(track, condition)`.
///
/// Builtin work fans out over the current rayon pool; the result is ordered
/// by key whatever the completion order.
pub fn embed_conditions(
    tracks: &[(String, AudioBuffer)],
    conditions: &[Condition],
    source: &EmbeddingSource,
) -> Result<EmbeddingSet> {
    match source {
        EmbeddingSource::Builtin => {
            let jobs: Vec<(usize, &Condition)> = (0..tracks.len())
                .flat_map(|t| conditions.iter().map(move |c| (t, c)))
                .collect();
            let vectors: Vec<Result<Vec<f64>>> = jobs
                .par_iter()
                .map(|&(t, c)| embed_builtin(&c.render(&tracks[t].1)?))
                .collect();
            let mut set = EmbeddingSet::new(BUILTIN_MODEL, BUILTIN_DIM)?;
            for ((t, c), v) in jobs.into_iter().zip(vectors) {
                set.insert(&tracks[t].0, c.clone(), v?)?;
            }
            Ok(set)
        }
        EmbeddingSource::External(ext) => {
            let mut set = EmbeddingSet::new(ext.model_id(), ext.dimension())?;
            set.meta = ext.meta.clone();
            for (id, _) in tracks {
                for c in conditions {
                    set.insert(id, c.clone(), ext.require(id, c)?.to_vec())?;
                }
            }
            Ok(set)
        }
    }
}

/// Like [`embed_conditions`] for an external set, needing only track ids.
pub fn select_external(
    ext: &EmbeddingSet,
    track_ids: &[String],
    conditions: &[Condition],
) -> Result<EmbeddingSet> {
    let mut set = EmbeddingSet::new(ext.model_id(), ext.dimension())?;
    set.meta = ext.meta.clone();
    for id in track_ids {
        for c in conditions {
            set.insert(id, c.clone(), ext.require(id, c)?.to_vec())?;
        }
    }
    Ok(set)
}
