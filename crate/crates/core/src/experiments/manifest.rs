//! Dataset manifests: a `# dataset=<id> task=<tag>` line, then a CSV header
//! `track_id,audio_path[,split],<label columns>` and one row per track.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_for;

pub const EMOPIA_CLASSES: [&str; 4] = ["Excitement", "Anger", "Sadness", "Calmness"];
pub const GEMS9_TAGS: [&str; 9] = [
    "wonder",
    "transcendence",
    "tenderness",
    "nostalgia",
    "peacefulness",
    "power",
    "joyful_activation",
    "tension",
    "sadness",
];
pub const VA_TARGETS: [&str; 2] = ["valence", "arousal"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    VaRegression,
    FourClass,
    Gems9Multilabel,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::VaRegression => "va_regression",
            Task::FourClass => "four_class",
            Task::Gems9Multilabel => "gems9_multilabel",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Task::VaRegression, Task::FourClass, Task::Gems9Multilabel]
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Manifest {
                row: 1,
                msg: format!("unknown task tag `{s}`"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Labels {
    Va { valence: f64, arousal: f64 },
    Class(String),
    Tags(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub track_id: String,
    /// Resolved against the manifest's directory when relative.
    pub audio_path: PathBuf,
    pub split: Option<Split>,
    pub labels: Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub task: Task,
    pub label_names: Vec<String>,
    pub rows: Vec<ManifestRow>,
}

fn merr(row: usize, msg: impl Into<String>) -> Error {
    Error::Manifest {
        row,
        msg: msg.into(),
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    DatasetManifest::parse(&text, base)
}

impl DatasetManifest {
    /// Row numbers in errors are 1-based file lines.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| merr(1, "empty manifest"))?;
        let meta = first
            .strip_prefix('#')
            .ok_or_else(|| merr(1, "first line must be `# dataset=<id> task=<tag>`"))?;
        let mut dataset_id = None;
        let mut task = None;
        for tok in meta.split_whitespace() {
            match tok.split_once('=') {
                Some(("dataset", v)) if !v.is_empty() => dataset_id = Some(v.to_string()),
                Some(("task", v)) => task = Some(v.parse::<Task>()?),
                _ => {}
            }
        }
        let dataset_id = dataset_id.ok_or_else(|| merr(1, "missing dataset=<id>"))?;
        let task = task.ok_or_else(|| merr(1, "missing task=<tag>"))?;

        let (hi, header) = lines.next().ok_or_else(|| merr(2, "missing header row"))?;
        let header_row = hi + 1;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "track_id" || cols[1] != "audio_path" {
            return Err(merr(header_row, "header must start with track_id,audio_path"));
        }
        let has_split = cols.get(2) == Some(&"split");
        let label_cols: Vec<&str> = cols[if has_split { 3 } else { 2 }..].to_vec();
        let unique: BTreeSet<&str> = label_cols.iter().copied().collect();
        if unique.len() != label_cols.len() || label_cols.iter().any(|c| c.is_empty()) {
            return Err(merr(header_row, "label columns must be unique and non-empty"));
        }
        let label_names: Vec<String> = match task {
            Task::VaRegression => {
                for t in VA_TARGETS {
                    if !label_cols.contains(&t) {
                        return Err(merr(header_row, format!("missing label column `{t}`")));
                    }
                }
                VA_TARGETS.iter().map(|s| s.to_string()).collect()
            }
            Task::FourClass => {
                if !label_cols.contains(&"label") {
                    return Err(merr(header_row, "missing label column `label`"));
                }
                EMOPIA_CLASSES.iter().map(|s| s.to_string()).collect()
            }
            Task::Gems9Multilabel => {
                if label_cols.len() != 9 {
                    return Err(merr(
                        header_row,
                        format!("gems9 needs exactly 9 tag columns, found {}", label_cols.len()),
                    ));
                }
                label_cols.iter().map(|s| s.to_string()).collect()
            }
        };
        let col_index = |name: &str| cols.iter().position(|c| *c == name).expect("checked above");

        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, line) in lines {
            let row = i + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(merr(row, format!("expected {} fields, found {}", cols.len(), fields.len())));
            }
            let track_id = fields[0];
            if track_id.is_empty() || track_id.contains(char::is_whitespace) {
                return Err(merr(row, "track_id must be non-empty without whitespace"));
            }
            if !seen.insert(track_id.to_string()) {
                return Err(merr(row, format!("duplicate track_id `{track_id}`")));
            }
            let audio = Path::new(fields[1]);
            let audio_path = if audio.is_absolute() { audio.to_path_buf() } else { base_dir.join(audio) };
            let split = if has_split {
                Some(match fields[2] {
                    "train" => Split::Train,
                    "test" => Split::Test,
                    other => return Err(merr(row, format!("split `{other}` is not train/test"))),
                })
            } else {
                None
            };
            let real = |name: &str| -> Result<f64> {
                let s = fields[col_index(name)];
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| merr(row, format!("`{name}` value `{s}` is not a finite number")))
            };
            let labels = match task {
                Task::VaRegression => Labels::Va {
                    valence: real("valence")?,
                    arousal: real("arousal")?,
                },
                Task::FourClass => {
                    let l = fields[col_index("label")];
                    if !EMOPIA_CLASSES.contains(&l) {
                        return Err(merr(row, format!("label `{l}` is not one of {EMOPIA_CLASSES:?}")));
                    }
                    Labels::Class(l.to_string())
                }
                Task::Gems9Multilabel => Labels::Tags(
                    label_names
                        .iter()
                        .map(|name| match fields[col_index(name)] {
                            "1" => Ok(true),
                            "0" => Ok(false),
                            other => Err(merr(row, format!("tag `{name}` value `{other}` is not 0/1"))),
                        })
                        .collect::<Result<_>>()?,
                ),
            };
            rows.push(ManifestRow {
                track_id: track_id.to_string(),
                audio_path,
                split,
                labels,
            });
        }
        if rows.is_empty() {
            return Err(merr(header_row + 1, "manifest has no rows"));
        }
        Ok(Self {
            dataset_id,
            task,
            label_names,
            rows,
        })
    }

    /// CSV text with audio paths written relative to `base_dir` where possible.
    pub fn to_csv(&self, base_dir: &Path) -> String {
        let mut out = format!("# dataset={} task={}\n", self.dataset_id, self.task);
        let has_split = self.rows.iter().all(|r| r.split.is_some());
        let label_header = match self.task {
            Task::VaRegression => "valence,arousal".to_string(),
            Task::FourClass => "label".to_string(),
            Task::Gems9Multilabel => self.label_names.join(","),
        };
        let _ = writeln!(
            out,
            "track_id,audio_path{},{label_header}",
            if has_split { ",split" } else { "" }
        );
        for r in &self.rows {
            let path = r.audio_path.strip_prefix(base_dir).unwrap_or(&r.audio_path);
            let split = match (has_split, r.split) {
                (true, Some(s)) => format!(",{}", s.as_str()),
                _ => String::new(),
            };
            let labels = match &r.labels {
                Labels::Va { valence, arousal } => format!("{valence},{arousal}"),
                Labels::Class(c) => c.clone(),
                Labels::Tags(t) => t.iter().map(|b| if *b { "1" } else { "0" }).collect::<Vec<_>>().join(","),
            };
            let _ = writeln!(out, "{},{}{split},{labels}", r.track_id, path.display());
        }
        out
    }

    pub fn track_ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.track_id.clone()).collect()
    }

    pub fn row(&self, track_id: &str) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.track_id == track_id)
    }

    /// Train and test track ids, in manifest order. Without a split column,
    /// a seeded shuffle puts the first 80 % (rounded) in train.
    pub fn split(&self, seed: u64) -> Result<(Vec<String>, Vec<String>)> {
        let (train, test) = if self.rows.iter().all(|r| r.split.is_some()) {
            let pick = |s: Split| {
                self.rows
                    .iter()
                    .filter(|r| r.split == Some(s))
                    .map(|r| r.track_id.clone())
                    .collect::<Vec<_>>()
            };
            (pick(Split::Train), pick(Split::Test))
        } else {
            let mut idx: Vec<usize> = (0..self.rows.len()).collect();
            idx.shuffle(&mut rng_for(seed, &format!("split:{}", self.dataset_id)));
            let n_train = ((self.rows.len() as f64) * 0.8).round() as usize;
            let mut is_train = vec![false; self.rows.len()];
            for &i in &idx[..n_train] {
                is_train[i] = true;
            }
            let (tr, te): (Vec<_>, Vec<_>) = self.rows.iter().enumerate().partition(|(i, _)| is_train[*i]);
            (
                tr.into_iter().map(|(_, r)| r.track_id.clone()).collect(),
                te.into_iter().map(|(_, r)| r.track_id.clone()).collect(),
            )
        };
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidData(format!(
                "split of `{}` leaves {} train and {} test rows",
                self.dataset_id,
                train.len(),
                test.len()
            )));
        }
        Ok((train, test))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DatasetManifest> {
        DatasetManifest::parse(text, Path::new("/data"))
    }

    #[test]
    fn va_manifest() {
        let m = parse(
            "# dataset=deam task=va_regression\ntrack_id,audio_path,split,valence,arousal\n\
             a,a.wav,train,0.5,-0.2\nb,/abs/b.wav,test,0.1,0.3\n",
        )
        .unwrap();
        assert_eq!(m.rows[0].audio_path, PathBuf::from("/data/a.wav"));
        assert_eq!(m.rows[1].audio_path, PathBuf::from("/abs/b.wav"));
        assert_eq!(m.split(0).unwrap(), (vec!["a".into()], vec!["b".into()]));
        assert_eq!(parse(&m.to_csv(Path::new("/data"))).unwrap(), m);
    }

    #[test]
    fn closed_class_set() {
        let e = parse("# dataset=emopia task=four_class\ntrack_id,audio_path,label\nx,x.wav,Fear\n").unwrap_err();
        assert!(matches!(e, Error::Manifest { row: 3, .. }), "{e}");
    }

    #[test]
    fn gems_arity() {
        let header = GEMS9_TAGS[..8].join(",");
        let text = format!("# dataset=wf task=gems9_multilabel\ntrack_id,audio_path,{header}\n");
        assert!(matches!(parse(&text), Err(Error::Manifest { row: 2, .. })));
    }

    #[test]
    fn row_errors() {
        let head = "# dataset=d task=va_regression\ntrack_id,audio_path,valence,arousal\n";
        assert!(matches!(
            parse(&format!("{head}a,a.wav,1,2\na,b.wav,1,2\n")),
            Err(Error::Manifest { row: 4, .. })
        ));
        assert!(matches!(parse("# dataset=d task=mood\n"), Err(Error::Manifest { .. })));
        assert!(matches!(
            parse("# dataset=d task=va_regression\ntrack_id,audio_path,valence\n"),
            Err(Error::Manifest { row: 2, .. })
        ));
        assert!(matches!(parse(&format!("{head}a,a.wav,x,2\n")), Err(Error::Manifest { row: 3, .. })));
    }

    #[test]
    fn default_split_is_seeded() {
        let mut text = String::from("# dataset=d task=four_class\ntrack_id,audio_path,label\n");
        for i in 0..10 {
            text.push_str(&format!("t{i},t{i}.wav,Anger\n"));
        }
        let m = parse(&text).unwrap();
        let (tr, te) = m.split(42).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert_eq!(m.split(42).unwrap(), (tr, te));
    }
}
