//! Synthetic datasets with labels derived from known signal properties.
//!
//! Every track is a two-partial tone (fundamental plus a weighted octave)
//! with a little seeded noise. Labels are computed from the clean audio, so
//! the ground truth is known exactly.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, Labels, ManifestRow, Task, EMOPIA_CLASSES, GEMS9_TAGS};
use crate::audio::{write_wav, AudioBuffer, Encoding, WavSpec};
use crate::embed::{embed_builtin, CENTROID_MEAN};
use crate::error::{Error, Result};
use crate::seeding::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Valence and arousal affine in the clean spectral centroid and RMS.
    VaRegression,
    /// Four classes from the (energy, brightness) quadrant.
    FourClass,
    /// Anger above the median RMS, Calmness below.
    EnergyTwoClass,
    /// One tag per pitch bucket, plus `power` for loud tracks.
    Gems9,
}

impl FixtureKind {
    pub fn task(self) -> Task {
        match self {
            FixtureKind::VaRegression => Task::VaRegression,
            FixtureKind::FourClass | FixtureKind::EnergyTwoClass => Task::FourClass,
            FixtureKind::Gems9 => Task::Gems9Multilabel,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::VaRegression => "va_regression",
            FixtureKind::FourClass => "four_class",
            FixtureKind::EnergyTwoClass => "energy_two_class",
            FixtureKind::Gems9 => "gems9",
        }
    }
}

impl std::str::FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            FixtureKind::VaRegression,
            FixtureKind::FourClass,
            FixtureKind::EnergyTwoClass,
            FixtureKind::Gems9,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown fixture kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub n_tracks: usize,
    pub seed: u64,
    pub sample_rate: u32,
    pub duration: f64,
}

impl FixtureSpec {
    pub fn new(kind: FixtureKind) -> Self {
        Self {
            kind,
            n_tracks: 50,
            seed: 42,
            sample_rate: 32000,
            duration: 1.0,
        }
    }
}

/// A synthetic track and the quantities its labels come from.
#[derive(Debug, Clone)]
pub struct FixtureTrack {
    pub track_id: String,
    pub audio: AudioBuffer,
    pub fundamental: f64,
    pub centroid: f64,
    pub rms: f64,
}

pub fn fixture_tracks(spec: &FixtureSpec) -> Result<Vec<FixtureTrack>> {
    if spec.n_tracks < 4 {
        return Err(Error::InvalidConfig("a fixture needs at least 4 tracks".into()));
    }
    let sr = spec.sample_rate as f64;
    let frames = (spec.duration * sr).round() as usize;
    (0..spec.n_tracks)
        .map(|i| {
            let mut rng = rng_for(spec.seed, &format!("fixture:{}:{i}", spec.kind.as_str()));
            let f0 = 150.0 * 10f64.powf(rng.random_range(0.0..1.0));
            let amp = rng.random_range(0.1..0.6);
            let octave = rng.random_range(0.0..0.5);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let samples: Vec<f32> = (0..frames)
                .map(|n| {
                    let t = n as f64 / sr;
                    let w = std::f64::consts::TAU * f0 * t + phase;
                    let noise = amp * rng.random_range(-0.004..0.004);
                    (amp * (w.sin() + octave * (2.0 * w).sin()) / (1.0 + octave) + noise) as f32
                })
                .collect();
            let audio = AudioBuffer::mono(spec.sample_rate, samples)?;
            let centroid = embed_builtin(&audio)?[CENTROID_MEAN];
            let rms = audio.rms();
            Ok(FixtureTrack {
                track_id: format!("syn{i:03}"),
                audio,
                fundamental: f0,
                centroid,
                rms,
            })
        })
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Builds the manifest for `tracks`; audio paths are `audio/<track_id>.wav` under `dir`.
pub fn fixture_manifest(spec: &FixtureSpec, tracks: &[FixtureTrack], dir: &Path) -> DatasetManifest {
    let rms_mid = median(tracks.iter().map(|t| t.rms).collect());
    let cen_mid = median(tracks.iter().map(|t| t.centroid).collect());
    let rows = tracks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let loud = t.rms >= rms_mid;
            let labels = match spec.kind {
                FixtureKind::VaRegression => Labels::Va {
                    valence: 0.2 + t.centroid / 2000.0,
                    arousal: 0.1 + 4.0 * t.rms,
                },
                FixtureKind::FourClass => {
                    let bright = t.centroid >= cen_mid;
                    let class = match (loud, bright) {
                        (true, true) => "Anger",
                        (true, false) => "Excitement",
                        (false, true) => "Sadness",
                        (false, false) => "Calmness",
                    };
                    Labels::Class(class.to_string())
                }
                FixtureKind::EnergyTwoClass => {
                    Labels::Class(if loud { EMOPIA_CLASSES[1] } else { EMOPIA_CLASSES[3] }.to_string())
                }
                FixtureKind::Gems9 => {
                    let mut tags = vec![false; 9];
                    tags[i % 9] = true;
                    if loud {
                        tags[5] = true;
                    }
                    Labels::Tags(tags)
                }
            };
            ManifestRow {
                track_id: t.track_id.clone(),
                audio_path: dir.join("audio").join(format!("{}.wav", t.track_id)),
                split: None,
                labels,
            }
        })
        .collect();
    DatasetManifest {
        dataset_id: format!("synthetic-{}", spec.kind.as_str()),
        task: spec.kind.task(),
        label_names: match spec.kind.task() {
            Task::VaRegression => vec!["valence".into(), "arousal".into()],
            Task::FourClass => EMOPIA_CLASSES.iter().map(|s| s.to_string()).collect(),
            Task::Gems9Multilabel => GEMS9_TAGS.iter().map(|s| s.to_string()).collect(),
        },
        rows,
    }
}

/// Writes `manifest.csv` and float WAVs under `dir`; returns the manifest path.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<PathBuf> {
    let tracks = fixture_tracks(spec)?;
    let audio_dir = dir.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(|e| Error::io(&audio_dir, e))?;
    for t in &tracks {
        let spec = WavSpec::for_buffer(&t.audio, Encoding::Float32);
        write_wav(&t.audio, &spec, audio_dir.join(format!("{}.wav", t.track_id)))?;
    }
    let manifest = fixture_manifest(spec, &tracks, dir);
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest.to_csv(dir)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_labelled() {
        let spec = FixtureSpec { n_tracks: 8, duration: 0.1, ..FixtureSpec::new(FixtureKind::FourClass) };
        let a = fixture_tracks(&spec).unwrap();
        let b = fixture_tracks(&spec).unwrap();
        assert_eq!(a[3].audio, b[3].audio);
        let m = fixture_manifest(&spec, &a, Path::new("/f"));
        assert_eq!(m.rows.len(), 8);
        let classes: std::collections::BTreeSet<_> = m
            .rows
            .iter()
            .map(|r| match &r.labels {
                Labels::Class(c) => c.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert!(classes.len() >= 2);
    }

    #[test]
    fn written_manifest_parses() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FixtureSpec { n_tracks: 9, duration: 0.1, ..FixtureSpec::new(FixtureKind::Gems9) };
        let path = write_fixture(dir.path(), &spec).unwrap();
        let m = super::super::manifest::load_manifest(&path).unwrap();
        assert_eq!(m.task, Task::Gems9Multilabel);
        assert!(m.rows[0].audio_path.exists());
    }
}
