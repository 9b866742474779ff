//! The six audit effects, the level 1..=10 intensity ladder, chains and
//! the real-world scenario presets.
//!
//! Every effect is a pure function `AudioBuffer -> AudioBuffer`; channels are
//! processed independently with identical settings and output length always
//! equals input length.

mod delay;
mod filter;
mod reverb;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub use delay::{apply_chorus, apply_delay};
pub use filter::{apply_eq, apply_phaser};
pub use reverb::apply_reverb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FxKind {
    Reverb,
    Delay,
    Distortion,
    Eq,
    Chorus,
    Phaser,
}

impl FxKind {
    pub const ALL: [FxKind; 6] = [
        FxKind::Reverb,
        FxKind::Delay,
        FxKind::Distortion,
        FxKind::Eq,
        FxKind::Chorus,
        FxKind::Phaser,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FxKind::Reverb => "reverb",
            FxKind::Delay => "delay",
            FxKind::Distortion => "distortion",
            FxKind::Eq => "eq",
            FxKind::Chorus => "chorus",
            FxKind::Phaser => "phaser",
        }
    }
}

impl fmt::Display for FxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FxKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownEffect(s.to_string()))
    }
}

/// Effect intensity on the 1..=10 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct IntensityLevel(u8);

impl IntensityLevel {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 10;

    pub fn new(level: i64) -> Result<Self> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&level) {
            Ok(Self(level as u8))
        } else {
            Err(Error::InvalidLevel(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = IntensityLevel> {
        (Self::MIN..=Self::MAX).map(IntensityLevel)
    }
}

impl TryFrom<i64> for IntensityLevel {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IntensityLevel> for u8 {
    fn from(l: IntensityLevel) -> u8 {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverbSettings {
    pub room_size: f64,
    pub damping: f64,
    pub wet: f64,
    pub dry: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySettings {
    pub delay_seconds: f64,
    pub feedback: f64,
    pub mix: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSettings {
    pub drive_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqSettings {
    pub low_cutoff: f64,
    pub high_cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChorusSettings {
    pub rate_hz: f64,
    pub depth: f64,
    pub centre_delay_ms: f64,
    pub feedback: f64,
    pub mix: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaserSettings {
    pub rate_hz: f64,
    pub depth: f64,
    pub centre_frequency_hz: f64,
    pub feedback: f64,
    pub mix: f64,
}

/// Concrete parameters for one effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FxSettings {
    Reverb(ReverbSettings),
    Delay(DelaySettings),
    Distortion(DistortionSettings),
    Eq(EqSettings),
    Chorus(ChorusSettings),
    Phaser(PhaserSettings),
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidSettings(format!("{name} = {v} outside [0, 1]")))
    }
}

fn check_feedback(v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidSettings(format!("feedback = {v} outside [0, 1)")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSettings(format!("{name} = {v} must be positive")))
    }
}

fn check_rate(v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSettings(format!("rate_hz = {v} must be non-negative")))
    }
}

impl FxSettings {
    pub fn kind(&self) -> FxKind {
        match self {
            FxSettings::Reverb(_) => FxKind::Reverb,
            FxSettings::Delay(_) => FxKind::Delay,
            FxSettings::Distortion(_) => FxKind::Distortion,
            FxSettings::Eq(_) => FxKind::Eq,
            FxSettings::Chorus(_) => FxKind::Chorus,
            FxSettings::Phaser(_) => FxKind::Phaser,
        }
    }

    /// Range checks that do not depend on the sample rate.
    pub fn validate(&self) -> Result<()> {
        match *self {
            FxSettings::Reverb(s) => {
                check_unit("room_size", s.room_size)?;
                check_unit("damping", s.damping)?;
                check_unit("wet", s.wet)?;
                check_unit("dry", s.dry)
            }
            FxSettings::Delay(s) => {
                check_positive("delay_seconds", s.delay_seconds)?;
                check_feedback(s.feedback)?;
                check_unit("mix", s.mix)
            }
            FxSettings::Distortion(s) => {
                if s.drive_db.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSettings("drive_db must be finite".into()))
                }
            }
            FxSettings::Eq(s) => {
                check_positive("low_cutoff", s.low_cutoff)?;
                check_positive("high_cutoff", s.high_cutoff)?;
                if s.low_cutoff < s.high_cutoff {
                    Ok(())
                } else {
                    Err(Error::InvalidSettings("low_cutoff must be below high_cutoff".into()))
                }
            }
            FxSettings::Chorus(s) => {
                check_rate(s.rate_hz)?;
                check_unit("depth", s.depth)?;
                check_positive("centre_delay_ms", s.centre_delay_ms)?;
                check_feedback(s.feedback)?;
                check_unit("mix", s.mix)
            }
            FxSettings::Phaser(s) => {
                check_rate(s.rate_hz)?;
                check_unit("depth", s.depth)?;
                check_positive("centre_frequency_hz", s.centre_frequency_hz)?;
                check_feedback(s.feedback)?;
                check_unit("mix", s.mix)
            }
        }
    }

    /// Checks that also depend on the rate the settings will run at.
    pub fn validate_for_rate(&self, sample_rate: u32) -> Result<()> {
        self.validate()?;
        match *self {
            FxSettings::Eq(s) => filter::check_cutoffs(&s, sample_rate),
            FxSettings::Delay(s) => delay::delay_frames(&s, sample_rate).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, buf: &AudioBuffer) -> Result<AudioBuffer> {
        self.validate()?;
        match self {
            FxSettings::Reverb(s) => Ok(apply_reverb(buf, s)),
            FxSettings::Delay(s) => apply_delay(buf, s),
            FxSettings::Distortion(s) => Ok(apply_distortion(buf, s)),
            FxSettings::Eq(s) => apply_eq(buf, s),
            FxSettings::Chorus(s) => Ok(apply_chorus(buf, s)),
            FxSettings::Phaser(s) => Ok(apply_phaser(buf, s)),
        }
    }
}

/// The intensity ladder. Every varying scalar is linear in the level.
pub fn intensity_to_settings(kind: FxKind, level: IntensityLevel) -> FxSettings {
    let l = level.get() as f64;
    match kind {
        FxKind::Distortion => FxSettings::Distortion(DistortionSettings { drive_db: 3.0 * l }),
        FxKind::Reverb => FxSettings::Reverb(ReverbSettings {
            room_size: l / 10.0,
            damping: 0.5,
            wet: 0.33 + 0.04 * l,
            dry: 1.0 - 0.04 * l,
        }),
        FxKind::Delay => FxSettings::Delay(DelaySettings {
            delay_seconds: 0.05 * l,
            feedback: 0.05 * l,
            mix: 0.5,
        }),
        FxKind::Eq => FxSettings::Eq(EqSettings {
            low_cutoff: 20.0 * l,
            high_cutoff: 16000.0 - 1200.0 * l,
        }),
        FxKind::Chorus => FxSettings::Chorus(ChorusSettings {
            rate_hz: 0.25 + 0.15 * l,
            depth: 0.08 * l,
            centre_delay_ms: 7.0,
            feedback: 0.04 * l,
            mix: 0.5,
        }),
        FxKind::Phaser => FxSettings::Phaser(PhaserSettings {
            rate_hz: 0.2 + 0.18 * l,
            depth: 0.09 * l,
            centre_frequency_hz: 1300.0,
            feedback: 0.05 * l,
            mix: 0.5,
        }),
    }
}

/// Ladder lookup from a raw integer level.
pub fn settings_for_level(kind: FxKind, level: i64) -> Result<FxSettings> {
    Ok(intensity_to_settings(kind, IntensityLevel::new(level)?))
}

/// `y = tanh(x * 10^(drive_db / 20))` per sample.
pub fn apply_distortion(buf: &AudioBuffer, s: &DistortionSettings) -> AudioBuffer {
    let gain = 10f64.powf(s.drive_db / 20.0);
    buf.map_channels(|x| x.iter().map(|&v| (v as f64 * gain).tanh() as f32).collect())
}

/// An ordered, named list of effect stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FxChain {
    name: String,
    stages: Vec<FxSettings>,
}

impl FxChain {
    pub fn new(name: impl Into<String>, stages: Vec<FxSettings>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidSettings("chain needs at least one stage".into()));
        }
        for s in &stages {
            s.validate()?;
        }
        Ok(Self {
            name: name.into(),
            stages,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> &[FxSettings] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Left fold of the chain's stages over `buf`.
pub fn apply_chain(buf: &AudioBuffer, chain: &FxChain) -> Result<AudioBuffer> {
    apply_stages(buf, chain.stages())
}

pub fn apply_stages(buf: &AudioBuffer, stages: &[FxSettings]) -> Result<AudioBuffer> {
    stages
        .iter()
        .try_fold(buf.clone(), |acc, stage| stage.apply(&acc))
}

pub const SCENARIOS: [&str; 3] = ["pink_floyd", "u2", "ratm"];

/// Frozen real-world chain presets (version 1).
pub fn scenario_preset(name: &str) -> Result<FxChain> {
    let stages = match name {
        "pink_floyd" => vec![
            FxSettings::Delay(DelaySettings {
                delay_seconds: 0.38,
                feedback: 0.35,
                mix: 0.4,
            }),
            FxSettings::Reverb(ReverbSettings {
                room_size: 0.8,
                damping: 0.5,
                wet: 0.5,
                dry: 0.6,
            }),
        ],
        "u2" => vec![
            FxSettings::Delay(DelaySettings {
                delay_seconds: 0.34,
                feedback: 0.45,
                mix: 0.45,
            }),
            FxSettings::Reverb(ReverbSettings {
                room_size: 0.6,
                damping: 0.5,
                wet: 0.4,
                dry: 0.7,
            }),
        ],
        "ratm" => vec![
            FxSettings::Distortion(DistortionSettings { drive_db: 27.0 }),
            FxSettings::Chorus(ChorusSettings {
                rate_hz: 0.8,
                depth: 0.25,
                centre_delay_ms: 7.0,
                feedback: 0.2,
                mix: 0.3,
            }),
        ],
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    FxChain::new(name, stages)
}
