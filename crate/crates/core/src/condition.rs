//! Processing conditions a track can be embedded under, and how to render them.

use std::fmt;
use std::str::FromStr;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::fx::{self, FxKind, IntensityLevel};

/// What was done to a track before embedding.
///
/// Text form: `clean | fx:<kind>:<level> | chain:<name> | chainstage:<name>:<k>
/// | stageonly:<name>:<k>`. `chainstage` applies the first `k` stages of a
/// preset; `stageonly` applies stage `k` alone (both 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Clean,
    Fx { kind: FxKind, level: IntensityLevel },
    Chain(String),
    ChainStage { name: String, stages: usize },
    StageOnly { name: String, stage: usize },
}

impl Condition {
    pub fn fx(kind: FxKind, level: i64) -> Result<Self> {
        Ok(Condition::Fx {
            kind,
            level: IntensityLevel::new(level)?,
        })
    }

    /// Clean plus every level of `kind`, in ladder order.
    pub fn ladder(kind: FxKind) -> Vec<Condition> {
        std::iter::once(Condition::Clean)
            .chain(IntensityLevel::all().map(|level| Condition::Fx { kind, level }))
            .collect()
    }

    pub fn render(&self, buf: &AudioBuffer) -> Result<AudioBuffer> {
        match self {
            Condition::Clean => Ok(buf.clone()),
            Condition::Fx { kind, level } => fx::intensity_to_settings(*kind, *level).apply(buf),
            Condition::Chain(name) => fx::apply_chain(buf, &fx::scenario_preset(name)?),
            Condition::ChainStage { name, stages } => {
                let chain = fx::scenario_preset(name)?;
                if *stages == 0 || *stages > chain.len() {
                    return Err(Error::InvalidSettings(format!(
                        "chain `{name}` has {} stages, asked for {stages}",
                        chain.len()
                    )));
                }
                fx::apply_stages(buf, &chain.stages()[..*stages])
            }
            Condition::StageOnly { name, stage } => {
                let chain = fx::scenario_preset(name)?;
                let s = stage
                    .checked_sub(1)
                    .and_then(|i| chain.stages().get(i))
                    .ok_or_else(|| {
                        Error::InvalidSettings(format!("chain `{name}` has no stage {stage}"))
                    })?;
                s.apply(buf)
            }
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Clean => f.write_str("clean"),
            Condition::Fx { kind, level } => write!(f, "fx:{kind}:{}", level.get()),
            Condition::Chain(name) => write!(f, "chain:{name}"),
            Condition::ChainStage { name, stages } => write!(f, "chainstage:{name}:{stages}"),
            Condition::StageOnly { name, stage } => write!(f, "stageonly:{name}:{stage}"),
        }
    }
}

fn bad(s: &str) -> Error {
    Error::InvalidData(format!("malformed condition `{s}`"))
}

fn parse_index(s: &str, whole: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| bad(whole))
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["clean"] => Ok(Condition::Clean),
            ["fx", kind, level] => {
                let level: i64 = level.parse().map_err(|_| bad(s))?;
                Condition::fx(kind.parse()?, level)
            }
            ["chain", name] if !name.is_empty() => Ok(Condition::Chain(name.to_string())),
            ["chainstage", name, k] if !name.is_empty() => Ok(Condition::ChainStage {
                name: name.to_string(),
                stages: parse_index(k, s)?,
            }),
            ["stageonly", name, k] if !name.is_empty() => Ok(Condition::StageOnly {
                name: name.to_string(),
                stage: parse_index(k, s)?,
            }),
            _ => Err(bad(s)),
        }
    }
}

/// Expands a comma-separated condition list; `fx:<kind>:*` and `fx:*:*`
/// expand to every level (and every kind).
pub fn parse_condition_list(spec: &str) -> Result<Vec<Condition>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split(':').collect::<Vec<_>>().as_slice() {
            ["fx", kind, "*"] => {
                let kinds: Vec<FxKind> = if *kind == "*" {
                    FxKind::ALL.to_vec()
                } else {
                    vec![kind.parse()?]
                };
                for k in kinds {
                    out.extend(IntensityLevel::all().map(|level| Condition::Fx { kind: k, level }));
                }
            }
            _ => out.push(item.parse()?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        for text in [
            "clean",
            "fx:distortion:7",
            "chain:ratm",
            "chainstage:u2:2",
            "stageonly:pink_floyd:1",
        ] {
            let c: Condition = text.parse().unwrap();
            assert_eq!(c.to_string(), text);
        }
    }

    #[test]
    fn rejects_garbage() {
        for text in ["", "fx:distortion", "fx:distortion:11", "fx:fuzz:3", "chain:", "dirty"] {
            assert!(text.parse::<Condition>().is_err(), "{text}");
        }
    }

    #[test]
    fn list_expansion() {
        let v = parse_condition_list("clean, fx:eq:*,chain:ratm").unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(parse_condition_list("fx:*:*").unwrap().len(), 60);
    }

    #[test]
    fn ordering_is_ladder_order() {
        let mut v = Condition::ladder(FxKind::Delay);
        let sorted = v.clone();
        v.reverse();
        v.sort();
        assert_eq!(v, sorted);
    }

    #[test]
    fn chain_stage_bounds() {
        let b = AudioBuffer::mono(44100, vec![0.0; 2048]).unwrap();
        let c = Condition::ChainStage {
            name: "ratm".into(),
            stages: 3,
        };
        assert!(c.render(&b).is_err());
        let full = Condition::ChainStage {
            name: "ratm".into(),
            stages: 2,
        };
        assert_eq!(
            full.render(&b).unwrap(),
            Condition::Chain("ratm".into()).render(&b).unwrap()
        );
    }
}
