//! Delay-line effects: feedback echo and modulated chorus.

use std::f64::consts::PI;

use super::{ChorusSettings, DelaySettings};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub(super) fn delay_frames(s: &DelaySettings, sample_rate: u32) -> Result<usize> {
    let d = (s.delay_seconds * sample_rate as f64).round();
    if d < 1.0 {
        return Err(Error::InvalidSettings(format!(
            "delay of {} s is shorter than one frame at {sample_rate} Hz",
            s.delay_seconds
        )));
    }
    Ok(d as usize)
}

/// Feedback echo: `w[n] = x[n-D] + fb * w[n-D]`, `y = (1-mix) x + mix w`.
pub fn apply_delay(buf: &AudioBuffer, s: &DelaySettings) -> Result<AudioBuffer> {
    let d = delay_frames(s, buf.sample_rate())?;
    let (fb, mix) = (s.feedback, s.mix);
    Ok(buf.map_channels(|x| {
        let n = x.len();
        let mut w = vec![0.0f64; n];
        for i in d..n {
            w[i] = x[i - d] as f64 + fb * w[i - d];
        }
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| ((1.0 - mix) * xi as f64 + mix * wi) as f32)
            .collect()
    }))
}

/// Linear interpolation into `line` at fractional position `pos` (< current index).
fn read_frac(line: &[f64], pos: f64) -> f64 {
    let base = pos.floor();
    let frac = pos - base;
    let at = |i: f64| if i >= 0.0 { line[i as usize] } else { 0.0 };
    let a = at(base);
    let b = if frac > 0.0 { at(base + 1.0) } else { 0.0 };
    a + frac * (b - a)
}

/// Modulated delay with feedback into the line:
/// the tap sits `centre_ms * (1 + depth * sin(2π rate t))` behind the write head.
pub fn apply_chorus(buf: &AudioBuffer, s: &ChorusSettings) -> AudioBuffer {
    let sr = buf.sample_rate() as f64;
    let centre = s.centre_delay_ms * 1e-3 * sr;
    buf.map_channels(|x| {
        let n = x.len();
        let mut line = vec![0.0f64; n];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / sr;
            let delay = (centre * (1.0 + s.depth * (2.0 * PI * s.rate_hz * t).sin())).max(1.0);
            let v = read_frac(&line, i as f64 - delay);
            line[i] = x[i] as f64 + s.feedback * v;
            out.push(((1.0 - s.mix) * x[i] as f64 + s.mix * v) as f32);
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_signal, SignalKind};

    #[test]
    fn delay_impulse_echoes() {
        let imp = synth_signal(SignalKind::Impulse, 1.0, 8000).unwrap();
        let s = DelaySettings {
            delay_seconds: 0.25,
            feedback: 0.5,
            mix: 0.5,
        };
        let y = apply_delay(&imp, &s).unwrap();
        let y = y.channel(0);
        assert_eq!(y[0], 0.5);
        assert_eq!(y[2000], 0.5);
        assert_eq!(y[4000], 0.25);
        assert_eq!(y[6000], 0.125);
        assert_eq!(y.len(), 8000);
        assert_eq!(y.iter().filter(|&&v| v != 0.0).count(), 4);
    }

    #[test]
    fn delay_dry_passthrough() {
        let noise = synth_signal(SignalKind::WhiteNoise { seed: 1 }, 0.1, 8000).unwrap();
        let s = DelaySettings {
            delay_seconds: 0.01,
            feedback: 0.3,
            mix: 0.0,
        };
        assert_eq!(apply_delay(&noise, &s).unwrap(), noise);
    }

    #[test]
    fn delay_too_short() {
        let b = AudioBuffer::mono(8000, vec![0.0; 10]).unwrap();
        let s = DelaySettings {
            delay_seconds: 1e-5,
            feedback: 0.0,
            mix: 0.5,
        };
        assert!(apply_delay(&b, &s).is_err());
    }

    #[test]
    fn chorus_static_delay() {
        let sr = 44100;
        let imp = synth_signal(SignalKind::Impulse, 0.05, sr).unwrap();
        let s = ChorusSettings {
            rate_hz: 1.0,
            depth: 0.0,
            centre_delay_ms: 7.0,
            feedback: 0.0,
            mix: 1.0,
        };
        let y = apply_chorus(&imp, &s);
        let y = y.channel(0);
        let peak = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, (0.007 * sr as f64).round() as usize);
        let total: f64 = y.iter().map(|&v| v as f64).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chorus_integer_delay_is_exact() {
        // 7 ms at 8 kHz is exactly 56 frames.
        let imp = synth_signal(SignalKind::Impulse, 0.05, 8000).unwrap();
        let s = ChorusSettings {
            rate_hz: 0.0,
            depth: 0.0,
            centre_delay_ms: 7.0,
            feedback: 0.0,
            mix: 0.5,
        };
        let y = apply_chorus(&imp, &s);
        assert_eq!(y.channel(0)[0], 0.5);
        assert_eq!(y.channel(0)[56], 0.5);
    }

    #[test]
    fn chorus_mix_zero_identity() {
        let noise = synth_signal(SignalKind::WhiteNoise { seed: 2 }, 0.1, 8000).unwrap();
        let s = ChorusSettings {
            rate_hz: 1.5,
            depth: 0.8,
            centre_delay_ms: 7.0,
            feedback: 0.4,
            mix: 0.0,
        };
        assert_eq!(apply_chorus(&noise, &s), noise);
    }
}
