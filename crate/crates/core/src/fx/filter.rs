//! First-order IIR effects: band-limiting EQ and the swept-allpass phaser.

use std::f64::consts::PI;

use super::{EqSettings, PhaserSettings};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub(super) fn check_cutoffs(s: &EqSettings, sample_rate: u32) -> Result<()> {
    let nyquist = sample_rate as f64 / 2.0;
    if s.low_cutoff > 0.0 && s.low_cutoff < s.high_cutoff && s.high_cutoff < nyquist {
        Ok(())
    } else {
        Err(Error::InvalidCutoff {
            low: s.low_cutoff,
            high: s.high_cutoff,
            sample_rate,
        })
    }
}

/// Bilinear first-order section `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`.
#[derive(Debug, Clone, Copy)]
struct FirstOrder {
    b0: f64,
    b1: f64,
    a1: f64,
    x1: f64,
    y1: f64,
}

impl FirstOrder {
    fn highpass(cutoff: f64, sr: f64) -> Self {
        let k = (PI * cutoff / sr).tan();
        let b0 = 1.0 / (1.0 + k);
        Self {
            b0,
            b1: -b0,
            a1: (k - 1.0) / (k + 1.0),
            x1: 0.0,
            y1: 0.0,
        }
    }

    fn lowpass(cutoff: f64, sr: f64) -> Self {
        let k = (PI * cutoff / sr).tan();
        let b0 = k / (1.0 + k);
        Self {
            b0,
            b1: b0,
            a1: (k - 1.0) / (k + 1.0),
            x1: 0.0,
            y1: 0.0,
        }
    }

    fn tick(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * self.x1 - self.a1 * self.y1;
        self.x1 = x;
        self.y1 = y;
        y
    }
}

/// High-pass at `low_cutoff` followed by low-pass at `high_cutoff`.
pub fn apply_eq(buf: &AudioBuffer, s: &EqSettings) -> Result<AudioBuffer> {
    check_cutoffs(s, buf.sample_rate())?;
    let sr = buf.sample_rate() as f64;
    Ok(buf.map_channels(|x| {
        let mut hp = FirstOrder::highpass(s.low_cutoff, sr);
        let mut lp = FirstOrder::lowpass(s.high_cutoff, sr);
        x.iter()
            .map(|&v| lp.tick(hp.tick(v as f64)) as f32)
            .collect()
    }))
}

/// First-order allpass `H(z) = (a + z^-1) / (1 + a z^-1)` with a per-sample coefficient.
#[derive(Debug, Clone, Copy, Default)]
struct Allpass {
    x1: f64,
    y1: f64,
}

impl Allpass {
    fn tick(&mut self, x: f64, a: f64) -> f64 {
        let y = a * x + self.x1 - a * self.y1;
        self.x1 = x;
        self.y1 = y;
        y
    }
}

const PHASER_STAGES: usize = 4;

/// Four cascaded allpass stages whose break frequency sweeps
/// `centre * 2^(depth * sin(2π rate t))`, with global feedback.
pub fn apply_phaser(buf: &AudioBuffer, s: &PhaserSettings) -> AudioBuffer {
    let sr = buf.sample_rate() as f64;
    let max_fc = 0.49 * sr;
    buf.map_channels(|x| {
        let mut stages = [Allpass::default(); PHASER_STAGES];
        let mut last = 0.0f64;
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let t = i as f64 / sr;
                let sweep = s.depth * (2.0 * PI * s.rate_hz * t).sin();
                let fc = (s.centre_frequency_hz * sweep.exp2()).min(max_fc);
                let k = (PI * fc / sr).tan();
                let a = (k - 1.0) / (k + 1.0);
                let mut u = v as f64 + s.feedback * last;
                for st in stages.iter_mut() {
                    u = st.tick(u, a);
                }
                last = u;
                ((1.0 - s.mix) * v as f64 + s.mix * u) as f32
            })
            .collect()
    })
}
