//! Freeverb: eight parallel damped feedback combs into four series allpasses,
//! one independent network per channel.
//!
//! Tunings are the classic 44.1 kHz delay lengths, scaled to the buffer rate.
//! Comb feedback is `0.7 + 0.28 * room_size`, damping coefficient
//! `0.4 * damping`, input gain 0.015 and wet gain 3, as in the reference
//! implementation. Output is `dry * x + wet * reverb(x)` with the wet gain
//! folded into `reverb(x)`.

use super::ReverbSettings;
use crate::audio::AudioBuffer;

const COMB_TUNINGS: [usize; 8] = [1116, 1188, 1277, 1356, 1422, 1491, 1557, 1617];
const ALLPASS_TUNINGS: [usize; 4] = [556, 441, 341, 225];
const FIXED_GAIN: f64 = 0.015;
const SCALE_WET: f64 = 3.0;
const SCALE_DAMP: f64 = 0.4;
const SCALE_ROOM: f64 = 0.28;
const OFFSET_ROOM: f64 = 0.7;
const ALLPASS_FEEDBACK: f64 = 0.5;
const REFERENCE_RATE: f64 = 44100.0;

fn scaled_len(tuning: usize, sample_rate: u32) -> usize {
    ((tuning as f64 * sample_rate as f64 / REFERENCE_RATE).round() as usize).max(1)
}

struct Comb {
    buf: Vec<f64>,
    idx: usize,
    feedback: f64,
    damp1: f64,
    damp2: f64,
    store: f64,
}

impl Comb {
    fn new(len: usize, feedback: f64, damp: f64) -> Self {
        Self {
            buf: vec![0.0; len],
            idx: 0,
            feedback,
            damp1: damp,
            damp2: 1.0 - damp,
            store: 0.0,
        }
    }

    fn tick(&mut self, input: f64) -> f64 {
        let out = self.buf[self.idx];
        self.store = out * self.damp2 + self.store * self.damp1;
        self.buf[self.idx] = input + self.store * self.feedback;
        self.idx = (self.idx + 1) % self.buf.len();
        out
    }
}

struct Allpass {
    buf: Vec<f64>,
    idx: usize,
}

impl Allpass {
    fn new(len: usize) -> Self {
        Self {
            buf: vec![0.0; len],
            idx: 0,
        }
    }

    fn tick(&mut self, input: f64) -> f64 {
        let delayed = self.buf[self.idx];
        self.buf[self.idx] = input + delayed * ALLPASS_FEEDBACK;
        self.idx = (self.idx + 1) % self.buf.len();
        delayed - input
    }
}

pub fn apply_reverb(buf: &AudioBuffer, s: &ReverbSettings) -> AudioBuffer {
    let sr = buf.sample_rate();
    let feedback = OFFSET_ROOM + SCALE_ROOM * s.room_size;
    let damp = SCALE_DAMP * s.damping;
    buf.map_channels(|x| {
        let mut combs: Vec<Comb> = COMB_TUNINGS
            .iter()
            .map(|&t| Comb::new(scaled_len(t, sr), feedback, damp))
            .collect();
        let mut allpasses: Vec<Allpass> = ALLPASS_TUNINGS
            .iter()
            .map(|&t| Allpass::new(scaled_len(t, sr)))
            .collect();
        x.iter()
            .map(|&v| {
                let input = v as f64 * FIXED_GAIN;
                let mut acc: f64 = combs.iter_mut().map(|c| c.tick(input)).sum();
                for ap in allpasses.iter_mut() {
                    acc = ap.tick(acc);
                }
                (s.dry * v as f64 + s.wet * SCALE_WET * acc) as f32
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_signal, SignalKind};

    fn settings(room: f64) -> ReverbSettings {
        ReverbSettings {
            room_size: room,
            damping: 0.5,
            wet: 0.5,
            dry: 0.5,
        }
    }

    fn tail_energy(y: &AudioBuffer) -> f64 {
        let start = (0.05 * y.sample_rate() as f64) as usize;
        y.channel(0)[start..].iter().map(|&v| (v as f64).powi(2)).sum()
    }

    #[test]
    fn bypass_when_dry_only() {
        let noise = synth_signal(SignalKind::WhiteNoise { seed: 9 }, 0.1, 44100).unwrap();
        let s = ReverbSettings {
            room_size: 0.9,
            damping: 0.5,
            wet: 0.0,
            dry: 1.0,
        };
        assert_eq!(apply_reverb(&noise, &s), noise);
    }

    #[test]
    fn bigger_room_longer_tail() {
        let imp = synth_signal(SignalKind::Impulse, 1.0, 44100).unwrap();
        let small = tail_energy(&apply_reverb(&imp, &settings(0.1)));
        let large = tail_energy(&apply_reverb(&imp, &settings(0.9)));
        assert!(large > small, "{large} <= {small}");
    }

    #[test]
    fn length_preserved() {
        let imp = synth_signal(SignalKind::Impulse, 0.3, 22050).unwrap();
        assert_eq!(apply_reverb(&imp, &settings(0.5)).frames(), imp.frames());
    }
}
