//! Sampled waveforms, WAV file I/O and test-signal synthesis.
//!
//! Samples are stored de-interleaved as `f32`; DSP code accumulates in `f64`.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, rectangular block of audio: one sample vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f32>>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f32>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(Error::InvalidBuffer(format!(
                "{} channels; only mono and stereo are supported",
                channels.len()
            )));
        }
        let frames = channels[0].len();
        if channels.iter().any(|c| c.len() != frames) {
            return Err(Error::InvalidBuffer("channels differ in frame count".into()));
        }
        if channels.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::InvalidBuffer("non-finite sample".into()));
        }
        Ok(Self {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f32>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    /// Internal constructor for DSP output that is finite by construction.
    pub(crate) fn from_processed(sample_rate: u32, channels: Vec<Vec<f32>>) -> Self {
        debug_assert!(channels.iter().flatten().all(|s| s.is_finite()));
        Self {
            sample_rate,
            channels,
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn frames(&self) -> usize {
        self.channels[0].len()
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, idx: usize) -> &[f32] {
        &self.channels[idx]
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    /// Mean of all channels, frame by frame.
    pub fn mono_mix(&self) -> Vec<f64> {
        let n = self.channels.len() as f64;
        (0..self.frames())
            .map(|i| self.channels.iter().map(|c| c[i] as f64).sum::<f64>() / n)
            .collect()
    }

    pub fn peak(&self) -> f32 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        let total = self.frames() * self.channels.len();
        if total == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .channels
            .iter()
            .flatten()
            .map(|&s| (s as f64) * (s as f64))
            .sum();
        (sum / total as f64).sqrt()
    }

    /// Applies `f` to each channel independently, keeping the rate.
    pub(crate) fn map_channels(&self, mut f: impl FnMut(&[f32]) -> Vec<f32>) -> AudioBuffer {
        let channels = self.channels.iter().map(|c| f(c)).collect();
        AudioBuffer::from_processed(self.sample_rate, channels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Pcm16,
    Pcm24,
    Float32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavSpec {
    pub encoding: Encoding,
    pub sample_rate: u32,
    pub channels: u16,
}

impl WavSpec {
    pub fn for_buffer(buffer: &AudioBuffer, encoding: Encoding) -> Self {
        Self {
            encoding,
            sample_rate: buffer.sample_rate(),
            channels: buffer.num_channels() as u16,
        }
    }
}

fn map_read_err(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::CorruptFile("truncated data chunk".into())
        }
        hound::Error::IoError(e) => Error::CorruptFile(e.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV layout".into()),
        hound::Error::TooWide => Error::UnsupportedFormat("sample width too large".into()),
        other => Error::CorruptFile(other.to_string()),
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader =
        hound::WavReader::new(std::io::BufReader::new(file)).map_err(map_read_err)?;
    let spec = reader.spec();
    let n_ch = spec.channels as usize;
    if n_ch == 0 {
        return Err(Error::CorruptFile("zero channels in header".into()));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_read_err)?,
        (hound::SampleFormat::Int, 24) => reader
            .samples::<i32>()
            .map(|s| s.map(|v| (v as f64 / 8_388_608.0) as f32))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_read_err)?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(map_read_err)?,
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat(format!("{fmt:?} with {bits} bits")));
        }
    };
    if !interleaved.len().is_multiple_of(n_ch) {
        return Err(Error::CorruptFile("partial frame at end of data".into()));
    }
    let frames = interleaved.len() / n_ch;
    let mut channels = vec![Vec::with_capacity(frames); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (c, &s) in frame.iter().enumerate() {
            channels[c].push(s);
        }
    }
    AudioBuffer::new(spec.sample_rate, channels)
}

fn quantize_pcm16(x: f32) -> i16 {
    let v = (x.clamp(-1.0, 1.0) as f64 * 32768.0).round();
    v.clamp(-32768.0, 32767.0) as i16
}

pub fn write_wav(buffer: &AudioBuffer, spec: &WavSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if spec.sample_rate != buffer.sample_rate() {
        return Err(Error::SampleRateMismatch {
            expected: buffer.sample_rate(),
            actual: spec.sample_rate,
        });
    }
    if spec.channels as usize != buffer.num_channels() {
        return Err(Error::InvalidBuffer(format!(
            "spec declares {} channels, buffer has {}",
            spec.channels,
            buffer.num_channels()
        )));
    }
    let (bits, format) = match spec.encoding {
        Encoding::Pcm16 => (16, hound::SampleFormat::Int),
        Encoding::Float32 => (32, hound::SampleFormat::Float),
        Encoding::Pcm24 => {
            return Err(Error::UnsupportedFormat("pcm24 is read-only".into()));
        }
    };
    let hspec = hound::WavSpec {
        channels: spec.channels,
        sample_rate: spec.sample_rate,
        bits_per_sample: bits,
        sample_format: format,
    };
    let to_io = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(other.to_string())),
    };
    let mut writer = hound::WavWriter::create(path, hspec).map_err(to_io)?;
    for i in 0..buffer.frames() {
        for ch in buffer.channels() {
            match spec.encoding {
                Encoding::Pcm16 => writer.write_sample(quantize_pcm16(ch[i])),
                _ => writer.write_sample(ch[i]),
            }
            .map_err(to_io)?;
        }
    }
    writer.finalize().map_err(to_io)
}

/// Test-signal generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SignalKind {
    Sine { freq: f64 },
    Impulse,
    Silence,
    WhiteNoise { seed: u64 },
}

pub fn synth_signal(kind: SignalKind, duration: f64, sample_rate: u32) -> Result<AudioBuffer> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidBuffer(format!("duration {duration} must be positive")));
    }
    let frames = (duration * sample_rate as f64).round().max(1.0) as usize;
    let sr = sample_rate as f64;
    let samples: Vec<f32> = match kind {
        SignalKind::Sine { freq } => (0..frames)
            .map(|n| (2.0 * PI * freq * n as f64 / sr).sin() as f32)
            .collect(),
        SignalKind::Impulse => {
            let mut v = vec![0.0; frames];
            v[0] = 1.0;
            v
        }
        SignalKind::Silence => vec![0.0; frames],
        SignalKind::WhiteNoise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..frames).map(|_| rng.random_range(-1.0f32..1.0)).collect()
        }
    };
    AudioBuffer::mono(sample_rate, samples)
}
