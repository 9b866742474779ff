//! The built-in spectral embedder.
//!
//! Mono mix, Hann-windowed STFT (1024 / hop 256), 64 HTK mel bands spanning
//! 0..Nyquist with area-normalised triangles. Layout of the 132-d vector:
//!
//! | range     | feature                              |
//! |-----------|--------------------------------------|
//! | 0..64     | per-band mean of ln(max(E, 1e-10))   |
//! | 64..128   | per-band std of the same             |
//! | 128, 129  | spectral centroid mean, std (Hz)     |
//! | 130, 131  | spectral flux mean, std              |
//!
//! Standard deviations are population (divide by n).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const FFT_SIZE: usize = 1024;
pub const HOP: usize = 256;
pub const MEL_BANDS: usize = 64;
pub const BUILTIN_DIM: usize = 2 * MEL_BANDS + 4;
pub const LOG_FLOOR: f64 = 1e-10;

pub const CENTROID_MEAN: usize = 2 * MEL_BANDS;
pub const CENTROID_STD: usize = 2 * MEL_BANDS + 1;
pub const FLUX_MEAN: usize = 2 * MEL_BANDS + 2;
pub const FLUX_STD: usize = 2 * MEL_BANDS + 3;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Band edges in Hz: `MEL_BANDS + 2` points equally spaced in mel.
pub fn mel_edges(sample_rate: u32) -> Vec<f64> {
    let top = hz_to_mel(sample_rate as f64 / 2.0);
    (0..MEL_BANDS + 2)
        .map(|i| mel_to_hz(top * i as f64 / (MEL_BANDS + 1) as f64))
        .collect()
}

/// Triangular filters over the `FFT_SIZE / 2 + 1` rfft bins, each scaled to unit area.
pub fn mel_filterbank(sample_rate: u32) -> Vec<Vec<f64>> {
    let edges = mel_edges(sample_rate);
    let bin_hz = sample_rate as f64 / FFT_SIZE as f64;
    (0..MEL_BANDS)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let height = 2.0 / (hi - lo);
            (0..=FFT_SIZE / 2)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    let tri = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    tri * height
                })
                .collect()
        })
        .collect()
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    // Shifted by the first value so constant sequences give exact results.
    let n = xs.len() as f64;
    let shift = xs[0];
    let mean = shift + xs.iter().map(|x| x - shift).sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Magnitude spectra of every full frame.
pub fn magnitude_frames(signal: &[f64]) -> Vec<Vec<f64>> {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(FFT_SIZE);
    let window = hann(FFT_SIZE);
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex::new(0.0, 0.0); FFT_SIZE];
    let mut frames = Vec::new();
    let mut start = 0;
    while start + FFT_SIZE <= signal.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(signal[start + i] * window[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        frames.push(buf[..=FFT_SIZE / 2].iter().map(|c| c.norm()).collect());
        start += HOP;
    }
    frames
}

pub fn embed_builtin(buf: &AudioBuffer) -> Result<Vec<f64>> {
    if buf.frames() < FFT_SIZE {
        return Err(Error::InputTooShort {
            frames: buf.frames(),
            required: FFT_SIZE,
        });
    }
    let sr = buf.sample_rate();
    let spectra = magnitude_frames(&buf.mono_mix());
    let bank = mel_filterbank(sr);
    let bin_hz = sr as f64 / FFT_SIZE as f64;

    let mut band_logs: Vec<Vec<f64>> = (0..MEL_BANDS).map(|_| Vec::with_capacity(spectra.len())).collect();
    let mut centroids = Vec::with_capacity(spectra.len());
    for mag in &spectra {
        for (m, filt) in bank.iter().enumerate() {
            let energy: f64 = filt.iter().zip(mag).map(|(w, a)| w * a * a).sum();
            band_logs[m].push(energy.max(LOG_FLOOR).ln());
        }
        let total: f64 = mag.iter().sum();
        let centroid = if total > 0.0 {
            mag.iter()
                .enumerate()
                .map(|(k, a)| k as f64 * bin_hz * a)
                .sum::<f64>()
                / total
        } else {
            0.0
        };
        centroids.push(centroid);
    }
    let flux: Vec<f64> = spectra
        .windows(2)
        .map(|w| {
            w[1].iter()
                .zip(&w[0])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let mut out = vec![0.0; BUILTIN_DIM];
    for (m, logs) in band_logs.iter().enumerate() {
        let (mean, std) = mean_std(logs);
        out[m] = mean;
        out[MEL_BANDS + m] = std;
    }
    (out[CENTROID_MEAN], out[CENTROID_STD]) = mean_std(&centroids);
    (out[FLUX_MEAN], out[FLUX_STD]) = mean_std(&flux);
    Ok(out)
}
