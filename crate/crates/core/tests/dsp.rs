mod common;

use fxprobe::audio::{synth_signal, AudioBuffer, SignalKind};
use fxprobe::condition::Condition;
use fxprobe::fx::{
    apply_chain, apply_distortion, scenario_preset, settings_for_level, DistortionSettings, FxKind, FxSettings,
};
use proptest::prelude::*;

const SR: u32 = 22050;

fn frames_above(x: &[f32], from: usize) -> f64 {
    x[from..].iter().map(|v| (*v as f64).powi(2)).sum()
}

/// Total harmonic distortion of a sine with an integer number of periods in `x`.
fn thd(x: &[f32], periods: usize) -> f64 {
    let frame: Vec<f64> = x.iter().map(|v| *v as f64).collect();
    let mag = common::naive_dft_magnitudes(&frame);
    let fundamental = mag[periods];
    let harmonics: f64 = (2..=9).map(|h| mag[h * periods].powi(2)).sum();
    harmonics.sqrt() / fundamental
}

#[test]
fn distortion_thd_rises_with_level() {
    let n = 2205;
    let periods = 10;
    let sine: Vec<f32> = (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * periods as f64 * i as f64 / n as f64).sin() as f32)
        .collect();
    let buf = AudioBuffer::mono(SR, sine).unwrap();
    let mut last = 0.0;
    for level in 1..=10 {
        let y = settings_for_level(FxKind::Distortion, level).unwrap().apply(&buf).unwrap();
        let t = thd(y.channel(0), periods);
        assert!(t >= last - 1e-12, "level {level}: thd {t} < {last}");
        last = t;
    }
}

#[test]
fn delay_offset_rises_with_level() {
    let imp = synth_signal(SignalKind::Impulse, 0.6, SR).unwrap();
    let mut last = 0;
    for level in 1..=10 {
        let y = settings_for_level(FxKind::Delay, level).unwrap().apply(&imp).unwrap();
        let first_echo = y.channel(0)[1..].iter().position(|v| v.abs() > 1e-6).unwrap() + 1;
        let expected = (0.05 * level as f64 * SR as f64).round() as usize;
        assert_eq!(first_echo, expected);
        assert!(first_echo >= last);
        last = first_echo;
    }
}

#[test]
fn reverb_tail_rises_with_level() {
    let imp = synth_signal(SignalKind::Impulse, 1.0, SR).unwrap();
    let tail_start = (0.05 * SR as f64) as usize;
    let mut last = 0.0;
    for level in 1..=10 {
        let y = settings_for_level(FxKind::Reverb, level).unwrap().apply(&imp).unwrap();
        let e = frames_above(y.channel(0), tail_start);
        assert!(e >= last, "level {level}: tail {e} < {last}");
        last = e;
    }
}

#[test]
fn ratm_chain_matches_stagewise_rendering() {
    let sine = synth_signal(SignalKind::Sine { freq: 220.0 }, 0.3, SR).unwrap();
    let chain = scenario_preset("ratm").unwrap();
    let whole = apply_chain(&sine, &chain).unwrap();
    let mut staged = sine.clone();
    for s in chain.stages() {
        staged = s.apply(&staged).unwrap();
    }
    assert_eq!(whole, staged);
    assert_eq!(Condition::Chain("ratm".into()).render(&sine).unwrap(), whole);
    let two = Condition::ChainStage { name: "ratm".into(), stages: 2 }.render(&sine).unwrap();
    assert_eq!(two, whole);
}

#[test]
fn distortion_then_delay_on_impulse() {
    let imp = synth_signal(SignalKind::Impulse, 0.2, 44100).unwrap();
    let chain = fxprobe::fx::FxChain::new(
        "probe",
        vec![
            FxSettings::Distortion(DistortionSettings { drive_db: 30.0 }),
            FxSettings::Delay(fxprobe::fx::DelaySettings { delay_seconds: 2000.0 / 44100.0, feedback: 0.5, mix: 0.5 }),
        ],
    )
    .unwrap();
    let y = apply_chain(&imp, &chain).unwrap();
    let expected = 0.5 * (10f64.powf(1.5)).tanh();
    assert!((y.channel(0)[2000] as f64 - expected).abs() < 1e-6);
}

proptest! {
    #[test]
    fn distortion_is_bounded_and_odd(xs in proptest::collection::vec(-8.0f32..8.0, 1..128), drive in 0.0f64..40.0) {
        let s = DistortionSettings { drive_db: drive };
        let pos = apply_distortion(&AudioBuffer::mono(SR, xs.clone()).unwrap(), &s);
        let neg = apply_distortion(&AudioBuffer::mono(SR, xs.iter().map(|v| -v).collect()).unwrap(), &s);
        for (a, b) in pos.channel(0).iter().zip(neg.channel(0)) {
            prop_assert!(a.abs() <= 1.0);
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn every_rung_keeps_length_and_finiteness(kind_idx in 0usize..6, level in 1i64..=10, seed in 0u64..1000) {
        let noise = synth_signal(SignalKind::WhiteNoise { seed }, 0.12, 44100).unwrap();
        let y = settings_for_level(FxKind::ALL[kind_idx], level).unwrap().apply(&noise).unwrap();
        prop_assert_eq!(y.frames(), noise.frames());
        prop_assert!(y.channel(0).iter().all(|v| v.is_finite()));
    }
}
