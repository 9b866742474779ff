// Renders a 440 Hz tone through every effect at levels 1, 5 and 10 and
// writes each result as a WAV.

use std::path::Path;

use fxprobe::audio::{synth_signal, write_wav, Encoding, SignalKind, WavSpec};
use fxprobe::condition::Condition;
use fxprobe::fx::FxKind;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    std::fs::create_dir_all(out).ok();
    let tone = synth_signal(SignalKind::Sine { freq: 440.0 }, 1.0, 44100)?;
    println!("{:<11} {:>5} {:>8} {:>8}", "effect", "level", "rms", "peak");
    for kind in FxKind::ALL {
        for level in [1, 5, 10] {
            let y = Condition::fx(kind, level)?.render(&tone)?;
            write_wav(&y, &WavSpec::for_buffer(&y, Encoding::Pcm16), out.join(format!("{kind}_{level}.wav")))?;
            println!("{:<11} {:>5} {:>8.4} {:>8.4}", kind.as_str(), level, y.rms(), y.peak());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-render-effects"))
}
