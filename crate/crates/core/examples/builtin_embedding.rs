// Embeds a tone under a distortion ladder with the built-in spectral
// embedder, prints distance from clean and saves an exchange file.

use std::path::Path;

use fxprobe::audio::{synth_signal, SignalKind};
use fxprobe::condition::Condition;
use fxprobe::embed::{embed_conditions, EmbeddingSource, CENTROID_MEAN};
use fxprobe::fx::FxKind;
use fxprobe::matrix::euclidean;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    std::fs::create_dir_all(out).ok();
    let tracks = vec![
        ("a3".to_string(), synth_signal(SignalKind::Sine { freq: 220.0 }, 1.0, 32000)?),
        ("a4".to_string(), synth_signal(SignalKind::Sine { freq: 440.0 }, 1.0, 32000)?),
    ];
    let conditions = Condition::ladder(FxKind::Distortion);
    let set = embed_conditions(&tracks, &conditions, &EmbeddingSource::Builtin)?;
    for (id, _) in &tracks {
        let clean = set.require(id, &Condition::Clean)?;
        println!("{id}: clean centroid {:.1} Hz", clean[CENTROID_MEAN]);
        for c in &conditions[1..] {
            let v = set.require(id, c)?;
            println!("  {c:<16} distance {:8.3}  centroid {:7.1} Hz", euclidean(clean, v), v[CENTROID_MEAN]);
        }
    }
    let path = out.join("builtin.fxemb");
    set.save(&path)?;
    println!("{} records -> {}", set.len(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-builtin-embedding"))
}
