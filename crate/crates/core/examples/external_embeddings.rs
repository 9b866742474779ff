// Uses a pre-computed `#fxemb v1` exchange file as a second model next to
// the built-in embedder. Here the file is written locally; in practice it
// comes from a foundation-model extraction script.

use std::path::Path;

use fxprobe::condition::Condition;
use fxprobe::embed::{embed_conditions, load_embeddings, EmbeddingSet, EmbeddingSource};
use fxprobe::experiments::{
    exp1_performance_impact, load_manifest, model_sources, write_fixture, FixtureKind, FixtureSpec, RunConfig,
    Session,
};
use fxprobe::audio::read_wav;
use fxprobe::fx::FxKind;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 16, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let fx = [FxKind::Distortion, FxKind::Chorus];
    let mut conditions = vec![Condition::Clean];
    for kind in fx {
        conditions.extend([Condition::fx(kind, 1)?, Condition::fx(kind, 10)?]);
    }
    let tracks = manifest
        .rows
        .iter()
        .map(|r| Ok((r.track_id.clone(), read_wav(&r.audio_path)?)))
        .collect::<fxprobe::Result<Vec<_>>>()?;
    let builtin = embed_conditions(&tracks, &conditions, &EmbeddingSource::Builtin)?;
    // A stand-in "foundation model": the first 64 builtin dimensions, squared.
    let mut toy = EmbeddingSet::new("toy-fm", 64)?;
    toy.set_meta("pooling", "mean");
    for rec in builtin.records() {
        toy.insert(&rec.track_id, rec.condition, rec.vector[..64].iter().map(|v| v * v).collect())?;
    }
    let path = out.join("toy-fm.fxemb");
    toy.save(&path)?;
    println!("loaded {} records for {}", load_embeddings(&path)?.len(), toy.model_id());

    let mut cfg = RunConfig::default();
    cfg.fx = fx.to_vec();
    cfg.levels = vec![1, 10];
    cfg.embeddings = vec![path];
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let result = exp1_performance_impact(&mut session)?;
    print!("{}", result.delta.to_markdown());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-external-embeddings"))
}
