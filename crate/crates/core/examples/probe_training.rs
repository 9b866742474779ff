// Trains gradient-boosted probes on clean fixture embeddings, scores them on
// the held-out split under heavy EQ, and round-trips the model file.

use std::path::Path;

use fxprobe::condition::Condition;
use fxprobe::experiments::{
    evaluate_heads, load_manifest, model_sources, train_heads, write_fixture, FixtureKind, FixtureSpec, Head,
    RunConfig, Session,
};
use fxprobe::fx::FxKind;
use fxprobe::probe::{load_models, save_models};

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 24, duration: 0.5, ..FixtureSpec::new(FixtureKind::FourClass) };
    let manifest = load_manifest(write_fixture(out, &spec)?)?;
    let cfg = RunConfig::default();
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let heads = train_heads(&mut session, 0, &cfg.probe)?;
    let test = session.test_ids().to_vec();
    for cond in [Condition::Clean, Condition::fx(FxKind::Eq, 10)?] {
        let x = session.matrix(0, &test, &cond)?;
        for (name, value) in evaluate_heads(&session, &heads, &x, &test)? {
            println!("{cond:<10} {name:<10} {value:.4}");
        }
    }
    let path = out.join("probes.txt");
    save_models(&heads.iter().map(|h| h.model.clone()).collect::<Vec<_>>(), &path)?;
    let back: Vec<Head> = load_models(&path)?.into_iter().map(Head::from_model).collect();
    println!("reloaded {} head(s) from {}", back.len(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-probe-training"))
}
