// Clean-trained probes scored on effect-processed audio: the level-10 minus
// level-1 delta table for a synthetic valence/arousal fixture.

use std::path::Path;

use fxprobe::experiments::{
    exp1_performance_impact, load_manifest, model_sources, write_exp1, write_fixture, FixtureKind, FixtureSpec,
    RunConfig, Session,
};

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 24, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.levels = vec![1, 10];
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let result = exp1_performance_impact(&mut session)?;
    print!("{}", result.delta.to_markdown());
    write_exp1(&result, &out.join("exp1"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-performance-impact"))
}
