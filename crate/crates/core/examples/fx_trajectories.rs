// Per-effect intensity trajectories in a joint 2-D projection, summarised
// by mean length and straightness.

use std::path::Path;

use fxprobe::experiments::{
    exp3_trajectories, load_manifest, model_sources, write_exp3, write_fixture, FixtureKind, FixtureSpec,
    RunConfig, Session,
};

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 16, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.sampling.regression = 6;
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let result = exp3_trajectories(&mut session)?;
    for run in &result.runs {
        print!("{}", run.set.summary_table());
        for w in &run.warnings {
            println!("warning: {w}");
        }
    }
    write_exp3(&result, &out.join("exp3"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-fx-trajectories"))
}
