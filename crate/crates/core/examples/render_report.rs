// Writes experiment tables into one directory and renders SVG plots plus an
// index for them.

use std::path::Path;

use fxprobe::experiments::{
    exp1_performance_impact, exp3_trajectories, load_manifest, model_sources, render_report, write_exp1,
    write_exp3, write_fixture, FixtureKind, FixtureSpec, RunConfig, Session,
};
use fxprobe::fx::FxKind;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 16, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.fx = vec![FxKind::Distortion, FxKind::Reverb, FxKind::Eq];
    cfg.sampling.regression = 6;
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let reports = out.join("reports");
    write_exp1(&exp1_performance_impact(&mut session)?, &reports.join("exp1"))?;
    write_exp3(&exp3_trajectories(&mut session)?, &reports.join("exp3"))?;
    for file in render_report(&reports)? {
        println!("{}", file.strip_prefix(&reports).unwrap_or(&file).display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-render-report"))
}
