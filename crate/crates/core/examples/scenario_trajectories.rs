// Cumulative-stage trajectories through the real-world chain presets,
// compared against each stage applied on its own.

use std::path::Path;

use fxprobe::experiments::{
    exp4_scenarios, load_manifest, model_sources, write_exp4, write_fixture, FixtureKind, FixtureSpec, RunConfig,
    Session,
};

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 16, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.sampling.regression = 8;
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let result = exp4_scenarios(&mut session)?;
    for row in &result.comparison {
        let best = match (row.best_stage, row.best_stage_mean_length) {
            (Some(stage), Some(len)) => format!("stage {stage} alone {len:.3}"),
            _ => "no stage-only vectors".to_string(),
        };
        println!(
            "{:<10} chain length {:6.3}  median straightness {:.3}  {best}",
            row.scenario, row.mean_chain_length, row.median_straightness
        );
    }
    write_exp4(&result, &out.join("exp4"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-scenario-trajectories"))
}
