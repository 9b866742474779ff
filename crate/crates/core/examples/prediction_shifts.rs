// Counts predicted emotion labels at every distortion level on a fixture
// whose classes split on loudness, and prints the normalized radar rows.

use std::path::Path;

use fxprobe::experiments::{
    exp2_prediction_shifts, load_manifest, model_sources, write_exp2, write_fixture, FixtureKind, FixtureSpec,
    RunConfig, Session,
};
use fxprobe::fx::FxKind;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 30, duration: 0.5, ..FixtureSpec::new(FixtureKind::EnergyTwoClass) };
    let manifest = load_manifest(write_fixture(&out.join("fixture"), &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.fx = vec![FxKind::Distortion];
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let radar = exp2_prediction_shifts(&mut session)?;
    for plot in &radar.plots {
        println!("{} / {}: {}", plot.model, plot.fx, plot.labels.join(" "));
        for (level, row) in plot.levels.iter().zip(&plot.normalized) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
            println!("  level {level:>2}: {}", cells.join(" "));
        }
    }
    write_exp2(&radar, &out.join("exp2"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-prediction-shifts"))
}
