// Runs the standardize / variance / correlation / elastic-net / top-K
// pipeline on clean fixture embeddings and prints its provenance log.

use std::path::Path;

use fxprobe::experiments::{fit_selection, load_manifest, model_sources, write_fixture, FixtureKind, FixtureSpec, RunConfig, Session};

pub fn run(out: &Path) -> fxprobe::Result<()> {
    let spec = FixtureSpec { n_tracks: 24, duration: 0.5, ..FixtureSpec::new(FixtureKind::VaRegression) };
    let manifest = load_manifest(write_fixture(out, &spec)?)?;
    let mut cfg = RunConfig::default();
    cfg.pipeline.top_k = 10;
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
    let selection = fit_selection(&mut session, 0)?;
    for fit in &selection.fits {
        let nonzero = fit.coefficients.iter().filter(|c| **c != 0.0).count();
        println!("{}: alpha {:?}, l1_ratio {}, {nonzero} nonzero", fit.name, fit.alpha, fit.l1_ratio);
    }
    println!("kept columns {:?}", selection.mask.kept());
    for line in selection.provenance().lines().filter(|l| !l.starts_with("drop")) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-feature-selection"))
}
