// Reads a TOML run configuration, overrides the seed, validates it and
// prints the fully-defaulted result.

use std::path::Path;

use fxprobe::experiments::RunConfig;

const EXAMPLE: &str = r#"
seed = 7
manifest = "data/manifest.csv"
fx = ["distortion", "reverb"]
levels = [1, 5, 10]
scenarios = ["ratm"]

[sampling]
regression = 10

[probe]
n_trees = 80

[projection]
method = "pca"
"#;

pub fn run(out: &Path) -> fxprobe::Result<()> {
    std::fs::create_dir_all(out).ok();
    let path = out.join("run.toml");
    std::fs::write(&path, EXAMPLE).expect("writable example dir");
    let cfg = RunConfig::load(&path)?.with_seed(123);
    cfg.validate()?;
    println!("manifest resolves to {}", cfg.require_manifest()?.display());
    print!("{}", cfg.to_toml());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(&std::env::temp_dir().join("fxprobe-run-config"))
}
