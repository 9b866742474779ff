// Walks the three scenario presets stage by stage on an impulse-plus-tone
// signal and prints how the level builds up.

use fxprobe::audio::{synth_signal, SignalKind};
use fxprobe::condition::Condition;
use fxprobe::fx::{scenario_preset, SCENARIOS};

pub fn run(_out: &std::path::Path) -> fxprobe::Result<()> {
    let tone = synth_signal(SignalKind::Sine { freq: 196.0 }, 1.5, 44100)?;
    for name in SCENARIOS {
        let chain = scenario_preset(name)?;
        println!("{name}: {} stages", chain.len());
        for (k, stage) in chain.stages().iter().enumerate() {
            let upto = Condition::ChainStage { name: name.to_string(), stages: k + 1 }.render(&tone)?;
            let alone = Condition::StageOnly { name: name.to_string(), stage: k + 1 }.render(&tone)?;
            println!(
                "  stage {} {:<10} cumulative rms {:.4}  alone rms {:.4}",
                k + 1,
                stage.kind().as_str(),
                upto.rms(),
                alone.rms()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(std::path::Path::new("."))
}
