// Projects the delay ladders of a few tones into 2-D with both methods and
// prints per-track trajectory metrics.

use fxprobe::audio::{synth_signal, SignalKind};
use fxprobe::condition::Condition;
use fxprobe::embed::{embed_conditions, EmbeddingSource};
use fxprobe::fx::FxKind;
use fxprobe::matrix::Matrix;
use fxprobe::pipeline::standardize;
use fxprobe::projection::{project, Method, ProjectionConfig, Trajectory};

pub fn run(_out: &std::path::Path) -> fxprobe::Result<()> {
    let tracks = [110.0, 165.0, 247.5, 371.25]
        .iter()
        .map(|f| Ok((format!("{f}hz"), synth_signal(SignalKind::Sine { freq: *f }, 1.0, 32000)?)))
        .collect::<fxprobe::Result<Vec<_>>>()?;
    let ladder = Condition::ladder(FxKind::Delay);
    let set = embed_conditions(&tracks, &ladder, &EmbeddingSource::Builtin)?;
    let rows: Vec<Vec<f64>> = tracks
        .iter()
        .flat_map(|(id, _)| ladder.iter().map(move |c| (id, c)))
        .map(|(id, c)| Ok(set.require(id, c)?.to_vec()))
        .collect::<fxprobe::Result<_>>()?;
    let (x, _) = standardize(&Matrix::from_rows(&rows)?)?;
    for method in [Method::Pca, Method::NeighborEmbed] {
        let cfg = ProjectionConfig { method, n_neighbors: 10, ..ProjectionConfig::default() };
        let p = project(&x, &cfg)?;
        println!("{method:?}");
        for (i, (id, _)) in tracks.iter().enumerate() {
            let pts = p.points[i * ladder.len()..(i + 1) * ladder.len()].to_vec();
            let t = Trajectory::new(id, "delay", ladder.clone(), pts);
            println!(
                "  {id:<10} length {:7.3}  straightness {:.3}  variance {:.3}",
                t.metrics.length, t.metrics.straightness, t.metrics.point_variance
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fxprobe::Result<()> {
    run(std::path::Path::new("."))
}
