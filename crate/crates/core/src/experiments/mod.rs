//! Manifests, configuration, the four experiments and their reports.

mod config;
mod fixture;
mod manifest;
mod report;
mod runs;
mod session;
mod tables;

pub use config::{RunConfig, Sampling};
pub use fixture::{fixture_manifest, fixture_tracks, write_fixture, FixtureKind, FixtureSpec, FixtureTrack};
pub use manifest::{
    load_manifest, DatasetManifest, Labels, ManifestRow, Split, Task, EMOPIA_CLASSES, GEMS9_TAGS, VA_TARGETS,
};
pub use report::{
    delta_svg, radar_svg, render_report, trajectories_svg, write_exp1, write_exp2, write_exp3, write_exp4,
};
pub use runs::{
    exp1_performance_impact, exp2_prediction_shifts, exp3_trajectories, exp4_scenarios, fit_selection,
    sample_tracks, Exp1Output, Exp3Output, Exp4Output, ScenarioComparison, TrajectoryRun,
};
pub use session::{evaluate_heads, model_sources, predicted_counts, train_heads, Head, Session};
pub use tables::{metrics_csv, DeltaCell, DeltaTable, MetricRow, RadarData, RadarPlot};
