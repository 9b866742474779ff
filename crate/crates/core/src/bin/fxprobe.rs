use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fxprobe::audio::{read_wav, write_wav, Encoding, WavSpec};
use fxprobe::condition::{parse_condition_list, Condition};
use fxprobe::embed::{embed_conditions, EmbeddingSource};
use fxprobe::experiments::{
    evaluate_heads, exp1_performance_impact, exp2_prediction_shifts, exp3_trajectories, exp4_scenarios,
    load_manifest, model_sources, render_report, train_heads, write_exp1, write_exp2, write_exp3, write_exp4,
    write_fixture, FixtureKind, FixtureSpec, Head, RunConfig, Session,
};
use fxprobe::fx::FxKind;
use fxprobe::probe::{load_models, save_models};
use fxprobe::{Error, Result};

#[derive(Parser)]
#[command(name = "fxprobe", version, about = "Audio-effect robustness audits for emotion probes on audio embeddings")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset manifest, overriding the config.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one effect, chain or condition to a WAV file.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, requires = "level", conflicts_with_all = ["chain", "condition"])]
        fx: Option<FxKind>,
        #[arg(long)]
        level: Option<i64>,
        #[arg(long, conflicts_with = "condition")]
        chain: Option<String>,
        /// Any condition in text form, e.g. `chainstage:ratm:2`.
        #[arg(long)]
        condition: Option<Condition>,
        #[arg(long, default_value = "float32", value_parser = parse_encoding)]
        encoding: Encoding,
    },
    /// Embed manifest tracks with the built-in embedder into an exchange file.
    Embed {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated conditions; `fx:<kind>:*` expands to all levels.
        #[arg(long, default_value = "clean")]
        conditions: String,
    },
    /// Train probe heads on clean train-split vectors.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Model id (default: the first configured model).
        #[arg(long)]
        model: Option<String>,
    },
    /// Score saved probe heads on the test split under one condition.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        model: Option<String>,
        /// Probe file written by `train` (default: <out>/probes.txt).
        #[arg(long)]
        probes: Option<PathBuf>,
        #[arg(long, default_value = "clean")]
        condition: Condition,
    },
    /// Metric deltas per effect between levels 10 and 1.
    Exp1(RunArgs),
    /// Predicted-label counts per effect level.
    Exp2(RunArgs),
    /// Joint 2-D projection of per-effect intensity trajectories.
    Exp3(RunArgs),
    /// Trajectories through real-world effect chains.
    Exp4(RunArgs),
    /// Render SVG plots and an index for experiment outputs.
    Report {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Write a synthetic labelled fixture (manifest plus WAVs).
    Fixture {
        #[arg(long, default_value = "va_regression")]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        tracks: usize,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
}

fn parse_encoding(s: &str) -> std::result::Result<Encoding, String> {
    match s {
        "pcm16" => Ok(Encoding::Pcm16),
        "pcm24" => Ok(Encoding::Pcm24),
        "float32" => Ok(Encoding::Float32),
        _ => Err(format!("unknown encoding `{s}` (pcm16, pcm24, float32)")),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let cfg = cfg.with_seed(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_run_args(mut cfg: RunConfig, run: &RunArgs) -> RunConfig {
    if let Some(m) = &run.manifest {
        cfg.manifest = Some(m.clone());
    }
    if let Some(o) = &run.out {
        cfg.out_dir = o.clone();
    }
    cfg
}

fn model_index(session: &Session, id: Option<&str>) -> Result<usize> {
    match id {
        None => Ok(0),
        Some(id) => (0..session.n_models())
            .find(|&m| session.model_id(m) == id)
            .ok_or_else(|| Error::InvalidConfig(format!("model `{id}` is not configured"))),
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run_experiment(cfg: &RunConfig, name: &str) -> Result<()> {
    let manifest = load_manifest(cfg.require_manifest()?)?;
    let mut session = Session::new(&manifest, cfg, model_sources(cfg)?)?;
    let dir = cfg.out_dir.join(name);
    let files = match name {
        "exp1" => write_exp1(&exp1_performance_impact(&mut session)?, &dir)?,
        "exp2" => write_exp2(&exp2_prediction_shifts(&mut session)?, &dir)?,
        "exp3" => write_exp3(&exp3_trajectories(&mut session)?, &dir)?,
        _ => write_exp4(&exp4_scenarios(&mut session)?, &dir)?,
    };
    print_files(&files);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Render {
            input,
            out,
            fx,
            level,
            chain,
            condition,
            encoding,
        } => {
            let cond = match (fx, level, chain, condition) {
                (Some(kind), Some(l), _, _) => Condition::fx(*kind, *l)?,
                (_, _, Some(name), _) => Condition::Chain(name.clone()),
                (_, _, _, Some(c)) => c.clone(),
                _ => return Err(Error::InvalidConfig("give --fx/--level, --chain or --condition".into())),
            };
            let buf = read_wav(input)?;
            let y = cond.render(&buf)?;
            write_wav(&y, &WavSpec::for_buffer(&y, *encoding), out)?;
            print_files(std::slice::from_ref(out));
        }
        Command::Embed { run, conditions } => {
            let cfg = apply_run_args(load_config(cli)?, run);
            let conds = parse_condition_list(conditions)?;
            if conds.is_empty() {
                return Err(Error::InvalidConfig("no conditions".into()));
            }
            let manifest = load_manifest(cfg.require_manifest()?)?;
            let tracks = manifest
                .rows
                .iter()
                .map(|r| Ok((r.track_id.clone(), read_wav(&r.audio_path)?)))
                .collect::<Result<Vec<_>>>()?;
            let mut set = embed_conditions(&tracks, &conds, &EmbeddingSource::Builtin)?;
            set.set_meta("dataset", &manifest.dataset_id);
            let path = cfg.out_dir.join(format!("{}.fxemb", set.model_id()));
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::Io {
                path: cfg.out_dir.clone(),
                source: e,
            })?;
            set.save(&path)?;
            print_files(&[path]);
        }
        Command::Train { run, model } => {
            let cfg = apply_run_args(load_config(cli)?, run);
            let manifest = load_manifest(cfg.require_manifest()?)?;
            let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
            let m = model_index(&session, model.as_deref())?;
            let heads = train_heads(&mut session, m, &cfg.probe)?;
            let models: Vec<_> = heads.into_iter().map(|h| h.model).collect();
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::Io {
                path: cfg.out_dir.clone(),
                source: e,
            })?;
            let path = cfg.out_dir.join("probes.txt");
            save_models(&models, &path)?;
            print_files(&[path]);
        }
        Command::Eval {
            run,
            model,
            probes,
            condition,
        } => {
            let cfg = apply_run_args(load_config(cli)?, run);
            let path = probes.clone().unwrap_or_else(|| cfg.out_dir.join("probes.txt"));
            let heads: Vec<Head> = load_models(&path)?.into_iter().map(Head::from_model).collect();
            let manifest = load_manifest(cfg.require_manifest()?)?;
            let mut session = Session::new(&manifest, &cfg, model_sources(&cfg)?)?;
            let m = model_index(&session, model.as_deref())?;
            let test = session.test_ids().to_vec();
            let x = session.matrix(m, &test, condition)?;
            println!("metric,value");
            for (name, v) in evaluate_heads(&session, &heads, &x, &test)? {
                println!("{name},{v:.9}");
            }
        }
        Command::Exp1(run) => run_experiment(&apply_run_args(load_config(cli)?, run), "exp1")?,
        Command::Exp2(run) => run_experiment(&apply_run_args(load_config(cli)?, run), "exp2")?,
        Command::Exp3(run) => run_experiment(&apply_run_args(load_config(cli)?, run), "exp3")?,
        Command::Exp4(run) => run_experiment(&apply_run_args(load_config(cli)?, run), "exp4")?,
        Command::Report { dir } => {
            let dir = match dir {
                Some(d) => d.clone(),
                None => load_config(cli)?.out_dir,
            };
            print_files(&render_report(&dir)?);
        }
        Command::Fixture {
            kind,
            out,
            tracks,
            duration,
        } => {
            let spec = FixtureSpec {
                n_tracks: *tracks,
                duration: *duration,
                seed: cli.seed.unwrap_or(42),
                ..FixtureSpec::new(*kind)
            };
            print_files(&[write_fixture(Path::new(out), &spec)?]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
