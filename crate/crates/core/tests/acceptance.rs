//! Acceptance criteria, one printed PASS/FAIL line each. Runs without the
//! libtest harness so the lines always show; exits non-zero on any failure.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fxprobe::audio::{synth_signal, AudioBuffer, SignalKind};
use fxprobe::condition::Condition;
use fxprobe::embed::embed_builtin;
use fxprobe::experiments::{
    exp1_performance_impact, exp3_trajectories, exp4_scenarios, load_manifest, model_sources, write_fixture,
    DeltaTable, FixtureKind, FixtureSpec, RadarData, RunConfig, Session,
};
use fxprobe::fx::{settings_for_level, DistortionSettings, EqSettings, FxKind, FxSettings};
use fxprobe::matrix::Matrix;
use fxprobe::pipeline::{correlation_prune, elastic_net, standardize, variance_threshold};
use fxprobe::probe::{
    classification_metrics, multilabel_metrics, regression_loss_trace, regression_metrics, train_classifier,
    MetricReport, ProbeConfig, Truth,
};
use fxprobe::projection::{fuzzy_graph, knn_graph, project, spectral_init, trajectory_metrics, ProjectionConfig};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dsp_suite() -> Check {
    let start = Instant::now();
    let sr = 44100;
    let silence = synth_signal(SignalKind::Silence, 1.0, sr).unwrap();
    let noise = synth_signal(SignalKind::WhiteNoise { seed: 42 }, 1.0, sr).unwrap();
    for kind in FxKind::ALL {
        for level in 1..=10 {
            let s = settings_for_level(kind, level).unwrap();
            let quiet = s.apply(&silence).map_err(|e| e.to_string())?;
            ensure(quiet.peak() == 0.0, || format!("{kind} L{level}: silence gave peak {}", quiet.peak()))?;
            let a = s.apply(&noise).map_err(|e| e.to_string())?;
            let b = s.apply(&noise).map_err(|e| e.to_string())?;
            ensure(a.channel(0).iter().all(|v| v.is_finite()), || format!("{kind} L{level}: non-finite"))?;
            let same = a.channel(0).iter().zip(b.channel(0)).all(|(x, y)| x.to_bits() == y.to_bits());
            ensure(same, || format!("{kind} L{level}: re-run differs"))?;
        }
    }
    let imp = synth_signal(SignalKind::Impulse, 0.7, sr).unwrap();
    for level in 1..=10 {
        let s = settings_for_level(FxKind::Delay, level).unwrap();
        let FxSettings::Delay(d) = s else { unreachable!() };
        let y = s.apply(&imp).unwrap();
        let at = (d.delay_seconds * sr as f64).round() as usize;
        let first = y.channel(0)[1..].iter().position(|v| *v != 0.0).map(|p| p + 1);
        ensure(first == Some(at), || format!("delay L{level}: echo at {first:?}, want {at}"))?;
    }
    let half = AudioBuffer::mono(sr, vec![0.5]).unwrap();
    let y = FxSettings::Distortion(DistortionSettings { drive_db: 20.0 }).apply(&half).unwrap();
    let err = (y.channel(0)[0] as f64 - 5f64.tanh()).abs();
    ensure(err < 1e-6, || format!("tanh(5) error {err}"))?;
    let dc = AudioBuffer::mono(sr, vec![0.5; sr as usize]).unwrap();
    for level in 1..=10 {
        let s = settings_for_level(FxKind::Eq, level).unwrap();
        let y = s.apply(&dc).unwrap();
        let last = y.channel(0).last().unwrap().abs();
        ensure(last < 1e-3, || format!("eq L{level}: constant input ends at {last}"))?;
    }
    let custom = FxSettings::Eq(EqSettings { low_cutoff: 20.0, high_cutoff: 16000.0 }).apply(&dc).unwrap();
    ensure(custom.channel(0).last().unwrap().abs() < 1e-3, || "eq 20 Hz: constant input survives".into())?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("60 rungs, delay/tanh/eq checks, {:.1} s", t.as_secs_f64()))
}

fn probe_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = ProbeConfig::default();
    for case in 0..20 {
        let n = rng.random_range(5..60);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + r[2].sin()).collect();
        let trace = regression_loss_trace(&Matrix::from_rows(&rows).unwrap(), &y, &cfg).unwrap();
        let rising = trace.windows(2).position(|w| w[1] > w[0]);
        ensure(rising.is_none(), || format!("case {case}: loss rose after tree {rising:?}"))?;
    }
    let m = regression_metrics(&[0.0, 1.0], &[0.5, 0.5]);
    ensure(m.mse == 0.25 && m.r2 == 0.0, || format!("half-guess case gave {m:?}"))?;
    let names = ["Excitement", "Anger", "Sadness", "Calmness"];
    let mut fixtures = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=10);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let r = regression_metrics(&y, &p);
        let diffs = [
            (r.mse - common::mse(&y, &p)).abs(),
            (r.mae - common::mae(&y, &p)).abs(),
            (r.r2 - common::r2(&y, &p)).abs(),
        ];
        ensure(diffs.iter().all(|d| *d <= 1e-12), || format!("regression {y:?} {p:?}: {diffs:?}"))?;
        let t: Vec<&str> = (0..n).map(|_| names[rng.random_range(0..4)]).collect();
        let q: Vec<&str> = (0..n).map(|_| names[rng.random_range(0..4)]).collect();
        let c = classification_metrics(&t, &q);
        let o = common::classification_oracle(&t, &q);
        let diffs = [c.accuracy - o.0, c.precision - o.1, c.recall - o.2, c.f1 - o.3, c.f1_macro - o.4];
        ensure(diffs.iter().all(|d| d.abs() <= 1e-12), || format!("classification {t:?} {q:?}"))?;
        let tt: Vec<Vec<bool>> = (0..n).map(|_| (0..9).map(|_| rng.random_bool(0.4)).collect()).collect();
        let pp: Vec<Vec<bool>> = (0..n).map(|_| (0..9).map(|_| rng.random_bool(0.4)).collect()).collect();
        let ml = multilabel_metrics(&tt, &pp);
        let o = common::multilabel_oracle(&tt, &pp);
        ensure((ml.f1_micro - o.0).abs() <= 1e-12 && (ml.f1_macro - o.1).abs() <= 1e-12, || {
            "multilabel mismatch".into()
        })?;
        fixtures += 1;
    }
    let centres = vec![vec![0.0, 0.0, 0.0, 0.0], vec![5.0, 5.0, 0.0, 0.0], vec![0.0, 5.0, 5.0, 0.0]];
    let data = |seed| {
        let (x, y) = common::blobs(&centres, 40, 1.0, seed);
        (Matrix::from_rows(&x).unwrap(), y.into_iter().map(|c| names[c].to_string()).collect::<Vec<_>>())
    };
    let (x, y) = data(42);
    let (xt, yt) = data(43);
    let model = train_classifier(&x, &y, &cfg).unwrap();
    let MetricReport::Classification(c) = model.evaluate(&xt, &Truth::Labels(yt)).unwrap() else {
        return Err("expected a classification report".into());
    };
    ensure(c.f1 >= 0.95, || format!("blob weighted F1 {}", c.f1))?;
    Ok(format!("20 loss traces, {fixtures} oracle fixtures, blob F1 {:.4}", c.f1))
}

fn pipeline_suite() -> Check {
    let (z, _) = standardize(&Matrix::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap()).unwrap();
    let want = [-1.2247, 0.0, 1.2247];
    ensure(z.column(0).iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-4), || format!("{:?}", z.column(0)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..300 {
        let p = rng.random_range(1..=5);
        let n = rng.random_range(3..12);
        let mut cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        if p >= 2 && case % 2 == 0 {
            let mix = rng.random_range(-0.5..0.5);
            cols[p - 1] = cols[0].iter().zip(&cols[1]).map(|(a, b)| a + mix * b).collect();
        }
        if case % 5 == 0 {
            cols[0] = vec![1.5; n];
        }
        let x = Matrix::from_columns(&cols).unwrap();
        let eps = rng.random_range(0.0..1.5);
        let got = variance_threshold(&x, eps).kept().to_vec();
        ensure(got == common::variance_oracle(&cols, eps), || format!("variance case {case}"))?;
        if cols.iter().all(|c| common::variance(c) > 1e-9) {
            let thr = rng.random_range(0.3..0.99);
            let got = correlation_prune(&x, thr).kept().to_vec();
            ensure(got == common::correlation_oracle(&cols, thr), || format!("correlation case {case}"))?;
        }
    }
    let x = Matrix::from_columns(&[vec![-1.0, 1.0]]).unwrap();
    let b = elastic_net(&x, &[-1.0, 1.0], 0.1, 0.5, 1000, 1e-12).coefficients[0];
    ensure((b - 0.904762).abs() < 1e-4, || format!("1-D elastic net {b}"))?;
    for case in 0..30 {
        let n = rng.random_range(8..40);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..6).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 2.0 * r[3] + rng.random_range(-0.1..0.1)).collect();
        let fit = elastic_net(
            &Matrix::from_rows(&rows).unwrap(),
            &y,
            rng.random_range(0.001..1.0),
            rng.random_range(0.0..=1.0),
            400,
            1e-10,
        );
        let rising = fit.objective_trace.windows(2).position(|w| w[1] > w[0] + 1e-12);
        ensure(rising.is_none(), || format!("objective rose in case {case} at sweep {rising:?}"))?;
    }
    Ok(format!("standardize, 300 stage-oracle instances, beta {b:.6}, 30 monotone traces"))
}

fn projection_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..40 {
        let n = rng.random_range(5..=100);
        let k = rng.random_range(1..5);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let got = knn_graph(&Matrix::from_rows(&rows).unwrap(), k).indices;
        ensure(got == common::brute_knn(&rows, k), || format!("kNN case {case}"))?;
    }
    let mut a = vec![0.0; 10];
    a[0] = 5.0;
    let mut b = vec![0.0; 10];
    b[1] = 5.0;
    let (x, _) = common::blobs(&[a, b], 50, 1.0, 42);
    let m = Matrix::from_rows(&x).unwrap();
    let zero = ProjectionConfig { n_epochs: 0, ..ProjectionConfig::default() };
    let init = spectral_init(&fuzzy_graph(&knn_graph(&m, zero.n_neighbors)));
    ensure(project(&m, &zero).unwrap().points == init, || "n_epochs = 0 moved the init".into())?;
    let line = trajectory_metrics(&[[0.0, 0.0], [3.0, 4.0]]);
    ensure(line.length == 5.0 && line.straightness == 1.0, || format!("{line:?}"))?;
    let back = trajectory_metrics(&[[0.0, 0.0], [2.0, 1.0], [0.0, 0.0]]);
    ensure(back.straightness == 0.0, || format!("{back:?}"))?;
    let p = project(&m, &ProjectionConfig::default()).unwrap();
    let t = common::trustworthiness(&x, &p.points, 5);
    ensure(t >= 0.8, || format!("trustworthiness {t}"))?;
    Ok(format!("40 kNN oracles, init identity, hand metrics, trustworthiness {t:.4}"))
}

struct Qualitative {
    a: Check,
    b: Check,
    c: Check,
    elapsed: Duration,
}

fn qualitative(dir: &Path) -> Qualitative {
    let start = Instant::now();
    let path = write_fixture(&dir.join("va"), &FixtureSpec::new(FixtureKind::VaRegression)).unwrap();
    let manifest = load_manifest(path).unwrap();
    let cfg = RunConfig::default();
    let mut session = Session::new(&manifest, &cfg, model_sources(&cfg).unwrap()).unwrap();

    let exp1 = exp1_performance_impact(&mut session).unwrap();
    let a = (|| {
        let mut parts = Vec::new();
        for target in ["valence", "arousal"] {
            let metric = format!("{target}.mse");
            let cell = exp1
                .delta
                .cells
                .iter()
                .find(|c| c.fx == FxKind::Distortion && c.metric == metric)
                .ok_or_else(|| format!("no distortion {metric} cell"))?;
            ensure(cell.delta > 0.0, || format!("{metric} delta {:+.4}", cell.delta))?;
            parts.push(format!("{metric} delta {:+.4}", cell.delta));
        }
        Ok(parts.join(", "))
    })();

    let exp3 = exp3_trajectories(&mut session).unwrap();
    let b = (|| {
        let summary = exp3.runs[0].set.summary();
        let dist = summary.iter().find(|s| s.group == "distortion").ok_or("no distortion group")?;
        ensure(dist.mean_length > 0.0, || format!("mean length {}", dist.mean_length))?;
        let sine = synth_signal(SignalKind::Sine { freq: 440.0 }, 1.0, 32000).unwrap();
        let clean = embed_builtin(&sine).unwrap();
        let (levels, dists): (Vec<f64>, Vec<f64>) = (1..=10)
            .map(|l| {
                let v = embed_builtin(&Condition::fx(FxKind::Distortion, l).unwrap().render(&sine).unwrap()).unwrap();
                (l as f64, clean.iter().zip(&v).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
            })
            .unzip();
        let rho = common::spearman(&levels, &dists);
        ensure(rho >= 0.9, || format!("sine rho {rho:.4}"))?;
        Ok(format!("distortion mean length {:.4} > 0, sine rho {rho:.4}", dist.mean_length))
    })();

    let exp4 = exp4_scenarios(&mut session).unwrap();
    let c = (|| {
        let mut parts = Vec::new();
        for row in &exp4.comparison {
            let best = row.best_stage_mean_length.ok_or("no single-stage baseline")?;
            ensure(row.mean_chain_length >= best, || {
                format!("{}: chain {:.4} < stage {best:.4}", row.scenario, row.mean_chain_length)
            })?;
            parts.push(format!("{} {:.3}>={best:.3}", row.scenario, row.mean_chain_length));
        }
        Ok(parts.join(", "))
    })();
    Qualitative {
        a,
        b,
        c,
        elapsed: start.elapsed(),
    }
}

fn fxprobe(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fxprobe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr).trim())
    })
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn reproducibility(dir: &Path) -> Check {
    fxprobe(&["fixture", "--kind", "energy_two_class", "--out", "fixture"], dir)?;
    let runs = [("run_a", "1"), ("run_b", "1"), ("run_c", "8")];
    for (out, jobs) in runs {
        for exp in ["exp1", "exp2", "exp3", "exp4"] {
            fxprobe(&["--jobs", jobs, exp, "--manifest", "fixture/manifest.csv", "--out", out], dir)?;
        }
    }
    let a = snapshot(&dir.join("run_a"));
    ensure(a.len() >= 10, || format!("only {} report files", a.len()))?;
    for (other, jobs) in &runs[1..] {
        let b = snapshot(&dir.join(other));
        ensure(a.keys().eq(b.keys()), || format!("{other}: different file sets"))?;
        for (k, v) in &a {
            ensure(b[k] == *v, || format!("{other} (--jobs {jobs}): {} differs", k.display()))?;
        }
    }
    Ok(format!("{} files identical across 2 runs and --jobs 1 vs 8", a.len()))
}

fn report_conventions(dir: &Path) -> Check {
    let run = dir.join("run_a");
    let table = DeltaTable::parse_csv(&std::fs::read_to_string(run.join("exp1/delta_table.csv")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut bold: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    let mut under: BTreeMap<(String, FxKind, String), usize> = BTreeMap::new();
    for c in &table.cells {
        *bold.entry((c.dataset.clone(), c.model.clone(), c.metric.clone())).or_default() += c.bold as usize;
        *under.entry((c.dataset.clone(), c.fx, c.metric.clone())).or_default() += c.underline as usize;
    }
    ensure(bold.values().all(|n| *n == 1), || format!("bold counts {bold:?}"))?;
    ensure(under.values().all(|n| *n == 1), || format!("underline counts {under:?}"))?;
    let radar = RadarData::from_json(&std::fs::read_to_string(run.join("exp2/radar.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    for p in &radar.plots {
        let max = p.normalized.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
        ensure(max == 1.0, || format!("{}/{}: plot max {max}", p.model, p.fx))?;
    }
    Ok(format!(
        "{} bold groups, {} underline groups, {} radar plots at max 1",
        bold.len(),
        under.len(),
        radar.plots.len()
    ))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut failures = 0;
    let mut report = |name: &str, result: Check| match result {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(why) => {
            failures += 1;
            println!("FAIL  {name}: {why}");
        }
    };
    report("dsp suite", dsp_suite());
    report("probe suite", probe_suite());
    report("feature-pipeline suite", pipeline_suite());
    report("projection suite", projection_suite());
    let q = qualitative(tmp.path());
    report("qualitative (a) distortion raises regression MSE", q.a);
    report("qualitative (b) distortion trajectories move, monotone in level", q.b);
    report("qualitative (c) full chain outruns best single stage", q.c);
    let t = q.elapsed;
    report(
        "qualitative runtime under 5 min",
        ensure(t < Duration::from_secs(300), || format!("{t:?}")).map(|_| format!("{:.1} s", t.as_secs_f64())),
    );
    report("reproducibility", reproducibility(tmp.path()));
    report("report conventions", report_conventions(tmp.path()));
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
