//! Writing experiment outputs and rendering static SVG plots from them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::runs::{Exp1Output, Exp3Output, Exp4Output, TrajectoryRun};
use super::tables::{metrics_csv, DeltaTable, RadarData};
use crate::error::{Error, Result};

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_exp1(out: &Exp1Output, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write(dir, "metrics.csv", &metrics_csv(&out.metrics))?,
        write(dir, "delta_table.csv", &out.delta.to_csv())?,
        write(dir, "delta_table.md", &out.delta.to_markdown())?,
    ])
}

pub fn write_exp2(radar: &RadarData, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write(dir, "radar.json", &radar.to_json())?,
        write(dir, "radar.csv", &radar.to_csv())?,
    ])
}

fn samples_csv<K: std::fmt::Display>(samples: &[(K, Vec<String>)]) -> String {
    let mut s = String::from("group,track_id\n");
    for (g, tracks) in samples {
        for t in tracks {
            let _ = writeln!(s, "{g},{t}");
        }
    }
    s
}

fn write_runs(runs: &[TrajectoryRun], dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    for r in runs {
        let m = &r.model;
        files.push(write(dir, &format!("points_{m}.csv"), &r.set.points_table())?);
        files.push(write(dir, &format!("metrics_{m}.csv"), &r.set.metrics_table())?);
        files.push(write(dir, &format!("summary_{m}.csv"), &r.set.summary_table())?);
        files.push(write(dir, &format!("provenance_{m}.txt"), &r.provenance)?);
        if let Some(b) = &r.baseline {
            files.push(write(dir, &format!("baseline_points_{m}.csv"), &b.points_table())?);
            files.push(write(dir, &format!("baseline_summary_{m}.csv"), &b.summary_table())?);
        }
        let mut w = r.warnings.join("\n");
        if !w.is_empty() {
            w.push('\n');
        }
        files.push(write(dir, &format!("warnings_{m}.txt"), &w)?);
    }
    Ok(())
}

pub fn write_exp3(out: &Exp3Output, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![write(dir, "samples.csv", &samples_csv(&out.samples))?];
    write_runs(&out.runs, dir, &mut files)?;
    Ok(files)
}

pub fn write_exp4(out: &Exp4Output, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![write(dir, "samples.csv", &samples_csv(&out.samples))?];
    write_runs(&out.runs, dir, &mut files)?;
    let mut c = String::from(
        "model,scenario,n_tracks,n_stages,mean_chain_length,median_straightness,best_stage,best_stage_mean_length\n",
    );
    for r in &out.comparison {
        let _ = writeln!(
            c,
            "{},{},{},{},{:.9},{:.9},{},{}",
            r.model,
            r.scenario,
            r.n_tracks,
            r.n_stages,
            r.mean_chain_length,
            r.median_straightness,
            r.best_stage.map_or(String::new(), |v| v.to_string()),
            r.best_stage_mean_length.map_or(String::new(), |v| format!("{v:.9}")),
        );
    }
    files.push(write(dir, "comparison.csv", &c)?);
    Ok(files)
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

fn svg_open(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bars of Δ per effect, one panel per (dataset, model, metric).
/// Bold cells get a black outline; underlined ones a dashed one.
pub fn delta_svg(table: &DeltaTable) -> String {
    let mut panels: Vec<(String, Vec<&super::tables::DeltaCell>)> = Vec::new();
    for c in &table.cells {
        let key = format!("{} / {} / {}", c.dataset, c.model, c.metric);
        match panels.iter_mut().find(|p| p.0 == key) {
            Some(p) => p.1.push(c),
            None => panels.push((key, vec![c])),
        }
    }
    let (pw, ph) = (360.0, 150.0);
    let cols = 3usize;
    let rows = panels.len().div_ceil(cols).max(1);
    let mut s = svg_open(pw * cols as f64, ph * rows as f64 + 30.0, "Level 10 minus level 1");
    for (i, (title, cells)) in panels.iter().enumerate() {
        let ox = (i % cols) as f64 * pw;
        let oy = 30.0 + (i / cols) as f64 * ph;
        let max = cells.iter().map(|c| c.delta.abs()).fold(0.0, f64::max).max(1e-12);
        let mid = ox + pw / 2.0 + 20.0;
        let half = pw / 2.0 - 40.0;
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", ox + pw / 2.0, oy + 12.0, escape(title));
        let _ = writeln!(s, "<line x1=\"{mid}\" y1=\"{}\" x2=\"{mid}\" y2=\"{}\" stroke=\"#999\"/>", oy + 18.0, oy + ph - 10.0);
        for (j, c) in cells.iter().enumerate() {
            let y = oy + 20.0 + j as f64 * 19.0;
            let len = c.delta.abs() / max * half;
            let x = if c.delta < 0.0 { mid - len } else { mid };
            let stroke = match (c.bold, c.underline) {
                (true, _) => " stroke=\"black\" stroke-width=\"2\"",
                (false, true) => " stroke=\"black\" stroke-dasharray=\"3,2\"",
                _ => "",
            };
            let _ = writeln!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{len:.2}\" height=\"14\" fill=\"{}\"{stroke}/>",
                PALETTE[j % PALETTE.len()]
            );
            let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\">{}</text>", ox + 6.0, y + 11.0, c.fx);
            let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{:+.4}</text>", ox + pw - 4.0, y + 11.0, c.delta);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// One radar polygon per level, over the plot's labels.
pub fn radar_svg(plot: &super::tables::RadarPlot) -> String {
    let (w, h) = (420.0, 440.0);
    let (cx, cy, r) = (w / 2.0, 240.0, 150.0);
    let mut s = svg_open(w, h, &format!("{} / {} / {}", plot.dataset, plot.model, plot.fx));
    let n = plot.labels.len().max(1);
    let angle = |k: usize| std::f64::consts::TAU * k as f64 / n as f64 - std::f64::consts::FRAC_PI_2;
    for (k, label) in plot.labels.iter().enumerate() {
        let (x, y) = (cx + r * angle(k).cos(), cy + r * angle(k).sin());
        let _ = writeln!(s, "<line x1=\"{cx}\" y1=\"{cy}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"#ccc\"/>");
        let (lx, ly) = (cx + (r + 18.0) * angle(k).cos(), cy + (r + 18.0) * angle(k).sin());
        let _ = writeln!(s, "<text x=\"{lx:.2}\" y=\"{ly:.2}\" text-anchor=\"middle\">{}</text>", escape(label));
    }
    let last = plot.levels.len().saturating_sub(1).max(1) as f64;
    for (li, level) in plot.levels.iter().enumerate() {
        let pts: Vec<String> = plot.normalized[li]
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{:.2},{:.2}", cx + r * v * angle(k).cos(), cy + r * v * angle(k).sin()))
            .collect();
        let shade = (li as f64 / last * 200.0) as u8;
        let colour = if *level == 0 { "black".to_string() } else { format!("rgb({shade},60,{})", 200 - shade) };
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.2\"/>", pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// Polylines from a points table, a new path starting at every `clean` row.
pub fn trajectories_svg(points_csv: &str, title: &str) -> Result<String> {
    let mut paths: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (i, line) in points_csv.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected model_id,track_id,condition,x,y".into(),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad coordinate `{s}`"),
            })
        };
        let p = (parse(f[3])?, parse(f[4])?);
        let group = f[2].split(':').take(2).collect::<Vec<_>>().join(":");
        if f[2] == "clean" || paths.is_empty() {
            paths.push((String::new(), vec![p]));
        } else {
            let last = paths.last_mut().expect("non-empty");
            if last.0.is_empty() {
                last.0 = group;
            }
            last.1.push(p);
        }
    }
    let all: Vec<(f64, f64)> = paths.iter().flat_map(|p| p.1.iter().copied()).collect();
    let (w, h, pad) = (560.0, 560.0, 40.0);
    let lo_x = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi_x = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo_y = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi_y = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let sx = |x: f64| pad + (x - lo_x) / (hi_x - lo_x).max(1e-12) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - lo_y) / (hi_y - lo_y).max(1e-12) * (h - 2.0 * pad);
    let mut groups: Vec<String> = paths.iter().map(|p| p.0.clone()).collect();
    groups.sort();
    groups.dedup();
    let mut s = svg_open(w, h, title);
    for (g, pts) in &paths {
        let colour = PALETTE[groups.iter().position(|x| x == g).unwrap_or(0) % PALETTE.len()];
        let d: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-opacity=\"0.7\"/>", d.join(" "));
        if let Some(first) = pts.first() {
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"black\"/>", sx(first.0), sy(first.1));
        }
    }
    for (i, g) in groups.iter().enumerate() {
        let y = 34.0 + i as f64 * 14.0;
        let _ = writeln!(s, "<rect x=\"8\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>", y - 9.0, PALETTE[i % PALETTE.len()]);
        let _ = writeln!(s, "<text x=\"22\" y=\"{y}\">{}</text>", escape(g));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn list_with_prefix(dir: &Path, prefix: &str, suffix: &str) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(prefix) && n.ends_with(suffix))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Renders plots for whatever experiment outputs exist under `dir`
/// (`exp1/` .. `exp4/`) and writes an `index.md` listing them.
pub fn render_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let exp1 = dir.join("exp1").join("delta_table.csv");
    if exp1.exists() {
        let table = DeltaTable::parse_csv(&read(&exp1)?)?;
        files.push(write(&dir.join("exp1"), "delta_table.svg", &delta_svg(&table))?);
    }
    let exp2 = dir.join("exp2").join("radar.json");
    if exp2.exists() {
        let radar = RadarData::from_json(&read(&exp2)?)?;
        for p in &radar.plots {
            files.push(write(&dir.join("exp2"), &format!("radar_{}_{}.svg", p.model, p.fx), &radar_svg(p))?);
        }
    }
    for exp in ["exp3", "exp4"] {
        let sub = dir.join(exp);
        for path in list_with_prefix(&sub, "points_", ".csv")? {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("points").to_string();
            let model = stem.trim_start_matches("points_");
            let svg = trajectories_svg(&read(&path)?, &format!("{exp} trajectories / {model}"))?;
            files.push(write(&sub, &format!("trajectories_{model}.svg"), &svg)?);
        }
    }
    if files.is_empty() {
        return Err(Error::InvalidData(format!("no experiment outputs under {}", dir.display())));
    }
    let mut index = String::from("# fxprobe report\n\n");
    for f in &files {
        let rel = f.strip_prefix(dir).unwrap_or(f);
        let _ = writeln!(index, "- [{}]({})", rel.display(), rel.display());
    }
    files.push(write(dir, "index.md", &index)?);
    Ok(files)
}
