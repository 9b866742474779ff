//! Long-format metric rows, the level-10-minus-level-1 delta table and
//! radar plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fx::FxKind;

/// One metric value under one condition. `level` 0 is the clean condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub dataset: String,
    pub model: String,
    pub fx: Option<FxKind>,
    pub level: u8,
    pub metric: String,
    pub value: f64,
}

pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("dataset,model,fx,level,metric,value\n");
    for r in rows {
        let fx = r.fx.map_or("clean", FxKind::as_str);
        let _ = writeln!(out, "{},{},{fx},{},{},{}", r.dataset, r.model, r.level, r.metric, r.value);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCell {
    pub dataset: String,
    pub model: String,
    pub fx: FxKind,
    pub metric: String,
    pub delta: f64,
    /// Largest |Δ| among effects for this (dataset, model, metric).
    pub bold: bool,
    /// Largest |Δ| among models for this (dataset, fx, metric).
    pub underline: bool,
}

/// Cells sorted by (dataset, model, fx, metric).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeltaTable {
    pub cells: Vec<DeltaCell>,
}

fn fx_rank(fx: FxKind) -> usize {
    FxKind::ALL.iter().position(|k| *k == fx).expect("listed")
}

impl DeltaTable {
    /// Δ = metric(level 10) − metric(level 1) for every (dataset, model, fx, metric)
    /// that has both levels.
    pub fn from_metrics(rows: &[MetricRow]) -> Result<Self> {
        let mut at: BTreeMap<(String, String, usize, String), [Option<f64>; 2]> = BTreeMap::new();
        for r in rows {
            let Some(fx) = r.fx else { continue };
            let slot = match r.level {
                1 => 0,
                10 => 1,
                _ => continue,
            };
            at.entry((r.dataset.clone(), r.model.clone(), fx_rank(fx), r.metric.clone()))
                .or_default()[slot] = Some(r.value);
        }
        let mut cells = Vec::new();
        for ((dataset, model, fx, metric), v) in at {
            if let [Some(l1), Some(l10)] = v {
                cells.push(DeltaCell {
                    dataset,
                    model,
                    fx: FxKind::ALL[fx],
                    metric,
                    delta: l10 - l1,
                    bold: false,
                    underline: false,
                });
            }
        }
        if cells.is_empty() {
            return Err(Error::InvalidData("delta table needs metrics at levels 1 and 10".into()));
        }
        let mut t = Self { cells };
        t.mark();
        Ok(t)
    }

    fn sort(&mut self) {
        self.cells.sort_by(|a, b| {
            (&a.dataset, &a.model, fx_rank(a.fx), &a.metric).cmp(&(&b.dataset, &b.model, fx_rank(b.fx), &b.metric))
        });
    }

    /// Recomputes both marker kinds. Ties go to the earlier effect in
    /// canonical order, and to the lexicographically first model.
    pub fn mark(&mut self) {
        self.sort();
        let mut bold: BTreeMap<(String, String, String), usize> = BTreeMap::new();
        let mut under: BTreeMap<(String, usize, String), usize> = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            let better = |j: &usize| c.delta.abs() > self.cells[*j].delta.abs();
            let k = (c.dataset.clone(), c.model.clone(), c.metric.clone());
            if bold.get(&k).is_none_or(better) {
                bold.insert(k, i);
            }
            let k = (c.dataset.clone(), fx_rank(c.fx), c.metric.clone());
            if under.get(&k).is_none_or(better) {
                under.insert(k, i);
            }
        }
        for c in &mut self.cells {
            c.bold = false;
            c.underline = false;
        }
        for i in bold.into_values() {
            self.cells[i].bold = true;
        }
        for i in under.into_values() {
            self.cells[i].underline = true;
        }
    }

    /// Union of tables (for example several datasets), re-marked.
    pub fn merge(tables: &[DeltaTable]) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut cells = Vec::new();
        for t in tables {
            for c in &t.cells {
                let key = (c.dataset.clone(), c.model.clone(), c.fx, c.metric.clone());
                if seen.insert(key, ()).is_some() {
                    return Err(Error::InvalidData(format!(
                        "duplicate delta cell {}/{}/{}/{}",
                        c.dataset, c.model, c.fx, c.metric
                    )));
                }
                cells.push(c.clone());
            }
        }
        let mut t = Self { cells };
        t.mark();
        Ok(t)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,model,fx,metric,delta,bold,underline\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.dataset,
                c.model,
                c.fx,
                c.metric,
                c.delta,
                u8::from(c.bold),
                u8::from(c.underline)
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "dataset,model,fx,metric,delta,bold,underline")) => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "bad delta table header".into(),
                })
            }
        }
        let mut cells = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(err("expected 7 fields"));
            }
            let flag = |s: &str| match s {
                "1" => Ok(true),
                "0" => Ok(false),
                _ => Err(err("marker must be 0 or 1")),
            };
            cells.push(DeltaCell {
                dataset: f[0].to_string(),
                model: f[1].to_string(),
                fx: f[2].parse().map_err(|_| err("unknown effect"))?,
                metric: f[3].to_string(),
                delta: f[4].parse().map_err(|_| err("bad delta"))?,
                bold: flag(f[5])?,
                underline: flag(f[6])?,
            });
        }
        Ok(Self { cells })
    }

    /// Pivot per (dataset, model): one row per effect, one column per metric.
    /// Bold cells are wrapped in `**`, underlined ones in `<u>`.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut groups: BTreeMap<(&str, &str), Vec<&DeltaCell>> = BTreeMap::new();
        for c in &self.cells {
            groups.entry((&c.dataset, &c.model)).or_default().push(c);
        }
        for ((dataset, model), cells) in groups {
            let mut metrics: Vec<&str> = cells.iter().map(|c| c.metric.as_str()).collect();
            metrics.sort();
            metrics.dedup();
            let _ = writeln!(out, "### {dataset} / {model}\n");
            let _ = writeln!(out, "| fx | {} |", metrics.join(" | "));
            let _ = writeln!(out, "|---|{}", "---|".repeat(metrics.len()));
            let mut fxs: Vec<FxKind> = cells.iter().map(|c| c.fx).collect();
            fxs.sort_by_key(|f| fx_rank(*f));
            fxs.dedup();
            for fx in fxs {
                let row: Vec<String> = metrics
                    .iter()
                    .map(|m| {
                        cells
                            .iter()
                            .find(|c| c.fx == fx && c.metric == *m)
                            .map_or(String::new(), |c| {
                                let mut s = format!("{:+.3}", c.delta);
                                if c.underline {
                                    s = format!("<u>{s}</u>");
                                }
                                if c.bold {
                                    s = format!("**{s}**");
                                }
                                s
                            })
                    })
                    .collect();
                let _ = writeln!(out, "| {fx} | {} |", row.join(" | "));
            }
            out.push('\n');
        }
        out
    }
}

/// Predicted-label counts per level for one (dataset, model, fx) plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarPlot {
    pub dataset: String,
    pub model: String,
    pub fx: FxKind,
    pub labels: Vec<String>,
    /// 0 is the clean condition.
    pub levels: Vec<u8>,
    /// `counts[level_index][label_index]`.
    pub counts: Vec<Vec<usize>>,
    /// Counts divided by the largest count in the plot.
    pub normalized: Vec<Vec<f64>>,
}

impl RadarPlot {
    pub fn new(dataset: &str, model: &str, fx: FxKind, labels: Vec<String>, levels: Vec<u8>, counts: Vec<Vec<usize>>) -> Self {
        let max = counts.iter().flatten().copied().max().unwrap_or(0);
        let normalized = counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| if max == 0 { 0.0 } else { c as f64 / max as f64 })
                    .collect()
            })
            .collect();
        Self {
            dataset: dataset.to_string(),
            model: model.to_string(),
            fx,
            labels,
            levels,
            counts,
            normalized,
        }
    }

    pub fn max_normalized(&self) -> f64 {
        self.normalized.iter().flatten().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadarData {
    pub plots: Vec<RadarPlot>,
}

impl RadarData {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,model,fx,level,label,count,normalized\n");
        for p in &self.plots {
            for (li, level) in p.levels.iter().enumerate() {
                for (ki, label) in p.labels.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{level},{label},{},{}",
                        p.dataset, p.model, p.fx, p.counts[li][ki], p.normalized[li][ki]
                    );
                }
            }
        }
        out
    }
}
