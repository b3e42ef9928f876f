//! Best/average tables over rounds, trace CSV parsing and a small SVG chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use slo_core::RunResult;

use crate::runner::{fmt_float, HarnessError, RunOutcome, TRACE_HEADER};

/// Per-method statistics across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub best_grad_norm: f64,
    pub avg_grad_norm: f64,
    pub best_f_gap: f64,
    pub avg_f_gap: f64,
    /// Rounds that produced a trace.
    pub rounds_ok: usize,
    /// `round: message` for each failed run.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Reference value the gaps are measured against.
    pub f_star: f64,
    pub rows: Vec<MethodRow>,
}

/// Minimum gradient norm and minimum objective seen in one run.
#[derive(Debug, Clone, Copy)]
struct RoundMinima {
    grad_norm: f64,
    f_value: f64,
}

fn build_summary(
    per_method: Vec<(String, Vec<RoundMinima>, Vec<String>)>,
    f_star: Option<f64>,
) -> Summary {
    let f_star = f_star.unwrap_or_else(|| {
        per_method
            .iter()
            .flat_map(|(_, m, _)| m.iter().map(|r| r.f_value))
            .fold(f64::INFINITY, f64::min)
    });
    let rows = per_method
        .into_iter()
        .map(|(method, minima, failures)| {
            let n = minima.len();
            let grads = minima.iter().map(|r| r.grad_norm);
            let gaps = minima.iter().map(|r| r.f_value - f_star);
            let (best_g, avg_g) = best_and_mean(grads);
            let (best_f, avg_f) = best_and_mean(gaps);
            MethodRow {
                method,
                best_grad_norm: best_g,
                avg_grad_norm: avg_g,
                best_f_gap: best_f,
                avg_f_gap: avg_f,
                rounds_ok: n,
                failures,
            }
        })
        .collect();
    Summary { f_star, rows }
}

fn best_and_mean(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut best, mut sum, mut n) = (f64::INFINITY, 0.0, 0usize);
    for v in values {
        best = best.min(v);
        sum += v;
        n += 1;
    }
    if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (best, sum / n as f64)
    }
}

/// Summary of in-memory runs, methods in the order they first appear.
pub fn summarize_runs(runs: &[RunOutcome], rounds: usize, known_optimum: Option<f64>) -> Summary {
    let mut order = Vec::new();
    for run in runs {
        if !order.contains(&run.method) {
            order.push(run.method);
        }
    }
    let per_method = order
        .into_iter()
        .map(|method| {
            let mut minima = Vec::with_capacity(rounds);
            let mut failures = Vec::new();
            for run in runs.iter().filter(|r| r.method == method) {
                match &run.result {
                    Ok(res) => minima.push(run_minima(res)),
                    Err(e) => failures.push(format!("round {}: {e}", run.round)),
                }
            }
            (method.name().to_string(), minima, failures)
        })
        .collect();
    build_summary(per_method, known_optimum)
}

fn run_minima(res: &RunResult) -> RoundMinima {
    RoundMinima {
        grad_norm: res.trace.min_grad_norm().unwrap_or(res.final_grad_norm),
        f_value: res.trace.min_f_value().unwrap_or(res.final_value),
    }
}

/// Method name encoded in a trace file name (`<method>_r<round>.csv`).
fn method_from_path(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match stem.rsplit_once("_r") {
        Some((m, r)) if !m.is_empty() && r.chars().all(|c| c.is_ascii_digit()) => m.to_string(),
        _ => stem,
    }
}

/// Reads trace CSVs and tabulates them. Gaps use `f_star` when given,
/// otherwise the lowest objective found in any file.
pub fn summarize(paths: &[PathBuf], f_star: Option<f64>) -> Result<Summary, HarnessError> {
    let mut per_method: Vec<(String, BTreeMap<u64, RoundMinima>)> = Vec::new();
    for path in paths {
        let rounds = read_trace_minima(path)?;
        let method = method_from_path(path);
        let slot = match per_method.iter().position(|(m, _)| *m == method) {
            Some(i) => &mut per_method[i].1,
            None => {
                per_method.push((method, BTreeMap::new()));
                &mut per_method.last_mut().expect("just pushed").1
            }
        };
        for (round, m) in rounds {
            let entry = slot.entry(round).or_insert(m);
            entry.grad_norm = entry.grad_norm.min(m.grad_norm);
            entry.f_value = entry.f_value.min(m.f_value);
        }
    }
    let per_method = per_method
        .into_iter()
        .map(|(m, rounds)| (m, rounds.into_values().collect(), Vec::new()))
        .collect();
    Ok(build_summary(per_method, f_star))
}

fn read_trace_minima(path: &Path) -> Result<BTreeMap<u64, RoundMinima>, HarnessError> {
    let schema = |msg: String| HarnessError::Schema {
        path: path.to_path_buf(),
        msg,
    };
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = reader.headers().map_err(|e| schema(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != TRACE_HEADER {
        return Err(schema(format!("header must be `{TRACE_HEADER}`")));
    }
    let mut out: BTreeMap<u64, RoundMinima> = BTreeMap::new();
    let mut last_evals: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(format!("line {line}: {e}")))?;
        let int = |j: usize| {
            rec[j]
                .parse::<u64>()
                .map_err(|_| schema(format!("line {line}: column {j} is not an integer")))
        };
        let float = |j: usize| {
            rec[j]
                .parse::<f64>()
                .map_err(|_| schema(format!("line {line}: column {j} is not a number")))
        };
        let round = int(0)?;
        int(1)?;
        int(2)?;
        let evals = int(3)?;
        float(4)?;
        let (f, g) = (float(5)?, float(6)?);
        float(7)?;
        let prev = last_evals.insert(round, evals);
        if prev.is_some_and(|p| p > evals) {
            return Err(schema(format!("line {line}: grad_evals decreased")));
        }
        let entry = out.entry(round).or_insert(RoundMinima {
            grad_norm: g,
            f_value: f,
        });
        entry.grad_norm = entry.grad_norm.min(g);
        entry.f_value = entry.f_value.min(f);
    }
    if out.is_empty() {
        return Err(schema("no records".into()));
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str =
    "method,best_grad_norm,avg_grad_norm,best_f_gap,avg_f_gap,rounds_ok,failures,errors";

pub fn summary_csv(summary: &Summary) -> String {
    let mut s = String::new();
    writeln!(s, "{SUMMARY_HEADER}").unwrap();
    for r in &summary.rows {
        let errors = r.failures.join("; ").replace(['"', '\n'], "'");
        writeln!(
            s,
            "{},{},{},{},{},{},{},\"{}\"",
            r.method,
            fmt_float(r.best_grad_norm),
            fmt_float(r.avg_grad_norm),
            fmt_float(r.best_f_gap),
            fmt_float(r.avg_f_gap),
            r.rounds_ok,
            r.failures.len(),
            errors
        )
        .unwrap();
    }
    s
}

/// Aligned plain-text table.
pub fn summary_table(summary: &Summary) -> String {
    let head = [
        "method",
        "best |grad|",
        "avg |grad|",
        "best f-gap",
        "avg f-gap",
        "ok",
        "failed",
    ];
    let cells: Vec<[String; 7]> = summary
        .rows
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                format!("{:.3e}", r.best_grad_norm),
                format!("{:.3e}", r.avg_grad_norm),
                format!("{:.3e}", r.best_f_gap),
                format!("{:.3e}", r.avg_f_gap),
                r.rounds_ok.to_string(),
                r.failures.len().to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|j| {
            cells
                .iter()
                .map(|c| c[j].len())
                .chain([head[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    let line = |s: &mut String, row: &[&str]| {
        let parts: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| {
                if j == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        writeln!(s, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&mut s, &head);
    for c in &cells {
        line(&mut s, &c.iter().map(String::as_str).collect::<Vec<_>>());
    }
    writeln!(s, "f* = {}", fmt_float(summary.f_star)).unwrap();
    for r in &summary.rows {
        for f in &r.failures {
            writeln!(s, "{}: {f}", r.method).unwrap();
        }
    }
    s
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), HarnessError> {
    let csv_path = dir.join("summary.csv");
    fs::write(&csv_path, summary_csv(summary)).map_err(|e| HarnessError::io(&csv_path, e))?;
    let txt_path = dir.join("summary.txt");
    fs::write(&txt_path, summary_table(summary)).map_err(|e| HarnessError::io(&txt_path, e))
}

/// Log-scale chart of f and ‖∇f‖ against cumulative gradient evaluations.
pub fn svg_chart(title: &str, result: &RunResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 40.0;
    let recs = &result.trace.records;
    let xmax = recs.last().map_or(1, |r| r.cum_grad_evals).max(1) as f64;
    let logs = |get: fn(&slo_core::IterationRecord) -> f64| -> Vec<(f64, f64)> {
        recs.iter()
            .filter(|r| get(r) > 0.0 && get(r).is_finite())
            .map(|r| (r.cum_grad_evals as f64, get(r).log10()))
            .collect()
    };
    let series = [
        ("f", "#1f77b4", logs(|r| r.f_value)),
        ("grad_norm", "#d62728", logs(|r| r.grad_norm)),
    ];
    let ys = series.iter().flat_map(|(_, _, p)| p.iter().map(|q| q.1));
    let (ylo, yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    let (ylo, yhi) = if ylo.is_finite() {
        (ylo.floor(), yhi.ceil().max(ylo.floor() + 1.0))
    } else {
        (0.0, 1.0)
    };
    let px = |x: f64| PAD + (W - 2.0 * PAD) * x / xmax;
    let py = |y: f64| H - PAD - (H - 2.0 * PAD) * (y - ylo) / (yhi - ylo);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{PAD}" y="20">{}</text>"#, escape(title)).unwrap();
    writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">grad evals {xmax}</text>"#,
        W - PAD,
        H - 10.0
    )
    .unwrap();
    writeln!(s, r#"<text x="4" y="{}">1e{yhi}</text>"#, PAD + 4.0).unwrap();
    writeln!(s, r#"<text x="4" y="{}">1e{ylo}</text>"#, H - PAD).unwrap();
    for (i, (name, color, pts)) in series.iter().enumerate() {
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if !path.is_empty() {
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                path.join(" ")
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="20" fill="{color}">{name}</text>"#,
            W - PAD - 140.0 + 70.0 * i as f64
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
