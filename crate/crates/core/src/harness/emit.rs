//! CSV, JSON and SVG output of experiment results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{Aggregate, ExperimentConfig, ExperimentResult};

pub const CSV_HEADER: &str = "algorithm,eps,num_subpar,replication,t,cum_regret";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::arg(format!("unknown output format {other:?}; expected csv, json or svg"))),
        }
    }
}

fn eps_column(result: &ExperimentResult) -> String {
    result
        .config
        .policy
        .effective_eps()
        .map(|e| e.to_string())
        .unwrap_or_default()
}

/// One row per (experiment, replication, checkpoint).
pub fn to_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for result in results {
        let eps = eps_column(result);
        for rep in &result.replications {
            for (t, value) in result.checkpoints.iter().zip(&rep.values) {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    result.algorithm(),
                    eps,
                    result.num_subpar,
                    rep.index,
                    t,
                    value
                )
                .unwrap();
            }
        }
    }
    out
}

#[derive(Serialize)]
struct JsonCheckpoint {
    t: u64,
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct JsonExperiment<'a> {
    config: &'a ExperimentConfig,
    label: String,
    num_players: usize,
    num_arms: usize,
    num_subpar: usize,
    final_regret: Vec<f64>,
    checkpoints: Vec<JsonCheckpoint>,
}

/// Config echo plus per-checkpoint mean and standard error.
pub fn to_json(results: &[ExperimentResult]) -> String {
    let experiments: Vec<JsonExperiment> = results
        .iter()
        .map(|r| JsonExperiment {
            config: &r.config,
            label: r.config.policy.label(),
            num_players: r.num_players,
            num_arms: r.num_arms,
            num_subpar: r.num_subpar,
            final_regret: r.replications.iter().map(|rep| rep.final_regret()).collect(),
            checkpoints: r
                .checkpoints
                .iter()
                .zip(r.aggregate.mean.iter().zip(&r.aggregate.stderr))
                .map(|(&t, (&mean, &stderr))| JsonCheckpoint { t, mean, stderr })
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "experiments": experiments })).expect("results serialize") + "\n"
}

/// A mean curve with its standard-error band.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub t: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Series {
    pub fn from_result(result: &ExperimentResult) -> Self {
        let mut label = result.config.policy.label();
        if result.num_players > 0 {
            write!(label, " M={} |I|={}", result.num_players, result.num_subpar).unwrap();
        }
        Series {
            label,
            t: result.checkpoints.clone(),
            mean: result.aggregate.mean.clone(),
            stderr: result.aggregate.stderr.clone(),
        }
    }
}

/// Rebuilds mean/stderr series from a results CSV.
pub fn read_csv_series(text: &str) -> Result<Vec<Series>> {
    let bad = |line: usize, msg: String| Error::Format {
        path: "<csv>".into(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header {CSV_HEADER:?}"))),
    }
    // (algorithm, eps, num_subpar) -> t -> replication values
    let mut groups: BTreeMap<(String, String, String), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(idx + 1, format!("expected 6 fields, found {}", fields.len())));
        }
        let t: u64 = fields[4].parse().map_err(|e| bad(idx + 1, format!("bad t: {e}")))?;
        let value: f64 = fields[5].parse().map_err(|e| bad(idx + 1, format!("bad cum_regret: {e}")))?;
        fields[3]
            .parse::<usize>()
            .map_err(|e| bad(idx + 1, format!("bad replication: {e}")))?;
        groups
            .entry((fields[0].to_string(), fields[1].to_string(), fields[2].to_string()))
            .or_default()
            .entry(t)
            .or_default()
            .push(value);
    }
    Ok(groups
        .into_iter()
        .map(|((algo, eps, subpar), points)| {
            let label = if eps.is_empty() {
                format!("{algo} |I|={subpar}")
            } else {
                format!("{algo}({eps}) |I|={subpar}")
            };
            let mut series = Series {
                label,
                t: Vec::with_capacity(points.len()),
                mean: Vec::with_capacity(points.len()),
                stderr: Vec::with_capacity(points.len()),
            };
            for (t, values) in points {
                let agg = Aggregate::from_series(values.iter().map(std::slice::from_ref));
                series.t.push(t);
                series.mean.push(agg.mean[0]);
                series.stderr.push(agg.stderr[0]);
            }
            series
        })
        .collect())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of mean regret curves with shaded standard-error bands.
pub fn render_svg(series: &[Series]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 60.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;

    let x_max = series
        .iter()
        .flat_map(|s| s.t.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let y_max = series
        .iter()
        .flat_map(|s| s.mean.iter().zip(&s.stderr).map(|(m, e)| m + e))
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let px = |t: f64| LEFT + plot_w * t / x_max;
    let py = |v: f64| TOP + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#).unwrap();
    // Axes and ticks.
    writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    )
    .unwrap();
    writeln!(svg, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, TOP + plot_h).unwrap();
    for j in 0..=5 {
        let frac = j as f64 / 5.0;
        let (x, y) = (px(frac * x_max), py(frac * y_max));
        writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#,
            TOP + plot_h + 18.0,
            frac * x_max
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.0}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            frac * y_max
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">rounds</text>"#,
        LEFT + plot_w / 2.0,
        H - 15.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">cumulative collective regret</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let upper = s.t.iter().zip(s.mean.iter().zip(&s.stderr)).map(|(&t, (m, e))| (px(t as f64), py(m + e)));
        let lower = s.t.iter().zip(s.mean.iter().zip(&s.stderr)).rev().map(|(&t, (m, e))| (px(t as f64), py((m - e).max(0.0))));
        let band: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        )
        .unwrap();
        let line: Vec<String> = s
            .t
            .iter()
            .zip(&s.mean)
            .map(|(&t, &m)| format!("{:.2},{:.2}", px(t as f64), py(m)))
            .collect();
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></polyline>"#,
            line.join(" "),
            escape(&s.label)
        )
        .unwrap();
        let ly = TOP + 16.0 + 16.0 * idx as f64;
        writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="12" height="3" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            LEFT + 12.0,
            ly - 4.0,
            LEFT + 30.0,
            ly,
            escape(&s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `results` to `path` in `format`.
pub fn emit_results(results: &[ExperimentResult], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Csv => to_csv(results),
        OutputFormat::Json => to_json(results),
        OutputFormat::Svg => render_svg(&results.iter().map(Series::from_result).collect::<Vec<_>>()),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
