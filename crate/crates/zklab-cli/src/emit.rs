//! Result files: CSV rows, the JSON report, a summary and an SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const CSV_COLUMNS: [&str; 13] = ["experiment", "d", "p", "q", "r", "s", "k_power", "band", "j", "k", "seed", "value", "kind"];

/// One row of the shared CSV schema; unset fields are written empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Record {
    pub experiment: String,
    pub d: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub k_power: Option<u32>,
    pub band: Option<i32>,
    pub j: Option<i32>,
    pub k: Option<i32>,
    pub seed: Option<u64>,
    pub value: f64,
    pub kind: String,
}

impl Record {
    pub fn new(experiment: &str, kind: &str, value: f64) -> Self {
        Record {
            experiment: experiment.to_string(),
            kind: kind.to_string(),
            value,
            ..Default::default()
        }
    }
}

/// Points and an optional fitted line for a log-log plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)`
    pub line: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut f = Formats { csv: false, json: false, svg: false };
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => {
                    return Err(CliError::Config {
                        path: "formats".into(),
                        message: format!("unknown format `{other}` (expected csv, json, svg)"),
                    })
                }
            }
        }
        Ok(f)
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io(path, e))?;
    w.write_record(CSV_COLUMNS).map_err(|e| io(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

/// Minimal SVG scatter with an optional straight line, both in the given coordinates.
pub fn render_svg(plot: &Plot) -> String {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let mut xs: Vec<f64> = plot.points.iter().map(|p| p.0).filter(|v| v.is_finite()).collect();
    let mut ys: Vec<f64> = plot.points.iter().map(|p| p.1).filter(|v| v.is_finite()).collect();
    if let Some((a, b)) = plot.line {
        let extra: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        ys.extend(extra);
    }
    if xs.is_empty() {
        xs.push(0.0);
        ys.push(0.0);
    }
    let range = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} L{m} {} L{} {}" fill="none" stroke="black"/>"#,
        h - m,
        w - m,
        h - m
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(&plot.title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, h - 15.0, escape(&plot.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&plot.y_label)
    );
    for (v, pos) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(s, r#"<text x="{pos:.1}" y="{}" text-anchor="middle" font-size="11">{v:.3}</text>"#, h - m + 16.0);
    }
    for (v, pos) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{pos:.1}" text-anchor="end" font-size="11">{v:.3}</text>"#, m - 4.0);
    }
    if let Some((a, b)) = plot.line {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="steelblue" stroke-width="2"/>"#,
            px(x0),
            py(a * x0 + b),
            px(x1),
            py(a * x1 + b)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="steelblue">slope {a:.4}</text>"#, m + 10.0, m + 15.0);
    }
    for &(x, y) in plot.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="crimson"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
