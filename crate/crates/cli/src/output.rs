//! CSV tables, the JSON run manifest and SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA: &str = "vanhove-lab/1";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub description: &'static str,
}

pub const fn col(name: &'static str, description: &'static str) -> Column {
    Column { name, description }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.iter().map(|c| c.name).collect::<Vec<_>>().join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub seeds: Vec<u64>,
    pub columns: &'a [Column],
    pub rows: usize,
    pub converged: bool,
    pub max_error_estimate: f64,
    pub fits: &'a serde_json::Map<String, serde_json::Value>,
    pub summary: &'a serde_json::Value,
    pub artifacts: Vec<String>,
    /// Absent in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn write(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Markers only; otherwise a polyline.
    pub markers: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static plot with a log-scaled x axis and a linear y axis.
pub fn svg_plot(title: &str, x_label: &str, series: &[Series], timestamp: Option<u64>) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0 > 0.0 && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    if y1 - y0 < 1e-12 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let sx = |x: f64| PAD + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    if let Some(t) = timestamp {
        let _ = writeln!(s, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(10f64.powi(d));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, H - PAD, H - PAD + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, H - PAD + 18.0);
    }
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let py = sy(y);
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{PAD}" y2="{py:.2}" stroke="black"/>"#, PAD - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.4}</text>"#, PAD - 8.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, escape(x_label));
    for (k, ser) in series.iter().enumerate() {
        let c = COLOURS[k % COLOURS.len()];
        let p: Vec<(f64, f64)> = ser
            .points
            .iter()
            .filter(|p| p.0 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| (sx(x), sy(y)))
            .collect();
        if ser.markers {
            for (x, y) in &p {
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}"/>"#);
            }
        } else if !p.is_empty() {
            let d = p.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ");
            let _ = writeln!(s, r#"<polyline points="{d}" fill="none" stroke="{c}" stroke-width="1.5"/>"#);
        }
        let ly = PAD + 16.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/>"#, W - PAD - 150.0, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, W - PAD - 135.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_round_trip_notation() {
        let mut t = Table::new(vec![col("x", ""), col("n", ""), col("ok", "")]);
        t.push(vec![Cell::F(0.1), Cell::I(-3), Cell::B(true)]);
        let csv = t.to_csv();
        assert_eq!(csv, "x,n,ok\n1.0000000000000001e-1,-3,true\n");
        let back: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn svg_is_deterministic_without_timestamp() {
        let s = [Series { label: "a<b".into(), points: vec![(1e-3, 1.0), (1e-1, 2.0)], markers: false }];
        let a = svg_plot("t", "q0", &s, None);
        assert_eq!(a, svg_plot("t", "q0", &s, None));
        assert!(a.contains("a&lt;b") && !a.contains("generated"));
        assert!(svg_plot("t", "q0", &s, Some(5)).contains("unix time 5"));
    }
}
