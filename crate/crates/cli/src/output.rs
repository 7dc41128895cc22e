//! CSV panels, metadata sidecars and optional SVG line plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ScenarioConfig;
use crate::CliError;

/// One output panel: a header with units and rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `key=value` lines for the sidecar.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn push_cells(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    /// Numeric view of column `j`, `None` for non-numeric cells.
    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.get(j).and_then(|c| c.parse().ok()))
            .collect()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_table(
    dir: &Path,
    table: &Table,
    cfg: &ScenarioConfig,
    plot: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let csv_path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    w.write_record(&table.headers)
        .map_err(|e| io_err(&csv_path, e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| io_err(&csv_path, e))?;
    }
    w.flush().map_err(|e| io_err(&csv_path, e))?;

    let meta_path = dir.join(format!("{}.meta", table.name));
    std::fs::write(&meta_path, metadata(table, cfg)).map_err(|e| io_err(&meta_path, e))?;

    let mut written = vec![csv_path, meta_path];
    if plot {
        let svg_path = dir.join(format!("{}.svg", table.name));
        std::fs::write(&svg_path, svg(table)).map_err(|e| io_err(&svg_path, e))?;
        written.push(svg_path);
    }
    Ok(written)
}

fn metadata(table: &Table, cfg: &ScenarioConfig) -> String {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "scenario={}", cfg.scenario.name());
    let _ = writeln!(s, "panel={}", table.name);
    let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "core_version={}", cqed_metrology::VERSION);
    let _ = writeln!(s, "seed={}", cfg.seed);
    let _ = writeln!(s, "timestamp_unix={stamp}");
    for (k, v) in &cfg.resolved {
        let _ = writeln!(s, "config.{k}={v}");
    }
    for (k, v) in &table.notes {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

const COLOURS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Every numeric column drawn against the first one.
fn svg(table: &Table) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let x = table.column(0);
    let series: Vec<(usize, Vec<(f64, f64)>)> = (1..table.headers.len())
        .map(|j| {
            let pts = x
                .iter()
                .zip(table.column(j))
                .filter_map(|(a, b)| Some(((*a)?, b?)))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .collect();
            (j, pts)
        })
        .filter(|(_, p): &(usize, Vec<(f64, f64)>)| p.len() > 1)
        .collect();
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(a, b) in all {
        x0 = x0.min(a);
        x1 = x1.max(a);
        y0 = y0.min(b);
        y1 = y1.max(b);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |a: f64| pad + (a - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |b: f64| h - pad - (b - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 12.0,
        table.headers[0]
    );
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{}" font-size="10">{x0:.3}</text>"#,
        h - pad + 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{x1:.3}</text>"#,
        w - pad,
        h - pad + 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y0:.3}</text>"#,
        pad - 4.0,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y1:.3}</text>"#,
        pad - 4.0,
        pad + 8.0
    );
    for (k, (j, pts)) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{}</text>"#,
            pad + 8.0,
            pad + 16.0 + 14.0 * k as f64,
            table.headers[*j]
        );
    }
    s.push_str("</svg>\n");
    s
}
