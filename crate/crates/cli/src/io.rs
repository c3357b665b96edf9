//! On-disk output formats: the metrics CSV, plain-text field snapshots with
//! a self-describing header, and verification reports. All writes go through
//! a temp file and a rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use dcmd_core::adrc::MetricsRow;
use dcmd_core::fields::FieldPair;
use dcmd_core::grid::Grid;

/// Fixed header of the metrics CSV; the leading comment line carries the
/// schema version.
pub const METRICS_SCHEMA: &str = "# schema: metrics-v1";
pub const METRICS_HEADER: &str =
    "t,tracking_error,observer_error,servo_gap,disturbance_error,control_norm";

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Write `content` to `path` atomically (temp file, then rename).
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(content.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Render the metrics table; identical inputs give identical bytes.
pub fn render_metrics(rows: &[MetricsRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 2));
    out.push_str(METRICS_SCHEMA);
    out.push('\n');
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.tracking_error),
            fmt(r.observer_error),
            fmt(r.servo_gap),
            fmt(r.disturbance_error),
            fmt(r.control_norm),
        ));
    }
    out
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> std::io::Result<()> {
    write_atomic(path, &render_metrics(rows))
}

/// Render one scalar component as a text matrix with enough metadata to
/// reload it without the scenario: `ny` rows of `nx` values, row `j = 0`
/// (the `y = 0` edge) first.
pub fn render_snapshot(grid: &Grid, component: &str, t: f64, values: &[f64]) -> String {
    let mut out = String::new();
    out.push_str("# schema: snapshot-v1\n");
    out.push_str(&format!("# component: {component}\n"));
    out.push_str(&format!("# nx: {}\n", grid.nx()));
    out.push_str(&format!("# ny: {}\n", grid.ny()));
    out.push_str(&format!("# length: {}\n", fmt(grid.length_l())));
    out.push_str(&format!("# t: {}\n", fmt(t)));
    for j in 0..grid.ny() {
        let mut line = String::new();
        for i in 0..grid.nx() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&fmt(values[grid.node(i, j)]));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Write both components of a field at one time level; returns the file
/// names written.
pub fn write_field_snapshot(
    dir: &Path,
    prefix: &str,
    grid: &Grid,
    t: f64,
    w: &FieldPair,
) -> std::io::Result<Vec<String>> {
    let mut names = Vec::new();
    for (component, values) in [("f", &w.f), ("p", &w.p)] {
        let name = format!("{prefix}_{component}_t{t:.6}.txt");
        write_atomic(&dir.join(&name), &render_snapshot(grid, component, t, values))?;
        names.push(name);
    }
    Ok(names)
}

/// A reloaded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub component: String,
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

/// Parse a snapshot file produced by [`render_snapshot`].
pub fn parse_snapshot(text: &str) -> Result<Snapshot, String> {
    let mut component = String::new();
    let (mut nx, mut ny) = (0usize, 0usize);
    let (mut length, mut t) = (f64::NAN, f64::NAN);
    let mut values = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "component" => component = value.to_string(),
                    "nx" => nx = value.parse().map_err(|e| format!("nx: {e}"))?,
                    "ny" => ny = value.parse().map_err(|e| format!("ny: {e}"))?,
                    "length" => length = value.parse().map_err(|e| format!("length: {e}"))?,
                    "t" => t = value.parse().map_err(|e| format!("t: {e}"))?,
                    _ => {}
                }
            }
        } else if !line.trim().is_empty() {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| format!("value: {e}"))?);
            }
        }
    }
    if nx == 0 || ny == 0 {
        return Err("missing grid dimensions".to_string());
    }
    if values.len() != nx * ny {
        return Err(format!(
            "expected {} values, found {}",
            nx * ny,
            values.len()
        ));
    }
    Ok(Snapshot {
        component,
        nx,
        ny,
        length,
        t,
        values,
    })
}

/// One line of a verification report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub value: String,
    pub threshold: String,
    pub pass: bool,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        CheckLine {
            name: name.into(),
            value: format!("{value:.6e}"),
            threshold: threshold.into(),
            pass,
        }
    }
}

pub fn render_report(lines: &[CheckLine]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&format!(
            "{} {} {} {}\n",
            l.name,
            l.value,
            l.threshold,
            if l.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}
