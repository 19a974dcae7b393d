//! CSV and SVG rendering of sweep results.

use std::fmt::Write as _;
use std::path::Path;

use super::sweep::SweepResult;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "axis,estimator,nmse_db,stderr_db,n_trials";

/// Rounds to six significant digits and prints the shortest round-trip form.
fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// One data line of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis: f64,
    pub estimator: String,
    pub nmse_db: f64,
    pub stderr_db: f64,
    pub n_trials: usize,
}

/// Rows ordered by axis value, then by estimator selection order.
pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (j, value) in result.axis_values.iter().enumerate() {
        for s in &result.points[j] {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                sig6(*value),
                s.estimator,
                sig6(s.nmse_db),
                sig6(s.stderr_db),
                s.n_trials
            );
        }
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(result)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, what: &str| Error::config(path.display().to_string(), format!("line {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(i + 2, "expected 5 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "not a number"));
        rows.push(CsvRow {
            axis: num(fields[0])?,
            estimator: fields[1].to_string(),
            nmse_db: num(fields[2])?,
            stderr_db: num(fields[3])?,
            n_trials: fields[4].parse().map_err(|_| bad(i + 2, "bad trial count"))?,
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// NMSE curves, one polyline with markers per estimator.
pub fn render_svg(result: &SweepResult) -> String {
    let (w, h) = (640.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 20.0, 55.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let xs = &result.axis_values;
    let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let ys: Vec<f64> = result
        .points
        .iter()
        .flatten()
        .map(|s| s.nmse_db)
        .filter(|v| v.is_finite())
        .collect();
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !y0.is_finite() {
        y0 = -1.0;
        y1 = 1.0;
    }
    y0 = (y0 / 5.0).floor() * 5.0;
    y1 = (y1 / 5.0).ceil() * 5.0;
    if y1 <= y0 {
        y1 = y0 + 5.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for &x in xs {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"#,
            px(x),
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            sig6(x)
        );
    }
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="#dddddd"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"##,
            left,
            py(y),
            left + pw,
            left - 6.0,
            py(y) + 4.0,
            sig6(y)
        );
        y += 5.0;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(result.axis.label())
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">NMSE (dB)</text>"#,
        top + ph / 2.0
    );

    for (e, name) in result.estimators.iter().enumerate() {
        let color = PALETTE[e % PALETTE.len()];
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .enumerate()
            .filter_map(|(j, &x)| result.get(j, name).map(|st| (x, st.nmse_db)))
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| (px(x), py(y)))
            .collect();
        let path: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for (a, b) in &pts {
            let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = top + 14.0 + 18.0 * e as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/><circle cx="{}" cy="{ly}" r="3" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 12.0,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_plot(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(result)).map_err(|e| Error::io(path, e))
}
