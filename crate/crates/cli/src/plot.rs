//! Minimal static SVG charts from result CSVs: axes, series and a legend.
//! Output bytes depend only on the input CSV and the spec.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use evobench_core::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Line,
    Scatter,
    /// One box per distinct value of the x column.
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub x_column: String,
    pub y_columns: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .with_context(|| {
                format!(
                    "column `{name}` not found (available: {})",
                    self.headers.join(", ")
                )
            })
    }
}

fn read_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .context("unparsable CSV header")?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("unparsable CSV at row {}", i + 1))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows })
}

/// `None` for missing cells (`NA` or empty).
fn numeric(cell: &str, row: usize, column: &str, log: bool, axis: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell == "NA" {
        return Ok(None);
    }
    let v: f64 = cell
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .with_context(|| format!("row {row}: `{cell}` in column `{column}` is not a number"))?;
    if log && v <= 0.0 {
        bail!("row {row}: {axis} value {cell} in column `{column}` is not positive on a log axis");
    }
    Ok(Some(if log { v.log10() } else { v }))
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.03 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions (in axis units) with labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let first = self.lo.ceil() as i64;
            let last = self.hi.floor() as i64;
            if first <= last {
                let stride = ((last - first) / 6 + 1) as usize;
                return (first..=last)
                    .step_by(stride)
                    .map(|k| (k as f64, fmt_num(10f64.powi(k as i32))))
                    .collect();
            }
            return [self.lo, self.hi]
                .iter()
                .map(|&v| (v, fmt_num(10f64.powf(v))))
                .collect();
        }
        (0..=4)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * f64::from(i) / 4.0;
                (v, fmt_num(v))
            })
            .collect()
    }
}

fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(spec: &PlotSpec) -> Canvas {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            out,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&spec.title)
        );
        Canvas { out }
    }

    fn px(x: f64) -> f64 {
        LEFT + x * (WIDTH - LEFT - RIGHT)
    }

    fn py(y: f64) -> f64 {
        HEIGHT - BOTTOM - y * (HEIGHT - TOP - BOTTOM)
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, text: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        );
    }

    fn frame(&mut self, spec: &PlotSpec, y: &Axis) {
        let (x0, x1) = (Self::px(0.0), Self::px(1.0));
        let (y0, y1) = (Self::py(0.0), Self::py(1.0));
        self.line(x0, y0, x1, y0, "black");
        self.line(x0, y0, x0, y1, "black");
        for (v, label) in y.ticks() {
            let py = Self::py(y.frac(v));
            self.line(x0 - 4.0, py, x0, py, "black");
            self.text(x0 - 6.0, py + 4.0, "end", &label);
        }
        self.text((x0 + x1) / 2.0, HEIGHT - 14.0, "middle", &spec.x_label);
        let _ = writeln!(
            self.out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&spec.y_label)
        );
    }

    fn x_ticks(&mut self, x: &Axis) {
        let y0 = Self::py(0.0);
        for (v, label) in x.ticks() {
            let px = Self::px(x.frac(v));
            self.line(px, y0, px, y0 + 4.0, "black");
            self.text(px, y0 + 16.0, "middle", &label);
        }
    }

    fn legend(&mut self, names: &[String]) {
        let x = WIDTH - RIGHT + 14.0;
        for (i, name) in names.iter().enumerate() {
            let y = TOP + 8.0 + 18.0 * i as f64;
            let _ = writeln!(
                self.out,
                r#"<rect x="{x:.2}" y="{:.2}" width="12" height="8" fill="{}"/>"#,
                y - 8.0,
                PALETTE[i % PALETTE.len()]
            );
            self.text(x + 16.0, y, "start", name);
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Renders the SVG document for `csv_text`.
pub fn render(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    if spec.y_columns.is_empty() {
        bail!("at least one y column is required");
    }
    let table = read_table(csv_text)?;
    let xi = table.column(&spec.x_column)?;
    let yis = spec
        .y_columns
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<Vec<_>>>()?;
    match spec.kind {
        PlotKind::Line | PlotKind::Scatter => render_xy(&table, xi, &yis, spec),
        PlotKind::Box => render_box(&table, xi, &yis, spec),
    }
}

fn render_xy(table: &Table, xi: usize, yis: &[usize], spec: &PlotSpec) -> Result<String> {
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); yis.len()];
    for (r, row) in table.rows.iter().enumerate() {
        let row_no = r + 1;
        let Some(x) = numeric(&row[xi], row_no, &spec.x_column, spec.log_x, "x")? else {
            continue;
        };
        for (s, &yi) in yis.iter().enumerate() {
            if let Some(y) = numeric(&row[yi], row_no, &spec.y_columns[s], spec.log_y, "y")? {
                series[s].push((x, y));
            }
        }
    }
    let xa = Axis::new(series.iter().flatten().map(|p| p.0), spec.log_x);
    let ya = Axis::new(series.iter().flatten().map(|p| p.1), spec.log_y);
    let mut c = Canvas::new(spec);
    c.frame(spec, &ya);
    c.x_ticks(&xa);
    for (s, pts) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let coords: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(x, y)| (Canvas::px(xa.frac(x)), Canvas::py(ya.frac(y))))
            .collect();
        match spec.kind {
            PlotKind::Line => {
                if coords.is_empty() {
                    continue;
                }
                let points: Vec<String> = coords
                    .iter()
                    .map(|(x, y)| format!("{x:.2},{y:.2}"))
                    .collect();
                let _ = writeln!(
                    c.out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    points.join(" ")
                );
            }
            _ => {
                for (x, y) in coords {
                    let _ = writeln!(
                        c.out,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#
                    );
                }
            }
        }
    }
    c.legend(&spec.y_columns);
    Ok(c.finish())
}

fn render_box(table: &Table, xi: usize, yis: &[usize], spec: &PlotSpec) -> Result<String> {
    // groups in order of first appearance
    let mut groups: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let key = row[xi].clone();
        let at = match groups.iter().position(|g| g.0 == key) {
            Some(i) => i,
            None => {
                groups.push((key, vec![Vec::new(); yis.len()]));
                groups.len() - 1
            }
        };
        for (s, &yi) in yis.iter().enumerate() {
            if let Some(y) = numeric(&row[yi], r + 1, &spec.y_columns[s], spec.log_y, "y")? {
                groups[at].1[s].push(y);
            }
        }
    }
    let ya = Axis::new(
        groups.iter().flat_map(|g| g.1.iter().flatten().copied()),
        spec.log_y,
    );
    let mut c = Canvas::new(spec);
    c.frame(spec, &ya);
    let slots = (groups.len() * yis.len()).max(1) as f64;
    let slot_w = (Canvas::px(1.0) - Canvas::px(0.0)) / slots;
    let y0 = Canvas::py(0.0);
    for (g, (name, cols)) in groups.iter().enumerate() {
        for (s, values) in cols.iter().enumerate() {
            let slot = (g * yis.len() + s) as f64;
            let cx = Canvas::px(0.0) + (slot + 0.5) * slot_w;
            if s == 0 {
                let label_x = Canvas::px(0.0)
                    + (g * yis.len()) as f64 * slot_w
                    + 0.5 * slot_w * yis.len() as f64;
                c.text(label_x, y0 + 16.0, "middle", name);
            }
            let Ok(sm) = stats::descriptive_summary(values) else {
                continue;
            };
            let color = PALETTE[s % PALETTE.len()];
            let py = |v: f64| Canvas::py(ya.frac(v));
            let half = 0.3 * slot_w;
            c.line(cx, py(sm.min), cx, py(sm.q1), color);
            c.line(cx, py(sm.q3), cx, py(sm.max), color);
            c.line(
                cx - half / 2.0,
                py(sm.min),
                cx + half / 2.0,
                py(sm.min),
                color,
            );
            c.line(
                cx - half / 2.0,
                py(sm.max),
                cx + half / 2.0,
                py(sm.max),
                color,
            );
            let _ = writeln!(
                c.out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}"/>"#,
                cx - half,
                py(sm.q3),
                2.0 * half,
                (py(sm.q1) - py(sm.q3)).max(0.0)
            );
            c.line(cx - half, py(sm.median), cx + half, py(sm.median), "black");
        }
    }
    c.legend(&spec.y_columns);
    Ok(c.finish())
}

pub fn emit_plot(csv_path: &Path, spec: &PlotSpec, out_path: &Path) -> Result<()> {
    let text = fs::read_to_string(csv_path)
        .with_context(|| format!("cannot read {}", csv_path.display()))?;
    let svg = render(&text, spec).with_context(|| format!("{}", csv_path.display()))?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(out_path, svg).with_context(|| format!("cannot write {}", out_path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: PlotKind, log_x: bool) -> PlotSpec {
        PlotSpec {
            kind,
            x_column: "x".into(),
            y_columns: vec!["y".into()],
            log_x,
            log_y: false,
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
        }
    }

    #[test]
    fn two_point_line_is_one_polyline() {
        let svg = render("x,y\n1,2\n3,4\n", &spec(PlotKind::Line, false)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(points.split(' ').count(), 2);
        assert!(points.split(' ').all(|p| p.split(',').count() == 2));
    }

    #[test]
    fn rendering_is_deterministic() {
        let csv = "x,y\n1,5\n10,7\n100,6\n";
        let a = render(csv, &spec(PlotKind::Scatter, true)).unwrap();
        let b = render(csv, &spec(PlotKind::Scatter, true)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn log_axis_rejects_zero() {
        let err = render("x,y\n1,2\n0,3\n", &spec(PlotKind::Line, true)).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn missing_column_is_named() {
        let mut s = spec(PlotKind::Line, false);
        s.y_columns = vec!["nope".into()];
        let msg = format!("{:#}", render("x,y\n1,2\n", &s).unwrap_err());
        assert!(msg.contains("`nope`"), "{msg}");
    }

    #[test]
    fn missing_cells_are_skipped() {
        let svg = render("x,y\n1,2\n2,NA\n3,4\n", &spec(PlotKind::Line, false)).unwrap();
        let points = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(points.split(' ').count(), 2);
    }

    #[test]
    fn box_groups_by_x() {
        let csv = "op,evals\na,1\na,2\na,3\nb,10\nb,20\n";
        let s = PlotSpec {
            x_column: "op".into(),
            y_columns: vec!["evals".into()],
            ..spec(PlotKind::Box, false)
        };
        let svg = render(csv, &s).unwrap();
        assert_eq!(svg.matches("fill=\"none\" stroke").count(), 2);
        assert!(svg.contains(">a</text>") && svg.contains(">b</text>"));
    }

    #[test]
    fn number_labels() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(1000.0), "1000");
        assert_eq!(fmt_num(1e7), "1.0e7");
    }
}
