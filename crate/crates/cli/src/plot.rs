//! Dependency-free SVG rendering of CSV artifacts.
//!
//! Output bytes depend only on the CSV contents and the [`PlotSpec`]: numbers
//! are printed with fixed precision and categories are ordered by first
//! appearance, so repeated runs produce identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("no plottable data: {0}")]
    EmptyData(String),
    #[error("row {row}, column `{column}`: {message}")]
    BadValue { row: usize, column: String, message: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlotKind {
    /// One polyline per `y` column against the shared `x` column.
    Line { x: String, y: Vec<String> },
    /// One rectangle per row at `(x, y)`, filled by `value`. Numeric values use
    /// a grey ramp, anything else a categorical palette.
    Heatmap { x: String, y: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    #[serde(flatten)]
    pub kind: PlotKind,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
}

impl PlotSpec {
    pub fn line(x: &str, ys: &[&str], title: &str) -> Self {
        Self {
            kind: PlotKind::Line { x: x.into(), y: ys.iter().map(|s| s.to_string()).collect() },
            title: title.into(),
            log_x: false,
            log_y: false,
        }
    }

    pub fn heatmap(x: &str, y: &str, value: &str, title: &str) -> Self {
        Self {
            kind: PlotKind::Heatmap { x: x.into(), y: y.into(), value: value.into() },
            title: title.into(),
            log_x: false,
            log_y: false,
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// A parsed CSV: header plus string cells.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, PlotError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader.records().map(|r| r.map(|rec| rec.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize, PlotError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    }

    /// Numeric column; row numbers in errors count data rows from 1.
    fn numbers(&self, name: &str, log: bool) -> Result<Vec<f64>, PlotError> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let bad = |message: String| PlotError::BadValue { row: i + 1, column: name.to_string(), message };
                let v: f64 = row[c].trim().parse().map_err(|_| bad(format!("`{}` is not a number", row[c])))?;
                if !v.is_finite() {
                    return Err(bad(format!("non-finite value {v}")));
                }
                if log && v <= 0.0 {
                    return Err(bad(format!("value {v} cannot be shown on a log axis")));
                }
                Ok(if log { v.log10() } else { v })
            })
            .collect()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi - lo <= 1e-300 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, v: f64) -> String {
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3e}")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn frame(out: &mut String, spec: &PlotSpec, x_name: &str, y_name: &str, ax: &Axis, ay: &Axis) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, px((x0 + x1) / 2.0), escape(&spec.title));
    let _ = writeln!(out, r#"<g stroke="black" fill="none"><path d="M{} {} L{} {} L{} {}"/></g>"#, px(x0), px(y1), px(x0), px(y0), px(x1), px(y0));
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = ax.lo + f * (ax.hi - ax.lo);
        let yv = ay.lo + f * (ay.hi - ay.lo);
        let xp = x0 + f * (x1 - x0);
        let yp = y0 + f * (y1 - y0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(xp), px(y0 + 18.0), ax.label(xv));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px(x0 - 6.0), px(yp + 4.0), ay.label(yv));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px((x0 + x1) / 2.0), px(HEIGHT - 16.0), escape(x_name));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        px((y0 + y1) / 2.0),
        px((y0 + y1) / 2.0),
        escape(y_name)
    );
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (i, (name, colour)) in entries.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 18.0 * i as f64;
        let x = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, px(x), px(y - 9.0));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, px(x + 16.0), px(y), escape(name));
    }
}

/// Renders CSV text to an SVG document.
pub fn render(csv_text: &str, spec: &PlotSpec) -> Result<String, PlotError> {
    let table = Table::parse(csv_text)?;
    if table.rows.is_empty() {
        return Err(PlotError::EmptyData("CSV has a header but no rows".into()));
    }
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let mut out = String::new();
    match &spec.kind {
        PlotKind::Line { x, y } => {
            if y.is_empty() {
                return Err(PlotError::EmptyData("line plot names no y columns".into()));
            }
            let xs = table.numbers(x, spec.log_x)?;
            let ys: Vec<Vec<f64>> = y.iter().map(|c| table.numbers(c, spec.log_y)).collect::<Result<_, _>>()?;
            let ax = Axis::new(xs.iter().copied(), spec.log_x);
            let ay = Axis::new(ys.iter().flatten().copied(), spec.log_y);
            let y_name = if y.len() == 1 { y[0].clone() } else { String::new() };
            frame(&mut out, spec, x, &y_name, &ax, &ay);
            let mut entries = Vec::new();
            for (k, series) in ys.iter().enumerate() {
                let colour = PALETTE[k % PALETTE.len()];
                let points: Vec<String> = xs
                    .iter()
                    .zip(series)
                    .map(|(&a, &b)| format!("{},{}", px(x0 + ax.frac(a) * (x1 - x0)), px(y0 + ay.frac(b) * (y1 - y0))))
                    .collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
                entries.push((y[k].clone(), colour));
            }
            if y.len() > 1 {
                legend(&mut out, &entries);
            }
        }
        PlotKind::Heatmap { x, y, value } => {
            let xs = table.numbers(x, spec.log_x)?;
            let ys = table.numbers(y, spec.log_y)?;
            let vc = table.column(value)?;
            let distinct = |v: &[f64]| {
                let mut s: Vec<f64> = v.to_vec();
                s.sort_by(f64::total_cmp);
                s.dedup();
                s
            };
            let (ux, uy) = (distinct(&xs), distinct(&ys));
            let cell = |u: &[f64]| if u.len() > 1 { (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64 } else { 1.0 };
            let (cx, cy) = (cell(&ux), cell(&uy));
            let ax = Axis::new([ux[0] - cx / 2.0, ux[ux.len() - 1] + cx / 2.0].into_iter(), spec.log_x);
            let ay = Axis::new([uy[0] - cy / 2.0, uy[uy.len() - 1] + cy / 2.0].into_iter(), spec.log_y);
            frame(&mut out, spec, x, y, &ax, &ay);

            let raw: Vec<&str> = table.rows.iter().map(|r| r[vc].as_str()).collect();
            let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite())).collect();
            let fills: Vec<String> = match numeric {
                Some(vals) => {
                    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                    vals.iter()
                        .map(|&v| {
                            let f = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                            let g = (255.0 * (1.0 - f)).round() as u8;
                            format!("#{g:02x}{g:02x}{g:02x}")
                        })
                        .collect()
                }
                None => {
                    let mut order: BTreeMap<&str, usize> = BTreeMap::new();
                    let mut seen = Vec::new();
                    for s in &raw {
                        if !order.contains_key(s) {
                            order.insert(s, seen.len());
                            seen.push(*s);
                        }
                    }
                    let entries: Vec<(String, &str)> =
                        seen.iter().enumerate().map(|(i, s)| (s.to_string(), PALETTE[i % PALETTE.len()])).collect();
                    legend(&mut out, &entries);
                    raw.iter().map(|s| PALETTE[order[s] % PALETTE.len()].to_string()).collect()
                }
            };
            let w = cx / (ax.hi - ax.lo) * (x1 - x0);
            let h = cy / (ay.hi - ay.lo) * (y0 - y1);
            for ((&a, &b), fill) in xs.iter().zip(&ys).zip(&fills) {
                let left = x0 + ax.frac(a - cx / 2.0) * (x1 - x0);
                let top = y0 + ay.frac(b + cy / 2.0) * (y1 - y0);
                let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#, px(left), px(top), px(w), px(h));
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Reads `csv_path`, renders it and writes the SVG to `svg_path`.
pub fn plot(csv_path: &Path, spec: &PlotSpec, svg_path: &Path) -> Result<(), PlotError> {
    let text = std::fs::read_to_string(csv_path)?;
    let svg = render(&text, spec)?;
    std::fs::write(svg_path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_column_line_plot_has_one_polyline() {
        let svg = render("t,u\n0,0\n1,0.5\n2,0.7\n", &PlotSpec::line("t", &["u"], "u(t)")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn heatmap_draws_one_rectangle_per_cell() {
        let mut csv = String::from("d,x0,verdict\n");
        for i in 0..4 {
            for j in 0..4 {
                let v = if i < j { "a" } else { "b" };
                csv.push_str(&format!("{},{},{v}\n", (i as f64 + 0.5) / 4.0, (j as f64 + 0.5) / 4.0));
            }
        }
        let svg = render(&csv, &PlotSpec::heatmap("d", "x0", "verdict", "map")).unwrap();
        let cells = svg.matches("<rect").count() - 1 - 2; // background and two legend swatches
        assert_eq!(cells, 16);
    }

    #[test]
    fn log_axis_rejects_nonpositive_values_by_row() {
        let err = render("s,n\n1,1\n10,0\n", &PlotSpec::line("s", &["n"], "").log_log()).unwrap_err();
        match err {
            PlotError::BadValue { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "n");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_column_and_empty_data() {
        assert!(matches!(render("a,b\n1,2\n", &PlotSpec::line("a", &["c"], "")), Err(PlotError::MissingColumn(c)) if c == "c"));
        assert!(matches!(render("a,b\n", &PlotSpec::line("a", &["b"], "")), Err(PlotError::EmptyData(_))));
    }

    #[test]
    fn output_is_deterministic() {
        let csv = "x,y,z\n0,1,2\n1,3,1\n2,2,5\n";
        let spec = PlotSpec::line("x", &["y", "z"], "two");
        assert_eq!(render(csv, &spec).unwrap(), render(csv, &spec).unwrap());
    }
}
