//! CSV and SVG files, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use amrtriad::{Histogram, Trajectory};
use anyhow::{Context, Result, bail, ensure};
use tempfile::NamedTempFile;

pub const TRAJECTORY_HEADER: &str = "t,R,path_id,engine,seed";
pub const HISTOGRAM_HEADER: &str = "bin_left,bin_right,mass";

/// 17 significant digits: enough to read every f64 back exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// A CSV document checked against a fixed header as rows are added.
pub struct Csv {
    header: &'static str,
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &'static str) -> Self {
        Csv {
            header,
            columns: header.split(',').count(),
            text: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[&str]) -> Result<()> {
        ensure!(
            fields.len() == self.columns,
            "row has {} fields, `{}` has {}",
            fields.len(),
            self.header,
            self.columns
        );
        if let Some(bad) = fields.iter().find(|f| f.contains([',', '\n', '\r', '"'])) {
            bail!("field `{bad}` would need quoting");
        }
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        Ok(())
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Checks a written document against the header it should carry.
pub fn check_schema(text: &str, header: &str) -> Result<usize> {
    let mut lines = text.split('\n');
    ensure!(lines.next() == Some(header), "header is not `{header}`");
    ensure!(!text.contains('\r'), "CSV must use LF line endings");
    ensure!(text.ends_with('\n'), "CSV must end with a newline");
    let columns = header.split(',').count();
    let mut rows = 0;
    for (i, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        ensure!(
            line.split(',').count() == columns,
            "line {} has the wrong number of fields",
            i + 2
        );
        rows += 1;
    }
    Ok(rows)
}

pub fn trajectory_csv<'a>(paths: impl IntoIterator<Item = (usize, &'a Trajectory)>) -> Result<String> {
    let mut csv = Csv::new(TRAJECTORY_HEADER);
    for (id, traj) in paths {
        let id = id.to_string();
        let seed = traj.seed.map(|s| s.to_string()).unwrap_or_default();
        for (t, r) in traj.points() {
            csv.row(&[&fmt_float(t), &fmt_float(r), &id, traj.engine.name(), &seed])?;
        }
    }
    let text = csv.finish();
    check_schema(&text, TRAJECTORY_HEADER)?;
    Ok(text)
}

pub fn histogram_csv(h: &Histogram) -> Result<String> {
    let mut csv = Csv::new(HISTOGRAM_HEADER);
    for (edges, mass) in h.bin_edges.windows(2).zip(&h.bin_mass) {
        csv.row(&[&fmt_float(edges[0]), &fmt_float(edges[1]), &fmt_float(*mass)])?;
    }
    let text = csv.finish();
    check_schema(&text, HISTOGRAM_HEADER)?;
    Ok(text)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLOURS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let (y0, y1) = span(&mut ys.clone());
        Axes {
            x: span(&mut xs.clone()),
            y: (y0.min(0.0), y1),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        format!("{}", (v * 1e3).round() / 1e3)
    } else {
        format!("{v:.2e}")
    }
}

fn frame(out: &mut String, axes: &Axes, title: &str, x_label: &str, y_label: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        out,
        r#"<path d="M{left} {top}V{bottom}H{right}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let xv = axes.x.0 + f * (axes.x.1 - axes.x.0);
        let yv = axes.y.0 + f * (axes.y.1 - axes.y.0);
        let (x, y) = (axes.px(xv), axes.py(yv));
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            bottom + 15.0,
            tick(xv)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 4.0,
            y + 4.0,
            tick(yv)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
}

pub fn line_plot(title: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    let axes = Axes::fit(xs, ys);
    let mut out = String::new();
    frame(&mut out, &axes, title, "t (days)", "R");
    for (i, s) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut d = String::new();
        for (j, &(x, y)) in s.points.iter().enumerate() {
            let op = if j == 0 { 'M' } else { 'L' };
            write!(d, "{op}{:.2} {:.2}", axes.px(x), axes.py(y)).unwrap();
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 3""# } else { "" };
        writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#
        )
        .unwrap();
        let ly = MARGIN + 14.0 * i as f64;
        writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{colour}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN,
            escape(&s.label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

pub fn histogram_plot(title: &str, h: &Histogram) -> String {
    let xs = h.bin_edges.iter().copied();
    let ys = h.bin_mass.iter().copied();
    let axes = Axes::fit(xs, ys);
    let mut out = String::new();
    frame(&mut out, &axes, title, "R", "mass");
    for (edges, &m) in h.bin_edges.windows(2).zip(&h.bin_mass) {
        if m <= 0.0 {
            continue;
        }
        let (x0, x1) = (axes.px(edges[0]), axes.px(edges[1]));
        let (y0, y1) = (axes.py(m), axes.py(0.0));
        writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white" stroke-width="0.5"/>"##,
            (x1 - x0).max(0.5),
            y1 - y0
        )
        .unwrap();
    }
    let mx = axes.px(h.sample_mean);
    writeln!(
        out,
        r##"<path d="M{mx:.2} {MARGIN}V{:.2}" stroke="#d62728" stroke-dasharray="4 3"/>"##,
        HEIGHT - MARGIN
    )
    .unwrap();
    writeln!(
        out,
        r##"<text x="{mx:.2}" y="{:.1}" fill="#d62728">mean {}</text>"##,
        MARGIN - 4.0,
        tick(h.sample_mean)
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// Remembers every file written so a failed run can take them back.
#[derive(Default)]
pub struct Written {
    pub paths: Vec<PathBuf>,
}

impl Written {
    pub fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        write_atomic(&path, contents.as_bytes())?;
        self.paths.push(path);
        Ok(())
    }

    pub fn remove_all(&mut self) {
        for p in self.paths.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}
