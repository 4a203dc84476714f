//! CSV tables and plain SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lebesgue_core::{Error, Result};
use serde::Serialize;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("cannot write {}: {e}", path.display()))
}

/// Collects the files written by a run.
pub struct OutDir {
    root: PathBuf,
    pub written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, body).map_err(|e| io_err(&p, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| Error::Input(e.to_string()))?;
        let body = serde_json::to_string_pretty(&v).map_err(|e| Error::Input(e.to_string()))?;
        self.text(name, &(body + "\n"))
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        let p = self.path(name);
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&p).map_err(|e| io_err(&p, e))?;
        w.write_record(header).map_err(|e| io_err(&p, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&p, e))?;
        }
        w.flush().map_err(|e| io_err(&p, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Fixed-size SVG canvas with a linear data-to-pixel map (`y` up).
pub struct Svg {
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

const MARGIN: f64 = 40.0;

impl Svg {
    /// Canvas whose aspect matches the data ranges, `width` pixels wide.
    pub fn new(width: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        let aspect = (y.1 - y.0) / (x.1 - x.0);
        let height = (width - 2.0 * MARGIN) * aspect + 2.0 * MARGIN;
        Self { width, height, x, y, body: String::new() }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - 2.0 * MARGIN);
        let sy = self.height - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - 2.0 * MARGIN);
        (sx, sy)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let (sx, sy) = self.px(x, y);
            let _ = write!(d, "{sx:.2},{sy:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, stroke: &str) {
        let d: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (sx, sy) = self.px(x, y);
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="0.3"/>"#,
            d.join(" ")
        );
    }

    pub fn dot(&mut self, x: f64, y: f64, radius: f64, fill: &str) {
        let (sx, sy) = self.px(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{radius}" fill="{fill}"/>"#);
    }

    /// Axis-aligned cell from `(x0, y0)` to `(x1, y1)` in data coordinates.
    pub fn cell(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0, y1), self.px(x1, y0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            a.0,
            a.1,
            (b.0 - a.0).max(0.0) + 0.5,
            (b.1 - a.1).max(0.0) + 0.5
        );
    }

    pub fn label(&mut self, x: f64, y: f64, text: &str) {
        let (sx, sy) = self.px(x, y);
        let _ = writeln!(
            self.body,
            r#"<text x="{sx:.2}" y="{sy:.2}" font-size="11" font-family="sans-serif">{text}</text>"#
        );
    }

    pub fn title(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="20" font-size="13" font-family="sans-serif">{text}</text>"#,
            MARGIN
        );
    }

    /// Frame with the data ranges printed at the corners.
    pub fn frame(&mut self, x_name: &str, y_name: &str) {
        let (a, b) = (self.px(self.x.0, self.y.0), self.px(self.x.1, self.y.1));
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="0.8"/>"#,
            a.0,
            b.1,
            b.0 - a.0,
            a.1 - b.1
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif">{x_name} {:.3} .. {:.3}, {y_name} {:.3} .. {:.3}</text>"#,
            a.0,
            a.1 + 18.0,
            self.x.0,
            self.x.1,
            self.y.0,
            self.y.1
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Blue-to-red colour for `t` in `[0, 1]`.
pub fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 1.0 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
