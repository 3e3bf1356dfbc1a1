//! File writers for run products.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use isar3d_core::pose::CompositeImage;
use serde::{Deserialize, Serialize};

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub kind: String,
    pub rows: usize,
}

/// Files written so far; removed again if the run fails.
#[derive(Debug)]
pub struct OutputSet {
    root: PathBuf,
    written: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    pub manifest: Vec<ManifestEntry>,
}

impl OutputSet {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf(), written: Vec::new(), dirs: Vec::new(), manifest: Vec::new() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn target(&mut self, rel: &str) -> std::io::Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                std::fs::create_dir_all(parent)?;
                self.dirs.push(parent.to_path_buf());
            }
        }
        self.written.push(path.clone());
        Ok(path)
    }

    /// Write a file without listing it in the manifest.
    pub fn write_extra(&mut self, rel: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = self.target(rel)?;
        std::fs::write(path, bytes)
    }

    pub fn write(&mut self, rel: &str, kind: &str, rows: usize, bytes: &[u8]) -> std::io::Result<()> {
        self.write_extra(rel, bytes)?;
        self.manifest.push(ManifestEntry { path: rel.to_string(), kind: kind.to_string(), rows });
        Ok(())
    }

    pub fn csv(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(std::io::Error::other)?;
        for r in rows {
            w.write_record(r).map_err(std::io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write(rel, "csv", rows.len(), &bytes)
    }

    /// Remove everything written so far.
    pub fn discard(&mut self) {
        for p in self.written.drain(..).rev() {
            let _ = std::fs::remove_file(p);
        }
        for d in self.dirs.drain(..).rev() {
            let _ = std::fs::remove_dir(d);
        }
        self.manifest.clear();
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

/// Binary 8-bit PGM scaled to the image maximum.
pub fn pgm(img: &CompositeImage) -> Vec<u8> {
    let max = img.data.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    // top row is the largest cross-range
    for row in (0..img.height).rev() {
        for col in 0..img.width {
            let v = if max > 0.0 { (255.0 * img.at(row, col) / max).round() } else { 0.0 };
            out.push(v.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSidecar {
    pub kind: isar3d_core::FrameClass,
    pub width: usize,
    pub height: usize,
    pub cell_m: f64,
    pub range_min_m: f64,
    pub cross_min_m: f64,
    pub frames_used: usize,
    pub max_value: f64,
    pub range_extent_m: f64,
    pub cross_extent_m: f64,
}

pub fn sidecar(img: &CompositeImage) -> CompositeSidecar {
    let (range_extent_m, cross_extent_m) = img.extents();
    CompositeSidecar {
        kind: img.kind,
        width: img.width,
        height: img.height,
        cell_m: img.cell,
        range_min_m: img.range_min,
        cross_min_m: img.cross_min,
        frames_used: img.frames_used,
        max_value: img.data.iter().copied().fold(0.0, f64::max),
        range_extent_m,
        cross_extent_m,
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Minimal SVG line chart; non-finite points break the line.
pub fn line_chart(title: &str, x_label: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let (w, h, ml, mr, mt, mb) = (800.0, 400.0, 70.0, 150.0, 30.0, 40.0);
    let finite = |v: &&f64| v.is_finite();
    let (x0, x1) = bounds(x.iter().filter(finite));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.1.iter()).filter(finite));
    let px = |v: f64| ml + (v - x0) / (x1 - x0) * (w - ml - mr);
    let py = |v: f64| h - mb - (v - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for (v, y) in [(y0, h - mb), (y1, mt + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, ml - 4.0, label(v));
    }
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#, px(v), h - mb + 16.0, label(v));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ml + w - mr) / 2.0, h - 6.0, escape(x_label));
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen = false;
        for (xv, yv) in x.iter().zip(ys) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen { "L" } else { "M" }, px(*xv), py(*yv));
                pen = true;
            } else {
                pen = false;
            }
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = mt + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - mr + 10.0, w - mr + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr + 35.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn bounds<'a>(v: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_json<T: Serialize>(w: impl Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(w, value).map_err(std::io::Error::other)
}
