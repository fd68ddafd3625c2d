//! Static SVG scatter plots: one `<circle>` per point carrying a `class`
//! attribute for its cluster or highlight state.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mapping::Point;

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    pub width: f64,
    pub radius: f64,
    /// Spread exactly coincident points by up to this fraction of the panel.
    pub jitter: Option<f64>,
    pub seed: u64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            width: 800.0,
            radius: 2.0,
            jitter: None,
            seed: 0,
        }
    }
}

struct Frame {
    min: Point,
    scale: f64,
    pad: f64,
}

impl Frame {
    fn fit(points: &[Point], size: f64) -> Frame {
        let pad = 0.04 * size;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Frame {
            min: lo,
            scale: (size - 2.0 * pad) / span,
            pad,
        }
    }

    fn map(&self, p: &Point, ox: f64, oy: f64) -> (f64, f64) {
        (
            ox + self.pad + (p[0] - self.min[0]) * self.scale,
            oy + self.pad + (p[1] - self.min[1]) * self.scale,
        )
    }
}

fn jittered(points: &[Point], opts: &PlotOptions) -> Vec<Point> {
    let Some(amount) = opts.jitter else {
        return points.to_vec();
    };
    let frame = Frame::fit(points, 1.0);
    let r = amount / frame.scale.max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    points
        .iter()
        .map(|p| [p[0] + rng.random_range(-r..=r), p[1] + rng.random_range(-r..=r)])
        .collect()
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Points colored by cluster label.
pub fn cluster_scatter(points: &[Point], labels: &[usize], title: &str, opts: &PlotOptions) -> String {
    let pts = jittered(points, opts);
    let size = opts.width;
    let top = 24.0;
    let frame = Frame::fit(&pts, size);
    let mut out = String::new();
    header(&mut out, size, size + top);
    let _ = writeln!(out, r#"<text x="8" y="17" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    for (p, &l) in pts.iter().zip(labels) {
        let (x, y) = frame.map(p, 0.0, top);
        let _ = writeln!(
            out,
            r#"<circle class="cluster-{l}" cx="{x:.2}" cy="{y:.2}" r="{:.1}" fill="{}" fill-opacity="0.7"/>"#,
            opts.radius,
            PALETTE[l % PALETTE.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per keyword: all points in grey, the keyword's papers on top.
pub fn keyword_grid(points: &[Point], panels: &[(String, Vec<usize>)], columns: usize, opts: &PlotOptions) -> String {
    let pts = jittered(points, opts);
    let cols = columns.max(1).min(panels.len().max(1));
    let rows = panels.len().div_ceil(cols).max(1);
    let cell = opts.width / cols as f64;
    let top = 18.0;
    let frame = Frame::fit(&pts, cell);
    let mut out = String::new();
    header(&mut out, opts.width, rows as f64 * (cell + top));
    let r = (opts.radius * 0.75).max(0.5);
    for (n, (kw, hits)) in panels.iter().enumerate() {
        let ox = (n % cols) as f64 * cell;
        let oy = (n / cols) as f64 * (cell + top);
        let _ = writeln!(
            out,
            r#"<g class="panel"><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            ox + 6.0,
            oy + 13.0,
            escape(kw)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{ox:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="none" stroke="#ccc"/>"##,
            oy + top
        );
        for p in &pts {
            let (x, y) = frame.map(p, ox, oy + top);
            let _ = writeln!(out, r##"<circle class="background" cx="{x:.2}" cy="{y:.2}" r="{r:.1}" fill="#d0d0d0"/>"##);
        }
        for &i in hits {
            let (x, y) = frame.map(&pts[i], ox, oy + top);
            let _ = writeln!(out, r##"<circle class="highlight" cx="{x:.2}" cy="{y:.2}" r="{r:.1}" fill="#d62728"/>"##);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
