//! Minimal deterministic SVG line plots.

use std::fmt::Write;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            label: label.into(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let x = if self.log_x { x.log10() } else { x };
        let y = if self.log_y { y.log10() } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter_map(|&(x, y)| self.map(x, y));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = hi - lo;
            if d > 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
                (lo - 0.05 * d, hi + 0.05 * d)
            } else {
                let h = 0.5 * lo.abs().max(1e-12);
                (lo - h, hi + h)
            }
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    fn render(&self, out: &mut String, ox: f64, oy: f64) {
        let (x0, x1, y0, y1) = self.bounds();
        let (pw, ph) = (PANEL_W - 2.0 * MARGIN, PANEL_H - 2.0 * MARGIN);
        let sx = |x: f64| ox + MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| oy + MARGIN + (y1 - y) / (y1 - y0) * ph;
        let _ = writeln!(out, r#"<g class="panel">"#);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##,
            ox + MARGIN,
            oy + MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + MARGIN - 14.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + PANEL_H - 10.0,
            escape(&axis_label(&self.x_label, self.log_x))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" transform="rotate(-90 {:.2} {:.2})" text-anchor="middle">{}</text>"#,
            ox + 12.0,
            oy + PANEL_H / 2.0,
            ox + 12.0,
            oy + PANEL_H / 2.0,
            escape(&axis_label(&self.y_label, self.log_y))
        );
        for (v, anchor, x, y) in [
            (x0, "start", sx(x0), oy + PANEL_H - MARGIN + 14.0),
            (x1, "end", sx(x1), oy + PANEL_H - MARGIN + 14.0),
        ] {
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="10">{}</text>"#, tick(v));
        }
        for (v, y) in [(y0, sy(y0)), (y1, sy(y1) + 8.0)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="10">{}</text>"#,
                ox + MARGIN - 4.0,
                tick(v)
            );
        }
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut pts = String::new();
            for &(x, y) in &s.points {
                if let Some((x, y)) = self.map(x, y) {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
                }
            }
            let _ = writeln!(
                out,
                r#"<polyline class="curve" data-label="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                escape(&s.label),
                pts.trim_end()
            );
            if self.series.len() > 1 {
                let ly = oy + MARGIN + 12.0 + 13.0 * k as f64;
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{ly:.2}" font-size="10" fill="{color}">{}</text>"#,
                    ox + MARGIN + 6.0,
                    escape(&s.label)
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
}

fn axis_label(label: &str, log: bool) -> String {
    if log {
        format!("log10 {label}")
    } else {
        label.to_string()
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Lays panels out in a grid with `cols` columns.
pub fn render(title: &str, panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let (w, h) = (PANEL_W * cols.min(panels.len().max(1)) as f64, PANEL_H * rows as f64 + 24.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="8" y="16" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(out, r#"<g class="figure">"#);
    for (k, p) in panels.iter().enumerate() {
        p.render(&mut out, PANEL_W * (k % cols) as f64, 24.0 + PANEL_H * (k / cols) as f64);
    }
    let _ = writeln!(out, "</g>\n</svg>");
    out
}
