//! Standalone SVG 1.1 plots. Output bytes depend only on the input data.

use std::fmt::Write as _;
use std::path::Path;

use super::write_text;
use crate::error::{Error, Result};
use crate::shape::ChainShape;
use crate::sim::ResponseCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Tick step of the form {1, 2, 5} x 10^k giving at most ~8 ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    origin: (f64, f64),
    scale: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), equal_aspect: bool) -> Self {
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let (mut x, mut y) = (padded_range(x.0, x.1), padded_range(y.0, y.1));
        let mut sx = pw / (x.1 - x.0);
        let mut sy = ph / (y.1 - y.0);
        if equal_aspect {
            let s = sx.min(sy);
            let grow = |r: (f64, f64), total: f64| {
                let mid = 0.5 * (r.0 + r.1);
                (mid - 0.5 * total / s, mid + 0.5 * total / s)
            };
            x = grow(x, pw);
            y = grow(y, ph);
            sx = s;
            sy = s;
        }
        Self {
            x,
            y,
            origin: (LEFT, HEIGHT - BOTTOM),
            scale: (sx, sy),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.origin.0 + (x - self.x.0) * self.scale.0
    }

    fn py(&self, y: f64) -> f64 {
        self.origin.1 - (y - self.y.0) * self.scale.1
    }

    fn points(&self, pts: impl Iterator<Item = (f64, f64)>) -> String {
        let coords: Vec<String> = pts
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        coords.join(" ")
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, y0) = self.origin;
        let (x1, y1) = (WIDTH - RIGHT, TOP);
        writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
            x1 - x0,
            y0 - y1
        )
        .unwrap();
        let step = nice_step(self.x.1 - self.x.0);
        let mut t = (self.x.0 / step).ceil() * step;
        while t <= self.x.1 + 1e-9 * step {
            let p = self.px(t);
            writeln!(
                out,
                r##"<line x1="{p:.2}" y1="{y0:.2}" x2="{p:.2}" y2="{:.2}" stroke="#000"/>"##,
                y0 + 5.0
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{p:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                y0 + 19.0,
                tick_label(t, step)
            )
            .unwrap();
            t += step;
        }
        let step = nice_step(self.y.1 - self.y.0);
        let mut t = (self.y.0 / step).ceil() * step;
        while t <= self.y.1 + 1e-9 * step {
            let p = self.py(t);
            writeln!(
                out,
                r##"<line x1="{:.2}" y1="{p:.2}" x2="{x0:.2}" y2="{p:.2}" stroke="#000"/>"##,
                x0 - 5.0
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
                x0 - 8.0,
                p + 4.0,
                tick_label(t, step)
            )
            .unwrap();
            t += step;
        }
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            0.5 * (x0 + x1),
            HEIGHT - 12.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {:.2})">{}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1),
            escape(y_label)
        )
        .unwrap();
    }
}

fn open(out: &mut String) {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    points.fold(
        ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY)),
        |((x0, x1), (y0, y1)), (x, y)| ((x0.min(x), x1.max(x)), (y0.min(y), y1.max(y))),
    )
}

/// Voltage-vs-angle plot, one polyline per curve, legend in input order.
pub fn plot_curves(curves: &[ResponseCurve]) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let all = curves
        .iter()
        .flat_map(|c| c.samples().iter().map(|s| (s.angle_deg, s.voltage_v)));
    let (xr, (ylo, yhi)) = bounds(all);
    let frame = Frame::new(xr, (ylo.min(0.0), yhi), false);

    let mut out = String::new();
    open(&mut out);
    frame.axes(&mut out, "Joint angle (deg)", "Sensor output (V)");
    for (i, c) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            frame.points(c.samples().iter().map(|s| (s.angle_deg, s.voltage_v)))
        )
        .unwrap();
    }
    writeln!(out, r#"<g class="legend">"#).unwrap();
    for (i, c) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let y = TOP + 18.0 + 18.0 * i as f64;
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"/>"#,
            LEFT + 12.0,
            LEFT + 36.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            LEFT + 42.0,
            y + 4.0,
            escape(&c.label())
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

fn plot_xy(points: &[(f64, f64)], marker: Option<(f64, f64)>, title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let (xr, yr) = bounds(points.iter().copied());
    let frame = Frame::new(xr, yr, true);
    let mut out = String::new();
    open(&mut out);
    frame.axes(&mut out, "x (mm)", "y (mm)");
    writeln!(
        out,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        frame.points(points.iter().copied())
    )
    .unwrap();
    if let Some((x, y)) = marker {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="5" fill="#d62728"/>"##,
            frame.px(x),
            frame.py(y)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13">{}</text>"#,
        LEFT + 10.0,
        TOP + 18.0,
        escape(title)
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

/// Reflector cross-section outline.
pub fn plot_outline(points: &[(f64, f64)], title: &str) -> Result<String> {
    plot_xy(points, None, title)
}

/// Backbone polyline with a tip marker.
pub fn plot_shape(shape: &ChainShape) -> Result<String> {
    let tip = (shape.tip_pose.x, shape.tip_pose.y);
    plot_xy(&shape.joint_positions, Some(tip), "Reconstructed backbone")
}

pub fn emit_plot(curves: &[ResponseCurve], path: &Path) -> Result<()> {
    write_text(path, &plot_curves(curves)?)
}
