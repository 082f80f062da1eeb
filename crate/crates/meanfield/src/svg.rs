// SPDX-License-Identifier: Apache-2.0

//! Static SVG line plot of layer-2 trajectories.

use std::fmt::Write;

use meanfield_core::path::{Event, Trajectory};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 480.0;

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const TICKS: usize = 5;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// A labelled trajectory to draw.
pub struct Series<'a> {
    pub label: String,
    pub path: &'a Trajectory,
}

struct Frame {
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(series: &[Series<'_>]) -> Self {
        let mut f = Frame { t0: 0.0, t1: 0.0, y0: 0.0, y1: 0.0 };
        for r in series.iter().flat_map(|s| &s.path.records) {
            f.t0 = f.t0.min(r.t);
            f.t1 = f.t1.max(r.t);
            f.y0 = f.y0.min(r.y);
            f.y1 = f.y1.max(r.y);
        }
        if f.t1 <= f.t0 {
            f.t1 = f.t0 + 1.0;
        }
        let pad = 0.05 * (f.y1 - f.y0);
        if pad > 0.0 {
            f.y0 -= pad;
            f.y1 += pad;
        } else {
            f.y0 -= 1.0;
            f.y1 += 1.0;
        }
        f
    }

    fn px(&self, t: f64) -> f64 {
        MARGIN_LEFT + (t - self.t0) / (self.t1 - self.t0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Plots `y` against `t` for each series, with a ring at every reset.
pub fn layer_two_plot(title: &str, series: &[Series<'_>]) -> String {
    let f = Frame::fit(series);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{left:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for k in 0..=TICKS {
        let frac = k as f64 / TICKS as f64;
        let t = f.t0 + frac * (f.t1 - f.t0);
        let x = f.px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{bottom:.1}" x2="{x:.2}" y2="{:.1}" stroke="black"/><text x="{x:.2}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 20.0,
            tick_label(t)
        );
        let y = f.y0 + frac * (f.y1 - f.y0);
        let py = f.py(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.2}" x2="{left:.1}" y2="{py:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0,
            tick_label(y)
        );
    }
    if f.y0 < 0.0 && f.y1 > 0.0 {
        let z = f.py(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.1}" y1="{z:.2}" x2="{right:.1}" y2="{z:.2}" stroke="#999999" stroke-dasharray="4 4"/>"##
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">t</text>"#,
        (left + right) / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">Y</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );

    for (i, series) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = String::new();
        for r in &series.path.records {
            let _ = write!(points, "{:.2},{:.2} ", f.px(r.t), f.py(r.y));
        }
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, points.trim_end());
        for r in series.path.records.iter().filter(|r| r.event == Event::Reset2) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="none" stroke="{color}"/>"#,
                f.px(r.t),
                f.py(r.y)
            );
        }
        let ly = top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            right - 150.0,
            right - 126.0,
            right - 120.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
