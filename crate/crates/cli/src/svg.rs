//! Static SVG plots: flat region maps and polylines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::output::g12;

const W: f64 = 640.0;
const H: f64 = 480.0;
const M: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        M + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        H - M - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * M)
    }

    fn axes(&self, s: &mut String, xl: &str, yl: &str) {
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, esc(xl));
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(yl)
        );
        let _ = writeln!(s, r#"<text x="{M}" y="{}" font-size="11">{}</text>"#, H - M + 15.0, g12(self.x.0));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            W - M,
            H - M + 15.0,
            g12(self.x.1)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, M - 4.0, H - M, g12(self.y.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, M - 4.0, M + 10.0, g12(self.y.1));
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open() -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="13">"#) + "\n"
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

/// Grid of labelled cells with event markers on top.
pub fn region_map(
    xl: &str,
    yl: &str,
    xs: &[f64],
    ys: &[f64],
    label: impl Fn(usize, usize) -> String,
    events: &[(f64, f64, String)],
) -> String {
    let frame = Frame::new(bounds(xs.iter().copied()), bounds(ys.iter().copied()));
    let half = |v: &[f64], k: usize| -> (f64, f64) {
        let lo = if k == 0 { v[0] } else { 0.5 * (v[k - 1] + v[k]) };
        let hi = if k + 1 == v.len() { v[k] } else { 0.5 * (v[k] + v[k + 1]) };
        (lo, hi)
    };
    let mut colours = BTreeMap::new();
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let n = colours.len();
            colours.entry(label(i, j)).or_insert(PALETTE[n % PALETTE.len()]);
        }
    }
    let mut s = open();
    for i in 0..xs.len() {
        let (x0, x1) = half(xs, i);
        for j in 0..ys.len() {
            let (y0, y1) = half(ys, j);
            let (a, b) = (frame.px(x0), frame.px(x1));
            let (c, d) = (frame.py(y1), frame.py(y0));
            let _ = writeln!(
                s,
                r#"<rect x="{a:.2}" y="{c:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                (b - a).max(1.0),
                (d - c).max(1.0),
                colours[&label(i, j)]
            );
        }
    }
    for (x, y, name) in events {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"><title>{}</title></circle>"#,
            frame.px(*x),
            frame.py(*y),
            esc(name)
        );
    }
    frame.axes(&mut s, xl, yl);
    for (k, (name, c)) in colours.iter().enumerate() {
        let y = M + 14.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/>"#, W - M + 5.0, y);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10">{}</text>"#, W - M + 18.0, y + 9.0, esc(name));
    }
    s.push_str("</svg>\n");
    s
}

/// Named polylines; NaN entries break a line.
pub fn lines(xl: &str, yl: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let frame = Frame::new(bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)));
    let mut s = open();
    for (k, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for run in pts.split(|p| !p.0.is_finite() || !p.1.is_finite()) {
            if run.is_empty() {
                continue;
            }
            let d: Vec<String> = run
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                d.join(" ")
            );
        }
        let y = M + 14.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, W - M + 5.0, y);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10">{}</text>"#, W - M + 18.0, y + 9.0, esc(name));
    }
    frame.axes(&mut s, xl, yl);
    s.push_str("</svg>\n");
    s
}
