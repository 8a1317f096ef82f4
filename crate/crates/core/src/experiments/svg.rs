//! Minimal SVG scatter, line and bar charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Markers,
    Line,
    LineMarkers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: &'static str, style: Style, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color, style, points }
    }
}

pub const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let plot_mid = LEFT + (WIDTH - LEFT - RIGHT) / 2.0;
    let _ = writeln!(out, r#"<text x="{plot_mid}" y="24" text-anchor="middle" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        out,
        r#"<text x="{plot_mid}" y="{}" text-anchor="middle">{}</text>"#,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let ymid = TOP + (HEIGHT - TOP - BOTTOM) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="18" y="{ymid}" text-anchor="middle" transform="rotate(-90 18 {ymid})">{}</text>"#,
        escape(y_label)
    );
    let (x0, y0, x1, y1) = (LEFT, HEIGHT - BOTTOM, WIDTH - RIGHT, TOP);
    let _ = writeln!(out, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);
}

fn y_ticks(out: &mut String, frame: &Frame) {
    for i in 0..=TICKS {
        let v = frame.y.0 + (frame.y.1 - frame.y.0) * i as f64 / TICKS as f64;
        let y = frame.py(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, num(v));
    }
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn push(&mut self, series: Series) -> &mut Self {
        self.series.push(series);
        self
    }

    pub fn render(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let frame = Frame { x: bounds(all().map(|p| p.0)), y: bounds(all().map(|p| p.1)) };
        let mut out = String::new();
        header(&mut out, &self.title, &self.x_label, &self.y_label);
        for i in 0..=TICKS {
            let v = frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / TICKS as f64;
            let x = frame.px(v);
            let y0 = HEIGHT - BOTTOM;
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 4.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, num(v));
        }
        y_ticks(&mut out, &frame);

        for s in &self.series {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| (frame.px(x), frame.py(y)))
                .collect();
            if matches!(s.style, Style::Line | Style::LineMarkers) && pts.len() > 1 {
                let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                    d.join(" "),
                    s.color
                );
            }
            if matches!(s.style, Style::Markers | Style::LineMarkers) || pts.len() == 1 {
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, s.color);
                }
            }
        }

        for (i, s) in self.series.iter().enumerate() {
            let x = WIDTH - RIGHT + 14.0;
            let y = TOP + 10.0 + 18.0 * i as f64;
            let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/>"#, y - 5.0, s.color);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 16.0, y + 4.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// A bar chart with one labelled bar per entry.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let ymax = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let frame = Frame { x: (0.0, bars.len().max(1) as f64), y: (0.0, if ymax > 0.0 { ymax * 1.05 } else { 1.0 }) };
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    y_ticks(&mut out, &frame);
    for (i, (label, value)) in bars.iter().enumerate() {
        let (x0, x1) = (frame.px(i as f64 + 0.1), frame.px(i as f64 + 0.9));
        let (top, base) = (frame.py(*value), frame.py(0.0));
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"/>"##,
            x1 - x0,
            base - top
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - BOTTOM + 18.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn scatter_draws_every_finite_point() {
        let mut plot = Plot::new("t", "x", "y & z");
        plot.push(Series::new("frontier", PALETTE[0], Style::LineMarkers, vec![(1.0, 3.0), (2.0, 2.0), (3.0, 1.5)]));
        plot.push(Series::new("extra", PALETTE[1], Style::Markers, vec![(2.5, 2.5), (f64::NAN, 1.0)]));
        let svg = plot.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(count(&svg, "<circle"), 4);
        assert_eq!(count(&svg, "<polyline"), 1);
        assert!(svg.contains("y &amp; z"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn degenerate_inputs_render() {
        let svg = Plot::new("empty", "x", "y").render();
        assert!(svg.contains("</svg>"));
        let mut single = Plot::new("one", "x", "y");
        single.push(Series::new("p", PALETTE[2], Style::Line, vec![(4.0, 4.0)]));
        assert_eq!(count(&single.render(), "<circle"), 1);
        let bars = bar_chart("h", "|M|", "count", &[("1".into(), 5.0), ("2".into(), 1.0)]);
        assert_eq!(count(&bars, r##"fill="#1f77b4""##), 2);
        assert!(bar_chart("h", "x", "y", &[]).contains("</svg>"));
    }
}
