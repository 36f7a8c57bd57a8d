use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{plots, Background, ChartSpec};

/// Fixed two-decimal coordinate formatting (no negative zero).
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        String::from("0.00")
    } else {
        s
    }
}

/// Compact value label: integers without decimals, otherwise up to three.
pub(crate) fn value_label(v: f64) -> String {
    if v.abs() >= 1e15 || (v != 0.0 && v.abs() < 1e-3) {
        return format!("{v:.2e}");
    }
    if libm::fabs(v - libm::round(v)) < 1e-9 {
        return format!("{}", libm::round(v) as i64);
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    String::from(s)
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn truncate_label(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        String::from(s)
    } else {
        let mut t: String = s.chars().take(max.saturating_sub(1)).collect();
        t.push('…');
        t
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Anchor {
    Start,
    Middle,
    End,
}

impl Anchor {
    fn name(self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Middle => "middle",
            Anchor::End => "end",
        }
    }
}

/// Minimal SVG element writer.
pub(crate) struct Svg {
    out: String,
}

impl Svg {
    pub(crate) fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let _ = write!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}""#,
            num(x),
            num(y),
            num(w.max(0.0)),
            num(h.max(0.0)),
            escape(fill)
        );
        if let Some(s) = stroke {
            let _ = write!(self.out, r#" stroke="{}" stroke-width="1""#, escape(s));
        }
        self.out.push_str("/>\n");
    }

    pub(crate) fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, extra: &str) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}"{}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            escape(stroke),
            num(width),
            extra
        );
    }

    pub(crate) fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, stroke: Option<&str>) {
        let _ = write!(
            self.out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}""#,
            num(cx),
            num(cy),
            num(r),
            escape(fill)
        );
        if let Some(s) = stroke {
            let _ = write!(self.out, r#" stroke="{}" stroke-width="1""#, escape(s));
        }
        self.out.push_str("/>\n");
    }

    pub(crate) fn path(&mut self, d: &str, fill: &str, stroke: Option<&str>, width: f64) {
        let _ = write!(self.out, r#"<path d="{}" fill="{}""#, d, escape(fill));
        if let Some(s) = stroke {
            let _ = write!(self.out, r#" stroke="{}" stroke-width="{}""#, escape(s), num(width));
        }
        self.out.push_str("/>\n");
    }

    pub(crate) fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: alloc::vec::Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            pts.join(" "),
            escape(stroke),
            num(width)
        );
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn text(&mut self, x: f64, y: f64, content: &str, size: f64, anchor: Anchor, rotate: f64, fill: &str) {
        let _ = write!(
            self.out,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{}" fill="{}""#,
            num(x),
            num(y),
            num(size),
            anchor.name(),
            escape(fill)
        );
        if rotate != 0.0 {
            let _ = write!(self.out, r#" transform="rotate({} {} {})""#, num(rotate), num(x), num(y));
        }
        let _ = writeln!(self.out, ">{}</text>", escape(content));
    }

    pub(crate) fn raw(&mut self, s: &str) {
        self.out.push_str(s);
    }
}

/// Plot-area bounds in canvas units.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Frame {
    pub(crate) fn width(&self) -> f64 {
        self.right - self.left
    }
    pub(crate) fn height(&self) -> f64 {
        self.bottom - self.top
    }
}

pub(crate) const TEXT_COLOR: &str = "#333333";
pub(crate) const AXIS_COLOR: &str = "#666666";
pub(crate) const GRID_COLOR: &str = "#e0e0e0";
pub(crate) const LEGEND_WIDTH: f64 = 200.0;

fn default_title(kind: &str) -> String {
    let words = kind.replace('_', " ");
    let mut chars = words.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Draws the spec on a fixed canvas. Output depends only on the spec and the
/// background, so identical inputs give identical bytes.
pub fn render_svg(spec: &ChartSpec, background: Background) -> String {
    let o = &spec.options;
    let (w, h) = (o.canvas_width as f64, o.canvas_height as f64);
    let mut svg = Svg { out: String::new() };
    let _ = writeln!(svg.out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="Helvetica, Arial, sans-serif">"#,
        o.canvas_width, o.canvas_height
    );
    let _ = writeln!(svg.out, "<title>{}</title>", escape(&spec.data.kind));
    if background == Background::White {
        let _ = writeln!(
            svg.out,
            r##"<rect id="background" x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
            num(w),
            num(h)
        );
    }
    let mut top = 30.0;
    if o.title.visible {
        let text = o.title.text.clone().unwrap_or_else(|| default_title(&spec.data.kind));
        svg.text(w / 2.0, 20.0 + o.title.fontsize, &text, o.title.fontsize, Anchor::Middle, 0.0, TEXT_COLOR);
        top = 40.0 + o.title.fontsize * 1.5;
    }
    let legend = o.legend_visible && plots::has_legend(spec);
    let frame = Frame {
        left: 70.0 + o.labels.fontsize * 2.0 + o.ticks.fontsize * 2.0,
        top,
        right: w - 30.0 - if legend { LEGEND_WIDTH } else { 0.0 },
        bottom: h - 50.0 - o.labels.fontsize * 2.0 - o.ticks.fontsize * 2.0,
    };
    if spec.data.rows.is_empty() {
        svg.line(frame.left, frame.top, frame.left, frame.bottom, AXIS_COLOR, 1.0, "");
        svg.line(frame.left, frame.bottom, frame.right, frame.bottom, AXIS_COLOR, 1.0, "");
        svg.text(
            (frame.left + frame.right) / 2.0,
            (frame.top + frame.bottom) / 2.0,
            "no data",
            o.labels.fontsize * 1.5,
            Anchor::Middle,
            0.0,
            AXIS_COLOR,
        );
    } else {
        plots::draw(&mut svg, spec, frame, legend);
    }
    svg.raw("</svg>\n");
    svg.out
}
