use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::layout::{box_stats, force_layout, kde, linear_ticks, log_ticks, place_words, swarm_offsets};
use super::svg::{num, truncate_label, value_label, Anchor, Frame, Svg, AXIS_COLOR, GRID_COLOR, TEXT_COLOR};
use super::{log_axes, ChartSpec, ChartType, Orientation};
use crate::result::{AnalysisResult, NetworkData, NetworkNode, ResultShape};

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

fn series_color(i: usize, primary: &str) -> String {
    if i == 0 {
        String::from(primary)
    } else {
        String::from(PALETTE[i % PALETTE.len()])
    }
}

/// Columns of a table holding x, y and (optionally) group values for a scatter.
pub(crate) fn scatter_columns(data: &AnalysisResult) -> (Option<usize>, usize, Option<usize>) {
    let find = |name: &str| data.columns.iter().position(|c| c == name);
    match (find("x"), find("y")) {
        (Some(x), Some(y)) => (Some(x), y, find("cluster")),
        _ if data.columns.len() >= 2 => (Some(0), 1, None),
        _ => (None, 0, None),
    }
}

/// Column indices whose values sit on a log axis.
pub(crate) fn plotted_columns(data: &AnalysisResult, chart: ChartType, log_x: bool, log_y: bool) -> Vec<usize> {
    if chart == ChartType::Scatter {
        let (x, y, _) = scatter_columns(data);
        let mut cols = Vec::new();
        if log_x {
            cols.extend(x);
        }
        if log_y {
            cols.push(y);
        }
        cols
    } else {
        (0..data.columns.len()).collect()
    }
}

/// Groups of observations for box/violin/swarm: rows of a distribution, or
/// the columns of a table.
fn observation_groups(data: &AnalysisResult) -> Vec<(String, Vec<f64>)> {
    match data.shape {
        ResultShape::Distribution => data.rows.iter().map(|r| (r.label.clone(), r.values.clone())).collect(),
        ResultShape::Table => data
            .columns
            .iter()
            .enumerate()
            .map(|(c, name)| (name.clone(), data.rows.iter().filter_map(|r| r.values.get(c).copied()).collect()))
            .collect(),
    }
}

/// Series names and per-category values for bar/line/stack.
fn series(data: &AnalysisResult) -> (Vec<String>, Vec<Vec<f64>>) {
    match data.shape {
        ResultShape::Table => (
            data.columns.clone(),
            data.rows.iter().map(|r| r.values.clone()).collect(),
        ),
        ResultShape::Distribution => (
            vec![String::from("count")],
            data.primary_values().into_iter().map(|v| vec![v]).collect(),
        ),
    }
}

fn groups_of(spec: &ChartSpec) -> Vec<usize> {
    match spec.options.chart_type {
        ChartType::Network => network_of(&spec.data).nodes.iter().filter_map(|n| n.group).collect(),
        ChartType::Scatter => {
            let (_, _, g) = scatter_columns(&spec.data);
            g.map(|g| spec.data.rows.iter().map(|r| r.values[g] as usize).collect()).unwrap_or_default()
        }
        _ => Vec::new(),
    }
}

fn distinct_groups(groups: &[usize]) -> Vec<usize> {
    let mut g = groups.to_vec();
    g.sort_unstable();
    g.dedup();
    g
}

pub(crate) fn has_legend(spec: &ChartSpec) -> bool {
    match spec.options.chart_type {
        ChartType::Pie | ChartType::Doughnut | ChartType::Worldmap => true,
        ChartType::Bar | ChartType::Line | ChartType::Stack => {
            spec.data.shape == ResultShape::Table && spec.data.columns.len() > 1
        }
        ChartType::Network | ChartType::Scatter => distinct_groups(&groups_of(spec)).len() > 1,
        _ => false,
    }
}

fn legend(svg: &mut Svg, spec: &ChartSpec, frame: Frame, entries: &[(String, String)]) {
    let x = frame.right + 20.0;
    let size = spec.options.ticks.fontsize;
    let step = size * 1.6;
    let max_entries = ((frame.height() / step) as usize).max(1);
    for (i, (label, color)) in entries.iter().take(max_entries).enumerate() {
        let y = frame.top + i as f64 * step;
        svg.rect(x, y, size, size, color, None);
        svg.text(x + size * 1.5, y + size * 0.85, &truncate_label(label, 24), size, Anchor::Start, 0.0, TEXT_COLOR);
    }
    if entries.len() > max_entries {
        let y = frame.top + max_entries as f64 * step;
        let more = format!("+{} more", entries.len() - max_entries);
        svg.text(x, y + size * 0.85, &more, size, Anchor::Start, 0.0, AXIS_COLOR);
    }
}

/// Numeric axis mapping, linear or base-10 logarithmic.
#[derive(Debug, Clone, Copy)]
struct ValueScale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl ValueScale {
    fn fit(values: impl Iterator<Item = f64>, log: bool, include_zero: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            lo = if log { 1.0 } else { 0.0 };
            hi = lo + 1.0;
        }
        if log {
            let lo = libm::pow(10.0, libm::floor(libm::log10(lo.max(1e-300))));
            let mut hi = libm::pow(10.0, libm::ceil(libm::log10(hi.max(1e-300))));
            if hi <= lo {
                hi = lo * 10.0;
            }
            return Self { lo, hi, log };
        }
        if include_zero {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        let ticks = linear_ticks(lo, hi);
        let step = if ticks.len() > 1 { ticks[1] - ticks[0] } else { 1.0 };
        let lo = if ticks[0] > lo { ticks[0] - step } else { ticks[0] };
        let last = ticks[ticks.len() - 1];
        let hi = if last < hi { last + step } else { last };
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`.
    fn t(&self, v: f64) -> f64 {
        if self.log {
            (libm::log10(v.max(self.lo)) - libm::log10(self.lo)) / (libm::log10(self.hi) - libm::log10(self.lo))
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            log_ticks(self.lo, self.hi)
        } else {
            linear_ticks(self.lo, self.hi)
        }
    }

    fn baseline(&self) -> f64 {
        if self.log {
            self.lo
        } else {
            0.0f64.clamp(self.lo, self.hi)
        }
    }
}

/// Category/value coordinate system of bar-like charts.
struct CatFrame {
    frame: Frame,
    n: usize,
    horizontal: bool,
    scale: ValueScale,
}

impl CatFrame {
    fn band(&self, i: usize) -> (f64, f64) {
        let (a, len) = if self.horizontal { (self.frame.top, self.frame.height()) } else { (self.frame.left, self.frame.width()) };
        let w = len / self.n.max(1) as f64;
        (a + w * i as f64, a + w * (i + 1) as f64)
    }

    fn val(&self, v: f64) -> f64 {
        let t = self.scale.t(v).clamp(0.0, 1.0);
        if self.horizontal {
            self.frame.left + t * self.frame.width()
        } else {
            self.frame.bottom - t * self.frame.height()
        }
    }

    fn point(&self, c: f64, v: f64) -> (f64, f64) {
        if self.horizontal {
            (self.val(v), c)
        } else {
            (c, self.val(v))
        }
    }

    fn rect(&self, c0: f64, c1: f64, v0: f64, v1: f64) -> (f64, f64, f64, f64) {
        let (p0, p1) = (self.val(v0), self.val(v1));
        let (lo, hi) = if p0 <= p1 { (p0, p1) } else { (p1, p0) };
        if self.horizontal {
            (lo, c0, hi - lo, c1 - c0)
        } else {
            (c0, lo, c1 - c0, hi - lo)
        }
    }
}

fn axis_titles(spec: &ChartSpec, default_x: &str, default_y: &str) -> (String, String) {
    let labels = &spec.options.labels;
    (
        labels.x_label.clone().unwrap_or_else(|| String::from(default_x)),
        labels.y_label.clone().unwrap_or_else(|| String::from(default_y)),
    )
}

fn draw_axis_titles(svg: &mut Svg, spec: &ChartSpec, frame: Frame, x: &str, y: &str) {
    let size = spec.options.labels.fontsize;
    let h = spec.options.canvas_height as f64;
    svg.text((frame.left + frame.right) / 2.0, h - 20.0, x, size, Anchor::Middle, 0.0, TEXT_COLOR);
    let cx = 20.0 + size;
    let cy = (frame.top + frame.bottom) / 2.0;
    svg.text(cx, cy, y, size, Anchor::Middle, -90.0, TEXT_COLOR);
}

/// Value axis with ticks and optional grid lines.
fn value_axis(svg: &mut Svg, spec: &ChartSpec, cf: &CatFrame) {
    let f = cf.frame;
    let size = spec.options.ticks.fontsize;
    for t in cf.scale.ticks() {
        if t < cf.scale.lo - 1e-12 || t > cf.scale.hi + 1e-12 {
            continue;
        }
        let p = cf.val(t);
        if cf.horizontal {
            if spec.options.grid_visible {
                svg.line(p, f.top, p, f.bottom, GRID_COLOR, 1.0, "");
            }
            svg.line(p, f.bottom, p, f.bottom + 5.0, AXIS_COLOR, 1.0, "");
            svg.text(p, f.bottom + 8.0 + size, &value_label(t), size, Anchor::Middle, 0.0, TEXT_COLOR);
        } else {
            if spec.options.grid_visible {
                svg.line(f.left, p, f.right, p, GRID_COLOR, 1.0, "");
            }
            svg.line(f.left - 5.0, p, f.left, p, AXIS_COLOR, 1.0, "");
            svg.text(f.left - 8.0, p + size * 0.35, &value_label(t), size, Anchor::End, 0.0, TEXT_COLOR);
        }
    }
    svg.line(f.left, f.bottom, f.right, f.bottom, AXIS_COLOR, 1.0, "");
    svg.line(f.left, f.top, f.left, f.bottom, AXIS_COLOR, 1.0, "");
}

/// Category labels, thinned when they would overlap.
fn category_axis(svg: &mut Svg, spec: &ChartSpec, cf: &CatFrame, labels: &[String]) {
    let f = cf.frame;
    let size = spec.options.ticks.fontsize;
    let rotation = spec.options.ticks.rotation_degrees;
    let axis_len = if cf.horizontal { f.height() } else { f.width() };
    let longest = labels.iter().map(|l| l.chars().count().min(24)).max().unwrap_or(1) as f64;
    let per_label = if cf.horizontal || rotation.abs() >= 30.0 { size * 1.4 } else { size * 0.6 * longest + 8.0 };
    let capacity = ((axis_len / per_label) as usize).max(1);
    let step = labels.len().div_ceil(capacity).max(1);
    for (i, label) in labels.iter().enumerate() {
        if i % step != 0 {
            continue;
        }
        let (a, b) = cf.band(i);
        let c = (a + b) / 2.0;
        let text = truncate_label(label, 24);
        if cf.horizontal {
            svg.text(f.left - 8.0, c + size * 0.35, &text, size, Anchor::End, rotation, TEXT_COLOR);
        } else {
            let anchor = if rotation == 0.0 { Anchor::Middle } else if rotation < 0.0 { Anchor::End } else { Anchor::Start };
            svg.text(c, f.bottom + 8.0 + size, &text, size, anchor, rotation, TEXT_COLOR);
        }
    }
}

fn cat_frame(spec: &ChartSpec, frame: Frame, n: usize, values: impl Iterator<Item = f64>, include_zero: bool) -> CatFrame {
    let (log_x, log_y) = log_axes(&spec.options);
    let horizontal = spec.options.orientation == Orientation::Horizontal;
    CatFrame { frame, n, horizontal, scale: ValueScale::fit(values, log_x || log_y, include_zero) }
}

pub(crate) fn draw(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    match spec.options.chart_type {
        ChartType::Bar | ChartType::Stack => bars(svg, spec, frame, with_legend),
        ChartType::Line => lines(svg, spec, frame, with_legend),
        ChartType::Pie | ChartType::Doughnut => pie(svg, spec, frame, with_legend),
        ChartType::Box | ChartType::Violin | ChartType::Swarm => distributions(svg, spec, frame),
        ChartType::Scatter => scatter(svg, spec, frame, with_legend),
        ChartType::Wordcloud => wordcloud(svg, spec, frame),
        ChartType::Network => network(svg, spec, frame, with_legend),
        ChartType::Worldmap => worldmap(svg, spec, frame, with_legend),
    }
}

fn value_axis_name(data: &AnalysisResult) -> String {
    if data.columns.len() == 1 {
        data.columns[0].clone()
    } else {
        String::from("value")
    }
}

fn oriented_titles(svg: &mut Svg, spec: &ChartSpec, frame: Frame, category: &str, value: &str) {
    let horizontal = spec.options.orientation == Orientation::Horizontal;
    let (x, y) = if horizontal { axis_titles(spec, value, category) } else { axis_titles(spec, category, value) };
    draw_axis_titles(svg, spec, frame, &x, &y);
}

fn bars(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let stacked = o.chart_type == ChartType::Stack;
    let (names, values) = series(&spec.data);
    let labels: Vec<String> = spec.data.rows.iter().map(|r| r.label.clone()).collect();
    let extent: Vec<f64> = if stacked {
        values.iter().map(|row| row.iter().filter(|v| **v > 0.0).sum()).collect()
    } else {
        values.iter().flatten().copied().collect()
    };
    let cf = cat_frame(spec, frame, labels.len(), extent.into_iter(), true);
    value_axis(svg, spec, &cf);
    let base = cf.scale.baseline();
    let k = names.len().max(1);
    for (i, row) in values.iter().enumerate() {
        let (a, b) = cf.band(i);
        let pad = (b - a) * 0.1;
        let mut running = base;
        for (s, v) in row.iter().enumerate() {
            let color = series_color(s, &o.colors.bar);
            let (x, y, w, h) = if stacked {
                let v = v.max(0.0);
                let top = if cf.scale.log && running <= cf.scale.lo { v } else { running + v };
                let r = cf.rect(a + pad, b - pad, running, top);
                running = top;
                r
            } else {
                let width = (b - a - 2.0 * pad) / k as f64;
                let c0 = a + pad + width * s as f64;
                cf.rect(c0, c0 + width, base, *v)
            };
            svg.rect(x, y, w, h, &color, Some(&o.colors.border));
        }
    }
    category_axis(svg, spec, &cf, &labels);
    oriented_titles(svg, spec, frame, &spec.data.label_name, &value_axis_name(&spec.data));
    if with_legend {
        let entries: Vec<(String, String)> =
            names.iter().enumerate().map(|(s, n)| (n.clone(), series_color(s, &o.colors.bar))).collect();
        legend(svg, spec, frame, &entries);
    }
}

fn lines(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let (names, values) = series(&spec.data);
    let labels: Vec<String> = spec.data.rows.iter().map(|r| r.label.clone()).collect();
    let cf = cat_frame(spec, frame, labels.len(), values.iter().flatten().copied(), true);
    value_axis(svg, spec, &cf);
    for s in 0..names.len() {
        let points: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .filter_map(|(i, row)| {
                let (a, b) = cf.band(i);
                row.get(s).map(|v| cf.point((a + b) / 2.0, *v))
            })
            .collect();
        let color = series_color(s, &o.colors.line);
        svg.polyline(&points, &color, 2.0);
        let marker = series_color(s, &o.colors.marker);
        for (x, y) in points {
            svg.circle(x, y, 4.0, &marker, None);
        }
    }
    category_axis(svg, spec, &cf, &labels);
    oriented_titles(svg, spec, frame, &spec.data.label_name, &value_axis_name(&spec.data));
    if with_legend {
        let entries: Vec<(String, String)> =
            names.iter().enumerate().map(|(s, n)| (n.clone(), series_color(s, &o.colors.line))).collect();
        legend(svg, spec, frame, &entries);
    }
}

fn arc_point(cx: f64, cy: f64, r: f64, angle: f64) -> (f64, f64) {
    (cx + r * libm::sin(angle), cy - r * libm::cos(angle))
}

/// Ring (or pie, when `inner` is 0) sector path from `a0` to `a1` radians,
/// clockwise from twelve o'clock. Callers split sectors wider than π.
fn sector(cx: f64, cy: f64, outer: f64, inner: f64, a0: f64, a1: f64) -> String {
    let (x0, y0) = arc_point(cx, cy, outer, a0);
    let (x1, y1) = arc_point(cx, cy, outer, a1);
    let mut d = format!(
        "M {} {} A {} {} 0 0 1 {} {}",
        num(x0),
        num(y0),
        num(outer),
        num(outer),
        num(x1),
        num(y1)
    );
    if inner > 0.0 {
        let (x2, y2) = arc_point(cx, cy, inner, a1);
        let (x3, y3) = arc_point(cx, cy, inner, a0);
        d.push_str(&format!(
            " L {} {} A {} {} 0 0 0 {} {} Z",
            num(x2),
            num(y2),
            num(inner),
            num(inner),
            num(x3),
            num(y3)
        ));
    } else {
        d.push_str(&format!(" L {} {} Z", num(cx), num(cy)));
    }
    d
}

fn pie(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let slices: Vec<(String, f64)> = spec
        .data
        .rows
        .iter()
        .zip(spec.data.primary_values())
        .filter(|(_, v)| *v > 0.0)
        .map(|(r, v)| (r.label.clone(), v))
        .collect();
    let total: f64 = slices.iter().map(|s| s.1).sum();
    let (cx, cy) = ((frame.left + frame.right) / 2.0, (frame.top + frame.bottom) / 2.0);
    let outer = frame.width().min(frame.height()) / 2.0 * 0.9;
    let inner = if o.chart_type == ChartType::Doughnut { outer * 0.55 } else { 0.0 };
    if total <= 0.0 {
        svg.text(cx, cy, "no positive values", o.labels.fontsize * 1.5, Anchor::Middle, 0.0, AXIS_COLOR);
        return;
    }
    let mut angle = 0.0;
    let mut entries = Vec::new();
    for (i, (label, v)) in slices.iter().enumerate() {
        let sweep = 2.0 * PI * v / total;
        let color = series_color(i, &o.colors.bar);
        let pieces = libm::ceil(sweep / (PI * 0.99)).max(1.0) as usize;
        for p in 0..pieces {
            let a0 = angle + sweep * p as f64 / pieces as f64;
            let a1 = angle + sweep * (p + 1) as f64 / pieces as f64;
            svg.path(&sector(cx, cy, outer, inner, a0, a1), &color, Some(&o.colors.border), 1.0);
        }
        let share = v / total;
        if share >= 0.03 {
            let mid = angle + sweep / 2.0;
            let r = if inner > 0.0 { (outer + inner) / 2.0 } else { outer * 0.65 };
            let (x, y) = arc_point(cx, cy, r, mid);
            let text = format!("{:.1}%", share * 100.0);
            svg.text(x, y + o.ticks.fontsize * 0.35, &text, o.ticks.fontsize, Anchor::Middle, 0.0, "#ffffff");
        }
        entries.push((format!("{label} ({})", value_label(*v)), color));
        angle += sweep;
    }
    if with_legend {
        legend(svg, spec, frame, &entries);
    }
}

fn distributions(svg: &mut Svg, spec: &ChartSpec, frame: Frame) {
    let o = &spec.options;
    let groups = observation_groups(&spec.data);
    let labels: Vec<String> = groups.iter().map(|g| g.0.clone()).collect();
    let cf = cat_frame(spec, frame, groups.len(), groups.iter().flat_map(|g| g.1.iter().copied()), false);
    value_axis(svg, spec, &cf);
    for (i, (_, values)) in groups.iter().enumerate() {
        if values.is_empty() {
            continue;
        }
        let (a, b) = cf.band(i);
        let c = (a + b) / 2.0;
        let half = (b - a) * 0.35;
        match o.chart_type {
            ChartType::Box => {
                let Some(s) = box_stats(values) else { continue };
                let (x, y, w, h) = cf.rect(c - half, c + half, s.q1, s.q3);
                svg.rect(x, y, w, h, &o.colors.bar, Some(&o.colors.border));
                for (v0, v1) in [(s.whisker_lo, s.q1), (s.q3, s.whisker_hi)] {
                    let (p0, p1) = (cf.point(c, v0), cf.point(c, v1));
                    svg.line(p0.0, p0.1, p1.0, p1.1, &o.colors.border, 1.0, "");
                }
                for v in [s.whisker_lo, s.whisker_hi] {
                    let (p0, p1) = (cf.point(c - half / 2.0, v), cf.point(c + half / 2.0, v));
                    svg.line(p0.0, p0.1, p1.0, p1.1, &o.colors.border, 1.0, "");
                }
                let (m0, m1) = (cf.point(c - half, s.median), cf.point(c + half, s.median));
                svg.line(m0.0, m0.1, m1.0, m1.1, &o.colors.line, 2.0, "");
                for v in values.iter().filter(|v| **v < s.whisker_lo || **v > s.whisker_hi) {
                    let (x, y) = cf.point(c, *v);
                    svg.circle(x, y, 3.0, &o.colors.marker, None);
                }
            }
            ChartType::Violin => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi <= lo {
                    let (p0, p1) = (cf.point(c - half, lo), cf.point(c + half, lo));
                    svg.line(p0.0, p0.1, p1.0, p1.1, &o.colors.border, 2.0, "");
                    continue;
                }
                let density = kde(values, lo, hi, 40);
                let peak = density.iter().map(|d| d.1).fold(0.0, f64::max).max(1e-300);
                let mut d = String::new();
                for (j, (v, dens)) in density.iter().enumerate() {
                    let (x, y) = cf.point(c + half * dens / peak, *v);
                    d.push_str(&format!("{} {} {} ", if j == 0 { "M" } else { "L" }, num(x), num(y)));
                }
                for (v, dens) in density.iter().rev() {
                    let (x, y) = cf.point(c - half * dens / peak, *v);
                    d.push_str(&format!("L {} {} ", num(x), num(y)));
                }
                d.push('Z');
                svg.path(&d, &o.colors.bar, Some(&o.colors.border), 1.0);
                if let Some(s) = box_stats(values) {
                    let (m0, m1) = (cf.point(c - half / 3.0, s.median), cf.point(c + half / 3.0, s.median));
                    svg.line(m0.0, m0.1, m1.0, m1.1, &o.colors.line, 2.0, "");
                }
            }
            _ => {
                let positions: Vec<f64> = values.iter().map(|v| cf.val(*v)).collect();
                let offsets = swarm_offsets(&positions, 7.0, half);
                for (p, off) in positions.iter().zip(&offsets) {
                    let (x, y) = if cf.horizontal { (*p, c + off) } else { (c + off, *p) };
                    svg.circle(x, y, 3.5, &o.colors.marker, Some(&o.colors.border));
                }
            }
        }
    }
    category_axis(svg, spec, &cf, &labels);
    oriented_titles(svg, spec, frame, &spec.data.label_name, &value_axis_name(&spec.data));
}

fn scatter(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let data = &spec.data;
    let (xc, yc, gc) = scatter_columns(data);
    let numeric_labels: Option<Vec<f64>> = data.rows.iter().map(|r| r.label.trim().parse::<f64>().ok()).collect();
    let xs: Vec<f64> = match xc {
        Some(c) => data.rows.iter().map(|r| r.values[c]).collect(),
        None => numeric_labels.clone().unwrap_or_else(|| (1..=data.rows.len()).map(|i| i as f64).collect()),
    };
    let ys: Vec<f64> = data.rows.iter().map(|r| r.values.get(yc).copied().unwrap_or(0.0)).collect();
    let (log_x, log_y) = log_axes(o);
    let sx = ValueScale::fit(xs.iter().copied(), log_x, false);
    let sy = ValueScale::fit(ys.iter().copied(), log_y, false);
    let px = |v: f64| frame.left + sx.t(v).clamp(0.0, 1.0) * frame.width();
    let py = |v: f64| frame.bottom - sy.t(v).clamp(0.0, 1.0) * frame.height();
    let size = o.ticks.fontsize;
    for t in sx.ticks() {
        if t < sx.lo - 1e-12 || t > sx.hi + 1e-12 {
            continue;
        }
        if o.grid_visible {
            svg.line(px(t), frame.top, px(t), frame.bottom, GRID_COLOR, 1.0, "");
        }
        svg.text(px(t), frame.bottom + 8.0 + size, &value_label(t), size, Anchor::Middle, o.ticks.rotation_degrees, TEXT_COLOR);
    }
    for t in sy.ticks() {
        if t < sy.lo - 1e-12 || t > sy.hi + 1e-12 {
            continue;
        }
        if o.grid_visible {
            svg.line(frame.left, py(t), frame.right, py(t), GRID_COLOR, 1.0, "");
        }
        svg.text(frame.left - 8.0, py(t) + size * 0.35, &value_label(t), size, Anchor::End, 0.0, TEXT_COLOR);
    }
    svg.line(frame.left, frame.bottom, frame.right, frame.bottom, AXIS_COLOR, 1.0, "");
    svg.line(frame.left, frame.top, frame.left, frame.bottom, AXIS_COLOR, 1.0, "");
    let groups: Vec<usize> = gc
        .map(|g| data.rows.iter().map(|r| r.values[g].max(0.0) as usize).collect())
        .unwrap_or_else(|| vec![0; data.rows.len()]);
    let show_labels = data.rows.len() <= 30;
    for (i, row) in data.rows.iter().enumerate() {
        let color = if groups[i] == 0 { o.colors.marker.clone() } else { String::from(PALETTE[groups[i] % PALETTE.len()]) };
        svg.circle(px(xs[i]), py(ys[i]), 5.0, &color, Some(&o.colors.border));
        if show_labels {
            svg.text(px(xs[i]) + 7.0, py(ys[i]) - 7.0, &truncate_label(&row.label, 20), size * 0.8, Anchor::Start, 0.0, TEXT_COLOR);
        }
    }
    let x_default = match xc {
        Some(c) => data.columns[c].clone(),
        None => data.label_name.clone(),
    };
    let y_default = data.columns.get(yc).cloned().unwrap_or_default();
    let (x, y) = axis_titles(spec, &x_default, &y_default);
    draw_axis_titles(svg, spec, frame, &x, &y);
    if with_legend {
        let entries: Vec<(String, String)> = distinct_groups(&groups)
            .into_iter()
            .map(|g| {
                let color = if g == 0 { o.colors.marker.clone() } else { String::from(PALETTE[g % PALETTE.len()]) };
                (format!("cluster {g}"), color)
            })
            .collect();
        legend(svg, spec, frame, &entries);
    }
}

fn wordcloud(svg: &mut Svg, spec: &ChartSpec, frame: Frame) {
    let o = &spec.options;
    let mut words: Vec<(String, f64)> = spec
        .data
        .rows
        .iter()
        .zip(spec.data.primary_values())
        .map(|(r, v)| (r.label.clone(), v))
        .collect();
    words.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    words.truncate(150);
    let (lo, hi) = words.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| (a.min(w.1), b.max(w.1)));
    let scale = frame.width().min(frame.height()) / 700.0;
    let font = |v: f64| {
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        (12.0 + 60.0 * t) * scale.max(0.3)
    };
    let boxes: Vec<(f64, f64)> = words
        .iter()
        .map(|(w, v)| {
            let f = font(*v);
            (0.6 * f * w.chars().count() as f64 + 4.0, f * 1.1)
        })
        .collect();
    let placed = place_words(&boxes, frame.width(), frame.height());
    for (i, ((word, v), spot)) in words.iter().zip(&placed).enumerate() {
        let Some((x, y)) = spot else { continue };
        let f = font(*v);
        let color = series_color(i, &o.colors.bar);
        svg.text(frame.left + x, frame.top + y + f * 0.35, word, f, Anchor::Middle, 0.0, &color);
    }
}

fn network_of(data: &AnalysisResult) -> NetworkData {
    data.network.clone().unwrap_or_else(|| NetworkData {
        nodes: data
            .rows
            .iter()
            .zip(data.primary_values())
            .map(|(r, v)| NetworkNode { id: r.label.clone(), group: None, value: v })
            .collect(),
        links: Vec::new(),
    })
}

fn network(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let net = network_of(&spec.data);
    let n = net.nodes.len();
    let index: BTreeMap<&str, usize> = net.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let edges: Vec<(usize, usize, f64)> = net
        .links
        .iter()
        .filter_map(|l| Some((*index.get(l.source.as_str())?, *index.get(l.target.as_str())?, l.weight)))
        .collect();
    let iterations = if n <= 300 { 100 } else { (30_000_000 / (n * n)).clamp(5, 100) };
    let pos = force_layout(n, &edges, iterations);
    let margin = 30.0;
    let place = |p: (f64, f64)| {
        (
            frame.left + margin + p.0 * (frame.width() - 2.0 * margin),
            frame.top + margin + p.1 * (frame.height() - 2.0 * margin),
        )
    };
    let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max).max(1e-12);
    for &(u, v, w) in &edges {
        let (a, b) = (place(pos[u]), place(pos[v]));
        svg.line(a.0, a.1, b.0, b.1, "#999999", 0.5 + 3.0 * w / max_w, r#" stroke-opacity="0.6""#);
    }
    let max_v = net.nodes.iter().map(|n| n.value).fold(0.0, f64::max).max(1e-12);
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|a, b| {
        net.nodes[*b].value.partial_cmp(&net.nodes[*a].value).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(b))
    });
    let labelled: Vec<usize> = if n <= 60 { (0..n).collect() } else { by_value.into_iter().take(30).collect() };
    for (i, node) in net.nodes.iter().enumerate() {
        let (x, y) = place(pos[i]);
        let r = 4.0 + 12.0 * libm::sqrt(node.value.max(0.0) / max_v);
        let color = match node.group {
            Some(g) => series_color(g, &o.colors.bar),
            None => o.colors.bar.clone(),
        };
        svg.circle(x, y, r, &color, Some(&o.colors.border));
        if labelled.contains(&i) {
            svg.text(x, y - r - 3.0, &truncate_label(&node.id, 24), o.ticks.fontsize, Anchor::Middle, 0.0, TEXT_COLOR);
        }
    }
    if with_legend {
        let groups: Vec<usize> = net.nodes.iter().filter_map(|n| n.group).collect();
        let entries: Vec<(String, String)> = distinct_groups(&groups)
            .into_iter()
            .map(|g| (format!("group {g}"), series_color(g, &o.colors.bar)))
            .collect();
        legend(svg, spec, frame, &entries);
    }
}

fn hex_rgb(hex: &str) -> (u8, u8, u8) {
    let h = hex.trim_start_matches('#');
    let expand: String = if h.len() == 3 { h.chars().flat_map(|c| [c, c]).collect() } else { String::from(h) };
    let byte = |i: usize| u8::from_str_radix(expand.get(i..i + 2).unwrap_or("00"), 16).unwrap_or(0);
    (byte(0), byte(2), byte(4))
}

fn mix(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> String {
    let m = |x: u8, y: u8| libm::round(x as f64 + (y as f64 - x as f64) * t) as u8;
    format!("#{:02x}{:02x}{:02x}", m(a.0, b.0), m(a.1, b.1), m(a.2, b.2))
}

/// Choropleth tile grid: one labelled tile per country, shaded by value.
fn worldmap(svg: &mut Svg, spec: &ChartSpec, frame: Frame, with_legend: bool) {
    let o = &spec.options;
    let values = spec.data.primary_values();
    let n = values.len();
    let ratio = frame.width() / frame.height();
    let cols = (libm::ceil(libm::sqrt(n as f64 * ratio)) as usize).max(1);
    let rows = n.div_ceil(cols).max(1);
    let (tw, th) = (frame.width() / cols as f64, frame.height() / rows as f64);
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let light = (0xf2, 0xf2, 0xf2);
    let dark = hex_rgb(&o.colors.bar);
    let shade = |v: f64| mix(light, dark, if hi > lo { (v - lo) / (hi - lo) } else { 1.0 });
    let size = o.ticks.fontsize.min(th / 3.0).max(4.0);
    let max_chars = ((tw / (size * 0.6)) as usize).max(3);
    for (i, (row, v)) in spec.data.rows.iter().zip(&values).enumerate() {
        let (x, y) = (frame.left + (i % cols) as f64 * tw, frame.top + (i / cols) as f64 * th);
        svg.rect(x + 2.0, y + 2.0, tw - 4.0, th - 4.0, &shade(*v), Some(&o.colors.border));
        svg.text(x + tw / 2.0, y + th / 2.0 - size * 0.2, &truncate_label(&row.label, max_chars), size, Anchor::Middle, 0.0, TEXT_COLOR);
        svg.text(x + tw / 2.0, y + th / 2.0 + size, &value_label(*v), size, Anchor::Middle, 0.0, TEXT_COLOR);
    }
    if with_legend {
        let entries = vec![
            (format!("min {}", value_label(lo)), shade(lo)),
            (format!("max {}", value_label(hi)), shade(hi)),
        ];
        legend(svg, spec, frame, &entries);
    }
}
