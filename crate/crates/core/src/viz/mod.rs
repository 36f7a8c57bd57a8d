//! Chart specifications and SVG rendering for analysis results.
//!
//! [`build_chart_spec`] checks the chart type against the bundled
//! compatibility table and slices the result (year window, re-binning,
//! top-N, log-scale filtering); [`render_svg`] draws the spec
//! deterministically.

pub mod layout;
mod plots;
mod svg;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

pub use svg::render_svg;

use crate::result::{AnalysisResult, ResultRow, ResultShape, META_REBIN};
use crate::util::data_lines;

const BUNDLED_COMPAT: &str = include_str!("../../data/chart_compat.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChartError {
    #[error("chart type {chart_type} cannot display '{kind}' results")]
    IncompatibleChartType { kind: String, chart_type: ChartType },
    #[error("invalid chart options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Line,
    Pie,
    Doughnut,
    Box,
    Violin,
    Swarm,
    Scatter,
    Stack,
    Wordcloud,
    Network,
    Worldmap,
}

impl ChartType {
    pub const ALL: [ChartType; 12] = [
        ChartType::Bar,
        ChartType::Line,
        ChartType::Pie,
        ChartType::Doughnut,
        ChartType::Box,
        ChartType::Violin,
        ChartType::Swarm,
        ChartType::Scatter,
        ChartType::Stack,
        ChartType::Wordcloud,
        ChartType::Network,
        ChartType::Worldmap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Pie => "pie",
            ChartType::Doughnut => "doughnut",
            ChartType::Box => "box",
            ChartType::Violin => "violin",
            ChartType::Swarm => "swarm",
            ChartType::Scatter => "scatter",
            ChartType::Stack => "stack",
            ChartType::Wordcloud => "wordcloud",
            ChartType::Network => "network",
            ChartType::Worldmap => "worldmap",
        }
    }

    /// Whether the chart has a category axis and a value axis.
    fn is_categorical(self) -> bool {
        matches!(
            self,
            ChartType::Bar | ChartType::Line | ChartType::Stack | ChartType::Box | ChartType::Violin | ChartType::Swarm
        )
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChartType {
    type Err = ChartError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChartType::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| ChartError::InvalidOptions(format!("unknown chart type '{s}'")))
    }
}

/// Chart types able to display a result kind, from the bundled table.
pub fn compatible_chart_types(kind: &str) -> Vec<ChartType> {
    for line in data_lines(BUNDLED_COMPAT) {
        if let Some((k, types)) = line.split_once(':') {
            if k.trim() == kind {
                return types.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            }
        }
    }
    Vec::new()
}

/// Every result kind listed in the compatibility table.
pub fn known_result_kinds() -> Vec<String> {
    data_lines(BUNDLED_COMPAT)
        .filter_map(|l| l.split_once(':').map(|(k, _)| k.trim().to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    #[default]
    Yearwise,
    Decadewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    #[default]
    White,
    Transparent,
}

impl FromStr for Background {
    type Err = ChartError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "white" | "w" | "W" => Ok(Background::White),
            "transparent" | "t" | "T" => Ok(Background::Transparent),
            other => Err(ChartError::InvalidOptions(format!("unknown background '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelOptions {
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub fontsize: f64,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self { x_label: None, y_label: None, fontsize: 14.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TitleOptions {
    pub text: Option<String>,
    pub fontsize: f64,
    pub visible: bool,
}

impl Default for TitleOptions {
    fn default() -> Self {
        Self { text: None, fontsize: 20.0, visible: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TickOptions {
    pub fontsize: f64,
    pub rotation_degrees: f64,
}

impl Default for TickOptions {
    fn default() -> Self {
        Self { fontsize: 12.0, rotation_degrees: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorOptions {
    pub bar: String,
    pub border: String,
    pub line: String,
    pub marker: String,
}

impl Default for ColorOptions {
    fn default() -> Self {
        Self {
            bar: "#4e79a7".into(),
            border: "#2f4b7c".into(),
            line: "#e15759".into(),
            marker: "#59a14f".into(),
        }
    }
}

/// Every user-adjustable chart setting. All fields have defaults, so `{}` and
/// `{"chart_type": "line"}` are valid JSON options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartOptions {
    pub chart_type: ChartType,
    pub start_year: Option<i32>,
    pub end_year: Option<i32>,
    /// Re-binning width for year axes, 1..=5.
    pub year_gap: u32,
    pub orientation: Orientation,
    pub x_scale: AxisScale,
    pub y_scale: AxisScale,
    pub top_count: Option<usize>,
    pub period: Period,
    pub labels: LabelOptions,
    pub title: TitleOptions,
    pub ticks: TickOptions,
    pub colors: ColorOptions,
    pub grid_visible: bool,
    pub legend_visible: bool,
    pub canvas_width: u32,
    pub canvas_height: u32,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            chart_type: ChartType::Bar,
            start_year: None,
            end_year: None,
            year_gap: 1,
            orientation: Orientation::Vertical,
            x_scale: AxisScale::Linear,
            y_scale: AxisScale::Linear,
            top_count: None,
            period: Period::Yearwise,
            labels: LabelOptions::default(),
            title: TitleOptions::default(),
            ticks: TickOptions::default(),
            colors: ColorOptions::default(),
            grid_visible: true,
            legend_visible: true,
            canvas_width: 1200,
            canvas_height: 800,
        }
    }
}

impl ChartOptions {
    pub fn of_type(chart_type: ChartType) -> Self {
        Self { chart_type, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        let bad = |msg: String| Err(ChartError::InvalidOptions(msg));
        if let (Some(s), Some(e)) = (self.start_year, self.end_year) {
            if s > e {
                return bad(format!("start_year {s} is after end_year {e}"));
            }
        }
        if !(1..=5).contains(&self.year_gap) {
            return bad(format!("year_gap must be 1..=5, got {}", self.year_gap));
        }
        if self.top_count == Some(0) {
            return bad("top_count must be at least 1".into());
        }
        for (name, size) in [
            ("labels.fontsize", self.labels.fontsize),
            ("title.fontsize", self.title.fontsize),
            ("ticks.fontsize", self.ticks.fontsize),
        ] {
            if !(size.is_finite() && size > 0.0 && size <= 200.0) {
                return bad(format!("{name} must be in (0, 200]"));
            }
        }
        if !(self.ticks.rotation_degrees.is_finite() && self.ticks.rotation_degrees.abs() <= 90.0) {
            return bad("ticks.rotation_degrees must be within [-90, 90]".into());
        }
        for (name, color) in [
            ("colors.bar", &self.colors.bar),
            ("colors.border", &self.colors.border),
            ("colors.line", &self.colors.line),
            ("colors.marker", &self.colors.marker),
        ] {
            if !is_hex_color(color) {
                return bad(format!("{name} must be a hex color like #1f77b4, got '{color}'"));
            }
        }
        if !(200..=10_000).contains(&self.canvas_width) || !(200..=10_000).contains(&self.canvas_height) {
            return bad("canvas dimensions must be within 200..=10000".into());
        }
        Ok(())
    }
}

fn is_hex_color(s: &str) -> bool {
    let Some(hex) = s.strip_prefix('#') else { return false };
    matches!(hex.len(), 3 | 6) && hex.chars().all(|c| c.is_ascii_hexdigit())
}

/// A result slice ready to draw, with fully resolved options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub options: ChartOptions,
    pub data: AnalysisResult,
    pub warnings: Vec<String>,
}

/// First and last year covered by a year-axis label (`2019` or `2019-2021`).
pub fn year_span(label: &str) -> Option<(i32, i32)> {
    let mut parts = label.splitn(2, '-');
    let start: i32 = parts.next()?.trim().parse().ok()?;
    let end = match parts.next() {
        Some(e) => e.trim().parse().ok()?,
        None => start,
    };
    Some((start, end))
}

fn span_label(start: i32, end: i32) -> String {
    if start == end {
        start.to_string()
    } else {
        format!("{start}-{end}")
    }
}

/// Rows merged into bins of `width` years. Bins start at `origin` (or at
/// multiples of the width when `origin` is `None`).
fn rebin(data: &AnalysisResult, width: i32, origin: Option<i32>, how: &str) -> AnalysisResult {
    let mut out = AnalysisResult { rows: Vec::new(), ..data.clone() };
    let mut current: Option<(i32, ResultRow)> = None;
    for row in &data.rows {
        let Some((start, _)) = year_span(&row.label) else { continue };
        let base = origin.unwrap_or(0);
        let bin = base + (start - base).div_euclid(width) * width;
        match &mut current {
            Some((b, acc)) if *b == bin => match (data.shape, how) {
                (ResultShape::Distribution, _) => acc.values.extend_from_slice(&row.values),
                (_, "last") => acc.values.clone_from(&row.values),
                _ => acc.values.iter_mut().zip(&row.values).for_each(|(a, v)| *a += v),
            },
            _ => {
                if let Some((b, acc)) = current.take() {
                    out.rows.push(ResultRow::new(span_label(b, b + width - 1), acc.values));
                }
                current = Some((bin, row.clone()));
            }
        }
    }
    if let Some((b, acc)) = current {
        out.rows.push(ResultRow::new(span_label(b, b + width - 1), acc.values));
    }
    out
}

/// Indices of the `n` rows with the largest primary value (ties: label
/// ascending), in their original order.
fn top_rows(data: &AnalysisResult, n: usize) -> Vec<usize> {
    let primary = data.primary_values();
    let mut order: Vec<usize> = (0..data.rows.len()).collect();
    order.sort_by(|a, b| {
        primary[*b]
            .partial_cmp(&primary[*a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| data.rows[*a].label.cmp(&data.rows[*b].label))
    });
    order.truncate(n);
    order.sort_unstable();
    order
}

fn keep_rows(data: &mut AnalysisResult, keep: &[usize]) {
    let labels_before: BTreeSet<String> = data.rows.iter().map(|r| r.label.clone()).collect();
    data.rows = keep.iter().map(|&i| data.rows[i].clone()).collect();
    if let Some(net) = &mut data.network {
        let node_ids: BTreeSet<String> = net.nodes.iter().map(|n| n.id.clone()).collect();
        if node_ids == labels_before {
            let kept: BTreeSet<&str> = data.rows.iter().map(|r| r.label.as_str()).collect();
            net.nodes.retain(|n| kept.contains(n.id.as_str()));
            net.links.retain(|l| kept.contains(l.source.as_str()) && kept.contains(l.target.as_str()));
        }
    }
}

/// Value-axis scales that apply to a chart: `(x, y)` log flags.
fn log_axes(options: &ChartOptions) -> (bool, bool) {
    let x = options.x_scale == AxisScale::Log;
    let y = options.y_scale == AxisScale::Log;
    match options.chart_type {
        ChartType::Scatter => (x, y),
        t if t.is_categorical() => match options.orientation {
            Orientation::Vertical => (false, y),
            Orientation::Horizontal => (x, false),
        },
        _ => (false, false),
    }
}

/// Slice `result` for display under `options`. The input is not modified.
pub fn build_chart_spec(result: &AnalysisResult, options: &ChartOptions) -> Result<ChartSpec, ChartError> {
    options.validate()?;
    if !compatible_chart_types(&result.kind).contains(&options.chart_type) {
        return Err(ChartError::IncompatibleChartType { kind: result.kind.clone(), chart_type: options.chart_type });
    }
    let mut data = result.clone();
    let mut warnings = Vec::new();
    let year_axis = result.is_year_axis();

    if options.start_year.is_some() || options.end_year.is_some() {
        if year_axis {
            let lo = options.start_year.unwrap_or(i32::MIN);
            let hi = options.end_year.unwrap_or(i32::MAX);
            data.rows.retain(|r| year_span(&r.label).is_some_and(|(s, _)| s >= lo && s <= hi));
        } else {
            warnings.push("year window ignored: result has no year axis".to_string());
        }
    }

    let (width, origin) = match options.period {
        Period::Decadewise => (10, None),
        Period::Yearwise => (options.year_gap as i32, data.rows.first().and_then(|r| year_span(&r.label)).map(|s| s.0)),
    };
    if width > 1 {
        match (year_axis, result.meta_value(META_REBIN)) {
            (true, Some(how @ ("sum" | "last"))) => {
                data = rebin(&data, width, origin, how);
                data.meta.insert("year_bin_width".into(), width.to_string());
            }
            (true, _) => warnings.push("year re-binning skipped: values cannot be combined across years".into()),
            (false, _) => warnings.push("year re-binning ignored: result has no year axis".into()),
        }
    }

    if let Some(n) = options.top_count {
        if data.rows.len() > n {
            let keep = top_rows(&data, n);
            keep_rows(&mut data, &keep);
        }
    }

    let (log_x, log_y) = log_axes(options);
    if options.x_scale == AxisScale::Log && !log_x || options.y_scale == AxisScale::Log && !log_y {
        warnings.push(format!("log scale does not apply to the {} chart's category axis or has no axis", options.chart_type));
    }
    if log_x || log_y {
        let columns = plots::plotted_columns(&data, options.chart_type, log_x, log_y);
        let before = data.rows.len();
        match data.shape {
            ResultShape::Distribution => {
                for row in &mut data.rows {
                    row.values.retain(|v| *v > 0.0);
                }
                data.rows.retain(|r| !r.values.is_empty());
            }
            ResultShape::Table => data
                .rows
                .retain(|r| columns.iter().all(|&c| r.values.get(c).is_some_and(|v| *v > 0.0))),
        }
        let dropped = before - data.rows.len();
        if dropped > 0 {
            warnings.push(format!("log scale: dropped {dropped} rows with non-positive values"));
        }
    }

    Ok(ChartSpec { options: options.clone(), data, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(years: core::ops::RangeInclusive<i32>) -> AnalysisResult {
        let mut r = AnalysisResult::table("publications_series", "year", &["publications"])
            .with_meta(crate::result::META_LABEL_AXIS, "year")
            .with_meta(META_REBIN, "sum");
        for (i, y) in years.enumerate() {
            r.push(y.to_string(), vec![i as f64]);
        }
        r
    }

    #[test]
    fn compatibility_table() {
        assert!(compatible_chart_types("citations_series").contains(&ChartType::Box));
        let err = build_chart_spec(&series(2000..=2001), &ChartOptions::of_type(ChartType::Worldmap)).unwrap_err();
        assert!(matches!(err, ChartError::IncompatibleChartType { .. }));
        assert!(compatible_chart_types("lda_topic_terms").is_empty());
    }

    #[test]
    fn top_count_truncates() {
        let mut r = AnalysisResult::table("authors_top", "author", &["papers"]);
        for i in 0..25 {
            r.push(format!("a{i:02}"), vec![(i % 7) as f64]);
        }
        let spec = build_chart_spec(&r, &ChartOptions { top_count: Some(10), ..ChartOptions::default() }).unwrap();
        assert_eq!(spec.data.rows.len(), 10);
        assert_eq!(r.rows.len(), 25);
    }

    #[test]
    fn window_and_gap() {
        let r = series(2000..=2009);
        let opts = ChartOptions { start_year: Some(2002), end_year: Some(2006), year_gap: 2, ..ChartOptions::default() };
        let spec = build_chart_spec(&r, &opts).unwrap();
        let labels: Vec<&str> = spec.data.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["2002-2003", "2004-2005", "2006-2007"]);
        assert_eq!(spec.data.rows[0].values, vec![2.0 + 3.0]);
        let decades = build_chart_spec(&series(1998..=2011), &ChartOptions { period: Period::Decadewise, ..ChartOptions::default() }).unwrap();
        let labels: Vec<&str> = decades.data.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["1990-1999", "2000-2009", "2010-2019"]);
    }

    #[test]
    fn log_scale_drops_non_positive() {
        let spec = build_chart_spec(&series(2000..=2003), &ChartOptions { y_scale: AxisScale::Log, ..ChartOptions::default() }).unwrap();
        assert_eq!(spec.data.rows.len(), 3);
        assert_eq!(spec.warnings.len(), 1);
    }

    #[test]
    fn invalid_options() {
        for opts in [
            ChartOptions { start_year: Some(2020), end_year: Some(2019), ..ChartOptions::default() },
            ChartOptions { year_gap: 6, ..ChartOptions::default() },
            ChartOptions { top_count: Some(0), ..ChartOptions::default() },
            ChartOptions { colors: ColorOptions { bar: "red".into(), ..ColorOptions::default() }, ..ChartOptions::default() },
        ] {
            assert!(matches!(build_chart_spec(&series(2000..=2001), &opts), Err(ChartError::InvalidOptions(_))));
        }
    }

    #[test]
    fn options_json_defaults() {
        let o: ChartOptions = serde_json::from_str(r#"{"chart_type":"line","title":{"text":"T"}}"#).unwrap();
        assert_eq!(o.chart_type, ChartType::Line);
        assert_eq!(o.title.fontsize, 20.0);
        assert!(serde_json::from_str::<ChartOptions>(r#"{"bogus":1}"#).is_err());
    }
}
