//! Short textual readings of analysis results.
//!
//! A [`Prompt`] carries both a text rendering (for external text generators)
//! and the structured [`Facts`] it was built from. [`TemplateProvider`] writes
//! its summary from the facts alone, so it never states a number that is not
//! in the result.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use serde::{Deserialize, Serialize};

use crate::result::{AnalysisResult, ResultShape, META_LABEL_AXIS};
use crate::viz::ChartSpec;

/// Upper bound on template summaries, in characters.
pub const MAX_SUMMARY_CHARS: usize = 2000;
pub const EMPTY_SUMMARY: &str = "No data available for this analysis.";
const TOP_ROWS: usize = 5;
const PROMPT_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Stable,
}

impl Trend {
    pub fn phrase(self) -> &'static str {
        match self {
            Trend::Increasing => "increasing trend",
            Trend::Decreasing => "decreasing trend",
            Trend::Stable => "stable trend",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facts {
    pub kind: String,
    pub label_name: String,
    pub value_name: String,
    pub rows: usize,
    pub total: f64,
    pub max: Option<LabelledValue>,
    pub min: Option<LabelledValue>,
    pub top: Vec<LabelledValue>,
    /// Least-squares slope of the values over row order; only for ordered axes.
    pub slope: Option<f64>,
    pub trend: Option<Trend>,
    pub first: Option<LabelledValue>,
    pub last: Option<LabelledValue>,
    pub chart_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub facts: Facts,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("summary provider failed: {0}")]
pub struct ProviderError(pub String);

pub trait SummaryProvider {
    fn identifier(&self) -> &str;
    fn summarize(&self, prompt: &Prompt) -> Result<String, ProviderError>;
}

impl<P: SummaryProvider + ?Sized> SummaryProvider for &P {
    fn identifier(&self) -> &str {
        (**self).identifier()
    }
    fn summarize(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        (**self).summarize(prompt)
    }
}

impl<P: SummaryProvider + ?Sized> SummaryProvider for Box<P> {
    fn identifier(&self) -> &str {
        (**self).identifier()
    }
    fn summarize(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        (**self).summarize(prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub text: String,
    /// Identifier of the provider whose text was returned.
    pub provider: String,
    pub fallback_used: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_error: Option<String>,
}

fn is_ordered_axis(result: &AnalysisResult) -> bool {
    matches!(result.meta_value(META_LABEL_AXIS), Some("year" | "decade" | "count" | "bin"))
}

fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn value_name(result: &AnalysisResult) -> String {
    match result.shape {
        ResultShape::Distribution => format!("{} observations", result.columns.first().map_or("", String::as_str)),
        ResultShape::Table => result.columns.first().cloned().unwrap_or_default(),
    }
}

pub fn extract_facts(result: &AnalysisResult, spec: Option<&ChartSpec>) -> Facts {
    let data = spec.map_or(result, |s| &s.data);
    let values = data.primary_values();
    let labelled = |i: usize| LabelledValue { label: data.rows[i].label.clone(), value: values[i] };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| {
        values[*b]
            .partial_cmp(&values[*a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| data.rows[*a].label.cmp(&data.rows[*b].label))
    });
    let (slope, trend) = if is_ordered_axis(data) && values.len() >= 2 {
        let s = slope(&values);
        let scale = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        let trend = if s.abs() <= 1e-9 * scale.max(1.0) {
            Trend::Stable
        } else if s > 0.0 {
            Trend::Increasing
        } else {
            Trend::Decreasing
        };
        (Some(s), Some(trend))
    } else {
        (None, None)
    };
    Facts {
        kind: data.kind.clone(),
        label_name: data.label_name.clone(),
        value_name: value_name(data),
        rows: data.rows.len(),
        total: values.iter().sum(),
        max: order.first().map(|&i| labelled(i)),
        min: order.last().map(|&i| labelled(i)),
        top: order.iter().take(TOP_ROWS).map(|&i| labelled(i)).collect(),
        slope,
        trend,
        first: (!values.is_empty()).then(|| labelled(0)),
        last: (!values.is_empty()).then(|| labelled(values.len() - 1)),
        chart_type: spec.map(|s| s.options.chart_type.name().to_string()),
    }
}

fn fmt_value(v: f64) -> String {
    if libm::fabs(v - libm::round(v)) < 1e-9 && v.abs() < 1e15 {
        format!("{}", libm::round(v) as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Prompt for a text generator: instructions, facts and the leading rows.
pub fn build_prompt(result: &AnalysisResult, spec: Option<&ChartSpec>) -> Prompt {
    let facts = extract_facts(result, spec);
    let data = spec.map_or(result, |s| &s.data);
    let mut text = String::from(
        "Write a short explanatory summary (at most 150 words) of the analysis below for a researcher. \
         Use only the numbers given.\n",
    );
    let _ = writeln!(text, "analysis: {}", facts.kind);
    if let Some(c) = &facts.chart_type {
        let _ = writeln!(text, "chart: {c}");
    }
    let _ = writeln!(text, "rows: {}", facts.rows);
    let _ = writeln!(text, "label: {}", facts.label_name);
    let _ = writeln!(text, "columns: {}", data.columns.join(", "));
    let _ = writeln!(text, "total {}: {}", facts.value_name, fmt_value(facts.total));
    if let Some(t) = facts.trend {
        let _ = writeln!(text, "trend: {}", t.phrase());
    }
    for (k, v) in &data.meta {
        let _ = writeln!(text, "meta {k}: {v}");
    }
    let _ = writeln!(text, "data:");
    for row in data.rows.iter().take(PROMPT_ROWS) {
        let vals: Vec<String> = row.values.iter().take(10).map(|v| fmt_value(*v)).collect();
        let _ = writeln!(text, "- {}: {}", row.label, vals.join(", "));
    }
    if data.rows.len() > PROMPT_ROWS {
        let _ = writeln!(text, "... {} more rows", data.rows.len() - PROMPT_ROWS);
    }
    Prompt { text, facts }
}

fn humanize(kind: &str) -> String {
    let words = kind.replace('_', " ");
    let mut chars = words.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Truncate to at most `max` characters, ending with an ellipsis when cut.
fn clip(text: String, max: usize) -> String {
    if text.chars().count() <= max {
        return text;
    }
    let mut out: String = text.chars().take(max - 1).collect();
    out.push('…');
    out
}

/// Offline summary written from the prompt's facts.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateProvider;

pub const TEMPLATE_PROVIDER_ID: &str = "template";

impl TemplateProvider {
    pub fn render(facts: &Facts) -> String {
        if facts.rows == 0 {
            return String::from(EMPTY_SUMMARY);
        }
        let mut text = format!(
            "{} covers {} {} value{}",
            humanize(&facts.kind),
            facts.rows,
            facts.label_name.replace('_', " "),
            if facts.rows == 1 { "" } else { "s" }
        );
        let _ = write!(text, " with a total {} of {}.", facts.value_name.replace('_', " "), fmt_value(facts.total));
        if let (Some(max), Some(min)) = (&facts.max, &facts.min) {
            let _ = write!(text, " The highest value is {} for {}", fmt_value(max.value), max.label);
            if facts.rows > 1 {
                let _ = write!(text, " and the lowest is {} for {}", fmt_value(min.value), min.label);
            }
            text.push('.');
        }
        if facts.top.len() > 1 {
            let items: Vec<String> = facts.top.iter().map(|t| format!("{} ({})", t.label, fmt_value(t.value))).collect();
            let _ = write!(text, " Leading entries: {}.", items.join(", "));
        }
        if let (Some(trend), Some(first), Some(last)) = (facts.trend, &facts.first, &facts.last) {
            let _ = write!(
                text,
                " Across {} to {} the values show {} {} (least-squares slope {:+.3} per step), moving from {} to {}.",
                first.label,
                last.label,
                if trend == Trend::Increasing { "an" } else { "a" },
                trend.phrase(),
                facts.slope.unwrap_or(0.0),
                fmt_value(first.value),
                fmt_value(last.value)
            );
        }
        clip(text, MAX_SUMMARY_CHARS)
    }
}

impl SummaryProvider for TemplateProvider {
    fn identifier(&self) -> &str {
        TEMPLATE_PROVIDER_ID
    }

    fn summarize(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        Ok(Self::render(&prompt.facts))
    }
}

/// Summarize with `provider`, falling back to the template when it fails or
/// returns blank text.
pub fn summarize_result(result: &AnalysisResult, spec: Option<&ChartSpec>, provider: &dyn SummaryProvider) -> Summary {
    let prompt = build_prompt(result, spec);
    if prompt.facts.rows == 0 {
        return Summary {
            text: String::from(EMPTY_SUMMARY),
            provider: String::from(provider.identifier()),
            fallback_used: false,
            provider_error: None,
        };
    }
    let error = match provider.summarize(&prompt) {
        Ok(text) if !text.trim().is_empty() => {
            return Summary {
                text: String::from(text.trim()),
                provider: String::from(provider.identifier()),
                fallback_used: false,
                provider_error: None,
            }
        }
        Ok(_) => String::from("provider returned empty text"),
        Err(e) => e.0,
    };
    Summary {
        text: TemplateProvider::render(&prompt.facts),
        provider: String::from(TEMPLATE_PROVIDER_ID),
        fallback_used: true,
        provider_error: Some(error),
    }
}
