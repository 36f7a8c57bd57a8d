//! The uniform tabular result shared by the engines, charts, CSV export and
//! the summarizer.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Whether rows carry one value per column or a raw list of observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultShape {
    #[default]
    Table,
    /// Each row holds the raw observations of one group (box/violin/swarm input).
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    pub values: Vec<f64>,
}

impl ResultRow {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self { label: label.into(), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    /// Community or cluster id, when one was computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLink {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// Node/link payload for force-directed rendering.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkData {
    pub nodes: Vec<NetworkNode>,
    pub links: Vec<NetworkLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub kind: String,
    /// Header of the label column in CSV export.
    pub label_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
    #[serde(default)]
    pub shape: ResultShape,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkData>,
}

/// Meta key naming what the row labels are (`year`, `category`, `node`, ...).
pub const META_LABEL_AXIS: &str = "label_axis";
/// Meta key naming how year rows may be re-binned: `sum`, `last` or `none`.
pub const META_REBIN: &str = "rebin";

impl AnalysisResult {
    pub fn table(kind: &str, label_name: &str, columns: &[&str]) -> Self {
        Self {
            kind: kind.to_string(),
            label_name: label_name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            shape: ResultShape::Table,
            meta: BTreeMap::new(),
            network: None,
        }
    }

    pub fn distribution(kind: &str, label_name: &str, value_name: &str) -> Self {
        Self {
            shape: ResultShape::Distribution,
            ..Self::table(kind, label_name, &[value_name])
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) {
        self.rows.push(ResultRow::new(label, values));
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn is_year_axis(&self) -> bool {
        self.meta_value(META_LABEL_AXIS) == Some("year")
    }

    /// Structural check: table rows match the column count, values are finite.
    pub fn check(&self) -> Result<(), String> {
        for row in &self.rows {
            if self.shape == ResultShape::Table && row.values.len() != self.columns.len() {
                return Err(alloc::format!(
                    "row '{}' has {} values for {} columns",
                    row.label,
                    row.values.len(),
                    self.columns.len()
                ));
            }
            if row.values.iter().any(|v| !v.is_finite()) {
                return Err(alloc::format!("row '{}' has a non-finite value", row.label));
            }
        }
        Ok(())
    }

    /// First-column values (for table shape), or observation counts.
    pub fn primary_values(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match self.shape {
                ResultShape::Table => r.values.first().copied().unwrap_or(0.0),
                ResultShape::Distribution => r.values.len() as f64,
            })
            .collect()
    }
}
