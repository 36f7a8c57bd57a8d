//! Field mapping and merge/deduplication of parsed export tables.
//!
//! Byte-level parsing of CSV/TSV/WoS files happens in the std companion crate;
//! this module starts from an already-split [`RawTable`].

mod countries;
mod dedup;
mod mapping;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use countries::CountryTable;
pub use dedup::{merge_and_dedup, DedupReport, DuplicateGroup, MatchBasis};
pub use mapping::{
    apply_mapping, infer_field_mapping, CanonicalField, FieldMapping, SynonymTable,
};

use crate::util::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8")]
    UndecodableBytes,
    #[error("first row is empty or blank; no header row")]
    NoHeaderRow,
    #[error("mapping rejected: column '{column}' for {field} parses as an integer in only {parsed} of {non_empty} non-empty cells")]
    MappingRejected {
        field: CanonicalField,
        column: String,
        parsed: usize,
        non_empty: usize,
    },
    #[error("mapping assigns neither title nor doi")]
    MissingMandatoryField,
    #[error("mapping references unknown column '{0}'")]
    UnknownColumn(String),
    #[error("column '{0}' is assigned to more than one field")]
    ColumnReused(String),
    #[error("no records to merge")]
    EmptyInput,
}

/// Export dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Scopus,
    Wos,
    GenericCsv,
}

impl SourceKind {
    /// Default multi-value delimiter for this dialect.
    pub fn default_delimiter(self) -> &'static str {
        match self {
            SourceKind::Scopus | SourceKind::Wos => "; ",
            SourceKind::GenericCsv => ";",
        }
    }
}

impl core::str::FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "scopus" => Ok(SourceKind::Scopus),
            "wos" => Ok(SourceKind::Wos),
            "csv" | "generic_csv" | "generic" => Ok(SourceKind::GenericCsv),
            other => Err(format!("unknown source kind '{other}'")),
        }
    }
}

/// A parsed export: unique headers and rectangular string rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    pub source_label: String,
    pub source_kind: SourceKind,
}

impl RawTable {
    /// Normalizes headers (whitespace collapsed, duplicates suffixed `.2`,
    /// `.3`, ...) and pads short rows. Cells beyond the header width get
    /// generated `Column N` headers.
    pub fn new(
        headers: Vec<String>,
        mut rows: Vec<Vec<String>>,
        source_label: impl Into<String>,
        source_kind: SourceKind,
    ) -> Result<Self, IngestError> {
        let mut headers: Vec<String> = headers.iter().map(|h| collapse_whitespace(h)).collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(IngestError::NoHeaderRow);
        }
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        while headers.len() < width {
            headers.push(format!("Column {}", headers.len() + 1));
        }
        let mut unique: Vec<String> = Vec::with_capacity(headers.len());
        for h in headers {
            let mut candidate = h.clone();
            let mut n = 2;
            while unique.contains(&candidate) {
                candidate = format!("{h}.{n}");
                n += 1;
            }
            unique.push(candidate);
        }
        for row in &mut rows {
            row.resize(unique.len(), String::new());
        }
        Ok(Self {
            headers: unique,
            rows,
            source_label: source_label.into(),
            source_kind,
        })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn column_index(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
