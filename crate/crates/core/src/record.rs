//! The canonical publication record and the normalizations applied to it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::util::collapse_whitespace;

/// Country label used when an affiliation cannot be resolved.
pub const UNKNOWN_COUNTRY: &str = "Unknown";

/// One publication after field mapping.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Record {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    /// Parallel to `authors` when present; empty when the export has no ids.
    pub author_ids: Vec<String>,
    pub affiliations: Vec<String>,
    /// Parallel to `authors` where derivable, otherwise one per affiliation.
    pub countries: Vec<String>,
    pub year: Option<i32>,
    pub source_title: String,
    /// Normalized 8-character ISSNs.
    pub issn: Vec<String>,
    pub doi: Option<String>,
    pub citations: u64,
    pub doc_type: String,
    pub publisher: String,
    pub open_access: String,
    pub language: String,
    pub author_keywords: Vec<String>,
    pub index_keywords: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub funding: Vec<String>,
    pub source_label: String,
}

impl Record {
    /// Number of canonical fields carrying a value (used by dedup tie-breaks).
    pub fn filled_field_count(&self) -> usize {
        let strings = [
            &self.title,
            &self.source_title,
            &self.doc_type,
            &self.publisher,
            &self.open_access,
            &self.language,
            &self.abstract_text,
        ];
        let lists = [
            &self.authors,
            &self.author_ids,
            &self.affiliations,
            &self.countries,
            &self.issn,
            &self.author_keywords,
            &self.index_keywords,
            &self.funding,
        ];
        strings.iter().filter(|s| !s.is_empty()).count()
            + lists.iter().filter(|l| !l.is_empty()).count()
            + usize::from(self.year.is_some())
            + usize::from(self.doi.is_some())
            + usize::from(self.citations > 0)
    }

    /// Identity key for author `i`: the author id when present, else the
    /// normalized name.
    pub fn author_key(&self, i: usize) -> String {
        match self.author_ids.get(i) {
            Some(id) if !id.is_empty() && self.author_ids.len() == self.authors.len() => {
                let mut key = String::from("id:");
                key.push_str(id);
                key
            }
            _ => normalize_name(&self.authors[i]),
        }
    }

    /// Countries that resolved to a known name, deduplicated in order.
    pub fn resolved_countries(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.countries {
            if c != UNKNOWN_COUNTRY && !c.is_empty() && !out.contains(&c.as_str()) {
                out.push(c);
            }
        }
        out
    }

    /// Country of author slot `i` when it can be attributed.
    pub fn author_country(&self, i: usize) -> Option<&str> {
        if self.countries.len() == self.authors.len() {
            let c = self.countries[i].as_str();
            return (c != UNKNOWN_COUNTRY && !c.is_empty()).then_some(c);
        }
        let resolved = self.resolved_countries();
        (resolved.len() == 1).then(|| resolved[0])
    }

    /// Author and index keywords, deduplicated in order.
    pub fn all_keywords(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for k in self.author_keywords.iter().chain(&self.index_keywords) {
            if !out.contains(&k.as_str()) {
                out.push(k);
            }
        }
        out
    }
}

/// Lowercase, whitespace-collapsed author name.
pub fn normalize_name(name: &str) -> String {
    collapse_whitespace(&name.to_lowercase())
}

/// Lowercase DOI with resolver prefixes removed; `None` when empty.
pub fn normalize_doi(raw: &str) -> Option<String> {
    let mut s = raw.trim().to_lowercase();
    for prefix in [
        "https://doi.org/",
        "http://doi.org/",
        "https://dx.doi.org/",
        "http://dx.doi.org/",
        "doi.org/",
        "doi:",
    ] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest.trim().to_string();
            break;
        }
    }
    (!s.is_empty()).then_some(s)
}

/// Lowercase alphanumerics only.
pub fn normalize_title(raw: &str) -> String {
    raw.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Strip hyphens/spaces and uppercase the check digit; `None` unless the
/// result matches `[0-9]{7}[0-9X]`.
pub fn normalize_issn(raw: &str) -> Option<String> {
    let s: String = raw
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-')
        .flat_map(char::to_uppercase)
        .collect();
    let bytes = s.as_bytes();
    let valid = bytes.len() == 8
        && bytes[..7].iter().all(u8::is_ascii_digit)
        && (bytes[7].is_ascii_digit() || bytes[7] == b'X');
    valid.then_some(s)
}

pub fn normalize_keyword(raw: &str) -> String {
    collapse_whitespace(&raw.to_lowercase())
}
