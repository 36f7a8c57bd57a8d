//! The immutable analyzed dataset, overview statistics and filtering.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::record::{normalize_name, Record};
use crate::util::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid filter: {field} {reason}")]
    InvalidSpec { field: &'static str, reason: String },
}

/// Deduplicated, immutable set of records plus the source files they came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    records: Arc<[Record]>,
    sources: Arc<[String]>,
}

impl Corpus {
    /// Provenance is taken from the records' `source_label`s in first-seen order.
    pub fn new(records: Vec<Record>) -> Self {
        let mut sources: Vec<String> = Vec::new();
        for r in &records {
            if !sources.contains(&r.source_label) {
                sources.push(r.source_label.clone());
            }
        }
        Self {
            records: records.into(),
            sources: sources.into(),
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Record> {
        self.records.iter()
    }
}

/// User-defined filtering criteria. Absent criteria do not constrain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    /// Inclusive `[start, end]`.
    pub year_range: Option<[i32; 2]>,
    pub doc_types: Option<Vec<String>>,
    pub languages: Option<Vec<String>>,
    /// Kept when ANY of the record's countries is listed.
    pub countries: Option<Vec<String>>,
    pub journals: Option<Vec<String>>,
    pub min_citations: Option<u64>,
    /// Kept when ANY keyword contains ANY of these substrings.
    pub keyword_contains: Option<Vec<String>>,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if let Some([start, end]) = self.year_range {
            if start > end {
                return Err(CorpusError::InvalidSpec {
                    field: "year_range",
                    reason: alloc::format!("start {start} is after end {end}"),
                });
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == FilterSpec::default()
    }

    /// Conjunction of two specs. Criteria present in both are intersected.
    pub fn and(&self, other: &FilterSpec) -> FilterSpec {
        fn both<T: Clone>(a: &Option<T>, b: &Option<T>, f: impl Fn(&T, &T) -> T) -> Option<T> {
            match (a, b) {
                (Some(x), Some(y)) => Some(f(x, y)),
                (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                (None, None) => None,
            }
        }
        let intersect = |x: &Vec<String>, y: &Vec<String>| -> Vec<String> {
            x.iter().filter(|v| y.contains(v)).cloned().collect()
        };
        FilterSpec {
            year_range: both(&self.year_range, &other.year_range, |a, b| {
                [a[0].max(b[0]), a[1].min(b[1])]
            }),
            doc_types: both(&self.doc_types, &other.doc_types, intersect),
            languages: both(&self.languages, &other.languages, intersect),
            countries: both(&self.countries, &other.countries, intersect),
            journals: both(&self.journals, &other.journals, intersect),
            min_citations: both(&self.min_citations, &other.min_citations, |a, b| (*a).max(*b)),
            keyword_contains: both(&self.keyword_contains, &other.keyword_contains, intersect),
        }
    }

    fn matches(&self, r: &Record) -> bool {
        let in_set = |set: &Option<Vec<String>>, value: &str| match set {
            None => true,
            Some(allowed) => {
                let v = fold(value);
                allowed.iter().any(|a| fold(a) == v)
            }
        };
        if let Some([start, end]) = self.year_range {
            match r.year {
                Some(y) if y >= start && y <= end => {}
                _ => return false,
            }
        }
        if !in_set(&self.doc_types, &r.doc_type)
            || !in_set(&self.languages, &r.language)
            || !in_set(&self.journals, &r.source_title)
        {
            return false;
        }
        if let Some(allowed) = &self.countries {
            let any = r
                .countries
                .iter()
                .any(|c| allowed.iter().any(|a| fold(a) == fold(c)));
            if !any {
                return false;
            }
        }
        if let Some(min) = self.min_citations {
            if r.citations < min {
                return false;
            }
        }
        if let Some(needles) = &self.keyword_contains {
            let hit = r
                .author_keywords
                .iter()
                .chain(&r.index_keywords)
                .any(|k| needles.iter().any(|n| k.contains(fold(n).as_str())));
            if !hit {
                return false;
            }
        }
        true
    }
}

fn fold(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

/// Overview counts shown after ingest.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_records: usize,
    pub n_distinct_authors: usize,
    pub n_distinct_institutions: usize,
    pub n_distinct_countries: usize,
    pub n_distinct_journals: usize,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
}

pub fn summarize_corpus(corpus: &Corpus) -> CorpusStats {
    let mut authors = BTreeSet::new();
    let mut institutions = BTreeSet::new();
    let mut countries = BTreeSet::new();
    let mut journals = BTreeSet::new();
    for r in corpus.iter() {
        for i in 0..r.authors.len() {
            authors.insert(r.author_key(i));
        }
        for a in &r.affiliations {
            let a = collapse_whitespace(a);
            if !a.is_empty() {
                institutions.insert(a);
            }
        }
        for c in r.resolved_countries() {
            countries.insert(String::from(c));
        }
        let j = normalize_name(&r.source_title);
        if !j.is_empty() {
            journals.insert(j);
        }
    }
    let years = corpus.iter().filter_map(|r| r.year);
    CorpusStats {
        n_records: corpus.len(),
        n_distinct_authors: authors.len(),
        n_distinct_institutions: institutions.len(),
        n_distinct_countries: countries.len(),
        n_distinct_journals: journals.len(),
        year_min: years.clone().min(),
        year_max: years.max(),
    }
}

/// Records satisfying every present criterion, order preserved.
pub fn filter(corpus: &Corpus, spec: &FilterSpec) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    if spec.is_empty() {
        return Ok(corpus.clone());
    }
    let kept: Vec<Record> = corpus.iter().filter(|r| spec.matches(r)).cloned().collect();
    Ok(Corpus::new(kept))
}
