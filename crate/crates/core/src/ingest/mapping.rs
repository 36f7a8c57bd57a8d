use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{CountryTable, IngestError, RawTable, SourceKind};
use crate::record::{
    normalize_doi, normalize_issn, normalize_keyword, Record, UNKNOWN_COUNTRY,
};
use crate::util::{collapse_whitespace, data_lines};

const BUNDLED_SYNONYMS: &str = include_str!("../../data/field_synonyms.txt");

/// Years outside this window are treated as absent.
pub const YEAR_WINDOW: core::ops::RangeInclusive<i32> = 1500..=2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalField {
    Title,
    Authors,
    AuthorIds,
    Affiliations,
    Countries,
    Year,
    SourceTitle,
    Issn,
    Doi,
    Citations,
    DocType,
    Publisher,
    OpenAccess,
    Language,
    AuthorKeywords,
    IndexKeywords,
    Abstract,
    Funding,
}

impl CanonicalField {
    pub const ALL: [CanonicalField; 18] = [
        CanonicalField::Title,
        CanonicalField::Authors,
        CanonicalField::AuthorIds,
        CanonicalField::Affiliations,
        CanonicalField::Countries,
        CanonicalField::Year,
        CanonicalField::SourceTitle,
        CanonicalField::Issn,
        CanonicalField::Doi,
        CanonicalField::Citations,
        CanonicalField::DocType,
        CanonicalField::Publisher,
        CanonicalField::OpenAccess,
        CanonicalField::Language,
        CanonicalField::AuthorKeywords,
        CanonicalField::IndexKeywords,
        CanonicalField::Abstract,
        CanonicalField::Funding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalField::Title => "title",
            CanonicalField::Authors => "authors",
            CanonicalField::AuthorIds => "author_ids",
            CanonicalField::Affiliations => "affiliations",
            CanonicalField::Countries => "countries",
            CanonicalField::Year => "year",
            CanonicalField::SourceTitle => "source_title",
            CanonicalField::Issn => "issn",
            CanonicalField::Doi => "doi",
            CanonicalField::Citations => "citations",
            CanonicalField::DocType => "doc_type",
            CanonicalField::Publisher => "publisher",
            CanonicalField::OpenAccess => "open_access",
            CanonicalField::Language => "language",
            CanonicalField::AuthorKeywords => "author_keywords",
            CanonicalField::IndexKeywords => "index_keywords",
            CanonicalField::Abstract => "abstract",
            CanonicalField::Funding => "funding",
        }
    }

    pub fn is_multi_valued(self) -> bool {
        matches!(
            self,
            CanonicalField::Authors
                | CanonicalField::AuthorIds
                | CanonicalField::Affiliations
                | CanonicalField::Countries
                | CanonicalField::Issn
                | CanonicalField::AuthorKeywords
                | CanonicalField::IndexKeywords
                | CanonicalField::Funding
        )
    }
}

impl core::fmt::Display for CanonicalField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for CanonicalField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CanonicalField::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown canonical field '{s}'"))
    }
}

/// Header synonyms per canonical field, in priority order.
#[derive(Debug, Clone)]
pub struct SynonymTable {
    entries: Vec<(CanonicalField, Vec<Synonym>)>,
}

#[derive(Debug, Clone)]
struct Synonym {
    header: String,
    wos_only: bool,
}

impl SynonymTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_SYNONYMS).expect("bundled synonym table is valid")
    }

    /// Lines of `field = synonym, synonym, ...`; a `wos:` prefix restricts a
    /// synonym to Web of Science tables.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for line in data_lines(text) {
            let (field, rest) = line
                .split_once('=')
                .ok_or_else(|| format!("missing '=' in synonym line '{line}'"))?;
            let field: CanonicalField = field.trim().parse()?;
            let synonyms = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| match s.strip_prefix("wos:") {
                    Some(tag) => Synonym { header: tag.to_lowercase(), wos_only: true },
                    None => Synonym { header: s.to_lowercase(), wos_only: false },
                })
                .collect();
            entries.push((field, synonyms));
        }
        Ok(Self { entries })
    }
}

/// Source-column assignment per canonical field plus multi-value delimiters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMapping {
    /// Every canonical field is present; `None` means ABSENT.
    pub assignments: BTreeMap<CanonicalField, Option<String>>,
    pub delimiters: BTreeMap<CanonicalField, String>,
}

impl FieldMapping {
    /// All fields ABSENT, delimiters defaulted for `kind`.
    pub fn empty(kind: SourceKind) -> Self {
        let assignments = CanonicalField::ALL.iter().map(|f| (*f, None)).collect();
        let delimiters = CanonicalField::ALL
            .iter()
            .filter(|f| f.is_multi_valued())
            .map(|f| {
                let d = match (kind, f) {
                    // Scopus joins author ids with a bare ';'.
                    (SourceKind::Scopus, CanonicalField::AuthorIds) => ";",
                    _ => kind.default_delimiter(),
                };
                (*f, d.to_string())
            })
            .collect();
        Self { assignments, delimiters }
    }

    pub fn column(&self, field: CanonicalField) -> Option<&str> {
        self.assignments.get(&field).and_then(|c| c.as_deref())
    }

    pub fn assign(&mut self, field: CanonicalField, column: Option<String>) {
        self.assignments.insert(field, column);
    }

    pub fn delimiter(&self, field: CanonicalField) -> &str {
        self.delimiters.get(&field).map(String::as_str).unwrap_or(";")
    }

    /// Check structural validity against a table (columns exist, none reused).
    pub fn validate_against(&self, table: &RawTable) -> Result<(), IngestError> {
        let mut used: Vec<&str> = Vec::new();
        for column in self.assignments.values().flatten() {
            if table.column_index(column).is_none() {
                return Err(IngestError::UnknownColumn(column.clone()));
            }
            if used.contains(&column.as_str()) {
                return Err(IngestError::ColumnReused(column.clone()));
            }
            used.push(column);
        }
        Ok(())
    }
}

/// Assign canonical fields by case-insensitive header synonym lookup.
pub fn infer_field_mapping(table: &RawTable) -> FieldMapping {
    infer_with(table, &SynonymTable::bundled())
}

pub fn infer_with(table: &RawTable, synonyms: &SynonymTable) -> FieldMapping {
    let mut mapping = FieldMapping::empty(table.source_kind);
    let normalized: Vec<String> = table
        .headers()
        .iter()
        .map(|h| collapse_whitespace(&h.to_lowercase()))
        .collect();
    let mut taken = alloc::vec![false; normalized.len()];
    for (field, syns) in &synonyms.entries {
        if mapping.column(*field).is_some() {
            continue;
        }
        let hit = syns
            .iter()
            .filter(|s| !s.wos_only || table.source_kind == SourceKind::Wos)
            .find_map(|s| {
                normalized
                    .iter()
                    .enumerate()
                    .position(|(i, h)| !taken[i] && *h == s.header)
            });
        if let Some(i) = hit {
            taken[i] = true;
            mapping.assign(*field, Some(table.headers()[i].clone()));
        }
    }
    mapping
}

fn integer_parse_rate(
    table: &RawTable,
    col: usize,
) -> (usize, usize) {
    let mut non_empty = 0;
    let mut parsed = 0;
    for row in table.rows() {
        let cell = row[col].trim();
        if cell.is_empty() {
            continue;
        }
        non_empty += 1;
        if cell.parse::<i64>().is_ok() {
            parsed += 1;
        }
    }
    (parsed, non_empty)
}

fn split_multi(cell: &str, delimiter: &str) -> Vec<String> {
    let delim = match delimiter.trim() {
        "" => delimiter,
        d => d,
    };
    if delim.is_empty() {
        return alloc::vec![collapse_whitespace(cell)];
    }
    cell.split(delim)
        .map(collapse_whitespace)
        .filter(|s| !s.is_empty())
        .collect()
}

/// WoS C1 entries prefix the institution with `[Author; Author]`.
fn strip_bracket_groups(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    let mut depth = 0usize;
    for c in cell.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Turn every row into a [`Record`].
pub fn apply_mapping(table: &RawTable, mapping: &FieldMapping) -> Result<Vec<Record>, IngestError> {
    mapping.validate_against(table)?;
    if mapping.column(CanonicalField::Title).is_none() && mapping.column(CanonicalField::Doi).is_none() {
        return Err(IngestError::MissingMandatoryField);
    }
    let col = |f: CanonicalField| mapping.column(f).and_then(|c| table.column_index(c));
    for field in [CanonicalField::Year, CanonicalField::Citations] {
        if let Some(i) = col(field) {
            let (parsed, non_empty) = integer_parse_rate(table, i);
            if parsed * 10 < non_empty * 9 {
                return Err(IngestError::MappingRejected {
                    field,
                    column: table.headers()[i].clone(),
                    parsed,
                    non_empty,
                });
            }
        }
    }

    let countries = CountryTable::bundled();
    let mut records = Vec::with_capacity(table.rows().len());
    for (row_idx, row) in table.rows().iter().enumerate() {
        let text = |f: CanonicalField| col(f).map(|i| row[i].as_str()).unwrap_or("");
        let multi = |f: CanonicalField| split_multi(text(f), mapping.delimiter(f));

        let affiliations: Vec<String> = split_multi(
            &strip_bracket_groups(text(CanonicalField::Affiliations)),
            mapping.delimiter(CanonicalField::Affiliations),
        )
        .into_iter()
        .map(|a| a.trim_end_matches('.').trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();

        let record_countries = if col(CanonicalField::Countries).is_some() {
            multi(CanonicalField::Countries)
                .into_iter()
                .map(|c| match countries.lookup(&c) {
                    Some(canonical) => canonical.to_string(),
                    None => UNKNOWN_COUNTRY.to_string(),
                })
                .collect()
        } else {
            affiliations
                .iter()
                .map(|a| countries.country_of_affiliation(a))
                .collect()
        };

        let year = text(CanonicalField::Year)
            .trim()
            .parse::<i32>()
            .ok()
            .filter(|y| YEAR_WINDOW.contains(y));

        let mut issn: Vec<String> = Vec::new();
        for piece in text(CanonicalField::Issn).split([',', ';']) {
            if let Some(n) = normalize_issn(piece) {
                if !issn.contains(&n) {
                    issn.push(n);
                }
            }
        }

        let keywords = |f: CanonicalField| -> Vec<String> {
            multi(f)
                .iter()
                .map(|k| normalize_keyword(k))
                .filter(|k| !k.is_empty())
                .collect()
        };

        records.push(Record {
            id: format!("{}#{}", table.source_label, row_idx + 1),
            title: collapse_whitespace(text(CanonicalField::Title)),
            authors: multi(CanonicalField::Authors),
            author_ids: multi(CanonicalField::AuthorIds),
            affiliations,
            countries: record_countries,
            year,
            source_title: collapse_whitespace(text(CanonicalField::SourceTitle)),
            issn,
            doi: normalize_doi(text(CanonicalField::Doi)),
            citations: text(CanonicalField::Citations).trim().parse::<u64>().unwrap_or(0),
            doc_type: collapse_whitespace(text(CanonicalField::DocType)),
            publisher: collapse_whitespace(text(CanonicalField::Publisher)),
            open_access: collapse_whitespace(text(CanonicalField::OpenAccess)),
            language: collapse_whitespace(text(CanonicalField::Language)),
            author_keywords: keywords(CanonicalField::AuthorKeywords),
            index_keywords: keywords(CanonicalField::IndexKeywords),
            abstract_text: collapse_whitespace(text(CanonicalField::Abstract)),
            funding: multi(CanonicalField::Funding),
            source_label: table.source_label.clone(),
        });
    }
    Ok(records)
}
