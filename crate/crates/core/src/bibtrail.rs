//! Bibliometric analyses: publication and citation series, document types,
//! journals with Scimago quartiles, publishers, open access and language.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::record::{normalize_name, Record};
use crate::result::{AnalysisResult, META_LABEL_AXIS, META_REBIN};
use crate::util::{median, sort_by_count_desc, sort_f64, take_top};

/// Label for records whose category field is empty.
pub const UNSPECIFIED: &str = "Unspecified";
/// Quartile label for journals not found in the index.
pub const UNRANKED: &str = "Unranked";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BibtrailError {
    #[error("year gap must be between 1 and 5, got {0}")]
    InvalidYearGap(u32),
    #[error("this analysis needs a journal quartile index")]
    MissingQuartileIndex,
    #[error("malformed Scimago file: {0}")]
    MalformedScimagoFile(String),
    #[error("unsupported analysis: {0}")]
    UnsupportedMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    Total,
    Cumulative,
    Proportion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationMode {
    Total,
    Average,
    Cumulative,
    Proportion,
    Median,
    YearwiseDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocTypeMode {
    Total,
    Yearwise,
    Decadewise,
    VsCitations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    pub fn label(self) -> &'static str {
        match self {
            Quartile::Q1 => "Q1",
            Quartile::Q2 => "Q2",
            Quartile::Q3 => "Q3",
            Quartile::Q4 => "Q4",
        }
    }
}

impl core::str::FromStr for Quartile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(Quartile::Q1),
            "Q2" => Ok(Quartile::Q2),
            "Q3" => Ok(Quartile::Q3),
            "Q4" => Ok(Quartile::Q4),
            other => Err(format!("not a quartile: '{other}'")),
        }
    }
}

/// Normalized ISSN to best quartile, from one Scimago snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuartileIndex {
    pub entries: BTreeMap<String, Quartile>,
    /// Snapshot year when known.
    #[serde(default)]
    pub source_year: Option<i32>,
}

impl QuartileIndex {
    pub fn new(source_year: Option<i32>) -> Self {
        Self { entries: BTreeMap::new(), source_year }
    }

    /// Builds the index from an already split Scimago table. Needs an `Issn`
    /// column and an `SJR Best Quartile` column (matched case-insensitively);
    /// multi-ISSN cells are comma separated and rows quartiled `-` are skipped.
    pub fn from_table(
        headers: &[String],
        rows: &[Vec<String>],
        source_year: Option<i32>,
    ) -> Result<Self, BibtrailError> {
        let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
        let issn_col = find("issn").ok_or_else(|| BibtrailError::MalformedScimagoFile("no Issn column".into()))?;
        let q_col = find("sjr best quartile")
            .ok_or_else(|| BibtrailError::MalformedScimagoFile("no SJR Best Quartile column".into()))?;
        let mut index = Self::new(source_year);
        for row in rows {
            let (Some(issns), Some(q)) = (row.get(issn_col), row.get(q_col)) else { continue };
            let Ok(q) = q.parse::<Quartile>() else { continue };
            for issn in issns.split(',').filter_map(crate::record::normalize_issn) {
                index.insert_best(issn, q);
            }
        }
        Ok(index)
    }

    /// Keeps the best (lowest-numbered) quartile seen for an ISSN.
    pub fn insert_best(&mut self, issn: String, quartile: Quartile) {
        self.entries
            .entry(issn)
            .and_modify(|q| *q = (*q).min(quartile))
            .or_insert(quartile);
    }

    pub fn get(&self, issn: &str) -> Option<Quartile> {
        self.entries.get(issn).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Quartile of the record's first ISSN found in the index.
    pub fn quartile_of(&self, record: &Record) -> Option<Quartile> {
        record.issn.iter().find_map(|i| self.get(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JournalMode {
    TopJournals(Option<usize>),
    QuartileCounts,
    QuartileYearly,
    TopInQuartile(Quartile, Option<usize>),
    JournalsPerPublisher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryField {
    Publisher,
    OpenAccess,
    Language,
}

fn or_unspecified(s: &str) -> String {
    if s.trim().is_empty() {
        UNSPECIFIED.to_string()
    } else {
        s.to_string()
    }
}

fn year_label(start: i32, gap: i32) -> String {
    if gap == 1 {
        start.to_string()
    } else {
        format!("{}-{}", start, start + gap - 1)
    }
}

/// Publications per year (or per `year_gap`-year bin starting at the first
/// year). Undated records are excluded and counted in `meta.undated_excluded`.
pub fn publications_series(
    corpus: &Corpus,
    mode: SeriesMode,
    year_gap: u32,
) -> Result<AnalysisResult, BibtrailError> {
    if !(1..=5).contains(&year_gap) {
        return Err(BibtrailError::InvalidYearGap(year_gap));
    }
    let gap = year_gap as i32;
    let years: Vec<i32> = corpus.iter().filter_map(|r| r.year).collect();
    let (column, rebin) = match mode {
        SeriesMode::Total => ("publications", "sum"),
        SeriesMode::Cumulative => ("cumulative_publications", "last"),
        SeriesMode::Proportion => ("proportion", "sum"),
    };
    let mut result = AnalysisResult::table("publications_series", "year", &[column])
        .with_meta("mode", mode_name(&mode))
        .with_meta("year_gap", year_gap)
        .with_meta(META_LABEL_AXIS, "year")
        .with_meta(META_REBIN, if gap == 1 { rebin } else { "none" })
        .with_meta("undated_excluded", corpus.len() - years.len());
    let (Some(&min), Some(&max)) = (years.iter().min(), years.iter().max()) else {
        return Ok(result);
    };
    let n_bins = ((max - min) / gap + 1) as usize;
    let mut counts = vec![0u64; n_bins];
    for y in &years {
        counts[((y - min) / gap) as usize] += 1;
    }
    let total = years.len() as f64;
    let mut running = 0u64;
    for (i, c) in counts.iter().enumerate() {
        running += c;
        let value = match mode {
            SeriesMode::Total => *c as f64,
            SeriesMode::Cumulative => running as f64,
            SeriesMode::Proportion => *c as f64 / total,
        };
        result.push(year_label(min + i as i32 * gap, gap), vec![value]);
    }
    Ok(result)
}

fn mode_name<T: Serialize>(mode: &T) -> String {
    match serde_json::to_value(mode) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn citations_by_year(corpus: &Corpus) -> BTreeMap<i32, Vec<f64>> {
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for r in corpus.iter() {
        if let Some(y) = r.year {
            by_year.entry(y).or_default().push(r.citations as f64);
        }
    }
    by_year
}

/// Citations grouped by publication year.
pub fn citations_series(corpus: &Corpus, mode: CitationMode) -> AnalysisResult {
    let by_year = citations_by_year(corpus);
    let undated = corpus.iter().filter(|r| r.year.is_none()).count();
    if mode == CitationMode::YearwiseDistribution {
        let mut result = AnalysisResult::distribution("citations_distribution", "year", "citations")
            .with_meta("mode", mode_name(&mode))
            .with_meta(META_LABEL_AXIS, "year")
            .with_meta(META_REBIN, "sum")
            .with_meta("undated_excluded", undated);
        for (year, values) in by_year {
            result.push(year.to_string(), values);
        }
        return result;
    }
    let (column, rebin) = match mode {
        CitationMode::Total => ("citations", "sum"),
        CitationMode::Average => ("average_citations", "none"),
        CitationMode::Cumulative => ("cumulative_citations", "last"),
        CitationMode::Proportion => ("citation_share", "sum"),
        CitationMode::Median => ("median_citations", "none"),
        CitationMode::YearwiseDistribution => unreachable!(),
    };
    let mut result = AnalysisResult::table("citations_series", "year", &[column])
        .with_meta("mode", mode_name(&mode))
        .with_meta(META_LABEL_AXIS, "year")
        .with_meta(META_REBIN, rebin)
        .with_meta("undated_excluded", undated);
    let grand_total: f64 = by_year.values().flatten().sum();
    if mode == CitationMode::Proportion {
        result = result.with_meta("proportion_denominator", "all_citations");
        if grand_total == 0.0 {
            result = result.with_meta("note", "no citations; all shares are zero");
        }
    }
    let mut running = 0.0;
    for (year, mut values) in by_year {
        let total: f64 = values.iter().sum();
        running += total;
        let value = match mode {
            CitationMode::Total => total,
            CitationMode::Average => total / values.len() as f64,
            CitationMode::Cumulative => running,
            CitationMode::Proportion if grand_total > 0.0 => total / grand_total,
            CitationMode::Proportion => 0.0,
            CitationMode::Median => {
                sort_f64(&mut values);
                median(&values)
            }
            CitationMode::YearwiseDistribution => unreachable!(),
        };
        result.push(year.to_string(), vec![value]);
    }
    result
}

fn category_counts<'a>(labels: impl Iterator<Item = String> + 'a) -> Vec<(String, f64)> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    let mut v: Vec<(String, f64)> = counts.into_iter().collect();
    sort_by_count_desc(&mut v);
    v
}

/// Publications per document type, by year, by decade, or citations per type.
pub fn doc_type_analysis(corpus: &Corpus, mode: DocTypeMode) -> AnalysisResult {
    let types = category_counts(corpus.iter().map(|r| or_unspecified(&r.doc_type)));
    match mode {
        DocTypeMode::Total => {
            let mut result = AnalysisResult::table("doc_types", "doc_type", &["publications"])
                .with_meta("mode", "total")
                .with_meta(META_LABEL_AXIS, "category");
            for (label, count) in types {
                result.push(label, vec![count]);
            }
            result
        }
        DocTypeMode::VsCitations => {
            let mut result = AnalysisResult::distribution("doc_types_citations", "doc_type", "citations")
                .with_meta("mode", "vs_citations")
                .with_meta(META_LABEL_AXIS, "category");
            for (label, _) in &types {
                let values = corpus
                    .iter()
                    .filter(|r| or_unspecified(&r.doc_type) == *label)
                    .map(|r| r.citations as f64)
                    .collect();
                result.push(label.clone(), values);
            }
            result
        }
        DocTypeMode::Yearwise | DocTypeMode::Decadewise => {
            let decade = mode == DocTypeMode::Decadewise;
            let columns: Vec<&str> = types.iter().map(|(l, _)| l.as_str()).collect();
            let (kind, label_name, axis) = if decade {
                ("doc_types_decadewise", "decade", "decade")
            } else {
                ("doc_types_yearwise", "year", "year")
            };
            let mut result = AnalysisResult::table(kind, label_name, &columns)
                .with_meta("mode", if decade { "decadewise" } else { "yearwise" })
                .with_meta(META_LABEL_AXIS, axis)
                .with_meta(META_REBIN, "sum")
                .with_meta("undated_excluded", corpus.iter().filter(|r| r.year.is_none()).count());
            let mut table: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
            for r in corpus.iter() {
                let Some(y) = r.year else { continue };
                let key = if decade { y.div_euclid(10) * 10 } else { y };
                let t = or_unspecified(&r.doc_type);
                let col = columns.iter().position(|c| *c == t).expect("type listed");
                table.entry(key).or_insert_with(|| vec![0.0; columns.len()])[col] += 1.0;
            }
            for (key, values) in table {
                result.push(key.to_string(), values);
            }
            result
        }
    }
}

fn journal_key(r: &Record) -> (String, String) {
    let display = or_unspecified(&r.source_title);
    (normalize_name(&display), display)
}

/// Counts per journal (display name of the first record seen), sorted.
fn journal_counts<'a>(records: impl Iterator<Item = &'a Record>) -> Vec<(String, f64)> {
    let mut display: BTreeMap<String, String> = BTreeMap::new();
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for r in records {
        let (key, name) = journal_key(r);
        display.entry(key.clone()).or_insert(name);
        *counts.entry(key).or_default() += 1.0;
    }
    let mut v: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(k, c)| (display[&k].clone(), c))
        .collect();
    sort_by_count_desc(&mut v);
    v
}

fn source_year_label(index: &QuartileIndex) -> String {
    index.source_year.map_or_else(|| String::from("unknown"), |y| y.to_string())
}

fn quartile_label(index: &QuartileIndex, r: &Record) -> &'static str {
    index.quartile_of(r).map(Quartile::label).unwrap_or(UNRANKED)
}

const QUARTILE_COLUMNS: [&str; 5] = ["Q1", "Q2", "Q3", "Q4", UNRANKED];

/// Journal counts and Scimago quartile breakdowns.
pub fn journal_analysis(
    corpus: &Corpus,
    index: Option<&QuartileIndex>,
    mode: JournalMode,
) -> Result<AnalysisResult, BibtrailError> {
    let need_index = || index.ok_or(BibtrailError::MissingQuartileIndex);
    let result = match mode {
        JournalMode::TopJournals(n) => {
            let mut result = AnalysisResult::table("journals_top", "journal", &["publications"])
                .with_meta("mode", "top_journals")
                .with_meta(META_LABEL_AXIS, "category");
            for (label, c) in take_top(journal_counts(corpus.iter()), n) {
                result.push(label, vec![c]);
            }
            result
        }
        JournalMode::QuartileCounts => {
            let index = need_index()?;
            let mut counts = [0.0; 5];
            for r in corpus.iter() {
                let q = quartile_label(index, r);
                counts[QUARTILE_COLUMNS.iter().position(|c| *c == q).unwrap()] += 1.0;
            }
            let mut result = AnalysisResult::table("quartile_counts", "quartile", &["publications"])
                .with_meta("mode", "quartile_counts")
                .with_meta(META_LABEL_AXIS, "category")
                .with_meta("quartile_source_year", source_year_label(index));
            for (label, c) in QUARTILE_COLUMNS.iter().zip(counts) {
                result.push(*label, vec![c]);
            }
            result
        }
        JournalMode::QuartileYearly => {
            let index = need_index()?;
            let mut table: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
            for r in corpus.iter() {
                let Some(y) = r.year else { continue };
                let q = quartile_label(index, r);
                let col = QUARTILE_COLUMNS.iter().position(|c| *c == q).unwrap();
                table.entry(y).or_insert_with(|| vec![0.0; 5])[col] += 1.0;
            }
            let mut result = AnalysisResult::table("quartile_yearly", "year", &QUARTILE_COLUMNS)
                .with_meta("mode", "quartile_yearly")
                .with_meta(META_LABEL_AXIS, "year")
                .with_meta(META_REBIN, "sum")
                .with_meta("quartile_source_year", source_year_label(index));
            for (y, values) in table {
                result.push(y.to_string(), values);
            }
            result
        }
        JournalMode::TopInQuartile(q, n) => {
            let index = need_index()?;
            let mut result =
                AnalysisResult::table("journals_top_in_quartile", "journal", &["publications"])
                    .with_meta("mode", "top_in_quartile")
                    .with_meta("quartile", q.label())
                    .with_meta(META_LABEL_AXIS, "category");
            let in_q = corpus.iter().filter(|r| index.quartile_of(r) == Some(q));
            for (label, c) in take_top(journal_counts(in_q), n) {
                result.push(label, vec![c]);
            }
            result
        }
        JournalMode::JournalsPerPublisher => {
            let mut journals: BTreeMap<String, alloc::collections::BTreeSet<String>> = BTreeMap::new();
            for r in corpus.iter() {
                journals
                    .entry(or_unspecified(&r.publisher))
                    .or_default()
                    .insert(journal_key(r).0);
            }
            let mut v: Vec<(String, f64)> = journals
                .into_iter()
                .map(|(p, set)| (p, set.len() as f64))
                .collect();
            sort_by_count_desc(&mut v);
            let mut result = AnalysisResult::table("journals_per_publisher", "publisher", &["journals"])
                .with_meta("mode", "journals_per_publisher")
                .with_meta(META_LABEL_AXIS, "category");
            for (label, c) in v {
                result.push(label, vec![c]);
            }
            result
        }
    };
    Ok(result)
}

/// Counts per publisher / open-access category / language, or the citation
/// distribution per category (publisher and open access only).
pub fn categorical_counts(
    corpus: &Corpus,
    field: CategoryField,
    vs_citations: bool,
) -> Result<AnalysisResult, BibtrailError> {
    let (prefix, label_name) = match field {
        CategoryField::Publisher => ("publisher", "publisher"),
        CategoryField::OpenAccess => ("open_access", "open_access"),
        CategoryField::Language => ("language", "language"),
    };
    let value_of = |r: &Record| -> String {
        or_unspecified(match field {
            CategoryField::Publisher => &r.publisher,
            CategoryField::OpenAccess => &r.open_access,
            CategoryField::Language => &r.language,
        })
    };
    let counts = category_counts(corpus.iter().map(value_of));
    if !vs_citations {
        let mut result =
            AnalysisResult::table(&format!("{prefix}_counts"), label_name, &["publications"])
                .with_meta(META_LABEL_AXIS, "category");
        for (label, c) in counts {
            result.push(label, vec![c]);
        }
        return Ok(result);
    }
    if field == CategoryField::Language {
        return Err(BibtrailError::UnsupportedMode(
            "citations by language is not offered".to_string(),
        ));
    }
    let mut result =
        AnalysisResult::distribution(&format!("{prefix}_citations"), label_name, "citations")
            .with_meta(META_LABEL_AXIS, "category");
    for (label, _) in counts {
        let values = corpus
            .iter()
            .filter(|r| value_of(r) == label)
            .map(|r| r.citations as f64)
            .collect();
        result.push(label, values);
    }
    Ok(result)
}
