//! Scientometric analyses: authors and team size, countries, gender,
//! institutes and funding bodies.

mod gender;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use gender::{given_name, GenderLabel, GenderPrediction, GenderProvider, TableGenderProvider};

use crate::corpus::Corpus;
use crate::result::{AnalysisResult, META_LABEL_AXIS};
use crate::util::{collapse_whitespace, sort_by_count_desc, take_top};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScitraceError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthorMode {
    PapersPerAuthorCount,
    TopAuthors(usize),
    TeamSize,
    PairCollaboration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountryMode {
    Counts,
    LeadCounts,
    TeamSize,
    PairCollaboration,
    PapersVsCitations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenderMode {
    Totals,
    ByPosition,
    ByCountry(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityField {
    Institutes,
    Funding,
}

/// Separator between the two members of a collaboration pair label.
pub const PAIR_SEPARATOR: &str = " & ";

/// Display labels for author keys, unique across the corpus.
pub(crate) fn author_labels(corpus: &Corpus) -> BTreeMap<String, String> {
    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for r in corpus.iter() {
        for (i, name) in r.authors.iter().enumerate() {
            let key = r.author_key(i);
            if labels.contains_key(&key) {
                continue;
            }
            let mut label = collapse_whitespace(name);
            if used.contains(&label) {
                label = format!("{label} [{}]", key.trim_start_matches("id:"));
            }
            used.insert(label.clone());
            labels.insert(key, label);
        }
    }
    labels
}

/// Distinct author keys of a record, in byline order.
pub(crate) fn record_author_keys(r: &crate::Record) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for i in 0..r.authors.len() {
        let k = r.author_key(i);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys
}

fn pair_counts<'a>(sets: impl Iterator<Item = Vec<String>> + 'a) -> Vec<(String, f64)> {
    let mut counts: BTreeMap<(String, String), f64> = BTreeMap::new();
    for set in sets {
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let (a, b) = if set[i] <= set[j] {
                    (set[i].clone(), set[j].clone())
                } else {
                    (set[j].clone(), set[i].clone())
                };
                *counts.entry((a, b)).or_default() += 1.0;
            }
        }
    }
    let mut v: Vec<(String, f64)> = counts
        .into_iter()
        .map(|((a, b), c)| (format!("{a}{PAIR_SEPARATOR}{b}"), c))
        .collect();
    sort_by_count_desc(&mut v);
    v
}

fn histogram(sizes: impl Iterator<Item = usize>) -> BTreeMap<usize, f64> {
    let mut h = BTreeMap::new();
    for s in sizes {
        *h.entry(s).or_default() += 1.0;
    }
    h
}

pub fn author_analysis(corpus: &Corpus, mode: AuthorMode) -> Result<AnalysisResult, ScitraceError> {
    let labels = author_labels(corpus);
    let mut papers: BTreeMap<&str, f64> = BTreeMap::new();
    for r in corpus.iter() {
        for k in record_author_keys(r) {
            *papers.entry(labels[&k].as_str()).or_default() += 1.0;
        }
    }
    let result = match mode {
        AuthorMode::PapersPerAuthorCount => {
            let mut result =
                AnalysisResult::table("authors_papers_histogram", "papers", &["authors"])
                    .with_meta(META_LABEL_AXIS, "count");
            for (k, n) in histogram(papers.values().map(|p| *p as usize)) {
                result.push(k.to_string(), vec![n]);
            }
            result
        }
        AuthorMode::TopAuthors(n) => {
            if n == 0 {
                return Err(ScitraceError::ZeroCount("n"));
            }
            let mut v: Vec<(String, f64)> =
                papers.iter().map(|(l, c)| (l.to_string(), *c)).collect();
            sort_by_count_desc(&mut v);
            let mut result = AnalysisResult::table("authors_top", "author", &["papers"])
                .with_meta(META_LABEL_AXIS, "category");
            for (l, c) in take_top(v, Some(n)) {
                result.push(l, vec![c]);
            }
            result
        }
        AuthorMode::TeamSize => {
            let mut result = AnalysisResult::table("authors_team_size", "team_size", &["papers"])
                .with_meta(META_LABEL_AXIS, "count");
            let sizes = corpus
                .iter()
                .map(|r| record_author_keys(r).len())
                .filter(|n| *n > 0);
            for (k, n) in histogram(sizes) {
                result.push(k.to_string(), vec![n]);
            }
            result
        }
        AuthorMode::PairCollaboration => {
            let sets = corpus.iter().map(|r| {
                record_author_keys(r)
                    .iter()
                    .map(|k| labels[k].clone())
                    .collect::<Vec<_>>()
            });
            let mut result = AnalysisResult::table("authors_pairs", "pair", &["joint_papers"])
                .with_meta(META_LABEL_AXIS, "category");
            for (l, c) in pair_counts(sets) {
                result.push(l, vec![c]);
            }
            result
        }
    };
    Ok(result)
}

/// Country counts use whole counting: each distinct country once per paper.
pub fn country_analysis(corpus: &Corpus, mode: CountryMode) -> AnalysisResult {
    let distinct = |r: &crate::Record| -> Vec<String> {
        r.resolved_countries().into_iter().map(String::from).collect()
    };
    match mode {
        CountryMode::Counts | CountryMode::LeadCounts => {
            let lead = mode == CountryMode::LeadCounts;
            let mut counts: BTreeMap<String, f64> = BTreeMap::new();
            for r in corpus.iter() {
                let cs = distinct(r);
                let credited: &[String] = if lead { &cs[..cs.len().min(1)] } else { &cs };
                for c in credited {
                    *counts.entry(c.clone()).or_default() += 1.0;
                }
            }
            let mut v: Vec<(String, f64)> = counts.into_iter().collect();
            sort_by_count_desc(&mut v);
            let kind = if lead { "countries_lead_counts" } else { "countries_counts" };
            let mut result = AnalysisResult::table(kind, "country", &["papers"])
                .with_meta(META_LABEL_AXIS, "country")
                .with_meta("counting", if lead { "first_resolved_country" } else { "whole" });
            for (l, c) in v {
                result.push(l, vec![c]);
            }
            result
        }
        CountryMode::TeamSize => {
            let mut result = AnalysisResult::table("countries_team_size", "countries_per_paper", &["papers"])
                .with_meta(META_LABEL_AXIS, "count");
            let sizes = corpus.iter().map(|r| distinct(r).len()).filter(|n| *n > 0);
            for (k, n) in histogram(sizes) {
                result.push(k.to_string(), vec![n]);
            }
            result
        }
        CountryMode::PairCollaboration => {
            let mut result = AnalysisResult::table("countries_pairs", "pair", &["joint_papers"])
                .with_meta(META_LABEL_AXIS, "category");
            for (l, c) in pair_counts(corpus.iter().map(distinct)) {
                result.push(l, vec![c]);
            }
            result
        }
        CountryMode::PapersVsCitations => {
            let mut table: BTreeMap<String, [f64; 2]> = BTreeMap::new();
            for r in corpus.iter() {
                for c in distinct(r) {
                    let e = table.entry(c).or_default();
                    e[0] += 1.0;
                    e[1] += r.citations as f64;
                }
            }
            let mut v: Vec<(String, [f64; 2])> = table.into_iter().collect();
            v.sort_by(|a, b| {
                b.1[0]
                    .partial_cmp(&a.1[0])
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then_with(|| a.0.cmp(&b.0))
            });
            let mut result =
                AnalysisResult::table("countries_papers_citations", "country", &["papers", "citations"])
                    .with_meta(META_LABEL_AXIS, "country");
            for (l, [p, c]) in v {
                result.push(l, vec![p, c]);
            }
            result
        }
    }
}

/// Author-slot gender breakdowns. Single-author papers count as both first
/// and last position.
pub fn gender_analysis(
    corpus: &Corpus,
    provider: &dyn GenderProvider,
    mode: GenderMode,
) -> Result<AnalysisResult, ScitraceError> {
    let mut cache: BTreeMap<(String, Option<String>), GenderLabel> = BTreeMap::new();
    let mut predict = |author: &str, country: Option<&str>| -> GenderLabel {
        let name = given_name(author);
        let key = (name, country.map(String::from));
        *cache.entry(key).or_insert_with_key(|(name, country)| {
            if name.is_empty() {
                GenderLabel::Unknown
            } else {
                provider.predict(name, country.as_deref()).label
            }
        })
    };
    let names = gender::label_names();
    let result = match mode {
        GenderMode::Totals => {
            let mut counts = [0.0; 3];
            for r in corpus.iter() {
                for (i, a) in r.authors.iter().enumerate() {
                    counts[gender::slot(predict(a, r.author_country(i)))] += 1.0;
                }
            }
            let total: f64 = counts.iter().sum();
            let mut result = AnalysisResult::table("gender_totals", "gender", &["authors", "proportion"])
                .with_meta(META_LABEL_AXIS, "category")
                .with_meta("denominator", "author_slots");
            for (name, c) in names.iter().zip(counts) {
                let share = if total > 0.0 { c / total } else { 0.0 };
                result.push(*name, vec![c, share]);
            }
            result
        }
        GenderMode::ByPosition => {
            let mut table = [[0.0; 3]; 3];
            for r in corpus.iter() {
                let n = r.authors.len();
                for (i, a) in r.authors.iter().enumerate() {
                    let g = gender::slot(predict(a, r.author_country(i)));
                    if i == 0 {
                        table[0][g] += 1.0;
                    }
                    if i > 0 && i + 1 < n {
                        table[1][g] += 1.0;
                    }
                    if i + 1 == n {
                        table[2][g] += 1.0;
                    }
                }
            }
            let mut result = AnalysisResult::table("gender_positions", "position", &names)
                .with_meta(META_LABEL_AXIS, "category")
                .with_meta("single_author_rule", "counted as first and last");
            for (pos, row) in ["first", "middle", "last"].iter().zip(table) {
                result.push(*pos, row.to_vec());
            }
            result
        }
        GenderMode::ByCountry(top_k) => {
            if top_k == 0 {
                return Err(ScitraceError::ZeroCount("top_k"));
            }
            let top: Vec<String> = country_analysis(corpus, CountryMode::Counts)
                .rows
                .into_iter()
                .take(top_k)
                .map(|r| r.label)
                .collect();
            let mut table: Vec<[f64; 3]> = vec![[0.0; 3]; top.len()];
            for r in corpus.iter() {
                for (i, a) in r.authors.iter().enumerate() {
                    let Some(country) = r.author_country(i) else { continue };
                    let Some(row) = top.iter().position(|c| c == country) else { continue };
                    table[row][gender::slot(predict(a, Some(country)))] += 1.0;
                }
            }
            let mut result = AnalysisResult::table("gender_by_country", "country", &names)
                .with_meta(META_LABEL_AXIS, "country")
                .with_meta("values", "proportion of attributed author slots");
            for (country, counts) in top.into_iter().zip(table) {
                let total: f64 = counts.iter().sum();
                let shares = counts
                    .iter()
                    .map(|c| if total > 0.0 { c / total } else { 0.0 })
                    .collect();
                result.push(country, shares);
            }
            result
        }
    };
    Ok(result.with_meta("given_name_rule", "token after comma, else first token"))
}

/// Top institutes (normalized affiliation strings) or funding bodies.
pub fn top_entities(corpus: &Corpus, field: EntityField, n: usize) -> Result<AnalysisResult, ScitraceError> {
    if n == 0 {
        return Err(ScitraceError::ZeroCount("n"));
    }
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut covered = 0usize;
    for r in corpus.iter() {
        let values = match field {
            EntityField::Institutes => &r.affiliations,
            EntityField::Funding => &r.funding,
        };
        let distinct: BTreeSet<String> = values
            .iter()
            .map(|v| collapse_whitespace(v))
            .filter(|v| !v.is_empty())
            .collect();
        if !distinct.is_empty() {
            covered += 1;
        }
        for v in distinct {
            *counts.entry(v).or_default() += 1.0;
        }
    }
    let mut v: Vec<(String, f64)> = counts.into_iter().collect();
    sort_by_count_desc(&mut v);
    let (kind, label) = match field {
        EntityField::Institutes => ("top_institutes", "institute"),
        EntityField::Funding => ("top_funding", "funding_body"),
    };
    let coverage = if corpus.is_empty() { 0.0 } else { covered as f64 / corpus.len() as f64 };
    let mut result = AnalysisResult::table(kind, label, &["papers"])
        .with_meta(META_LABEL_AXIS, "category")
        .with_meta("coverage", coverage);
    for (l, c) in take_top(v, Some(n)) {
        result.push(l, vec![c]);
    }
    Ok(result)
}
