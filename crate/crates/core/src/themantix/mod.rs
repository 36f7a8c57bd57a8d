//! Thematic analyses: keyword frequencies and mappings, co-occurrence
//! networks, thematic evolution, LDA topics and document clustering.

mod cluster;
mod lda;
mod text;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use cluster::MAX_KMEANS_ITERATIONS;
pub use lda::{fit_lda, LdaParams, TopicModel};
pub use text::{Tokenizer, MIN_TOKEN_CHARS};

use crate::bibtrail::UNSPECIFIED;
use crate::colabrix::{graph_from_sets, Graph};
use crate::corpus::Corpus;
use crate::record::{normalize_keyword, Record};
use crate::result::{AnalysisResult, NetworkData, NetworkLink, NetworkNode, META_LABEL_AXIS};
use crate::util::{collapse_whitespace, sort_by_count_desc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThemeError {
    #[error("no record carries a publication year")]
    NoDatedRecords,
    #[error("need at least {needed} non-empty documents, found {found}")]
    TooFewDocuments { needed: usize, found: usize },
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("k = {k} exceeds the number of documents ({documents})")]
    KExceedsDocuments { k: usize, documents: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordSource {
    AuthorKeywords,
    IndexKeywords,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingAxis {
    Country,
    DocType,
}

fn nonzero(n: usize, what: &'static str) -> Result<usize, ThemeError> {
    if n == 0 {
        Err(ThemeError::InvalidParameter(what))
    } else {
        Ok(n)
    }
}

/// Distinct normalized keywords of a record across both keyword fields.
fn record_keywords(r: &Record) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for k in r.all_keywords() {
        let k = normalize_keyword(k);
        if !k.is_empty() && !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Keyword occurrence counts after lowercase/whitespace normalization.
pub fn keyword_frequencies(corpus: &Corpus, source: KeywordSource, n: usize) -> Result<AnalysisResult, ThemeError> {
    let n = nonzero(n, "n must be at least 1")?;
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for r in corpus.iter() {
        let fields: &[&Vec<String>] = match source {
            KeywordSource::AuthorKeywords => &[&r.author_keywords],
            KeywordSource::IndexKeywords => &[&r.index_keywords],
            KeywordSource::Both => &[&r.author_keywords, &r.index_keywords],
        };
        for k in fields.iter().flat_map(|f| f.iter()) {
            let k = normalize_keyword(k);
            if !k.is_empty() {
                *counts.entry(k).or_default() += 1.0;
            }
        }
    }
    let mut items: Vec<(String, f64)> = counts.into_iter().collect();
    sort_by_count_desc(&mut items);
    items.truncate(n);
    let source_name = match source {
        KeywordSource::AuthorKeywords => "author_keywords",
        KeywordSource::IndexKeywords => "index_keywords",
        KeywordSource::Both => "both",
    };
    let mut result = AnalysisResult::table("keyword_frequencies", "keyword", &["frequency"])
        .with_meta(META_LABEL_AXIS, "keyword")
        .with_meta("source", source_name);
    for (k, c) in items {
        result.push(k, vec![c]);
    }
    Ok(result)
}

/// Keyword × country (or document type) table of record counts, limited to
/// the top keywords and top axis values by record count.
pub fn keyword_mapping(
    corpus: &Corpus,
    axis: MappingAxis,
    top_keywords: usize,
    top_axis: usize,
) -> Result<AnalysisResult, ThemeError> {
    nonzero(top_keywords, "top_keywords must be at least 1")?;
    nonzero(top_axis, "top_axis must be at least 1")?;
    let mut keyword_counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut axis_counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    for r in corpus.iter() {
        let keywords = record_keywords(r);
        let values: Vec<String> = match axis {
            MappingAxis::Country => r.resolved_countries().into_iter().map(String::from).collect(),
            MappingAxis::DocType => {
                let t = collapse_whitespace(&r.doc_type);
                vec![if t.is_empty() { String::from(UNSPECIFIED) } else { t }]
            }
        };
        for k in &keywords {
            *keyword_counts.entry(k.clone()).or_default() += 1.0;
        }
        for v in &values {
            *axis_counts.entry(v.clone()).or_default() += 1.0;
            for k in &keywords {
                *cells.entry((k.clone(), v.clone())).or_default() += 1.0;
            }
        }
    }
    let mut keywords: Vec<(String, f64)> = keyword_counts.into_iter().collect();
    sort_by_count_desc(&mut keywords);
    keywords.truncate(top_keywords);
    let mut values: Vec<(String, f64)> = axis_counts.into_iter().collect();
    sort_by_count_desc(&mut values);
    values.truncate(top_axis);
    let columns: Vec<&str> = values.iter().map(|v| v.0.as_str()).collect();
    let axis_name = match axis {
        MappingAxis::Country => "country",
        MappingAxis::DocType => "doc_type",
    };
    let mut result = AnalysisResult::table("keyword_mapping", "keyword", &columns)
        .with_meta(META_LABEL_AXIS, "keyword")
        .with_meta("axis", axis_name);
    let mut network = NetworkData::default();
    for (k, c) in &keywords {
        network.nodes.push(NetworkNode { id: k.clone(), group: Some(0), value: *c });
    }
    for (v, c) in &values {
        network.nodes.push(NetworkNode { id: v.clone(), group: Some(1), value: *c });
    }
    for (k, _) in &keywords {
        let row: Vec<f64> = values
            .iter()
            .map(|(v, _)| cells.get(&(k.clone(), v.clone())).copied().unwrap_or(0.0))
            .collect();
        for ((v, _), w) in values.iter().zip(&row) {
            if *w > 0.0 {
                network.links.push(NetworkLink { source: k.clone(), target: v.clone(), weight: *w });
            }
        }
        result.push(k.clone(), row);
    }
    result.network = Some(network);
    Ok(result)
}

/// Keyword co-occurrence graph over the union of both keyword fields. Edges
/// lighter than `min_edge_weight` are dropped; their nodes stay.
pub fn cooccurrence_graph(corpus: &Corpus, min_edge_weight: u64) -> Result<Graph, ThemeError> {
    if min_edge_weight == 0 {
        return Err(ThemeError::InvalidParameter("min_edge_weight must be at least 1"));
    }
    let sets: Vec<Vec<String>> = corpus.iter().map(record_keywords).collect();
    Ok(graph_from_sets(&sets).without_edges_below(min_edge_weight))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    pub term: String,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeFlow {
    /// Index of the earlier slice.
    pub from_slice: usize,
    pub from_term: String,
    pub to_term: String,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionMap {
    pub slices: Vec<[i32; 2]>,
    pub themes_per_slice: Vec<Vec<Theme>>,
    pub flows: Vec<ThemeFlow>,
}

/// Title/abstract tokens plus normalized keywords, distinct per record.
pub(crate) fn record_terms(r: &Record, tokenizer: &Tokenizer) -> BTreeSet<String> {
    let mut terms: BTreeSet<String> = tokenizer.tokenize(&r.title).into_iter().collect();
    terms.extend(tokenizer.tokenize(&r.abstract_text));
    terms.extend(record_keywords(r));
    terms
}

fn slice_label(slice: [i32; 2]) -> String {
    if slice[0] == slice[1] {
        format!("{}", slice[0])
    } else {
        format!("{}-{}", slice[0], slice[1])
    }
}

/// Top terms per contiguous year window. A term's frequency is the number of
/// records in the window containing it; a term in the top lists of two
/// consecutive windows flows between them with the smaller frequency.
pub fn thematic_evolution(corpus: &Corpus, slice_width: u32, top_terms: usize) -> Result<EvolutionMap, ThemeError> {
    if slice_width == 0 {
        return Err(ThemeError::InvalidParameter("slice_width must be at least 1"));
    }
    nonzero(top_terms, "top_terms must be at least 1")?;
    let years: Vec<i32> = corpus.iter().filter_map(|r| r.year).collect();
    let (Some(&first), Some(&last)) = (years.iter().min(), years.iter().max()) else {
        return Err(ThemeError::NoDatedRecords);
    };
    let width = slice_width as i32;
    let count = ((last - first) / width + 1) as usize;
    let slices: Vec<[i32; 2]> = (0..count)
        .map(|i| {
            let start = first + i as i32 * width;
            [start, start + width - 1]
        })
        .collect();
    let tokenizer = Tokenizer::bundled();
    let mut freq: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); count];
    for r in corpus.iter() {
        let Some(year) = r.year else { continue };
        let slot = ((year - first) / width) as usize;
        for t in record_terms(r, &tokenizer) {
            *freq[slot].entry(t).or_default() += 1;
        }
    }
    let themes_per_slice: Vec<Vec<Theme>> = freq
        .iter()
        .map(|f| {
            let mut items: Vec<(String, u64)> = f.iter().map(|(t, c)| (t.clone(), *c)).collect();
            sort_by_count_desc(&mut items);
            items.truncate(top_terms);
            items.into_iter().map(|(term, frequency)| Theme { term, frequency }).collect()
        })
        .collect();
    let mut flows = Vec::new();
    for i in 0..count.saturating_sub(1) {
        let later: BTreeMap<&str, u64> = themes_per_slice[i + 1]
            .iter()
            .map(|t| (t.term.as_str(), t.frequency))
            .collect();
        for theme in &themes_per_slice[i] {
            if let Some(&f) = later.get(theme.term.as_str()) {
                flows.push(ThemeFlow {
                    from_slice: i,
                    from_term: theme.term.clone(),
                    to_term: theme.term.clone(),
                    weight: theme.frequency.min(f),
                });
            }
        }
    }
    Ok(EvolutionMap { slices, themes_per_slice, flows })
}

impl EvolutionMap {
    /// One row per (slice, term) labelled `"<window>: <term>"`, with the
    /// slice index and frequency, plus the flow network.
    pub fn to_result(&self) -> AnalysisResult {
        let mut result = AnalysisResult::table("thematic_evolution", "slice_term", &["slice", "frequency"])
            .with_meta(META_LABEL_AXIS, "slice_term")
            .with_meta("flow_weight", "min_frequency");
        let mut network = NetworkData::default();
        for (i, themes) in self.themes_per_slice.iter().enumerate() {
            let window = slice_label(self.slices[i]);
            for t in themes {
                let id = format!("{window}: {}", t.term);
                result.push(id.clone(), vec![i as f64, t.frequency as f64]);
                network.nodes.push(NetworkNode { id, group: Some(i), value: t.frequency as f64 });
            }
        }
        for f in &self.flows {
            network.links.push(NetworkLink {
                source: format!("{}: {}", slice_label(self.slices[f.from_slice]), f.from_term),
                target: format!("{}: {}", slice_label(self.slices[f.from_slice + 1]), f.to_term),
                weight: f.weight as f64,
            });
        }
        result.network = Some(network);
        result
    }
}

/// Title and abstract tokens of every record, with record ids.
pub fn lda_documents(corpus: &Corpus) -> (Vec<String>, Vec<Vec<String>>) {
    let tokenizer = Tokenizer::bundled();
    corpus
        .iter()
        .map(|r| {
            let mut tokens = tokenizer.tokenize(&r.title);
            tokens.extend(tokenizer.tokenize(&r.abstract_text));
            (r.id.clone(), tokens)
        })
        .unzip()
}

pub fn lda_topics(corpus: &Corpus, params: &LdaParams) -> Result<TopicModel, ThemeError> {
    let (ids, docs) = lda_documents(corpus);
    fit_lda(&ids, &docs, params)
}

impl TopicModel {
    /// Long table of the top terms of each topic: `term, topic, rank, weight`.
    pub fn topic_terms_result(&self, top: usize) -> AnalysisResult {
        let mut result = AnalysisResult::table("lda_topic_terms", "term", &["topic", "rank", "weight"])
            .with_meta("k", self.k)
            .with_meta("seed", self.seed)
            .with_meta("iterations", self.iterations)
            .with_meta("alpha", self.alpha)
            .with_meta("beta", self.beta);
        for t in 0..self.k {
            for (rank, (term, w)) in self.top_terms(t, top).into_iter().enumerate() {
                result.push(term, vec![(t + 1) as f64, (rank + 1) as f64, w]);
            }
        }
        result
    }

    /// Document-topic shares, one row per document.
    pub fn doc_topics_result(&self) -> AnalysisResult {
        let names: Vec<String> = (1..=self.k).map(|t| format!("topic_{t}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut result = AnalysisResult::table("lda_doc_topics", "record_id", &refs)
            .with_meta("k", self.k)
            .with_meta("seed", self.seed);
        for (id, row) in self.doc_ids.iter().zip(&self.doc_topic) {
            result.push(id.clone(), row.clone());
        }
        result
    }
}

/// Clusters records by TF-IDF cosine k-means; rows are `(record id, cluster,
/// x, y)` with `x, y` the first two principal-component coordinates.
pub fn cluster_documents(corpus: &Corpus, k: usize, seed: u64) -> Result<AnalysisResult, ThemeError> {
    let tokenizer = Tokenizer::bundled();
    // Work in record-id order so the clustering ignores input order.
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| corpus.records()[a].id.cmp(&corpus.records()[b].id).then(a.cmp(&b)));
    let docs: Vec<Vec<String>> = order
        .iter()
        .map(|&i| {
            let r = &corpus.records()[i];
            let mut tokens = tokenizer.tokenize(&r.title);
            tokens.extend(tokenizer.tokenize(&r.abstract_text));
            tokens.extend(record_keywords(r));
            tokens
        })
        .collect();
    let vectors = cluster::tfidf(&docs);
    let sorted_assignment = cluster::spherical_kmeans(&vectors, k, seed)?;
    let sorted_coords = cluster::pca_2d(&vectors);
    let mut assignment = vec![0; order.len()];
    let mut coords = vec![[0.0; 2]; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = sorted_assignment[pos];
        coords[i] = sorted_coords[pos];
    }
    let assignment = crate::util::first_appearance_ids(&assignment);
    let mut result = AnalysisResult::table("document_clusters", "record_id", &["cluster", "x", "y"])
        .with_meta(META_LABEL_AXIS, "record")
        .with_meta("k", k)
        .with_meta("seed", seed)
        .with_meta("projection", "pca");
    for ((r, c), xy) in corpus.iter().zip(&assignment).zip(&coords) {
        result.push(r.id.clone(), vec![*c as f64, xy[0], xy[1]]);
    }
    Ok(result)
}
