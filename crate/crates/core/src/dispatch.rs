//! Name-based access to every engine operation, as used by the HTTP service
//! and the CLI: `{module, operation, params}` in, [`AnalysisResult`] out.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use core::fmt;
use core::str::FromStr;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bibtrail::{self, CategoryField, CitationMode, DocTypeMode, JournalMode, Quartile, QuartileIndex, SeriesMode};
use crate::colabrix::{self, CentralityMeasure, CommunityMethod, Graph, NetworkLevel};
use crate::corpus::Corpus;
use crate::result::{AnalysisResult, META_LABEL_AXIS};
use crate::scitrace::{self, AuthorMode, CountryMode, EntityField, GenderMode, GenderProvider};
use crate::themantix::{self, KeywordSource, LdaParams, MappingAxis};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Bibtrail,
    Scitrace,
    Colabrix,
    Themantix,
}

impl Module {
    pub const ALL: [Module; 4] = [Module::Bibtrail, Module::Scitrace, Module::Colabrix, Module::Themantix];

    pub fn name(self) -> &'static str {
        match self {
            Module::Bibtrail => "bibtrail",
            Module::Scitrace => "scitrace",
            Module::Colabrix => "colabrix",
            Module::Themantix => "themantix",
        }
    }

    /// Operation names accepted by [`run_analysis`] for this module.
    pub fn operations(self) -> &'static [&'static str] {
        match self {
            Module::Bibtrail => &[
                "publications_series",
                "citations_series",
                "doc_type_analysis",
                "journal_analysis",
                "categorical_counts",
            ],
            Module::Scitrace => &["author_analysis", "country_analysis", "gender_analysis", "top_entities"],
            Module::Colabrix => &[
                "build_graph",
                "giant_component",
                "centrality",
                "centrality_distribution",
                "detect_communities",
                "modularity",
            ],
            Module::Themantix => &[
                "keyword_frequencies",
                "keyword_mapping",
                "cooccurrence_graph",
                "thematic_evolution",
                "lda_topics",
                "cluster_documents",
            ],
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Module {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Module::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidRequest(format!("unknown module '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub module: Module,
    pub operation: String,
    /// Operation parameters as a JSON object; `null` means all defaults.
    #[serde(default)]
    pub params: Value,
}

impl AnalysisRequest {
    pub fn new(module: Module, operation: &str, params: Value) -> Self {
        Self { module, operation: operation.to_string(), params }
    }
}

/// External inputs some operations need.
#[derive(Clone, Copy)]
pub struct AnalysisContext<'a> {
    pub quartiles: Option<&'a QuartileIndex>,
    pub gender: &'a dyn GenderProvider,
}

impl<'a> AnalysisContext<'a> {
    pub fn new(gender: &'a dyn GenderProvider) -> Self {
        Self { quartiles: None, gender }
    }

    pub fn with_quartiles(mut self, index: Option<&'a QuartileIndex>) -> Self {
        self.quartiles = index;
        self
    }
}

fn params<T: DeserializeOwned>(request: &AnalysisRequest) -> Result<T, Error> {
    let value = match &request.params {
        Value::Null => Value::Object(Default::default()),
        v => v.clone(),
    };
    serde_json::from_value(value).map_err(|e| {
        Error::InvalidRequest(format!("{}.{}: {e}", request.module, request.operation))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesParams {
    #[serde(default = "default_series_mode")]
    mode: SeriesMode,
    #[serde(default = "one")]
    year_gap: u32,
}

fn default_series_mode() -> SeriesMode {
    SeriesMode::Total
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeParams<M> {
    mode: M,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum JournalModeName {
    TopJournals,
    QuartileCounts,
    QuartileYearly,
    TopInQuartile,
    JournalsPerPublisher,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JournalParams {
    mode: JournalModeName,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    quartile: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryParams {
    field: CategoryField,
    #[serde(default)]
    vs_citations: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum AuthorModeName {
    PapersPerAuthorCount,
    TopAuthors,
    TeamSize,
    PairCollaboration,
}

fn ten() -> usize {
    10
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AuthorParams {
    mode: AuthorModeName,
    #[serde(default = "ten")]
    n: usize,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum GenderModeName {
    Totals,
    ByPosition,
    ByCountry,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenderParams {
    mode: GenderModeName,
    #[serde(default = "ten")]
    top_k: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityParams {
    field: EntityField,
    #[serde(default = "ten")]
    n: usize,
}

/// Which entities form the network nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GraphSource {
    Author,
    Country,
    Keyword,
}

fn default_source() -> GraphSource {
    GraphSource::Author
}

fn one_u64() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphParams {
    #[serde(default = "default_source")]
    level: GraphSource,
    #[serde(default = "one_u64")]
    min_edge_weight: u64,
    #[serde(default = "one_usize")]
    rank: usize,
    #[serde(default)]
    giant: Option<bool>,
    #[serde(default)]
    measure: Option<CentralityMeasure>,
    #[serde(default = "ten")]
    bins: usize,
    #[serde(default)]
    method: Option<CommunityMethod>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "unit")]
    resolution: f64,
}

fn one_usize() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl GraphParams {
    fn graph(&self, corpus: &Corpus) -> Result<Graph, Error> {
        Ok(match self.level {
            GraphSource::Author => colabrix::build_graph(corpus, NetworkLevel::Author).without_edges_below(self.min_edge_weight),
            GraphSource::Country => colabrix::build_graph(corpus, NetworkLevel::Country).without_edges_below(self.min_edge_weight),
            GraphSource::Keyword => themantix::cooccurrence_graph(corpus, self.min_edge_weight)?,
        })
    }

    /// The graph, restricted to its giant component when requested (or by
    /// default when `giant_default`).
    fn analysis_graph(&self, corpus: &Corpus, giant_default: bool) -> Result<Graph, Error> {
        let g = self.graph(corpus)?;
        if self.giant.unwrap_or(giant_default) {
            Ok(colabrix::giant_component(&g, 1)?)
        } else {
            Ok(g)
        }
    }

    fn measure(&self) -> CentralityMeasure {
        self.measure.unwrap_or(CentralityMeasure::Degree)
    }

    fn method(&self) -> CommunityMethod {
        self.method.unwrap_or(CommunityMethod::Leiden)
    }
}

fn level_name(level: GraphSource) -> &'static str {
    match level {
        GraphSource::Author => "author",
        GraphSource::Country => "country",
        GraphSource::Keyword => "keyword",
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordParams {
    #[serde(default = "default_keyword_source")]
    source: KeywordSource,
    #[serde(default = "fifty")]
    n: usize,
}

fn default_keyword_source() -> KeywordSource {
    KeywordSource::Both
}

fn fifty() -> usize {
    50
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingParams {
    axis: MappingAxis,
    #[serde(default = "ten")]
    top_keywords: usize,
    #[serde(default = "ten")]
    top_axis: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolutionParams {
    #[serde(default = "five")]
    slice_width: u32,
    #[serde(default = "ten")]
    top_terms: usize,
}

fn five() -> u32 {
    5
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum LdaOutput {
    #[default]
    TopicTerms,
    DocTopics,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LdaRequest {
    k: usize,
    #[serde(default = "default_iterations")]
    iterations: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default = "ten")]
    top_terms: usize,
    #[serde(default)]
    output: LdaOutput,
}

fn default_iterations() -> usize {
    500
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterParams {
    k: usize,
    #[serde(default)]
    seed: u64,
}

fn unknown(request: &AnalysisRequest) -> Error {
    Error::InvalidRequest(format!(
        "unknown operation '{}' for module {}; expected one of: {}",
        request.operation,
        request.module,
        request.module.operations().join(", ")
    ))
}

/// Run one named operation on `corpus`.
pub fn run_analysis(corpus: &Corpus, request: &AnalysisRequest, ctx: &AnalysisContext<'_>) -> Result<AnalysisResult, Error> {
    match request.module {
        Module::Bibtrail => run_bibtrail(corpus, request, ctx),
        Module::Scitrace => run_scitrace(corpus, request, ctx),
        Module::Colabrix => run_colabrix(corpus, request),
        Module::Themantix => run_themantix(corpus, request),
    }
}

fn run_bibtrail(corpus: &Corpus, request: &AnalysisRequest, ctx: &AnalysisContext<'_>) -> Result<AnalysisResult, Error> {
    Ok(match request.operation.as_str() {
        "publications_series" => {
            let p: SeriesParams = params(request)?;
            bibtrail::publications_series(corpus, p.mode, p.year_gap)?
        }
        "citations_series" => {
            let p: ModeParams<CitationMode> = params(request)?;
            bibtrail::citations_series(corpus, p.mode)
        }
        "doc_type_analysis" => {
            let p: ModeParams<DocTypeMode> = params(request)?;
            bibtrail::doc_type_analysis(corpus, p.mode)
        }
        "journal_analysis" => {
            let p: JournalParams = params(request)?;
            let mode = match p.mode {
                JournalModeName::TopJournals => JournalMode::TopJournals(p.n),
                JournalModeName::QuartileCounts => JournalMode::QuartileCounts,
                JournalModeName::QuartileYearly => JournalMode::QuartileYearly,
                JournalModeName::JournalsPerPublisher => JournalMode::JournalsPerPublisher,
                JournalModeName::TopInQuartile => {
                    let q = p
                        .quartile
                        .as_deref()
                        .ok_or_else(|| Error::InvalidRequest("top_in_quartile needs 'quartile'".into()))?;
                    let q = Quartile::from_str(q).map_err(Error::InvalidRequest)?;
                    JournalMode::TopInQuartile(q, p.n)
                }
            };
            bibtrail::journal_analysis(corpus, ctx.quartiles, mode)?
        }
        "categorical_counts" => {
            let p: CategoryParams = params(request)?;
            bibtrail::categorical_counts(corpus, p.field, p.vs_citations)?
        }
        _ => return Err(unknown(request)),
    })
}

fn run_scitrace(corpus: &Corpus, request: &AnalysisRequest, ctx: &AnalysisContext<'_>) -> Result<AnalysisResult, Error> {
    Ok(match request.operation.as_str() {
        "author_analysis" => {
            let p: AuthorParams = params(request)?;
            let mode = match p.mode {
                AuthorModeName::PapersPerAuthorCount => AuthorMode::PapersPerAuthorCount,
                AuthorModeName::TopAuthors => AuthorMode::TopAuthors(p.n),
                AuthorModeName::TeamSize => AuthorMode::TeamSize,
                AuthorModeName::PairCollaboration => AuthorMode::PairCollaboration,
            };
            scitrace::author_analysis(corpus, mode)?
        }
        "country_analysis" => {
            let p: ModeParams<CountryMode> = params(request)?;
            scitrace::country_analysis(corpus, p.mode)
        }
        "gender_analysis" => {
            let p: GenderParams = params(request)?;
            let mode = match p.mode {
                GenderModeName::Totals => GenderMode::Totals,
                GenderModeName::ByPosition => GenderMode::ByPosition,
                GenderModeName::ByCountry => GenderMode::ByCountry(p.top_k),
            };
            scitrace::gender_analysis(corpus, ctx.gender, mode)?
        }
        "top_entities" => {
            let p: EntityParams = params(request)?;
            scitrace::top_entities(corpus, p.field, p.n)?
        }
        _ => return Err(unknown(request)),
    })
}

fn run_colabrix(corpus: &Corpus, request: &AnalysisRequest) -> Result<AnalysisResult, Error> {
    let p: GraphParams = params(request)?;
    let level = level_name(p.level);
    let result = match request.operation.as_str() {
        "build_graph" => colabrix::graph_result(&p.graph(corpus)?, "collaboration_network"),
        "giant_component" => {
            let g = colabrix::giant_component(&p.graph(corpus)?, p.rank)?;
            colabrix::graph_result(&g, "giant_component").with_meta("rank", p.rank)
        }
        "centrality" => {
            let g = p.analysis_graph(corpus, true)?;
            let scores = colabrix::centrality(&g, p.measure())?;
            colabrix::centrality_result(&g, &scores)
        }
        "centrality_distribution" => {
            let g = p.analysis_graph(corpus, true)?;
            let scores = colabrix::centrality(&g, p.measure())?;
            colabrix::centrality_distribution(&scores, p.bins)?
        }
        "detect_communities" => {
            let g = p.analysis_graph(corpus, false)?;
            let partition = colabrix::detect_communities_with(&g, p.method(), p.seed, p.resolution)?;
            colabrix::partition_result(&g, &partition, p.method()).with_meta("seed", p.seed)
        }
        "modularity" => {
            let g = p.analysis_graph(corpus, false)?;
            let methods = match p.method {
                Some(m) => vec![m],
                None => vec![CommunityMethod::GirvanNewman, CommunityMethod::GreedyModularity, CommunityMethod::Leiden],
            };
            let mut result = AnalysisResult::table("modularity", "method", &["modularity", "communities"])
                .with_meta(META_LABEL_AXIS, "category")
                .with_meta("seed", p.seed);
            for m in methods {
                let partition = colabrix::detect_communities_with(&g, m, p.seed, p.resolution)?;
                result.push(m.name(), vec![partition.modularity, partition.community_count() as f64]);
            }
            result
        }
        _ => return Err(unknown(request)),
    };
    Ok(result.with_meta("level", level))
}

fn run_themantix(corpus: &Corpus, request: &AnalysisRequest) -> Result<AnalysisResult, Error> {
    Ok(match request.operation.as_str() {
        "keyword_frequencies" => {
            let p: KeywordParams = params(request)?;
            themantix::keyword_frequencies(corpus, p.source, p.n)?
        }
        "keyword_mapping" => {
            let p: MappingParams = params(request)?;
            themantix::keyword_mapping(corpus, p.axis, p.top_keywords, p.top_axis)?
        }
        "cooccurrence_graph" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "one_u64")]
                min_edge_weight: u64,
            }
            let p: P = params(request)?;
            let g = themantix::cooccurrence_graph(corpus, p.min_edge_weight)?;
            colabrix::graph_result(&g, "cooccurrence_network").with_meta("min_edge_weight", p.min_edge_weight)
        }
        "thematic_evolution" => {
            let p: EvolutionParams = params(request)?;
            themantix::thematic_evolution(corpus, p.slice_width, p.top_terms)?
                .to_result()
                .with_meta("slice_width", p.slice_width)
        }
        "lda_topics" => {
            let p: LdaRequest = params(request)?;
            let lda = LdaParams { k: p.k, iterations: p.iterations, seed: p.seed, alpha: p.alpha, beta: p.beta };
            let model = themantix::lda_topics(corpus, &lda)?;
            match p.output {
                LdaOutput::TopicTerms => model.topic_terms_result(p.top_terms),
                LdaOutput::DocTopics => model.doc_topics_result(),
            }
        }
        "cluster_documents" => {
            let p: ClusterParams = params(request)?;
            themantix::cluster_documents(corpus, p.k, p.seed)?
        }
        _ => return Err(unknown(request)),
    })
}
