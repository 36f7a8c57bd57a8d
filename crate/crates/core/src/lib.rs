//! Analysis engines for merged publication exports.
//!
//! The crate is `no_std` (with `alloc`): it never touches files, sockets or
//! clocks. Parsing raw bytes, persistence, the HTTP service and the CLI live in
//! the `scholarscope` companion crate.
//!
//! Pipeline: [`ingest`] maps raw tables to [`Record`]s and merges them into an
//! immutable [`Corpus`]; [`corpus`] filters and summarizes it; the four
//! engines ([`bibtrail`], [`scitrace`], [`colabrix`], [`themantix`]) produce
//! [`AnalysisResult`]s; [`viz`] turns results into chart specs and SVG;
//! [`summarize`] writes a short textual reading of a result.
#![no_std]

extern crate alloc;

pub mod bibtrail;
pub mod colabrix;
pub mod corpus;
pub mod dispatch;
pub mod ingest;
pub mod record;
pub mod result;
pub mod scitrace;
pub mod summarize;
pub mod synthetic;
pub mod themantix;
pub mod viz;

mod util;

pub use corpus::{Corpus, CorpusStats, FilterSpec};
pub use dispatch::{run_analysis, AnalysisContext, AnalysisRequest, Module};
pub use record::Record;
pub use result::{AnalysisResult, NetworkData, ResultRow, ResultShape};

/// Any error surfaced by an analysis engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Bibtrail(#[from] bibtrail::BibtrailError),
    #[error(transparent)]
    Scitrace(#[from] scitrace::ScitraceError),
    #[error(transparent)]
    Graph(#[from] colabrix::GraphError),
    #[error(transparent)]
    Theme(#[from] themantix::ThemeError),
    #[error(transparent)]
    Chart(#[from] viz::ChartError),
    #[error("invalid request: {0}")]
    InvalidRequest(alloc::string::String),
}
