//! Std companion to `scholarscope-core`: file formats, external service
//! clients, the project store, the HTTP API and the command-line driver.

pub mod cli;
pub mod formats;
pub mod providers;
pub mod service;
pub mod store;

pub use formats::{export_csv, load_scimago, parse_delimited, read_corpus_csv, write_corpus_csv};
