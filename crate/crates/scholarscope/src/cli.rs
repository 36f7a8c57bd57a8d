//! `scholarscope` command line: ingest, analyze, summarize, serve.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
//! standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::Value;
use scholarscope_core::corpus::filter;
use scholarscope_core::ingest::{apply_mapping, infer_field_mapping, merge_and_dedup, FieldMapping, SourceKind};
use scholarscope_core::scitrace::TableGenderProvider;
use scholarscope_core::summarize::{SummaryProvider, TemplateProvider};
use scholarscope_core::viz::{build_chart_spec, compatible_chart_types, render_svg, Background, ChartOptions};
use scholarscope_core::{run_analysis, AnalysisContext, AnalysisRequest, FilterSpec, Module};

use crate::formats::{export_csv, import_result_csv, load_scimago, parse_delimited, read_corpus_csv, write_corpus_csv};
use crate::providers::{summarize_logged, Endpoint, HttpSummaryProvider};
use crate::service::{self, ServiceConfig};

#[derive(Parser, Debug)]
#[command(name = "scholarscope", version, about = "Bibliometric, scientometric, network and thematic analysis of publication exports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map and merge export files into one deduplicated corpus CSV.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "scopus")]
        kind: SourceKind,
        #[arg(long)]
        out: PathBuf,
        /// Dedup report path; defaults to `<out stem>.dedup.json`.
        #[arg(long)]
        report: Option<PathBuf>,
        /// FieldMapping JSON used for every file instead of inference.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Run one analysis operation over a corpus CSV.
    Analyze {
        corpus: PathBuf,
        #[arg(long)]
        module: Module,
        #[arg(long)]
        op: String,
        /// Shorthand for `params.mode`.
        #[arg(long)]
        mode: Option<String>,
        /// Operation parameters: inline JSON or `@file`.
        #[arg(long)]
        params: Option<String>,
        /// FilterSpec JSON file.
        #[arg(long)]
        filter: Option<PathBuf>,
        /// Scimago journal-rank file.
        #[arg(long)]
        scimago: Option<PathBuf>,
        #[arg(long)]
        scimago_year: Option<i32>,
        /// Write the result JSON here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// ChartOptions JSON file; defaults to the first compatible chart type.
        #[arg(long)]
        chart_options: Option<PathBuf>,
        #[arg(long, default_value = "white")]
        bg: Background,
    },
    /// Summarize an exported result CSV.
    Summarize {
        result: PathBuf,
        /// `fallback` or the URL of a summary service.
        #[arg(long, default_value = "fallback")]
        provider: String,
        /// Result kind recorded in the summary (the CSV does not carry it).
        #[arg(long, default_value = "table")]
        kind: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8], out: &mut dyn Write) -> Result<(), Failure> {
    if path == Path::new("-") {
        return out.write_all(bytes).map_err(data);
    }
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_slice(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn label_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            if informational {
                let _ = out.write_all(rendered.as_bytes());
                return 0;
            }
            let _ = err.write_all(rendered.as_bytes());
            return 1;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

/// Entry point for the binary: process arguments and standard streams.
pub fn main_with_env() -> i32 {
    let filter = tracing_subscriber::EnvFilter::try_from_env("SCHOLARSCOPE_LOG").unwrap_or_else(|_| "info".into());
    let ansi = std::io::IsTerminal::is_terminal(&std::io::stderr());
    tracing_subscriber::fmt().with_env_filter(filter).with_ansi(ansi).with_writer(std::io::stderr).init();
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Ingest { files, kind, out: out_path, report, mapping } => {
            let fixed: Option<FieldMapping> = mapping.as_deref().map(read_json).transpose()?;
            let mut lists = Vec::new();
            for path in &files {
                let table = parse_delimited(&read(path)?, kind, &label_of(path))
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                let mapping = fixed.clone().unwrap_or_else(|| infer_field_mapping(&table));
                let records = apply_mapping(&table, &mapping).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                lists.push(records);
            }
            let (corpus, dedup) = merge_and_dedup(lists).map_err(data)?;
            write(&out_path, &write_corpus_csv(&corpus), out)?;
            let report_path = report.unwrap_or_else(|| out_path.with_extension("dedup.json"));
            let report_json = serde_json::to_vec_pretty(&dedup).map_err(data)?;
            write(&report_path, &report_json, out)?;
            writeln!(
                out,
                "{} input records, {} kept, {} duplicate groups -> {}",
                dedup.input_count,
                dedup.kept,
                dedup.duplicate_groups.len(),
                out_path.display()
            )
            .map_err(data)?;
            Ok(())
        }
        Command::Analyze {
            corpus,
            module,
            op,
            mode,
            params,
            filter: filter_path,
            scimago,
            scimago_year,
            json,
            csv,
            svg,
            chart_options,
            bg,
        } => {
            let mut params: Value = match params.as_deref() {
                None => Value::Object(Default::default()),
                Some(p) => {
                    let text = match p.strip_prefix('@') {
                        Some(file) => String::from_utf8(read(Path::new(file))?).map_err(data)?,
                        None => p.to_string(),
                    };
                    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("--params: {e}")))?
                }
            };
            if let Some(mode) = mode {
                let Value::Object(map) = &mut params else {
                    return Err(Failure::Usage("--params must be a JSON object when --mode is given".into()));
                };
                map.insert("mode".into(), Value::String(mode));
            }
            let spec: FilterSpec = match &filter_path {
                Some(p) => read_json(p)?,
                None => FilterSpec::default(),
            };
            let corpus = read_corpus_csv(&read(&corpus)?).map_err(data)?;
            let corpus = filter(&corpus, &spec).map_err(data)?;
            let quartiles = match &scimago {
                Some(p) => Some(load_scimago(&read(p)?, scimago_year).map_err(data)?),
                None => None,
            };
            let gender = TableGenderProvider::bundled();
            let ctx = AnalysisContext::new(&gender).with_quartiles(quartiles.as_ref());
            let request = AnalysisRequest::new(module, &op, params);
            let result = run_analysis(&corpus, &request, &ctx).map_err(data)?;

            if let Some(path) = &json {
                write(path, &serde_json::to_vec(&result).map_err(data)?, out)?;
            }
            if let Some(path) = &csv {
                write(path, &export_csv(&result), out)?;
            }
            if let Some(path) = &svg {
                let options = match &chart_options {
                    Some(p) => read_json(p)?,
                    None => {
                        let first = compatible_chart_types(&result.kind).into_iter().next().ok_or_else(|| {
                            Failure::Data(format!("no chart type can draw a '{}' result", result.kind))
                        })?;
                        ChartOptions::of_type(first)
                    }
                };
                let spec = build_chart_spec(&result, &options).map_err(data)?;
                write(path, render_svg(&spec, bg).as_bytes(), out)?;
            }
            if json.is_none() && csv.is_none() && svg.is_none() {
                out.write_all(&export_csv(&result)).map_err(data)?;
            }
            Ok(())
        }
        Command::Summarize { result, provider, kind } => {
            let result = import_result_csv(&read(&result)?, &kind).map_err(data)?;
            let provider: Box<dyn SummaryProvider> = if provider == "fallback" {
                Box::new(TemplateProvider)
            } else if provider.starts_with("http://") || provider.starts_with("https://") {
                Box::new(HttpSummaryProvider::new(Endpoint::new(provider)))
            } else {
                return Err(Failure::Usage(format!("--provider must be 'fallback' or a URL, got '{provider}'")));
            };
            let summary = summarize_logged(&result, None, provider.as_ref());
            writeln!(out, "{}", summary.text).map_err(data)?;
            Ok(())
        }
        Command::Serve { port, data_dir } => {
            let mut config = ServiceConfig::from_env();
            if let Some(p) = port {
                config.port = p;
            }
            if let Some(d) = data_dir {
                config.data_dir = d;
            }
            let runtime = tokio::runtime::Runtime::new().map_err(data)?;
            runtime.block_on(service::serve(config)).map_err(data)
        }
    }
}
