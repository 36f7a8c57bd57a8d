//! Byte-level formats: export parsing (CSV, TSV, Web of Science tagged text),
//! the canonical corpus CSV, result CSV and Scimago rank files.

use std::io::Write;

use scholarscope_core::bibtrail::{BibtrailError, QuartileIndex};
use scholarscope_core::ingest::{CanonicalField, IngestError, RawTable, SourceKind};
use scholarscope_core::{AnalysisResult, Corpus, Record, ResultShape};

/// Separator used when multi-valued fields are written to one cell.
pub const MULTI_VALUE_JOIN: &str = "; ";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Scimago(#[from] BibtrailError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("corpus file is missing column '{0}'")]
    MissingColumn(String),
    #[error("row {row}, column '{column}': {reason}")]
    BadCell { row: usize, column: String, reason: String },
    #[error("empty file")]
    Empty,
}

fn decode(bytes: &[u8]) -> Result<&str, IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    std::str::from_utf8(bytes).map_err(|_| IngestError::UndecodableBytes)
}

fn split_delimited(text: &str, delimiter: u8) -> Result<Vec<Vec<String>>, csv::Error> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

fn table_from_rows(
    mut rows: Vec<Vec<String>>,
    label: &str,
    kind: SourceKind,
) -> Result<RawTable, IngestError> {
    if rows.is_empty() {
        return Err(IngestError::NoHeaderRow);
    }
    let headers = rows.remove(0);
    rows.retain(|r| r.iter().any(|c| !c.trim().is_empty()));
    RawTable::new(headers, rows, label, kind)
}

/// True when the text looks like a Web of Science field-tagged export.
pub fn is_tagged(text: &str) -> bool {
    text.lines()
        .map(str::trim_end)
        .find(|l| !l.is_empty())
        .is_some_and(|l| tag_of(l).is_some_and(|t| matches!(t, "FN" | "VR" | "PT" | "AU" | "TI")))
}

fn tag_of(line: &str) -> Option<&str> {
    let b = line.as_bytes();
    let ok = b.len() >= 2
        && b[0].is_ascii_uppercase()
        && (b[1].is_ascii_uppercase() || b[1].is_ascii_digit())
        && (b.len() == 2 || b[2] == b' ');
    ok.then(|| &line[..2])
}

/// Tags whose continuation lines are separate values rather than wrapped text.
const LINE_PER_VALUE: [&str; 8] = ["AU", "AF", "C1", "C3", "CR", "EM", "BE", "BF"];

fn parse_tagged(text: &str, label: &str) -> Result<RawTable, IngestError> {
    let mut headers: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<(String, String)>> = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    let mut last_tag: Option<String> = None;
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("   ") {
            if let (Some(tag), Some(entry)) = (&last_tag, current.last_mut()) {
                let sep = if LINE_PER_VALUE.contains(&tag.as_str()) { MULTI_VALUE_JOIN } else { " " };
                entry.1.push_str(sep);
                entry.1.push_str(rest.trim());
            }
            continue;
        }
        let Some(tag) = tag_of(line) else { continue };
        let value = line.get(3..).unwrap_or("").trim().to_string();
        match tag {
            "FN" | "VR" | "EF" => last_tag = None,
            "ER" => {
                if !current.is_empty() {
                    rows.push(std::mem::take(&mut current));
                }
                last_tag = None;
            }
            _ => {
                if !headers.iter().any(|h| h == tag) {
                    headers.push(tag.to_string());
                }
                match current.iter_mut().find(|(t, _)| t == tag) {
                    Some(entry) => {
                        entry.1.push_str(MULTI_VALUE_JOIN);
                        entry.1.push_str(&value);
                    }
                    None => current.push((tag.to_string(), value)),
                }
                last_tag = Some(tag.to_string());
            }
        }
    }
    if !current.is_empty() {
        rows.push(current);
    }
    if headers.is_empty() {
        return Err(IngestError::NoHeaderRow);
    }
    let rows = rows
        .into_iter()
        .map(|fields| {
            headers
                .iter()
                .map(|h| fields.iter().find(|(t, _)| t == h).map(|(_, v)| v.clone()).unwrap_or_default())
                .collect()
        })
        .collect();
    RawTable::new(headers, rows, label, SourceKind::Wos)
}

/// Parse an export file. Scopus and generic files are comma separated with
/// RFC 4180 quoting; WoS files are either tab separated or field tagged.
/// A UTF-8 byte order mark is ignored.
pub fn parse_delimited(bytes: &[u8], kind: SourceKind, label: &str) -> Result<RawTable, FormatError> {
    let text = decode(bytes)?;
    match kind {
        SourceKind::Wos if is_tagged(text) => Ok(parse_tagged(text, label)?),
        SourceKind::Wos => Ok(table_from_rows(split_delimited(text, b'\t')?, label, kind)?),
        SourceKind::Scopus | SourceKind::GenericCsv => {
            Ok(table_from_rows(split_delimited(text, b',')?, label, kind)?)
        }
    }
}

/// Comma-separated reading regardless of dialect; inverse of [`write_raw_table`].
pub fn parse_csv_table(bytes: &[u8], kind: SourceKind, label: &str) -> Result<RawTable, FormatError> {
    let text = decode(bytes)?;
    Ok(table_from_rows(split_delimited(text, b',')?, label, kind)?)
}

fn csv_writer(out: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_raw_table(table: &RawTable) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut w = csv_writer(&mut out);
        w.write_record(table.headers()).expect("in-memory write");
        for row in table.rows() {
            w.write_record(row).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    out
}

const CORPUS_PREFIX: [&str; 2] = ["id", "source_label"];

fn corpus_headers() -> Vec<&'static str> {
    CORPUS_PREFIX.iter().copied().chain(CanonicalField::ALL.iter().map(|f| f.name())).collect()
}

fn record_cell(r: &Record, field: CanonicalField) -> String {
    let join = |v: &[String]| v.join(MULTI_VALUE_JOIN);
    match field {
        CanonicalField::Title => r.title.clone(),
        CanonicalField::Authors => join(&r.authors),
        CanonicalField::AuthorIds => join(&r.author_ids),
        CanonicalField::Affiliations => join(&r.affiliations),
        CanonicalField::Countries => join(&r.countries),
        CanonicalField::Year => r.year.map(|y| y.to_string()).unwrap_or_default(),
        CanonicalField::SourceTitle => r.source_title.clone(),
        CanonicalField::Issn => join(&r.issn),
        CanonicalField::Doi => r.doi.clone().unwrap_or_default(),
        CanonicalField::Citations => r.citations.to_string(),
        CanonicalField::DocType => r.doc_type.clone(),
        CanonicalField::Publisher => r.publisher.clone(),
        CanonicalField::OpenAccess => r.open_access.clone(),
        CanonicalField::Language => r.language.clone(),
        CanonicalField::AuthorKeywords => join(&r.author_keywords),
        CanonicalField::IndexKeywords => join(&r.index_keywords),
        CanonicalField::Abstract => r.abstract_text.clone(),
        CanonicalField::Funding => join(&r.funding),
    }
}

/// One row per record, one column per canonical field, multi-values joined
/// with `"; "`.
pub fn write_corpus_csv(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut w = csv_writer(&mut out);
        w.write_record(corpus_headers()).expect("in-memory write");
        for r in corpus.iter() {
            let mut row = vec![r.id.clone(), r.source_label.clone()];
            row.extend(CanonicalField::ALL.iter().map(|f| record_cell(r, *f)));
            w.write_record(&row).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    out
}

fn split_joined(cell: &str) -> Vec<String> {
    if cell.is_empty() {
        Vec::new()
    } else {
        cell.split(MULTI_VALUE_JOIN).map(str::to_owned).collect()
    }
}

/// Inverse of [`write_corpus_csv`]. Values are taken as written; no mapping
/// or normalization is re-applied.
pub fn read_corpus_csv(bytes: &[u8]) -> Result<Corpus, FormatError> {
    let text = decode(bytes)?;
    let mut rows = split_delimited(text, b',')?.into_iter();
    let headers = rows.next().ok_or(FormatError::Empty)?;
    let index: Vec<usize> = corpus_headers()
        .iter()
        .map(|h| headers.iter().position(|x| x == h).ok_or_else(|| FormatError::MissingColumn(h.to_string())))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    for (n, row) in rows.enumerate() {
        let cell = |i: usize| row.get(index[i]).map(String::as_str).unwrap_or("");
        let field = |f: CanonicalField| cell(2 + CanonicalField::ALL.iter().position(|x| *x == f).unwrap());
        let bad = |column: &str, reason: String| FormatError::BadCell { row: n + 2, column: column.into(), reason };
        let year = match field(CanonicalField::Year) {
            "" => None,
            y => Some(y.parse::<i32>().map_err(|e| bad("year", e.to_string()))?),
        };
        let citations = field(CanonicalField::Citations)
            .parse::<u64>()
            .map_err(|e| bad("citations", e.to_string()))?;
        let doi = Some(field(CanonicalField::Doi)).filter(|d| !d.is_empty()).map(str::to_owned);
        records.push(Record {
            id: cell(0).to_string(),
            source_label: cell(1).to_string(),
            title: field(CanonicalField::Title).to_string(),
            authors: split_joined(field(CanonicalField::Authors)),
            author_ids: split_joined(field(CanonicalField::AuthorIds)),
            affiliations: split_joined(field(CanonicalField::Affiliations)),
            countries: split_joined(field(CanonicalField::Countries)),
            year,
            source_title: field(CanonicalField::SourceTitle).to_string(),
            issn: split_joined(field(CanonicalField::Issn)),
            doi,
            citations,
            doc_type: field(CanonicalField::DocType).to_string(),
            publisher: field(CanonicalField::Publisher).to_string(),
            open_access: field(CanonicalField::OpenAccess).to_string(),
            language: field(CanonicalField::Language).to_string(),
            author_keywords: split_joined(field(CanonicalField::AuthorKeywords)),
            index_keywords: split_joined(field(CanonicalField::IndexKeywords)),
            abstract_text: field(CanonicalField::Abstract).to_string(),
            funding: split_joined(field(CanonicalField::Funding)),
        });
    }
    Ok(Corpus::new(records))
}

/// Result table as CSV: the label column followed by the value columns, in
/// row order. Numbers use the shortest text that parses back to the same
/// value. Distribution results are written long: one observation per line,
/// and a group without observations as a label with an empty value.
pub fn export_csv(result: &AnalysisResult) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut w = csv_writer(&mut out);
        let mut header = vec![result.label_name.clone()];
        header.extend(result.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &result.rows {
            match result.shape {
                ResultShape::Table => {
                    let mut cells = vec![row.label.clone()];
                    cells.extend(row.values.iter().map(f64::to_string));
                    w.write_record(&cells).expect("in-memory write");
                }
                ResultShape::Distribution if row.values.is_empty() => {
                    w.write_record([row.label.as_str(), ""]).expect("in-memory write");
                }
                ResultShape::Distribution => {
                    for v in &row.values {
                        w.write_record([row.label.clone(), v.to_string()]).expect("in-memory write");
                    }
                }
            }
        }
        w.flush().expect("in-memory write");
    }
    out
}

/// Reads a table written by [`export_csv`]. The file does not carry the
/// result kind, so the caller supplies it. A single value column whose labels
/// repeat, or which has empty cells, is read back as a distribution; a label
/// column made only of years gets the year axis.
pub fn import_result_csv(bytes: &[u8], kind: &str) -> Result<AnalysisResult, FormatError> {
    let text = decode(bytes)?;
    let mut rows = split_delimited(text, b',')?.into_iter();
    let header = rows.next().ok_or(FormatError::Empty)?;
    let (label_name, columns) = header.split_first().ok_or(FormatError::Empty)?;
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = rows.collect();
    let long = columns.len() == 1 && {
        let mut seen = std::collections::BTreeSet::new();
        rows.iter().any(|r| !seen.insert(r[0].as_str()) || r.get(1).is_none_or(|c| c.trim().is_empty()))
    };
    let mut result = if long {
        AnalysisResult::distribution(kind, label_name, columns[0])
    } else {
        AnalysisResult::table(kind, label_name, &columns)
    };
    for (n, row) in rows.iter().enumerate() {
        let (label, cells) = row.split_first().ok_or(FormatError::Empty)?;
        let mut values = cells
            .iter()
            .zip(&columns)
            .filter(|(c, _)| !(long && c.trim().is_empty()))
            .map(|(c, col)| {
                c.trim().parse::<f64>().map_err(|e| FormatError::BadCell {
                    row: n + 2,
                    column: col.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match result.rows.last_mut() {
            Some(last) if long && last.label == *label => last.values.append(&mut values),
            _ => result.push(label.clone(), values),
        }
    }
    let years = !result.rows.is_empty()
        && result.rows.iter().all(|r| r.label.parse::<i32>().is_ok_and(|y| (1500..=2100).contains(&y)));
    if years {
        result = result.with_meta(scholarscope_core::result::META_LABEL_AXIS, "year");
    }
    Ok(result)
}

/// Scimago journal-rank export: semicolon separated with `Issn` and
/// `SJR Best Quartile` columns.
pub fn load_scimago(bytes: &[u8], source_year: Option<i32>) -> Result<QuartileIndex, FormatError> {
    let text = decode(bytes)?;
    let mut rows = split_delimited(text, b';')?;
    if rows.is_empty() {
        return Err(BibtrailError::MalformedScimagoFile("empty file".into()).into());
    }
    let headers = rows.remove(0);
    Ok(QuartileIndex::from_table(&headers, &rows, source_year)?)
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so a
/// crash never leaves a half-written file.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    static SEQ: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let seq = SEQ.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{}.{seq}.tmp", std::process::id()));
    let tmp = path.with_file_name(name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_csv() {
        let t = parse_delimited(b"a,b\n1,2", SourceKind::GenericCsv, "f").unwrap();
        assert_eq!(t.headers(), ["a", "b"]);
        assert_eq!(t.rows(), [vec!["1".to_string(), "2".to_string()]]);
    }

    #[test]
    fn quoted_cell_and_bom() {
        let t = parse_delimited("\u{feff}x,y\n\"x, y\",2\n".as_bytes(), SourceKind::Scopus, "f").unwrap();
        assert_eq!(t.headers(), ["x", "y"]);
        assert_eq!(t.rows()[0][0], "x, y");
    }

    #[test]
    fn ragged_rows_are_padded() {
        let t = parse_delimited(b"a,b,c\n1\n1,2,3,4\n", SourceKind::GenericCsv, "f").unwrap();
        assert_eq!(t.headers().len(), 4);
        assert!(t.rows().iter().all(|r| r.len() == 4));
    }

    #[test]
    fn header_problems() {
        assert!(matches!(
            parse_delimited(b"", SourceKind::Scopus, "f"),
            Err(FormatError::Ingest(IngestError::NoHeaderRow))
        ));
        assert!(matches!(
            parse_delimited(b" , \n1,2", SourceKind::Scopus, "f"),
            Err(FormatError::Ingest(IngestError::NoHeaderRow))
        ));
        assert!(matches!(
            parse_delimited(b"\xff\xfe", SourceKind::Scopus, "f"),
            Err(FormatError::Ingest(IngestError::UndecodableBytes))
        ));
    }

    #[test]
    fn wos_tagged_record() {
        let text = "FN Clarivate Analytics Web of Science\nVR 1.0\nPT J\nAU Smith, J\n   Lee, K\nTI Graph mining at\n   scale\nPY 2020\nER\n\nEF\n";
        let t = parse_delimited(text.as_bytes(), SourceKind::Wos, "w").unwrap();
        assert_eq!(t.headers(), ["PT", "AU", "TI", "PY"]);
        assert_eq!(t.rows().len(), 1);
        assert_eq!(t.rows()[0][1], "Smith, J; Lee, K");
        assert_eq!(t.rows()[0][2], "Graph mining at scale");
        assert_eq!(t.rows()[0][3], "2020");
    }

    #[test]
    fn wos_tab_delimited() {
        let t = parse_delimited(b"PT\tAU\tPY\nJ\tSmith, J\t2020\n", SourceKind::Wos, "w").unwrap();
        assert_eq!(t.headers(), ["PT", "AU", "PY"]);
        assert_eq!(t.rows()[0][1], "Smith, J");
    }

    #[test]
    fn raw_table_round_trip() {
        let t = parse_delimited(b"a,a,\"q\"\"uote\"\n\"1,5\",\"line\nbreak\",\n", SourceKind::Scopus, "f").unwrap();
        let bytes = write_raw_table(&t);
        let back = parse_csv_table(&bytes, t.source_kind, &t.source_label).unwrap();
        assert_eq!(back, t);
        assert_eq!(write_raw_table(&back), bytes);
    }

    #[test]
    fn export_quotes_and_round_trips() {
        let mut r = AnalysisResult::table("journals_top", "journal", &["publications"]);
        r.push("Nature, London", vec![3.0]);
        r.push("Cell", vec![0.1 + 0.2]);
        let bytes = export_csv(&r);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("journal,publications\n\"Nature, London\",3\n"));
        let back = import_result_csv(&bytes, "journals_top").unwrap();
        assert_eq!(back.rows, r.rows);
        assert_eq!(back.columns, r.columns);
        assert_eq!(back.label_name, r.label_name);

        let mut one = AnalysisResult::table("k", "year", &["n"]);
        one.push("2020", vec![1.0]);
        assert_eq!(export_csv(&one).iter().filter(|b| **b == b'\n').count(), 2);
    }

    #[test]
    fn scimago_semicolons() {
        let text = "Rank;Sourceid;Title;Type;Issn;SJR;SJR Best Quartile\n1;1;\"A; B\";journal;\"15454509, 00664154\";\"61,2\";Q1\n2;2;C;journal;12345679;1;-\n";
        let idx = load_scimago(text.as_bytes(), Some(2023)).unwrap();
        assert_eq!(idx.len(), 2);
        assert!(load_scimago(b"Title;Issn\nA;1\n", None).is_err());
    }
}
