//! File-backed project persistence. Layout under the data directory:
//!
//! ```text
//! secret.key
//! projects/<id>/project.json
//! projects/<id>/files/<n>.dat          uploaded bytes, as received
//! projects/<id>/corpus/v<k>.csv        canonical corpus of build k
//! projects/<id>/corpus/v<k>.dedup.json
//! projects/<id>/scimago.csv
//! projects/<id>/results/<result_id>.json
//! projects/<id>/charts/<spec_id>.json
//! ```

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use scholarscope_core::bibtrail::QuartileIndex;
use scholarscope_core::corpus::{filter, summarize_corpus};
use scholarscope_core::ingest::{apply_mapping, infer_field_mapping, merge_and_dedup, DedupReport, FieldMapping, RawTable, SourceKind};
use scholarscope_core::{Corpus, CorpusStats, FilterSpec};

use crate::formats::{self, write_atomic, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("project '{0}' not found")]
    ProjectNotFound(String),
    #[error("{0} '{1}' not found")]
    NotFound(&'static str, String),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Invalid(#[from] scholarscope_core::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("storage: {0}")]
    Io(#[from] io::Error),
    #[error("stored metadata is unreadable: {0}")]
    Corrupt(#[from] serde_json::Error),
}

impl From<scholarscope_core::ingest::IngestError> for StoreError {
    fn from(e: scholarscope_core::ingest::IngestError) -> Self {
        StoreError::Invalid(e.into())
    }
}

impl From<scholarscope_core::corpus::CorpusError> for StoreError {
    fn from(e: scholarscope_core::corpus::CorpusError) -> Self {
        StoreError::Invalid(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredFile {
    pub file_id: usize,
    pub source_label: String,
    pub source_kind: SourceKind,
    pub headers: Vec<String>,
    pub rows: usize,
    pub mapping: FieldMapping,
}

/// The journal-rank file attached to a project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScimagoInfo {
    pub content_id: String,
    pub entries: usize,
    pub source_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub project_id: String,
    pub owner: String,
    pub files: Vec<StoredFile>,
    pub filters: FilterSpec,
    /// 0 until the first build; each build increments it.
    pub corpus_version: u64,
    pub scimago: Option<ScimagoInfo>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
}

impl Project {
    pub fn has_corpus(&self) -> bool {
        self.corpus_version > 0
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Lowercase hex SHA-256 of `bytes`, cut to 32 characters.
pub fn content_id(bytes: &[u8]) -> String {
    let mut h = hex::encode(Sha256::digest(bytes));
    h.truncate(32);
    h
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    corpora: RwLock<HashMap<(String, u64), Arc<Corpus>>>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join("projects"))?;
        Ok(Self { root, locks: Mutex::new(HashMap::new()), corpora: RwLock::new(HashMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Signing secret, created on first use and kept across restarts.
    pub fn secret(&self) -> Result<Vec<u8>, StoreError> {
        let path = self.root.join("secret.key");
        match fs::read(&path) {
            Ok(bytes) if !bytes.is_empty() => Ok(bytes),
            _ => {
                let secret = format!("{}{}", uuid::Uuid::new_v4().simple(), uuid::Uuid::new_v4().simple());
                write_atomic(&path, secret.as_bytes())?;
                Ok(secret.into_bytes())
            }
        }
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join("projects").join(id)
    }

    /// Serializes mutations of one project.
    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.locks.lock().expect("lock table").entry(id.to_string()).or_default().clone()
    }

    pub fn create_project(&self, owner: &str) -> Result<Project, StoreError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        for sub in ["files", "corpus", "results", "charts"] {
            fs::create_dir_all(self.dir(&id).join(sub))?;
        }
        let t = now();
        let project = Project {
            project_id: id,
            owner: owner.to_string(),
            files: Vec::new(),
            filters: FilterSpec::default(),
            corpus_version: 0,
            scimago: None,
            created_at: t,
            updated_at: t,
        };
        self.save(&project)?;
        Ok(project)
    }

    pub fn project(&self, id: &str) -> Result<Project, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::ProjectNotFound(id.to_string()));
        }
        match fs::read(self.dir(id).join("project.json")) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::ProjectNotFound(id.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn projects_of(&self, owner: &str) -> Result<Vec<Project>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("projects"))? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Ok(p) = self.project(&name) {
                if p.owner == owner {
                    out.push(p);
                }
            }
        }
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.project_id.cmp(&b.project_id)));
        Ok(out)
    }

    fn save(&self, project: &Project) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(project)?;
        write_atomic(&self.dir(&project.project_id).join("project.json"), &bytes)?;
        Ok(())
    }

    fn update<T>(&self, id: &str, f: impl FnOnce(&mut Project) -> Result<T, StoreError>) -> Result<(Project, T), StoreError> {
        let lock = self.lock(id);
        let _guard = lock.lock().expect("project lock");
        let mut project = self.project(id)?;
        let out = f(&mut project)?;
        project.updated_at = now();
        self.save(&project)?;
        Ok((project, out))
    }

    /// Parses and stores an uploaded export, with its inferred mapping.
    pub fn add_file(&self, id: &str, name: &str, kind: SourceKind, bytes: &[u8]) -> Result<(StoredFile, RawTable), StoreError> {
        let (_, out) = self.update(id, |p| {
            let file_id = p.files.len() + 1;
            let label = if name.trim().is_empty() { format!("file{file_id}") } else { name.trim().to_string() };
            let table = formats::parse_delimited(bytes, kind, &label)?;
            let stored = StoredFile {
                file_id,
                source_label: label,
                source_kind: kind,
                headers: table.headers().to_vec(),
                rows: table.rows().len(),
                mapping: infer_field_mapping(&table),
            };
            write_atomic(&self.dir(id).join("files").join(format!("{file_id}.dat")), bytes)?;
            p.files.push(stored.clone());
            Ok((stored, table))
        })?;
        Ok(out)
    }

    pub fn table(&self, id: &str, file: &StoredFile) -> Result<RawTable, StoreError> {
        let bytes = fs::read(self.dir(id).join("files").join(format!("{}.dat", file.file_id)))?;
        Ok(formats::parse_delimited(&bytes, file.source_kind, &file.source_label)?)
    }

    /// Replaces the mapping of one file, or of every file when `file_id` is
    /// `None`. The mapping must apply cleanly to each target table.
    pub fn set_mapping(&self, id: &str, file_id: Option<usize>, mapping: &FieldMapping) -> Result<Vec<StoredFile>, StoreError> {
        let (_, out) = self.update(id, |p| {
            let targets: Vec<usize> = match file_id {
                Some(f) => vec![p
                    .files
                    .iter()
                    .position(|x| x.file_id == f)
                    .ok_or_else(|| StoreError::NotFound("file", f.to_string()))?],
                None => (0..p.files.len()).collect(),
            };
            if targets.is_empty() {
                return Err(StoreError::Conflict("no files uploaded".into()));
            }
            for &i in &targets {
                let table = self.table(id, &p.files[i])?;
                apply_mapping(&table, mapping)?;
            }
            for &i in &targets {
                p.files[i].mapping = mapping.clone();
            }
            Ok(targets.iter().map(|&i| p.files[i].clone()).collect())
        })?;
        Ok(out)
    }

    /// Maps every file, merges and deduplicates, and stores a new corpus
    /// version.
    pub fn build(&self, id: &str) -> Result<(Project, DedupReport, CorpusStats), StoreError> {
        let (project, (report, stats)) = self.update(id, |p| {
            if p.files.is_empty() {
                return Err(StoreError::Conflict("build needs at least one uploaded file".into()));
            }
            let mut lists = Vec::new();
            for f in &p.files {
                lists.push(apply_mapping(&self.table(id, f)?, &f.mapping)?);
            }
            let (corpus, report) = merge_and_dedup(lists)?;
            let version = p.corpus_version + 1;
            let base = self.dir(id).join("corpus");
            write_atomic(&base.join(format!("v{version}.csv")), &formats::write_corpus_csv(&corpus))?;
            write_atomic(&base.join(format!("v{version}.dedup.json")), &serde_json::to_vec_pretty(&report)?)?;
            p.corpus_version = version;
            let stats = summarize_corpus(&corpus);
            self.corpora.write().expect("corpus cache").insert((id.to_string(), version), Arc::new(corpus));
            Ok((report, stats))
        })?;
        Ok((project, report, stats))
    }

    /// The current corpus, before filters.
    pub fn corpus(&self, project: &Project) -> Result<Arc<Corpus>, StoreError> {
        if !project.has_corpus() {
            return Err(StoreError::Conflict("no corpus built yet".into()));
        }
        let key = (project.project_id.clone(), project.corpus_version);
        if let Some(c) = self.corpora.read().expect("corpus cache").get(&key) {
            return Ok(c.clone());
        }
        let path = self.dir(&project.project_id).join("corpus").join(format!("v{}.csv", project.corpus_version));
        let corpus = Arc::new(formats::read_corpus_csv(&fs::read(path)?)?);
        self.corpora.write().expect("corpus cache").insert(key, corpus.clone());
        Ok(corpus)
    }

    /// The current corpus with the project's filters applied.
    pub fn filtered(&self, project: &Project) -> Result<Corpus, StoreError> {
        Ok(filter(&*self.corpus(project)?, &project.filters)?)
    }

    pub fn dedup_report(&self, project: &Project) -> Result<DedupReport, StoreError> {
        let path = self.dir(&project.project_id).join("corpus").join(format!("v{}.dedup.json", project.corpus_version));
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn set_filters(&self, id: &str, spec: FilterSpec) -> Result<(Project, CorpusStats), StoreError> {
        spec.validate()?;
        let (project, ()) = self.update(id, |p| {
            p.filters = spec;
            Ok(())
        })?;
        let stats = summarize_corpus(&self.filtered(&project)?);
        Ok((project, stats))
    }

    pub fn set_scimago(&self, id: &str, bytes: &[u8], year: Option<i32>) -> Result<QuartileIndex, StoreError> {
        let (_, index) = self.update(id, |p| {
            let index = formats::load_scimago(bytes, year)?;
            write_atomic(&self.dir(id).join("scimago.csv"), bytes)?;
            p.scimago = Some(ScimagoInfo { content_id: content_id(bytes), entries: index.len(), source_year: year });
            Ok(index)
        })?;
        Ok(index)
    }

    pub fn quartiles(&self, project: &Project) -> Result<Option<QuartileIndex>, StoreError> {
        let Some(info) = &project.scimago else { return Ok(None) };
        let bytes = fs::read(self.dir(&project.project_id).join("scimago.csv"))?;
        Ok(Some(formats::load_scimago(&bytes, info.source_year)?))
    }

    fn artifact(&self, project: &Project, kind: &'static str, sub: &str, key: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(key) {
            return Err(StoreError::NotFound(kind, key.to_string()));
        }
        Ok(self.dir(&project.project_id).join(sub).join(format!("{key}.json")))
    }

    pub fn put_result(&self, project: &Project, result_id: &str, bytes: &[u8]) -> Result<(), StoreError> {
        Ok(write_atomic(&self.artifact(project, "result", "results", result_id)?, bytes)?)
    }

    pub fn result(&self, project: &Project, result_id: &str) -> Result<Option<Vec<u8>>, StoreError> {
        read_optional(&self.artifact(project, "result", "results", result_id)?)
    }

    pub fn put_chart(&self, project: &Project, spec_id: &str, bytes: &[u8]) -> Result<(), StoreError> {
        Ok(write_atomic(&self.artifact(project, "chart", "charts", spec_id)?, bytes)?)
    }

    pub fn chart(&self, project: &Project, spec_id: &str) -> Result<Option<Vec<u8>>, StoreError> {
        read_optional(&self.artifact(project, "chart", "charts", spec_id)?)
    }
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, StoreError> {
    match fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}
