//! JSON-over-HTTP API around the engines and the project store.
//!
//! Every route except `/health`, `/catalog` and `/auth/login` needs
//! `Authorization: Bearer <token>`. Errors are `{"error": "..."}` with status
//! 401 (token), 404 (unknown or foreign project, result, chart), 409 (missing
//! prerequisite such as an unbuilt corpus) or 422 (validation).

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequestParts, Multipart, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use base64::Engine;
use hmac::{Hmac, Mac};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::Sha256;
use scholarscope_core::ingest::{FieldMapping, SourceKind};
use scholarscope_core::scitrace::{GenderProvider, TableGenderProvider};
use scholarscope_core::summarize::{SummaryProvider, TemplateProvider};
use scholarscope_core::viz::{build_chart_spec, compatible_chart_types, known_result_kinds, render_svg, Background, ChartOptions, ChartSpec};
use scholarscope_core::{run_analysis, AnalysisContext, AnalysisRequest, AnalysisResult, FilterSpec, Module};

use crate::formats::export_csv;
use crate::providers::{summarize_logged, Endpoint, HttpGenderProvider, HttpSummaryProvider};
use crate::store::{content_id, Project, Store, StoreError};

/// Response header carrying the id under which an analysis result is stored.
pub const RESULT_ID_HEADER: &str = "x-result-id";
pub const DEFAULT_PORT: u16 = 8080;
const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub summary: Option<Endpoint>,
    pub gender: Option<Endpoint>,
}

impl ServiceConfig {
    /// `SCHOLARSCOPE_PORT`, `SCHOLARSCOPE_DATA_DIR`, and the
    /// `SCHOLARSCOPE_SUMMARY_*` / `SCHOLARSCOPE_GENDER_*` endpoint variables.
    pub fn from_env() -> Self {
        Self {
            port: std::env::var("SCHOLARSCOPE_PORT").ok().and_then(|p| p.parse().ok()).unwrap_or(DEFAULT_PORT),
            data_dir: std::env::var("SCHOLARSCOPE_DATA_DIR").map(PathBuf::from).unwrap_or_else(|_| "scholarscope-data".into()),
            summary: Endpoint::from_env("SCHOLARSCOPE_SUMMARY"),
            gender: Endpoint::from_env("SCHOLARSCOPE_GENDER"),
        }
    }
}

pub struct AppState {
    pub store: Store,
    secret: Vec<u8>,
    summary: Box<dyn SummaryProvider + Send + Sync>,
    gender: Box<dyn GenderProvider + Send + Sync>,
    gender_id: String,
}

type Shared = Arc<AppState>;

impl AppState {
    pub fn new(config: &ServiceConfig) -> Result<Self, StoreError> {
        let store = Store::open(&config.data_dir)?;
        let secret = store.secret()?;
        let summary: Box<dyn SummaryProvider + Send + Sync> = match &config.summary {
            Some(e) => Box::new(HttpSummaryProvider::new(e.clone())),
            None => Box::new(TemplateProvider),
        };
        let (gender, gender_id): (Box<dyn GenderProvider + Send + Sync>, String) = match &config.gender {
            Some(e) => (Box::new(HttpGenderProvider::new(e.clone())), e.url.clone()),
            None => (Box::new(TableGenderProvider::bundled()), "bundled".into()),
        };
        Ok(Self { store, secret, summary, gender, gender_id })
    }

    pub fn issue_token(&self, email: &str) -> String {
        let b64 = base64::engine::general_purpose::URL_SAFE_NO_PAD;
        format!("{}.{}", b64.encode(email), hex::encode(self.mac(email).finalize().into_bytes()))
    }

    /// The email a token was issued to, when its signature checks out.
    pub fn verify_token(&self, token: &str) -> Option<String> {
        let (payload, sig) = token.split_once('.')?;
        let email = String::from_utf8(base64::engine::general_purpose::URL_SAFE_NO_PAD.decode(payload).ok()?).ok()?;
        self.mac(&email).verify_slice(&hex::decode(sig).ok()?).ok()?;
        Some(email)
    }

    fn mac(&self, email: &str) -> Hmac<Sha256> {
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.secret).expect("hmac accepts any key length");
        mac.update(email.as_bytes());
        mac
    }

    /// The project, provided `email` owns it. Foreign projects look missing.
    fn owned(&self, id: &str, email: &str) -> Result<Project, ApiError> {
        let p = self.store.project(id)?;
        if p.owner != email {
            return Err(StoreError::ProjectNotFound(id.to_string()).into());
        }
        Ok(p)
    }

    fn result_id(&self, project: &Project, request: &AnalysisRequest) -> String {
        let key = json!({
            "corpus_version": project.corpus_version,
            "filters": project.filters,
            "scimago": project.scimago.as_ref().map(|s| &s.content_id),
            "gender": self.gender_id,
            "request": request,
        });
        content_id(key.to_string().as_bytes())
    }

    fn stored_result(&self, project: &Project, result_id: &str) -> Result<AnalysisResult, ApiError> {
        let bytes = self
            .store
            .result(project, result_id)?
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("result '{result_id}' not found")))?;
        Ok(serde_json::from_slice(&bytes).map_err(StoreError::from)?)
    }

    fn stored_chart(&self, project: &Project, spec_id: &str) -> Result<ChartSpec, ApiError> {
        let bytes = self
            .store
            .chart(project, spec_id)?
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("chart '{spec_id}' not found")))?;
        Ok(serde_json::from_slice(&bytes).map_err(StoreError::from)?)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(status = %self.status, "{}", self.message);
        }
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::ProjectNotFound(_) | StoreError::NotFound(..) => StatusCode::NOT_FOUND,
            StoreError::Conflict(_) => StatusCode::CONFLICT,
            StoreError::Invalid(_) | StoreError::Format(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Io(_) | StoreError::Corrupt(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<scholarscope_core::Error> for ApiError {
    fn from(e: scholarscope_core::Error) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

impl From<scholarscope_core::viz::ChartError> for ApiError {
    fn from(e: scholarscope_core::viz::ChartError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

/// The authenticated caller's email.
pub struct Authed(pub String);

impl FromRequestParts<Shared> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "missing bearer token"))?;
        state
            .verify_token(token.trim())
            .map(Authed)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "invalid token"))
    }
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/catalog", get(catalog))
        .route("/auth/login", post(login))
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/files", post(upload_files))
        .route("/projects/{id}/mapping", put(put_mapping))
        .route("/projects/{id}/scimago", post(upload_scimago))
        .route("/projects/{id}/build", post(build))
        .route("/projects/{id}/preview", get(preview))
        .route("/projects/{id}/stats", get(stats))
        .route("/projects/{id}/filters", put(put_filters))
        .route("/projects/{id}/analyze", post(analyze))
        .route("/projects/{id}/results/{result_id}", get(get_result))
        .route("/projects/{id}/chart", post(chart))
        .route("/projects/{id}/chart/{file}", get(chart_svg))
        .route("/projects/{id}/export/{file}", get(export))
        .route("/projects/{id}/summary", post(summary))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

/// Serve until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let state = Arc::new(AppState::new(&config)?);
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, data_dir = %config.data_dir.display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn catalog() -> Json<Value> {
    let modules: BTreeMap<&str, &[&str]> = Module::ALL.iter().map(|m| (m.name(), m.operations())).collect();
    let charts: BTreeMap<String, Vec<String>> = known_result_kinds()
        .into_iter()
        .map(|k| {
            let types = compatible_chart_types(&k).iter().map(|t| t.name().to_string()).collect();
            (k, types)
        })
        .collect();
    Json(json!({ "modules": modules, "chart_types": charts }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Login {
    email: String,
}

fn plausible_email(email: &str) -> bool {
    match email.split_once('@') {
        Some((user, domain)) => {
            !user.is_empty() && domain.contains('.') && !domain.starts_with('.') && !email.chars().any(char::is_whitespace)
        }
        None => false,
    }
}

async fn login(State(s): State<Shared>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let Login { email } = parse_json(&body)?;
    let email = email.trim().to_lowercase();
    if !plausible_email(&email) {
        return Err(ApiError::unprocessable(format!("'{email}' is not an email address")));
    }
    Ok(Json(json!({ "token": s.issue_token(&email), "email": email })))
}

async fn list_projects(State(s): State<Shared>, Authed(email): Authed) -> Result<Json<Vec<Project>>, ApiError> {
    Ok(Json(s.store.projects_of(&email)?))
}

async fn create_project(State(s): State<Shared>, Authed(email): Authed) -> Result<(StatusCode, Json<Value>), ApiError> {
    let p = s.store.create_project(&email)?;
    Ok((StatusCode::CREATED, Json(json!({ "project_id": p.project_id }))))
}

async fn get_project(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>) -> Result<Json<Project>, ApiError> {
    Ok(Json(s.owned(&id, &email)?))
}

#[derive(Serialize)]
struct UploadedFile {
    file_id: usize,
    source_label: String,
    source_kind: SourceKind,
    headers: Vec<String>,
    rows: usize,
    mapping: FieldMapping,
}

/// Multipart fields: any number of `file` parts, plus an optional `kind`
/// part (scopus, wos, csv) applying to the files that follow it.
async fn upload_files(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path(id): Path<String>,
    mut multipart: Multipart,
) -> Result<Json<Value>, ApiError> {
    s.owned(&id, &email)?;
    let mut kind = SourceKind::Scopus;
    let mut files = Vec::new();
    while let Some(field) = multipart.next_field().await.map_err(|e| ApiError::unprocessable(e.to_string()))? {
        match field.name() {
            Some("kind") => {
                let text = field.text().await.map_err(|e| ApiError::unprocessable(e.to_string()))?;
                kind = text.parse().map_err(ApiError::unprocessable)?;
            }
            Some("file") => {
                let name = field.file_name().map(file_stem).unwrap_or_default();
                let bytes = field.bytes().await.map_err(|e| ApiError::unprocessable(e.to_string()))?;
                let state = s.clone();
                let id = id.clone();
                let (stored, _) = blocking(move || Ok(state.store.add_file(&id, &name, kind, &bytes)?)).await?;
                files.push(UploadedFile {
                    file_id: stored.file_id,
                    source_label: stored.source_label,
                    source_kind: stored.source_kind,
                    headers: stored.headers,
                    rows: stored.rows,
                    mapping: stored.mapping,
                });
            }
            _ => {}
        }
    }
    if files.is_empty() {
        return Err(ApiError::unprocessable("no 'file' part in upload"));
    }
    Ok(Json(json!({ "files": files })))
}

fn file_stem(name: &str) -> String {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    base.rsplit_once('.').map_or(base, |(stem, _)| stem).to_string()
}

#[derive(Deserialize)]
struct FileQuery {
    file: Option<usize>,
}

async fn put_mapping(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path(id): Path<String>,
    Query(q): Query<FileQuery>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    s.owned(&id, &email)?;
    let mapping: FieldMapping = parse_json(&body)?;
    let files = blocking(move || Ok(s.store.set_mapping(&id, q.file, &mapping)?)).await?;
    let out: Vec<Value> = files.iter().map(|f| json!({ "file_id": f.file_id, "mapping": f.mapping })).collect();
    Ok(Json(json!({ "files": out })))
}

#[derive(Deserialize)]
struct YearQuery {
    year: Option<i32>,
}

/// Raw body: a Scimago journal-rank CSV.
async fn upload_scimago(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path(id): Path<String>,
    Query(q): Query<YearQuery>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    s.owned(&id, &email)?;
    let index = blocking(move || Ok(s.store.set_scimago(&id, &body, q.year)?)).await?;
    Ok(Json(json!({ "entries": index.len(), "source_year": index.source_year })))
}

async fn build(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    s.owned(&id, &email)?;
    let (project, report, stats) = blocking(move || Ok(s.store.build(&id)?)).await?;
    Ok(Json(json!({ "corpus_version": project.corpus_version, "report": report, "stats": stats })))
}

#[derive(Deserialize)]
struct PreviewQuery {
    n: Option<usize>,
}

async fn preview(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Result<Json<Value>, ApiError> {
    let p = s.owned(&id, &email)?;
    let corpus = s.store.corpus(&p)?;
    let n = q.n.unwrap_or(10);
    let records = &corpus.records()[..n.min(corpus.len())];
    Ok(Json(json!({ "total": corpus.len(), "records": records })))
}

async fn stats(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let p = s.owned(&id, &email)?;
    let filtered = s.store.filtered(&p)?;
    let all = s.store.corpus(&p)?;
    Ok(Json(json!({
        "filters": p.filters,
        "stats": scholarscope_core::corpus::summarize_corpus(&filtered),
        "unfiltered": scholarscope_core::corpus::summarize_corpus(&all),
    })))
}

async fn put_filters(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    s.owned(&id, &email)?;
    let spec: FilterSpec = parse_json(&body)?;
    let (project, stats) = blocking(move || Ok(s.store.set_filters(&id, spec)?)).await?;
    Ok(Json(json!({ "filters": project.filters, "stats": stats })))
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

/// The body is exactly the serialized [`AnalysisResult`]; its stored id is
/// in the `x-result-id` header.
async fn analyze(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let project = s.owned(&id, &email)?;
    let request: AnalysisRequest = parse_json(&body)?;
    let result_id = s.result_id(&project, &request);
    let bytes = match s.store.result(&project, &result_id)? {
        Some(bytes) => bytes,
        None => {
            let state = s.clone();
            let rid = result_id.clone();
            blocking(move || {
                let corpus = state.store.filtered(&project)?;
                let quartiles = state.store.quartiles(&project)?;
                let ctx = AnalysisContext::new(state.gender.as_ref()).with_quartiles(quartiles.as_ref());
                let result = run_analysis(&corpus, &request, &ctx)?;
                let bytes = serde_json::to_vec(&result).map_err(StoreError::from)?;
                state.store.put_result(&project, &rid, &bytes)?;
                Ok(bytes)
            })
            .await?
        }
    };
    let mut response = json_bytes(bytes);
    response
        .headers_mut()
        .insert(RESULT_ID_HEADER, HeaderValue::from_str(&result_id).expect("hex id"));
    Ok(response)
}

async fn get_result(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path((id, result_id)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let p = s.owned(&id, &email)?;
    let bytes = s
        .store
        .result(&p, &result_id)?
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("result '{result_id}' not found")))?;
    Ok(json_bytes(bytes))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartRequest {
    result_ref: Option<String>,
    result: Option<AnalysisResult>,
    #[serde(default)]
    options: ChartOptions,
}

async fn chart(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let p = s.owned(&id, &email)?;
    let req: ChartRequest = parse_json(&body)?;
    let result = match (req.result_ref, req.result) {
        (Some(r), None) => s.stored_result(&p, &r)?,
        (None, Some(inline)) => inline,
        _ => return Err(ApiError::unprocessable("give exactly one of 'result_ref' and 'result'")),
    };
    let spec = build_chart_spec(&result, &req.options)?;
    let bytes = serde_json::to_vec(&spec).map_err(StoreError::from)?;
    let spec_id = content_id(&bytes);
    s.store.put_chart(&p, &spec_id, &bytes)?;
    Ok(Json(json!({ "spec_id": spec_id, "spec": spec })))
}

#[derive(Deserialize)]
struct BgQuery {
    bg: Option<String>,
}

async fn chart_svg(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path((id, file)): Path<(String, String)>,
    Query(q): Query<BgQuery>,
) -> Result<Response, ApiError> {
    let p = s.owned(&id, &email)?;
    let spec_id = file
        .strip_suffix(".svg")
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "charts are served as <spec_id>.svg"))?;
    let background: Background = match q.bg.as_deref() {
        None => Background::White,
        Some(b) => b.parse()?,
    };
    let spec = s.stored_chart(&p, spec_id)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], render_svg(&spec, background)).into_response())
}

async fn export(
    State(s): State<Shared>,
    Authed(email): Authed,
    Path((id, file)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let p = s.owned(&id, &email)?;
    let result_id = file
        .strip_suffix(".csv")
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "exports are served as <result_id>.csv"))?;
    let result = s.stored_result(&p, result_id)?;
    let disposition = format!("attachment; filename=\"{}.csv\"", result.kind);
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        export_csv(&result),
    )
        .into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SummaryRequest {
    result_ref: String,
    spec_ref: Option<String>,
}

async fn summary(State(s): State<Shared>, Authed(email): Authed, Path(id): Path<String>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let p = s.owned(&id, &email)?;
    let req: SummaryRequest = parse_json(&body)?;
    let result = s.stored_result(&p, &req.result_ref)?;
    let spec = req.spec_ref.map(|r| s.stored_chart(&p, &r)).transpose()?;
    let state = s.clone();
    let summary = blocking(move || Ok(summarize_logged(&result, spec.as_ref(), state.summary.as_ref()))).await?;
    Ok(Json(json!({
        "text": summary.text,
        "provider": summary.provider,
        "fallback_used": summary.fallback_used,
    })))
}
