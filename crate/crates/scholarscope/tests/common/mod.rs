//! Fixtures and an in-process HTTP client for the integration tests.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use scholarscope::formats::parse_delimited;
use scholarscope::service::{router, AppState, ServiceConfig};
use scholarscope_core::ingest::{apply_mapping, infer_field_mapping, merge_and_dedup, SourceKind};
use scholarscope_core::Corpus;

pub const T5: &[u8] = include_bytes!("../fixtures/t5.csv");
pub const SCI3: &[u8] = include_bytes!("../fixtures/sci3.csv");
pub const WOS2: &[u8] = include_bytes!("../fixtures/wos2.txt");
const LEDGER: &str = include_str!("../fixtures/t5_ledger.json");

pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// The hand-counted facts about T5.
pub fn ledger() -> Value {
    serde_json::from_str(LEDGER).unwrap()
}

/// T5 built through the library alone: parse, inferred mapping, merge.
pub fn t5_corpus() -> Corpus {
    let table = parse_delimited(T5, SourceKind::Scopus, "t5").unwrap();
    let records = apply_mapping(&table, &infer_field_mapping(&table)).unwrap();
    merge_and_dedup(vec![records]).unwrap().0
}

/// Runs the command line in-process.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("scholarscope").chain(args.iter().copied());
    let code = scholarscope::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }
}

/// A service instance over `data_dir`, driven without a socket.
pub struct Api {
    router: Router,
    pub token: Option<String>,
}

impl Api {
    pub fn open(data_dir: &Path) -> Self {
        let config = ServiceConfig { port: 0, data_dir: data_dir.into(), summary: None, gender: None };
        Self { router: router(Arc::new(AppState::new(&config).unwrap())), token: None }
    }

    pub async fn send(&self, method: Method, uri: &str, body: Vec<u8>, content_type: Option<&str>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = &self.token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        if let Some(ct) = content_type {
            req = req.header(header::CONTENT_TYPE, ct);
        }
        let response = self.router.clone().oneshot(req.body(Body::from(body)).unwrap()).await.unwrap();
        let status = response.status();
        let headers = response.headers().clone();
        let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, headers, body }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, Vec::new(), None).await
    }

    pub async fn post(&self, uri: &str, body: &Value) -> Reply {
        self.send(Method::POST, uri, serde_json::to_vec(body).unwrap(), Some("application/json")).await
    }

    pub async fn put(&self, uri: &str, body: &Value) -> Reply {
        self.send(Method::PUT, uri, serde_json::to_vec(body).unwrap(), Some("application/json")).await
    }

    pub async fn login(&mut self, email: &str) -> String {
        let r = self.post("/auth/login", &serde_json::json!({ "email": email })).await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text());
        let token = r.json()["token"].as_str().unwrap().to_string();
        self.token = Some(token.clone());
        token
    }

    pub async fn new_project(&self) -> String {
        let r = self.post("/projects", &Value::Null).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["project_id"].as_str().unwrap().to_string()
    }

    /// Multipart upload of one file.
    pub async fn upload(&self, project: &str, file_name: &str, kind: &str, bytes: &[u8]) -> Reply {
        const B: &str = "scholarscope-test-boundary";
        let mut body = format!(
            "--{B}\r\nContent-Disposition: form-data; name=\"kind\"\r\n\r\n{kind}\r\n\
             --{B}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{file_name}\"\r\n\
             Content-Type: application/octet-stream\r\n\r\n"
        )
        .into_bytes();
        body.extend_from_slice(bytes);
        body.extend_from_slice(format!("\r\n--{B}--\r\n").as_bytes());
        let ct = format!("multipart/form-data; boundary={B}");
        self.send(Method::POST, &format!("/projects/{project}/files"), body, Some(&ct)).await
    }
}
