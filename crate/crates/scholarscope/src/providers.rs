//! HTTP clients for the external summary and gender services.
//!
//! Summary endpoint: `POST {"prompt": ...}` answered by `{"text": ...}`.
//! Gender endpoint: `POST {"name": ..., "country": ...}` answered by
//! `{"gender": "female"|"male"|"unknown", "probability": p}`.
//! Both send `Authorization: Bearer <token>` when a token is configured.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use scholarscope_core::scitrace::{GenderLabel, GenderPrediction, GenderProvider, TableGenderProvider};
use scholarscope_core::summarize::{summarize_result, Prompt, ProviderError, Summary, SummaryProvider};
use scholarscope_core::viz::ChartSpec;
use scholarscope_core::AnalysisResult;

pub const DEFAULT_TIMEOUT_SECS: u64 = 20;

/// Endpoint settings shared by both clients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub url: String,
    pub token: Option<String>,
    pub timeout: Duration,
}

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Self { url: url.into(), token: None, timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS) }
    }

    /// Reads `{prefix}_URL`, `{prefix}_TOKEN` and `{prefix}_TIMEOUT` (seconds).
    /// `None` when the URL is unset or blank.
    pub fn from_env(prefix: &str) -> Option<Self> {
        let url = std::env::var(format!("{prefix}_URL")).ok().filter(|u| !u.trim().is_empty())?;
        let token = std::env::var(format!("{prefix}_TOKEN")).ok().filter(|t| !t.is_empty());
        let timeout = std::env::var(format!("{prefix}_TIMEOUT"))
            .ok()
            .and_then(|t| t.parse().ok())
            .unwrap_or(DEFAULT_TIMEOUT_SECS);
        Some(Self { url, token, timeout: Duration::from_secs(timeout) })
    }

    fn post(&self, body: &serde_json::Value) -> Result<String, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut request = agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        let mut response = request.send(body.to_string()).map_err(|e| e.to_string())?;
        response.body_mut().read_to_string().map_err(|e| e.to_string())
    }
}

pub struct HttpSummaryProvider {
    endpoint: Endpoint,
}

impl HttpSummaryProvider {
    pub fn new(endpoint: Endpoint) -> Self {
        Self { endpoint }
    }
}

impl SummaryProvider for HttpSummaryProvider {
    fn identifier(&self) -> &str {
        &self.endpoint.url
    }

    fn summarize(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        #[derive(Deserialize)]
        struct Reply {
            text: String,
        }
        let body = self.endpoint.post(&serde_json::json!({ "prompt": prompt.text })).map_err(ProviderError)?;
        let reply: Reply = serde_json::from_str(&body).map_err(|e| ProviderError(format!("bad reply: {e}")))?;
        Ok(reply.text)
    }
}

/// [`summarize_result`] that also logs provider failures.
pub fn summarize_logged(
    result: &AnalysisResult,
    spec: Option<&ChartSpec>,
    provider: &dyn SummaryProvider,
) -> Summary {
    let summary = summarize_result(result, spec, provider);
    if let Some(err) = &summary.provider_error {
        tracing::warn!(provider = provider.identifier(), error = %err, "summary provider failed; used template");
    }
    summary
}

/// Remote gender prediction with a per-name cache. Requests that fail fall
/// back to the bundled name table (and are not cached, so a later call may
/// reach the service).
pub struct HttpGenderProvider {
    endpoint: Endpoint,
    fallback: TableGenderProvider,
    cache: Mutex<HashMap<(String, Option<String>), GenderPrediction>>,
}

impl HttpGenderProvider {
    pub fn new(endpoint: Endpoint) -> Self {
        Self { endpoint, fallback: TableGenderProvider::bundled(), cache: Mutex::new(HashMap::new()) }
    }

    fn remote(&self, name: &str, country: Option<&str>) -> Result<GenderPrediction, String> {
        #[derive(Deserialize)]
        struct Reply {
            gender: String,
            #[serde(default)]
            probability: f64,
        }
        let body = self.endpoint.post(&serde_json::json!({ "name": name, "country": country }))?;
        let reply: Reply = serde_json::from_str(&body).map_err(|e| e.to_string())?;
        let label: GenderLabel = reply.gender.parse()?;
        Ok(GenderPrediction::new(label, reply.probability))
    }
}

impl GenderProvider for HttpGenderProvider {
    fn predict(&self, given_name: &str, country: Option<&str>) -> GenderPrediction {
        let key = (given_name.to_lowercase(), country.map(str::to_owned));
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return *hit;
        }
        match self.remote(given_name, country) {
            Ok(p) => {
                self.cache.lock().expect("cache lock").insert(key, p);
                p
            }
            Err(e) => {
                tracing::warn!(url = %self.endpoint.url, error = %e, "gender provider failed; used bundled table");
                self.fallback.predict(given_name, country)
            }
        }
    }
}
