//! HTTP API behaviour: auth, isolation, error statuses, caching, persistence.

mod common;

use axum::http::{Method, StatusCode};
use serde_json::{json, Value};

use common::{ledger, Api, SCI3, T5, WOS2};
use scholarscope::service::RESULT_ID_HEADER;
use scholarscope_core::{AnalysisResult, Module};

async fn built_t5(api: &Api) -> String {
    let p = api.new_project().await;
    assert_eq!(api.upload(&p, "t5.csv", "scopus", T5).await.status, StatusCode::OK);
    let r = api.post(&format!("/projects/{p}/build"), &Value::Null).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    p
}

fn analyze_body(module: Module, op: &str, params: Value) -> Value {
    json!({ "module": module, "operation": op, "params": params })
}

#[tokio::test]
async fn open_routes_and_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::open(dir.path());
    assert_eq!(api.get("/health").await.status, StatusCode::OK);
    let catalog = api.get("/catalog").await.json();
    for m in Module::ALL {
        let ops: Vec<&str> = catalog["modules"][m.name()].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(ops, m.operations());
    }
    assert!(catalog["chart_types"]["publications_series"].as_array().unwrap().iter().any(|t| t == "line"));
}

#[tokio::test]
async fn tokens_are_required_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    assert_eq!(api.get("/projects").await.status, StatusCode::UNAUTHORIZED);
    api.token = Some("bm90LXNpZ25lZA.00ff".into());
    let r = api.get("/projects").await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    assert!(r.json()["error"].is_string());
    api.login("someone@example.org").await;
    assert_eq!(api.get("/projects").await.json(), json!([]));

    let bad = api.post("/auth/login", &json!({ "email": "not an email" })).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn projects_are_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = Api::open(dir.path());
    let mut b = Api::open(dir.path());
    a.login("a@example.org").await;
    b.login("b@example.org").await;
    let p = built_t5(&a).await;
    let analyzed = a.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", Value::Null)).await;
    let rid = analyzed.headers[RESULT_ID_HEADER].to_str().unwrap().to_string();

    for uri in [
        format!("/projects/{p}"),
        format!("/projects/{p}/preview"),
        format!("/projects/{p}/stats"),
        format!("/projects/{p}/results/{rid}"),
        format!("/projects/{p}/export/{rid}.csv"),
    ] {
        assert_eq!(b.get(&uri).await.status, StatusCode::NOT_FOUND, "{uri}");
    }
    let r = b.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", Value::Null)).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(b.upload(&p, "x.csv", "scopus", T5).await.status, StatusCode::NOT_FOUND);
    assert_eq!(b.get("/projects").await.json(), json!([]));
    assert_eq!(a.get("/projects").await.json().as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn prerequisites_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = api.new_project().await;

    assert_eq!(api.post(&format!("/projects/{p}/build"), &Value::Null).await.status, StatusCode::CONFLICT);
    assert_eq!(api.get(&format!("/projects/{p}/preview")).await.status, StatusCode::CONFLICT);
    let early = api.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", Value::Null)).await;
    assert_eq!(early.status, StatusCode::CONFLICT);
    assert_eq!(api.get("/projects/no-such-project").await.status, StatusCode::NOT_FOUND);
    assert_eq!(api.get("/projects/..%2F..%2Fetc").await.status, StatusCode::NOT_FOUND);

    let garbage = api.upload(&p, "junk.csv", "scopus", b"").await;
    assert_eq!(garbage.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", garbage.text());
    let bad_kind = api.upload(&p, "t5.csv", "endnote", T5).await;
    assert_eq!(bad_kind.status, StatusCode::UNPROCESSABLE_ENTITY);

    let up = api.upload(&p, "t5.csv", "scopus", T5).await.json();
    let file = &up["files"][0];
    assert_eq!(file["rows"], 5);
    assert_eq!(file["source_label"], "t5");
    assert_eq!(file["mapping"]["assignments"]["title"], "Title");
    assert_eq!(file["mapping"]["assignments"]["citations"], "Cited by");

    let mut mapping = file["mapping"].clone();
    mapping["assignments"]["year"] = json!("Abstract");
    let rejected = api.put(&format!("/projects/{p}/mapping?file=1"), &mapping).await;
    assert_eq!(rejected.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", rejected.text());
    mapping["assignments"]["year"] = json!("No such column");
    assert_eq!(api.put(&format!("/projects/{p}/mapping?file=1"), &mapping).await.status, StatusCode::UNPROCESSABLE_ENTITY);
    mapping["assignments"]["publisher"] = Value::Null;
    mapping["assignments"]["year"] = json!("Year");
    let ok = api.put(&format!("/projects/{p}/mapping?file=1"), &mapping).await;
    assert_eq!(ok.status, StatusCode::OK, "{}", ok.text());
    assert_eq!(ok.json()["files"][0]["mapping"], mapping);

    api.post(&format!("/projects/{p}/build"), &Value::Null).await;
    let inverted = api.put(&format!("/projects/{p}/filters"), &json!({ "year_range": [2022, 2019] })).await;
    assert_eq!(inverted.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(inverted.json()["error"].as_str().unwrap().contains("year_range"));
    let unknown = api.put(&format!("/projects/{p}/filters"), &json!({ "decade": 2010 })).await;
    assert_eq!(unknown.status, StatusCode::UNPROCESSABLE_ENTITY);

    let bad_op = api.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Colabrix, "pagerank", Value::Null)).await;
    assert_eq!(bad_op.status, StatusCode::UNPROCESSABLE_ENTITY);
    let bad_param = api
        .post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", json!({ "year_gap": 9 })))
        .await;
    assert_eq!(bad_param.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(api.get(&format!("/projects/{p}/results/0123abcd")).await.status, StatusCode::NOT_FOUND);
    assert_eq!(api.get(&format!("/projects/{p}/chart/0123abcd.svg")).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn preview_filters_and_publisher_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = built_t5(&api).await;

    let preview = api.get(&format!("/projects/{p}/preview?n=10")).await.json();
    assert_eq!(preview["total"], 5);
    assert_eq!(preview["records"].as_array().unwrap().len(), 5);
    assert_eq!(api.get(&format!("/projects/{p}/preview?n=2")).await.json()["records"].as_array().unwrap().len(), 2);

    let filtered = api.put(&format!("/projects/{p}/filters"), &json!({ "year_range": [2021, 2022] })).await.json();
    assert_eq!(filtered["stats"]["n_records"], 3);
    let stats = api.get(&format!("/projects/{p}/stats")).await.json();
    assert_eq!(stats["stats"]["n_records"], 3);
    assert_eq!(stats["unfiltered"]["n_records"], ledger()["records"]);
    assert_eq!(stats["unfiltered"]["n_distinct_countries"], ledger()["distinct_countries"]);
    assert_eq!(stats["unfiltered"]["n_distinct_journals"], ledger()["distinct_journals"]);
}

#[tokio::test]
async fn results_are_cached_by_content() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = built_t5(&api).await;
    let body = analyze_body(Module::Scitrace, "author_analysis", json!({ "mode": "top_authors" }));
    let uri = format!("/projects/{p}/analyze");

    let (first, second) = tokio::join!(api.post(&uri, &body), api.post(&uri, &body));
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.body, second.body);
    assert_eq!(first.headers[RESULT_ID_HEADER], second.headers[RESULT_ID_HEADER]);

    // A filter change is a different corpus view, so a different result.
    api.put(&format!("/projects/{p}/filters"), &json!({ "countries": ["Germany"] })).await;
    let third = api.post(&uri, &body).await;
    assert_ne!(third.headers[RESULT_ID_HEADER], first.headers[RESULT_ID_HEADER]);
    let result: AnalysisResult = serde_json::from_slice(&third.body).unwrap();
    let authors: Vec<&str> = result.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(authors, ["Schmidt B.", "Kumar A.", "Miller C."]);
}

#[tokio::test]
async fn quartiles_from_uploaded_scimago() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = built_t5(&api).await;
    let body = analyze_body(Module::Bibtrail, "journal_analysis", json!({ "mode": "quartile_counts" }));
    let without = api.post(&format!("/projects/{p}/analyze"), &body).await;
    assert_eq!(without.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", without.text());

    let up = api.send(Method::POST, &format!("/projects/{p}/scimago?year=2023"), SCI3.to_vec(), Some("text/csv")).await;
    assert_eq!(up.status, StatusCode::OK, "{}", up.text());
    assert_eq!(up.json(), json!({ "entries": 5, "source_year": 2023 }));
    let r: AnalysisResult = serde_json::from_slice(&api.post(&format!("/projects/{p}/analyze"), &body).await.body).unwrap();
    for row in &r.rows {
        assert_eq!(json!(row.values[0]), json!(ledger()["quartile_counts"][&row.label].as_f64().unwrap()), "{}", row.label);
    }
    let broken = api.send(Method::POST, &format!("/projects/{p}/scimago"), b"Title;Rank\nx;1\n".to_vec(), None).await;
    assert_eq!(broken.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn scopus_and_wos_merge() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = api.new_project().await;
    api.upload(&p, "t5.csv", "scopus", T5).await;
    let wos = api.upload(&p, "wos2.txt", "wos", WOS2).await;
    assert_eq!(wos.status, StatusCode::OK, "{}", wos.text());
    assert_eq!(wos.json()["files"][0]["mapping"]["assignments"]["title"], "TI");
    let built = api.post(&format!("/projects/{p}/build"), &Value::Null).await.json();
    assert_eq!(built["report"]["input_count"], 7);
    assert_eq!(built["report"]["kept"], 6);
    let groups = built["report"]["duplicate_groups"].as_array().unwrap();
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0]["kept_record_id"], "t5#2");
    assert_eq!(groups[0]["dropped_record_ids"], json!(["wos2#1"]));
    assert_eq!(built["stats"]["n_distinct_countries"], 4);
    assert_eq!(built["corpus_version"], 1);
}

#[tokio::test]
async fn charts_exports_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    api.login("u@example.org").await;
    let p = built_t5(&api).await;
    let analyzed = api.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", Value::Null)).await;
    let rid = analyzed.headers[RESULT_ID_HEADER].to_str().unwrap().to_string();
    let result: AnalysisResult = serde_json::from_slice(&analyzed.body).unwrap();

    let both = api.post(&format!("/projects/{p}/chart"), &json!({ "result_ref": rid, "result": result })).await;
    assert_eq!(both.status, StatusCode::UNPROCESSABLE_ENTITY);
    let wrong_type = api.post(&format!("/projects/{p}/chart"), &json!({ "result_ref": rid, "options": { "chart_type": "network" } })).await;
    assert_eq!(wrong_type.status, StatusCode::UNPROCESSABLE_ENTITY);

    let by_ref = api.post(&format!("/projects/{p}/chart"), &json!({ "result_ref": rid, "options": { "chart_type": "line" } })).await.json();
    let inline = api.post(&format!("/projects/{p}/chart"), &json!({ "result": result, "options": { "chart_type": "line" } })).await.json();
    assert_eq!(by_ref, inline);
    let spec_id = by_ref["spec_id"].as_str().unwrap();
    let white = api.get(&format!("/projects/{p}/chart/{spec_id}.svg")).await;
    assert_eq!(white.headers["content-type"], "image/svg+xml");
    assert!(white.text().contains("id=\"background\""));
    let clear = api.get(&format!("/projects/{p}/chart/{spec_id}.svg?bg=transparent")).await.text();
    assert!(!clear.contains("id=\"background\""));
    assert_eq!(api.get(&format!("/projects/{p}/chart/{spec_id}.svg?bg=plaid")).await.status, StatusCode::UNPROCESSABLE_ENTITY);

    let csv = api.get(&format!("/projects/{p}/export/{rid}.csv")).await;
    assert_eq!(csv.body, scholarscope::export_csv(&result));
    assert_eq!(csv.text(), "year,publications\n2019,1\n2020,1\n2021,1\n2022,2\n");

    let summary = api.post(&format!("/projects/{p}/summary"), &json!({ "result_ref": rid, "spec_ref": spec_id })).await.json();
    assert_eq!(summary["provider"], "template");
    assert_eq!(summary["fallback_used"], false);
    assert!(summary["text"].as_str().unwrap().contains("2022"));
}

#[tokio::test]
async fn unreachable_summary_service_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = scholarscope::service::ServiceConfig {
        port: 0,
        data_dir: dir.path().into(),
        summary: Some(scholarscope::providers::Endpoint {
            timeout: std::time::Duration::from_secs(2),
            ..scholarscope::providers::Endpoint::new("http://127.0.0.1:9/summarize")
        }),
        gender: None,
    };
    let state = std::sync::Arc::new(scholarscope::service::AppState::new(&config).unwrap());
    let token = state.issue_token("u@example.org");
    let mut api = Api::open(dir.path());
    api.token = Some(token);
    let p = built_t5(&api).await;
    let analyzed = api.post(&format!("/projects/{p}/analyze"), &analyze_body(Module::Bibtrail, "publications_series", Value::Null)).await;
    let rid = analyzed.headers[RESULT_ID_HEADER].to_str().unwrap().to_string();

    let remote = scholarscope::service::router(state);
    use tower::ServiceExt;
    let req = axum::http::Request::post(format!("/projects/{p}/summary"))
        .header("authorization", format!("Bearer {}", api.token.as_ref().unwrap()))
        .header("content-type", "application/json")
        .body(axum::body::Body::from(json!({ "result_ref": rid }).to_string()))
        .unwrap();
    let response = remote.oneshot(req).await.unwrap();
    assert_eq!(response.status(), StatusCode::OK);
    use http_body_util::BodyExt;
    let body: Value = serde_json::from_slice(&response.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(body["fallback_used"], true);
    assert_eq!(body["provider"], "template");
    assert!(!body["text"].as_str().unwrap().is_empty());
}

#[tokio::test]
async fn restart_reloads_everything() {
    let dir = tempfile::tempdir().unwrap();
    let mut api = Api::open(dir.path());
    let token = api.login("u@example.org").await;
    let p = built_t5(&api).await;
    api.put(&format!("/projects/{p}/filters"), &json!({ "min_citations": 1 })).await;
    let body = analyze_body(Module::Colabrix, "centrality", json!({ "measure": "betweenness" }));
    let before = api.post(&format!("/projects/{p}/analyze"), &body).await;
    let project_before = api.get(&format!("/projects/{p}")).await.body;
    let preview_before = api.get(&format!("/projects/{p}/preview")).await.body;
    drop(api);

    let mut again = Api::open(dir.path());
    again.token = Some(token);
    assert_eq!(again.get(&format!("/projects/{p}")).await.body, project_before);
    assert_eq!(again.get(&format!("/projects/{p}/preview")).await.body, preview_before);
    let rid = before.headers[RESULT_ID_HEADER].to_str().unwrap();
    assert_eq!(again.get(&format!("/projects/{p}/results/{rid}")).await.body, before.body);
    // Recomputing from the reloaded corpus gives the same bytes.
    std::fs::remove_file(dir.path().join("projects").join(&p).join("results").join(format!("{rid}.json"))).ok();
    let recomputed = again.post(&format!("/projects/{p}/analyze"), &body).await;
    assert_eq!(recomputed.body, before.body);
    assert_eq!(recomputed.headers[RESULT_ID_HEADER], before.headers[RESULT_ID_HEADER]);
}
