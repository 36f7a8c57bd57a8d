//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the
//! target exits non-zero if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod oracles;
mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use common::{cli, fixture_path, ledger, t5_corpus, Api, SCI3, T5};
use scholarscope::formats::{import_result_csv, load_scimago, parse_delimited, write_raw_table};
use scholarscope::service::RESULT_ID_HEADER;
use scholarscope::{export_csv, read_corpus_csv, write_corpus_csv};
use scholarscope_core::colabrix::{centrality, detect_communities, modularity, CentralityMeasure, CommunityMethod, Graph};
use scholarscope_core::corpus::{filter, CorpusStats};
use scholarscope_core::ingest::{apply_mapping, infer_field_mapping, merge_and_dedup, DedupReport, RawTable, SourceKind};
use scholarscope_core::scitrace::TableGenderProvider;
use scholarscope_core::synthetic::synthetic_corpus;
use scholarscope_core::themantix::{cluster_documents, fit_lda, LdaParams};
use scholarscope_core::viz::{build_chart_spec, compatible_chart_types, known_result_kinds, render_svg, Background, ChartOptions, ChartSpec};
use scholarscope_core::{run_analysis, AnalysisContext, AnalysisRequest, FilterSpec, Module};

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit: Duration) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn ingest() -> Result<(), String> {
    let started = Instant::now();
    let table = parse_delimited(T5, SourceKind::Scopus, "t5").map_err(|e| e.to_string())?;
    let records = apply_mapping(&table, &infer_field_mapping(&table)).map_err(|e| e.to_string())?;
    let (corpus, report) = merge_and_dedup(vec![records]).map_err(|e| e.to_string())?;
    ensure(corpus.len() == 5 && report.duplicate_groups.is_empty(), || format!("{report:?}"))?;

    let doubled_rows: Vec<Vec<String>> = table.rows().iter().chain(table.rows()).cloned().collect();
    let doubled = RawTable::new(table.headers().to_vec(), doubled_rows, "t5x2", SourceKind::Scopus).unwrap();
    let records = apply_mapping(&doubled, &infer_field_mapping(&doubled)).map_err(|e| e.to_string())?;
    let (twice, report) = merge_and_dedup(vec![records]).map_err(|e| e.to_string())?;
    ensure(twice.len() == 5 && report.duplicate_groups.len() == 5, || {
        format!("doubled: {} records, {} groups", twice.len(), report.duplicate_groups.len())
    })?;

    let raw = write_raw_table(&table);
    let raw_again = write_raw_table(&scholarscope::formats::parse_csv_table(&raw, SourceKind::Scopus, "t5").unwrap());
    ensure(raw == raw_again, || "raw table bytes changed on round trip".into())?;
    let bytes = write_corpus_csv(&corpus);
    let back = read_corpus_csv(&bytes).map_err(|e| e.to_string())?;
    ensure(back == corpus && write_corpus_csv(&back) == bytes, || "corpus changed on round trip".into())?;
    within(started, Duration::from_secs(1))
}

fn centrality_oracle() -> Result<(), String> {
    let started = Instant::now();
    let exhaustive = oracles::all_connected(5);
    ensure(exhaustive.len() == 772, || format!("{} graphs", exhaustive.len()))?;
    exhaustive.iter().for_each(oracles::check_centralities);
    let sampled = oracles::random_connected(7_0707, 600);
    sampled.iter().for_each(oracles::check_centralities);
    ensure(sampled.iter().filter(|g| g.n == 7).count() > 0, || "no 7-node graphs sampled".into())?;
    within(started, Duration::from_secs(60))
}

fn spot_checks() -> Result<(), String> {
    let p3 = Graph::from_edges(&["a", "b", "c"], &[(0, 1, 1), (1, 2, 1)]);
    let b = centrality(&p3, CentralityMeasure::Betweenness).map_err(|e| e.to_string())?;
    let c = centrality(&p3, CentralityMeasure::Closeness).map_err(|e| e.to_string())?;
    ensure(b.get("b") == Some(1.0) && c.get("b") == Some(0.5), || format!("{b:?} {c:?}"))?;

    let c4 = Graph::from_edges(&["a", "b", "c", "d"], &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]);
    let e = centrality(&c4, CentralityMeasure::Eigenvector).map_err(|e| e.to_string())?;
    let lambda = e.lambda.unwrap_or(f64::NAN);
    ensure((lambda - 2.0).abs() < 1e-10 && e.scores.values().all(|v| (v - 0.5).abs() < 1e-10), || format!("{e:?}"))?;

    for n in 2..=12usize {
        let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let edges: Vec<_> = (1..n).map(|i| (0, i, 1)).collect();
        let d = centrality(&Graph::from_edges(&refs, &edges), CentralityMeasure::Degree).map_err(|e| e.to_string())?;
        ensure(d.get("s0") == Some((n - 1) as f64), || format!("star {n}: {:?}", d.get("s0")))?;
    }
    Ok(())
}

fn communities() -> Result<(), String> {
    let g = oracles::gn6();
    let a = oracles::dense(&g);
    let q_best = oracles::all_partitions(6).iter().map(|p| oracles::q_oracle(&a, p)).fold(f64::MIN, f64::max);
    for method in [CommunityMethod::GirvanNewman, CommunityMethod::GreedyModularity, CommunityMethod::Leiden] {
        let p = detect_communities(&g, method, 0).map_err(|e| e.to_string())?;
        ensure(p.communities() == vec![vec!["a", "b", "c"], vec!["d", "e", "f"]], || format!("{method:?}: {:?}", p.communities()))?;
        let q = modularity(&g, &p).map_err(|e| e.to_string())?;
        ensure((p.modularity - q).abs() < 1e-12, || format!("{method:?}: reported {} vs {q}", p.modularity))?;
        ensure((p.modularity - q_best).abs() < 1e-9, || format!("{method:?}: {} vs optimum {q_best}", p.modularity))?;
    }
    Ok(())
}

fn quartile_pipeline() -> Result<(), String> {
    let index = load_scimago(SCI3, Some(2023)).map_err(|e| e.to_string())?;
    let gender = TableGenderProvider::bundled();
    let ctx = AnalysisContext::new(&gender).with_quartiles(Some(&index));
    let req = AnalysisRequest::new(Module::Bibtrail, "journal_analysis", json!({ "mode": "quartile_counts" }));
    let r = run_analysis(&t5_corpus(), &req, &ctx).map_err(|e| e.to_string())?;
    let got: BTreeMap<String, f64> = r.rows.iter().map(|row| (row.label.clone(), row.values[0])).collect();
    let want: BTreeMap<String, f64> = ledger()["quartile_counts"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_f64().unwrap()))
        .collect();
    ensure(got == want, || format!("{got:?} vs ledger {want:?}"))?;
    ensure(got.values().sum::<f64>() == 5.0, || "quartile counts do not sum to 5".into())
}

fn series_invariants() -> Result<(), String> {
    let gender = TableGenderProvider::bundled();
    let ctx = AnalysisContext::new(&gender);
    for seed in 0..10u64 {
        let corpus = synthetic_corpus(50, seed);
        let dated = corpus.iter().filter(|r| r.year.is_some()).count() as f64;
        for gap in 1..=5u32 {
            let run = |mode: &str| {
                let req = AnalysisRequest::new(Module::Bibtrail, "publications_series", json!({ "mode": mode, "year_gap": gap }));
                run_analysis(&corpus, &req, &ctx).map(|r| r.primary_values()).map_err(|e| e.to_string())
            };
            let totals = run("total")?;
            let proportions = run("proportion")?;
            let cumulative = run("cumulative")?;
            ensure(totals.iter().sum::<f64>() == dated, || format!("seed {seed} gap {gap}: totals"))?;
            ensure((proportions.iter().sum::<f64>() - 1.0).abs() <= 1e-9, || format!("seed {seed} gap {gap}: proportions"))?;
            ensure(cumulative.windows(2).all(|w| w[0] <= w[1]), || format!("seed {seed} gap {gap}: cumulative"))?;
            ensure(cumulative.last() == Some(&dated), || format!("seed {seed} gap {gap}: cumulative end"))?;
        }
    }
    Ok(())
}

fn lda() -> Result<(), String> {
    let (ids, docs, truth) = oracles::planted(11);
    let params = LdaParams { alpha: Some(0.1), ..LdaParams::new(2, 1000, 42) };
    let started = Instant::now();
    let model = fit_lda(&ids, &docs, &params).map_err(|e| e.to_string())?;
    let again = fit_lda(&ids, &docs, &params).map_err(|e| e.to_string())?;
    within(started, Duration::from_secs(60))?;
    let recovered = |flip: bool| (0..ids.len()).filter(|&d| model.doc_topic[d][truth[d] ^ usize::from(flip)] >= 0.8).count();
    let best = recovered(false).max(recovered(true));
    ensure(best >= 90, || format!("recovered {best} of 100"))?;
    let bits = |m: &scholarscope_core::themantix::TopicModel| -> Vec<u64> {
        m.topic_word.iter().chain(&m.doc_topic).flatten().map(|x| x.to_bits()).collect()
    };
    ensure(bits(&model) == bits(&again), || "reruns differ".into())
}

fn clustering() -> Result<(), String> {
    let c = oracles::separable();
    for seed in 0..8 {
        let r = cluster_documents(&c, 2, seed).map_err(|e| e.to_string())?;
        let cluster = |id: &str| r.rows.iter().find(|row| row.label == id).map(|row| row.values[0]);
        let a: Vec<_> = ["a1", "a2", "a3"].map(cluster).to_vec();
        let b: Vec<_> = ["b1", "b2", "b3"].map(cluster).to_vec();
        ensure(a.iter().all(|x| *x == a[0]) && b.iter().all(|x| *x == b[0]) && a[0] != b[0], || format!("seed {seed}: {a:?} {b:?}"))?;
    }
    let singletons = cluster_documents(&c, c.len(), 0).map_err(|e| e.to_string())?;
    let mut ids: Vec<f64> = singletons.rows.iter().map(|row| row.values[0]).collect();
    ids.sort_by(f64::total_cmp);
    ensure(ids == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0], || format!("k = D gave {ids:?}"))
}

fn viz() -> Result<(), String> {
    let results = oracles::viz_results();
    let mut pairs = 0;
    for kind in known_result_kinds() {
        let types = compatible_chart_types(&kind);
        if types.is_empty() {
            continue;
        }
        let result = results.get(&kind).ok_or_else(|| format!("no result of kind {kind}"))?;
        for t in types {
            let spec = build_chart_spec(result, &ChartOptions::of_type(t)).map_err(|e| format!("{kind}/{t}: {e}"))?;
            for bg in [Background::White, Background::Transparent] {
                let svg = render_svg(&spec, bg);
                oracles::well_formed_svg(&svg);
                ensure(svg == render_svg(&spec, bg), || format!("{kind}/{t}: renders differ"))?;
            }
            pairs += 1;
        }
    }
    ensure(pairs >= 80, || format!("only {pairs} pairs"))?;
    for (kind, r) in &results {
        let back = import_result_csv(&export_csv(r), kind).map_err(|e| e.to_string())?;
        let same = back.label_name == r.label_name
            && back.columns == r.columns
            && back.rows.len() == r.rows.len()
            && back.rows.iter().zip(&r.rows).all(|(a, b)| {
                a.label == b.label && a.values.iter().map(|x| x.to_bits()).eq(b.values.iter().map(|x| x.to_bits()))
            });
        ensure(same, || format!("{kind}: CSV does not re-parse to the same table"))?;
    }
    Ok(())
}

/// Runs the HTTP walkthrough over `data_dir` and returns every response body
/// that is a pure function of the inputs.
async fn service_walkthrough(data_dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut api = Api::open(data_dir);
    let status = |r: &common::Reply, want: u16, what: &str| {
        ensure(r.status.as_u16() == want, || format!("{what}: {} {}", r.status, r.text()))
    };
    let unauth = api.get("/projects").await;
    status(&unauth, 401, "no token")?;
    let token = api.login("reader@example.org").await;
    let p = api.new_project().await;

    let up = api.upload(&p, "t5.csv", "scopus", T5).await;
    status(&up, 200, "upload")?;
    let up = up.json();
    ensure(up["files"][0]["rows"] == 5 && up["files"][0]["headers"].as_array().is_some_and(|h| h.len() == 17), || up.to_string())?;
    serde_json::from_value::<scholarscope_core::ingest::FieldMapping>(up["files"][0]["mapping"].clone()).map_err(|e| e.to_string())?;

    let built = api.post(&format!("/projects/{p}/build"), &Value::Null).await;
    status(&built, 200, "build")?;
    let built = built.json();
    let report: DedupReport = serde_json::from_value(built["report"].clone()).map_err(|e| e.to_string())?;
    let stats: CorpusStats = serde_json::from_value(built["stats"].clone()).map_err(|e| e.to_string())?;
    ensure(report.kept == 5 && stats.n_records == 5 && stats.n_distinct_countries == 3, || built.to_string())?;

    let preview = api.get(&format!("/projects/{p}/preview?n=10")).await.json();
    ensure(preview["total"] == 5 && preview["records"].as_array().map(Vec::len) == Some(5), || preview.to_string())?;

    let filters = json!({ "year_range": [2020, 2022] });
    let filtered = api.put(&format!("/projects/{p}/filters"), &filters).await;
    status(&filtered, 200, "filters")?;
    let fstats: CorpusStats = serde_json::from_value(filtered.json()["stats"].clone()).map_err(|e| e.to_string())?;
    ensure(fstats.n_records == 4, || format!("{fstats:?}"))?;

    let request = json!({ "module": "bibtrail", "operation": "publications_series", "params": { "mode": "total" } });
    let analyzed = api.post(&format!("/projects/{p}/analyze"), &request).await;
    status(&analyzed, 200, "analyze")?;
    let rid = analyzed.headers[RESULT_ID_HEADER].to_str().unwrap().to_string();
    let spec: FilterSpec = serde_json::from_value(filters).unwrap();
    let gender = TableGenderProvider::bundled();
    let direct = run_analysis(
        &filter(&t5_corpus(), &spec).unwrap(),
        &serde_json::from_value::<AnalysisRequest>(request.clone()).unwrap(),
        &AnalysisContext::new(&gender),
    )
    .map_err(|e| e.to_string())?;
    ensure(analyzed.body == serde_json::to_vec(&direct).unwrap(), || "analyze differs from the library call".into())?;
    out.insert("analyze.json".into(), analyzed.body.clone());

    let chart = api.post(&format!("/projects/{p}/chart"), &json!({ "result_ref": rid, "options": { "chart_type": "line" } })).await;
    status(&chart, 200, "chart")?;
    let chart = chart.json();
    serde_json::from_value::<ChartSpec>(chart["spec"].clone()).map_err(|e| e.to_string())?;
    let spec_id = chart["spec_id"].as_str().unwrap().to_string();
    for bg in ["white", "transparent"] {
        let svg = api.get(&format!("/projects/{p}/chart/{spec_id}.svg?bg={bg}")).await;
        status(&svg, 200, "svg")?;
        oracles::well_formed_svg(&svg.text());
        out.insert(format!("chart-{bg}.svg"), svg.body);
    }
    let csv = api.get(&format!("/projects/{p}/export/{rid}.csv")).await;
    status(&csv, 200, "csv")?;
    ensure(csv.body == export_csv(&direct), || "csv differs".into())?;
    out.insert("export.csv".into(), csv.body);

    let summary = api.post(&format!("/projects/{p}/summary"), &json!({ "result_ref": rid })).await;
    status(&summary, 200, "summary")?;
    let summary_json = summary.json();
    ensure(summary_json["text"].as_str().is_some_and(|t| !t.is_empty()) && summary_json["provider"] == "template", || summary_json.to_string())?;
    out.insert("summary.json".into(), summary.body);

    let project_json = api.get(&format!("/projects/{p}")).await.body;
    drop(api);
    let mut restarted = Api::open(data_dir);
    restarted.token = Some(token);
    let reloaded = restarted.get(&format!("/projects/{p}")).await;
    ensure(reloaded.body == project_json, || "project metadata changed across restart".into())?;
    let stored = restarted.get(&format!("/projects/{p}/results/{rid}")).await;
    ensure(stored.body == out["analyze.json"], || "stored result changed across restart".into())?;
    let again = restarted.post(&format!("/projects/{p}/analyze"), &request).await;
    ensure(again.body == out["analyze.json"] && again.headers[RESULT_ID_HEADER] == rid.as_str(), || "re-analysis after restart differs".into())?;
    let preview_again = restarted.get(&format!("/projects/{p}/preview?n=10")).await.json();
    ensure(preview_again == preview, || "preview changed across restart".into())?;
    Ok(out)
}

fn service() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(service_walkthrough(dir.path())).map(|_| ())
}

/// Every artifact the primary pipeline writes, keyed by name.
fn artifacts(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let path = |name: &str| dir.join(name).display().to_string();
    let (code, _, err) = cli(&["ingest", &fixture_path("t5.csv"), "--out", &path("t5.csv")]);
    ensure(code == 0, || err)?;
    std::fs::write(dir.join("syn50.csv"), write_corpus_csv(&synthetic_corpus(50, 50))).unwrap();
    std::fs::write(dir.join("scimago.csv"), SCI3).unwrap();

    let mut requests = oracles::viz_requests();
    requests.push((Module::Themantix, "lda_topics", json!({ "k": 3, "iterations": 200, "seed": 9 })));
    requests.push((Module::Themantix, "lda_topics", json!({ "k": 3, "iterations": 200, "seed": 9, "output": "doc_topics" })));
    for (i, (module, op, params)) in requests.iter().enumerate() {
        for corpus in ["t5", "syn50"] {
            let base = format!("{corpus}-{i:02}-{op}");
            let params = params.to_string();
            let (json_out, csv_out, svg_out) = (path(&format!("{base}.json")), path(&format!("{base}.csv")), path(&format!("{base}.svg")));
            let mut args = vec![
                "analyze".to_string(), path(&format!("{corpus}.csv")), "--module".into(), module.name().into(), "--op".into(),
                op.to_string(), "--params".into(), params, "--scimago".into(), path("scimago.csv"),
                "--json".into(), json_out, "--csv".into(), csv_out,
            ];
            if op != &"lda_topics" {
                args.extend(["--svg".to_string(), svg_out]);
            }
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let (code, _, err) = cli(&args);
            ensure(code == 0, || format!("{base}: {err}"))?;
        }
    }
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        if entry.file_type().map_err(|e| e.to_string())?.is_file() {
            out.insert(entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path()).unwrap());
        }
    }
    let service_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    for (name, bytes) in rt.block_on(service_walkthrough(service_dir.path()))? {
        out.insert(format!("service/{name}"), bytes);
    }
    Ok(out)
}

fn digest(artifacts: &BTreeMap<String, Vec<u8>>) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in artifacts {
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

fn determinism() -> Result<(), String> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = artifacts(a.path())?;
    let second = artifacts(b.path())?;
    ensure(first.len() > 100, || format!("only {} artifacts", first.len()))?;
    if let Some(name) = first.keys().find(|k| first.get(*k) != second.get(*k)) {
        return Err(format!("{name} differs between runs"));
    }
    ensure(digest(&first) == digest(&second), || "digests differ".into())
}

fn main() -> std::process::ExitCode {
    // Panics inside a check are reported on its FAIL line.
    std::panic::set_hook(Box::new(|_| {}));
    let checks: [(&str, Check); 11] = [
        ("ingest", ingest),
        ("centrality oracle", centrality_oracle),
        ("centrality spot checks", spot_checks),
        ("communities", communities),
        ("quartile pipeline", quartile_pipeline),
        ("series invariants", series_invariants),
        ("lda", lda),
        ("clustering", clustering),
        ("viz", viz),
        ("service", service),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        let started = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(panic) => Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {name} ({secs:.2}s)"),
            Err(why) => {
                println!("FAIL {name} ({secs:.2}s): {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", checks.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria failed: {}", failed.len(), checks.len(), failed.join(", "));
        std::process::ExitCode::FAILURE
    }
}
