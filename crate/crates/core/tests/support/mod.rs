//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use scholarscope_core::bibtrail::{Quartile, QuartileIndex};
use scholarscope_core::colabrix::{centrality, CentralityMeasure, Graph};
use scholarscope_core::scitrace::TableGenderProvider;
use scholarscope_core::synthetic::synthetic_corpus;
use scholarscope_core::{run_analysis, AnalysisContext, AnalysisRequest, AnalysisResult, Corpus, Module, Record};

// Centrality

pub const TOL: f64 = 1e-8;

pub struct Small {
    pub n: usize,
    pub w: Vec<Vec<u64>>,
}

impl Small {
    pub fn graph(&self) -> Graph {
        let labels: Vec<String> = (0..self.n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.w[u][v] > 0 {
                    edges.push((u, v, self.w[u][v]));
                }
            }
        }
        Graph::from_edges(&refs, &edges)
    }

    pub fn connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if self.w[u][v] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Every simple path from `s` to `t`, as vertex lists.
    pub fn simple_paths(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        fn walk(g: &Small, path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
            let u = *path.last().unwrap();
            if u == t {
                out.push(path.clone());
                return;
            }
            for v in 0..g.n {
                if g.w[u][v] > 0 && !path.contains(&v) {
                    path.push(v);
                    walk(g, path, t, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut vec![s], t, &mut out);
        out
    }

    pub fn betweenness(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n];
        for s in 0..self.n {
            for t in s + 1..self.n {
                let paths = self.simple_paths(s, t);
                let Some(shortest) = paths.iter().map(Vec::len).min() else { continue };
                let geodesics: Vec<_> = paths.iter().filter(|p| p.len() == shortest).collect();
                for p in &geodesics {
                    for &v in &p[1..p.len() - 1] {
                        b[v] += 1.0 / geodesics.len() as f64;
                    }
                }
            }
        }
        b
    }

    pub fn closeness(&self) -> Vec<f64> {
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; self.n]; self.n];
        for u in 0..self.n {
            d[u][u] = 0;
            for v in 0..self.n {
                if self.w[u][v] > 0 {
                    d[u][v] = 1;
                }
            }
        }
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        (0..self.n)
            .map(|u| {
                let total: usize = d[u].iter().filter(|&&x| x < inf).sum();
                if total == 0 { 0.0 } else { 1.0 / total as f64 }
            })
            .collect()
    }

    pub fn degree(&self) -> Vec<f64> {
        self.w.iter().map(|row| row.iter().filter(|&&x| x > 0).count() as f64).collect()
    }

    /// Unit-norm nonnegative principal eigenvector and its eigenvalue.
    pub fn eigenvector(&self) -> (Vec<f64>, f64) {
        let a = DMatrix::from_fn(self.n, self.n, |i, j| self.w[i][j] as f64);
        let eig = SymmetricEigen::new(a);
        let (idx, lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &l)| if l > best.1 { (i, l) } else { best });
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        (v, lambda)
    }
}

pub fn check_centralities(g: &Small) {
    let graph = g.graph();
    let expected = [
        (CentralityMeasure::Degree, g.degree()),
        (CentralityMeasure::Betweenness, g.betweenness()),
        (CentralityMeasure::Closeness, g.closeness()),
    ];
    for (measure, oracle) in expected {
        let got = centrality(&graph, measure).unwrap();
        for (i, want) in oracle.iter().enumerate() {
            let have = got.get(&format!("v{i}")).unwrap();
            assert!((have - want).abs() < TOL, "{measure:?} v{i}: {have} vs {want} on {:?}", g.w);
        }
    }
    let (vec, lambda) = g.eigenvector();
    let got = centrality(&graph, CentralityMeasure::Eigenvector).unwrap();
    assert!((got.lambda.unwrap() - lambda).abs() < TOL, "lambda on {:?}", g.w);
    for (i, want) in vec.iter().enumerate() {
        let have = got.get(&format!("v{i}")).unwrap();
        assert!((have - want).abs() < TOL, "eigenvector v{i}: {have} vs {want} on {:?}", g.w);
    }
}


/// Every connected labelled graph on `1..=max_n` unweighted nodes.
pub fn all_connected(max_n: usize) -> Vec<Small> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let mut w = vec![vec![0; n]; n];
            for (bit, &(u, v)) in pairs.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    w[u][v] = 1;
                    w[v][u] = 1;
                }
            }
            let g = Small { n, w };
            if g.connected() {
                out.push(g);
            }
        }
    }
    out
}

/// `count` connected graphs on 6 or 7 nodes with edge weights 1..=4.
pub fn random_connected(seed: u64, count: usize) -> Vec<Small> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.random_range(6..=7);
        let p = rng.random_range(0.25..0.8);
        let mut w = vec![vec![0u64; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    let x = rng.random_range(1..=4);
                    w[u][v] = x;
                    w[v][u] = x;
                }
            }
        }
        let g = Small { n, w };
        if g.connected() {
            out.push(g);
        }
    }
    out
}

// Modularity

pub const GN6_LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn gn6() -> Graph {
    Graph::from_edges(&GN6_LABELS, &[(0, 1, 1), (0, 2, 1), (1, 2, 1), (3, 4, 1), (3, 5, 1), (4, 5, 1), (2, 3, 1)])
}

/// Newman modularity straight from the definition, summed over node pairs.
pub fn q_oracle(adj: &[[f64; 6]; 6], membership: &[usize]) -> f64 {
    let k: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            if membership[i] == membership[j] {
                q += adj[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Restricted growth strings: each is one set partition.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

pub fn dense(graph: &Graph) -> [[f64; 6]; 6] {
    let mut a = [[0.0; 6]; 6];
    for (u, v, w) in graph.edges() {
        a[u][v] = w as f64;
        a[v][u] = w as f64;
    }
    a
}

// Topics and clusters

pub const SPORT: [&str; 8] = ["goal", "match", "league", "striker", "referee", "stadium", "penalty", "season"];
pub const COOKING: [&str; 8] = ["flour", "oven", "butter", "recipe", "simmer", "garlic", "pastry", "saucepan"];

/// 100 documents, each drawn from one of two disjoint vocabularies.
pub fn planted(seed: u64) -> (Vec<String>, Vec<Vec<String>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = Vec::new();
    let mut docs = Vec::new();
    let mut truth = Vec::new();
    for d in 0..100 {
        let topic = rng.random_range(0..2);
        let vocab = if topic == 0 { &SPORT } else { &COOKING };
        let len = rng.random_range(20..40);
        docs.push((0..len).map(|_| vocab[rng.random_range(0..vocab.len())].to_string()).collect());
        ids.push(format!("doc{d}"));
        truth.push(topic);
    }
    (ids, docs, truth)
}

/// Two groups of three documents with disjoint vocabularies.
pub fn separable() -> Corpus {
    let rec = |id: &str, text: &str| Record { id: id.into(), title: text.into(), ..Record::default() };
    Corpus::new(vec![
        rec("a1", "protein folding kinase enzyme"),
        rec("b1", "galaxy telescope quasar redshift"),
        rec("a2", "enzyme kinase protein membrane"),
        rec("a3", "membrane protein folding"),
        rec("b2", "quasar galaxy nebula"),
        rec("b3", "telescope redshift nebula galaxy"),
    ])
}

// Charts

pub fn viz_requests() -> Vec<(Module, &'static str, Value)> {
    use Module::*;
    let mut v = vec![
        (Bibtrail, "publications_series", json!({"mode": "total", "year_gap": 2})),
        (Bibtrail, "journal_analysis", json!({"mode": "top_in_quartile", "quartile": "Q1"})),
        (Scitrace, "author_analysis", json!({"mode": "top_authors", "n": 8})),
        (Colabrix, "build_graph", json!({"level": "author"})),
        (Colabrix, "giant_component", json!({"level": "country"})),
        (Colabrix, "centrality", json!({"measure": "betweenness"})),
        (Colabrix, "centrality_distribution", json!({"measure": "closeness", "bins": 6})),
        (Colabrix, "detect_communities", json!({"method": "greedy_modularity"})),
        (Colabrix, "modularity", Value::Null),
        (Themantix, "keyword_frequencies", json!({"n": 20})),
        (Themantix, "keyword_mapping", json!({"axis": "country"})),
        (Themantix, "cooccurrence_graph", Value::Null),
        (Themantix, "thematic_evolution", json!({"slice_width": 4, "top_terms": 4})),
        (Themantix, "cluster_documents", json!({"k": 3})),
    ];
    for mode in ["total", "average", "cumulative", "proportion", "median", "yearwise_distribution"] {
        v.push((Bibtrail, "citations_series", json!({ "mode": mode })));
    }
    for mode in ["total", "yearwise", "decadewise", "vs_citations"] {
        v.push((Bibtrail, "doc_type_analysis", json!({ "mode": mode })));
    }
    for mode in ["top_journals", "quartile_counts", "quartile_yearly", "journals_per_publisher"] {
        v.push((Bibtrail, "journal_analysis", json!({ "mode": mode })));
    }
    for field in ["publisher", "open_access", "language"] {
        v.push((Bibtrail, "categorical_counts", json!({ "field": field })));
        if field != "language" {
            v.push((Bibtrail, "categorical_counts", json!({"field": field, "vs_citations": true})));
        }
    }
    for mode in ["papers_per_author_count", "team_size", "pair_collaboration"] {
        v.push((Scitrace, "author_analysis", json!({ "mode": mode })));
    }
    for mode in ["counts", "lead_counts", "team_size", "pair_collaboration", "papers_vs_citations"] {
        v.push((Scitrace, "country_analysis", json!({ "mode": mode })));
    }
    for mode in ["totals", "by_position", "by_country"] {
        v.push((Scitrace, "gender_analysis", json!({ "mode": mode })));
    }
    for field in ["institutes", "funding"] {
        v.push((Scitrace, "top_entities", json!({ "field": field })));
    }
    v
}

pub fn viz_results() -> BTreeMap<String, AnalysisResult> {
    let corpus = synthetic_corpus(50, 3);
    let mut index = QuartileIndex::new(Some(2023));
    for (i, r) in corpus.iter().enumerate() {
        index.insert_best(r.issn[0].clone(), Quartile::ALL[i % 3]);
    }
    let gender = TableGenderProvider::bundled();
    let ctx = AnalysisContext::new(&gender).with_quartiles(Some(&index));
    let mut out = BTreeMap::new();
    for (m, op, params) in viz_requests() {
        let r = run_analysis(&corpus, &AnalysisRequest::new(m, op, params.clone()), &ctx)
            .unwrap_or_else(|e| panic!("{m}.{op} {params}: {e}"));
        out.entry(r.kind.clone()).or_insert(r);
    }
    out
}

pub fn well_formed_svg(svg: &str) {
    let doc = roxmltree::Document::parse(svg).unwrap_or_else(|e| panic!("{e}\n{svg}"));
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("width"), Some("1200"));
    assert_eq!(root.attribute("height"), Some("800"));
}

