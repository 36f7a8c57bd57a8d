//! Invariants over seeded synthetic corpora and random graphs.

use proptest::prelude::*;
use scholarscope_core::bibtrail::{
    self, CategoryField, DocTypeMode, JournalMode, Quartile, QuartileIndex, SeriesMode,
};
use scholarscope_core::colabrix::{
    self, centrality, detect_communities, CentralityMeasure, CommunityMethod, Graph,
};
use scholarscope_core::corpus::{filter, summarize_corpus};
use scholarscope_core::ingest::merge_and_dedup;
use scholarscope_core::scitrace::{self, AuthorMode, CountryMode, GenderMode, TableGenderProvider, PAIR_SEPARATOR};
use scholarscope_core::summarize::{summarize_result, TemplateProvider, MAX_SUMMARY_CHARS};
use scholarscope_core::synthetic::synthetic_corpus;
use scholarscope_core::themantix::{self, LdaParams};
use scholarscope_core::viz::{build_chart_spec, ChartOptions, ChartType};
use scholarscope_core::{Corpus, FilterSpec, Record};

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    (5usize..60, any::<u64>()).prop_map(|(n, seed)| synthetic_corpus(n, seed))
}

fn total(r: &scholarscope_core::AnalysisResult) -> f64 {
    r.rows.iter().map(|row| row.values[0]).sum()
}

/// Records split across files, with some re-exported copies whose DOI case,
/// title punctuation or citation count differ.
fn files_with_copies(c: &Corpus, copies: &[usize], files: usize) -> Vec<Vec<Record>> {
    let mut out = vec![Vec::new(); files];
    for (i, r) in c.iter().enumerate() {
        let mut r = r.clone();
        r.source_label = format!("file{}", i % files);
        out[i % files].push(r);
    }
    for (j, &pick) in copies.iter().enumerate() {
        let mut r = c.records()[pick % c.len()].clone();
        r.id = format!("copy#{j}");
        r.doi = r.doi.map(|d| format!("https://doi.org/{}", d.to_uppercase()));
        r.title = format!("{}!", r.title.to_uppercase());
        r.citations += j as u64;
        r.source_label = format!("file{}", j % files);
        out[j % files].push(r);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dedup_accounting_and_idempotence(c in corpus_strategy(), copies in prop::collection::vec(0usize..100, 0..10), files in 1usize..4) {
        let lists = files_with_copies(&c, &copies, files);
        let input: usize = lists.iter().map(Vec::len).sum();
        let (merged, report) = merge_and_dedup(lists.clone()).unwrap();
        let dropped: usize = report.duplicate_groups.iter().map(|g| g.dropped_record_ids.len()).sum();
        prop_assert_eq!(report.input_count, input);
        prop_assert_eq!(report.kept + dropped, input);
        prop_assert_eq!(merged.len(), report.kept);
        let mut ids: Vec<String> = merged.iter().map(|r| r.id.clone()).collect();
        ids.extend(report.duplicate_groups.iter().flat_map(|g| g.dropped_record_ids.clone()));
        ids.sort();
        let mut expected: Vec<String> = lists.iter().flatten().map(|r| r.id.clone()).collect();
        expected.sort();
        prop_assert_eq!(ids, expected);

        let (again, report2) = merge_and_dedup(vec![merged.records().to_vec()]).unwrap();
        prop_assert_eq!(&again, &merged);
        prop_assert!(report2.duplicate_groups.is_empty());

        let mut reversed = lists;
        reversed.reverse();
        prop_assert_eq!(merge_and_dedup(reversed).unwrap().1.kept, report.kept);
    }

    #[test]
    fn filters_compose(c in corpus_strategy(), start in 2008i32..2026, len in 0i32..10, min_cit in 0u64..40) {
        let years = FilterSpec { year_range: Some([start, start + len]), ..FilterSpec::default() };
        let cites = FilterSpec { min_citations: Some(min_cit), doc_types: Some(vec!["Article".into()]), ..FilterSpec::default() };
        let stepwise = filter(&filter(&c, &years).unwrap(), &cites).unwrap();
        let joint = filter(&c, &years.and(&cites)).unwrap();
        prop_assert_eq!(&stepwise, &joint);
        prop_assert!(joint.len() <= c.len());
        prop_assert!(summarize_corpus(&joint).n_records <= summarize_corpus(&c).n_records);
        prop_assert_eq!(filter(&c, &FilterSpec::default()).unwrap(), c);
    }

    #[test]
    fn publication_series_invariants(c in corpus_strategy()) {
        let dated = c.iter().filter(|r| r.year.is_some()).count() as f64;
        for gap in 1..=5 {
            let t = bibtrail::publications_series(&c, SeriesMode::Total, gap).unwrap();
            prop_assert_eq!(total(&t), dated);
            let cum = bibtrail::publications_series(&c, SeriesMode::Cumulative, gap).unwrap();
            prop_assert!(cum.rows.windows(2).all(|w| w[0].values[0] <= w[1].values[0]));
            let p = bibtrail::publications_series(&c, SeriesMode::Proportion, gap).unwrap();
            if dated > 0.0 {
                prop_assert!((total(&p) - 1.0).abs() < 1e-9);
            }
        }
        prop_assert!(bibtrail::publications_series(&c, SeriesMode::Total, 0).is_err());
        prop_assert!(bibtrail::publications_series(&c, SeriesMode::Total, 6).is_err());
    }

    #[test]
    fn every_record_lands_in_one_category(c in corpus_strategy(), ranked in prop::collection::vec(any::<bool>(), 6)) {
        let n = c.len() as f64;
        prop_assert_eq!(total(&bibtrail::doc_type_analysis(&c, DocTypeMode::Total)), n);
        for field in [CategoryField::Publisher, CategoryField::OpenAccess, CategoryField::Language] {
            prop_assert_eq!(total(&bibtrail::categorical_counts(&c, field, false).unwrap()), n);
        }
        let mut index = QuartileIndex::new(Some(2023));
        let issns: std::collections::BTreeSet<&str> = c.iter().flat_map(|r| r.issn.iter().map(String::as_str)).collect();
        for ((i, issn), keep) in issns.into_iter().enumerate().zip(ranked) {
            if keep {
                index.insert_best(issn.to_string(), Quartile::ALL[i % 4]);
            }
        }
        let q = bibtrail::journal_analysis(&c, Some(&index), JournalMode::QuartileCounts).unwrap();
        prop_assert_eq!(total(&q), n);
    }

    #[test]
    fn scitrace_totals(c in corpus_strategy()) {
        let authored = c.iter().filter(|r| !r.authors.is_empty()).count() as f64;
        prop_assert_eq!(total(&scitrace::author_analysis(&c, AuthorMode::TeamSize).unwrap()), authored);
        let resolvable = c.iter().filter(|r| !r.resolved_countries().is_empty()).count() as f64;
        prop_assert_eq!(total(&scitrace::country_analysis(&c, CountryMode::LeadCounts)), resolvable);
        let slots = c.iter().map(|r| r.authors.len()).sum::<usize>() as f64;
        let g = scitrace::gender_analysis(&c, &TableGenderProvider::bundled(), GenderMode::Totals).unwrap();
        prop_assert_eq!(total(&g), slots);
        for r in [
            scitrace::author_analysis(&c, AuthorMode::PairCollaboration).unwrap(),
            scitrace::country_analysis(&c, CountryMode::PairCollaboration),
        ] {
            let mut seen = std::collections::BTreeSet::new();
            for row in &r.rows {
                let (a, b) = row.label.split_once(PAIR_SEPARATOR).unwrap();
                prop_assert!(a <= b);
                prop_assert!(seen.insert(row.label.clone()));
            }
        }
    }
}

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (2usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 1u64..4), 0..(n * 3)).prop_map(move |edges| {
            let labels: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            Graph::from_edges(&refs, &edges)
        })
    })
}

fn tree_strategy() -> impl Strategy<Value = Graph> {
    (2usize..14).prop_flat_map(|n| {
        prop::collection::vec(any::<prop::sample::Index>(), n - 1).prop_map(move |parents| {
            let labels: Vec<String> = (0..n).map(|i| format!("t{i:02}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let edges: Vec<_> = parents.iter().enumerate().map(|(i, p)| (i + 1, p.index(i + 1), 1)).collect();
            Graph::from_edges(&refs, &edges)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn leaves_carry_no_betweenness(g in graph_strategy()) {
        let b = centrality(&g, CentralityMeasure::Betweenness).unwrap();
        for v in 0..g.node_count() {
            if g.degree(v) == 1 {
                prop_assert_eq!(b.get(g.label(v)), Some(0.0));
            }
        }
    }

    #[test]
    fn tree_betweenness_sums_inner_path_lengths(t in tree_strategy()) {
        let n = t.node_count();
        let b = centrality(&t, CentralityMeasure::Betweenness).unwrap();
        let c = centrality(&t, CentralityMeasure::Closeness).unwrap();
        // In a tree 1/closeness(v) is the sum of distances from v.
        let distance_sum: f64 = c.scores.values().map(|x| 1.0 / x).sum::<f64>() / 2.0;
        let pairs = (n * (n - 1) / 2) as f64;
        let got: f64 = b.scores.values().sum();
        prop_assert!((got - (distance_sum - pairs)).abs() < 1e-9);
    }

    #[test]
    fn relabelling_permutes_scores(g in graph_strategy(), shift in 1usize..50) {
        let n = g.node_count();
        let relabel = |v: usize| format!("m{:02}", (v + shift) % n);
        let labels: Vec<String> = (0..n).map(relabel).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let edges: Vec<_> = g.edges().collect();
        let h = Graph::from_edges(&refs, &edges);
        let mut measures = vec![CentralityMeasure::Degree, CentralityMeasure::Betweenness, CentralityMeasure::Closeness];
        if g.is_connected() {
            measures.push(CentralityMeasure::Eigenvector);
        }
        for m in measures {
            let a = centrality(&g, m).unwrap();
            let b = centrality(&h, m).unwrap();
            for v in 0..n {
                let (x, y) = (a.get(g.label(v)).unwrap(), b.get(&relabel(v)).unwrap());
                prop_assert!((x - y).abs() < 1e-9, "{:?}: {} vs {}", m, x, y);
            }
        }
    }

    #[test]
    fn communities_are_sound(g in graph_strategy(), seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        for method in [CommunityMethod::GirvanNewman, CommunityMethod::GreedyModularity, CommunityMethod::Leiden] {
            let p = detect_communities(&g, method, seed).unwrap();
            prop_assert_eq!(p.assignment.len(), g.node_count());
            prop_assert!((p.modularity - colabrix::modularity(&g, &p).unwrap()).abs() < 1e-12);
            prop_assert!(p.modularity >= -1e-12, "{:?} Q={}", method, p.modularity);
        }
        let a = detect_communities(&g, CommunityMethod::Leiden, seed).unwrap();
        let b = detect_communities(&g, CommunityMethod::Leiden, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn giant_components_are_ordered(g in graph_strategy()) {
        let first = colabrix::giant_component(&g, 1).unwrap();
        if let Ok(second) = colabrix::giant_component(&g, 2) {
            prop_assert!(first.node_count() >= second.node_count());
        }
        prop_assert!(first.is_connected());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cooccurrence_is_simple_and_monotone(c in corpus_strategy(), w in 1u64..4) {
        let low = themantix::cooccurrence_graph(&c, w).unwrap();
        let high = themantix::cooccurrence_graph(&c, w + 1).unwrap();
        for v in 0..low.node_count() {
            for &(u, weight) in low.neighbors(v) {
                prop_assert_ne!(u, v);
                prop_assert_eq!(low.weight(u, v), weight);
            }
        }
        let low_edges: std::collections::BTreeSet<(String, String)> =
            low.edges().map(|(u, v, _)| (low.label(u).to_string(), low.label(v).to_string())).collect();
        for (u, v, _) in high.edges() {
            prop_assert!(low_edges.contains(&(high.label(u).to_string(), high.label(v).to_string())));
        }
    }

    #[test]
    fn lda_rows_are_distributions(c in corpus_strategy(), k in 1usize..4, seed in any::<u64>()) {
        let params = LdaParams::new(k, 20, seed);
        let m = themantix::lda_topics(&c, &params).unwrap();
        for row in m.topic_word.iter().chain(&m.doc_topic) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        prop_assert_eq!(m, themantix::lda_topics(&c, &params).unwrap());
    }

    #[test]
    fn clustering_ignores_document_order(c in corpus_strategy(), k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k <= c.len());
        let a = themantix::cluster_documents(&c, k, seed).unwrap();
        let mut records = c.records().to_vec();
        records.reverse();
        let b = themantix::cluster_documents(&Corpus::new(records), k, seed).unwrap();
        let cluster_of = |r: &scholarscope_core::AnalysisResult| -> std::collections::BTreeMap<String, usize> {
            r.rows.iter().map(|row| (row.label.clone(), row.values[0] as usize)).collect()
        };
        let (ca, cb) = (cluster_of(&a), cluster_of(&b));
        // Same partition: a bijection between the two labellings.
        let mut map = std::collections::BTreeMap::new();
        for (id, x) in &ca {
            let y = cb[id];
            prop_assert_eq!(*map.entry(*x).or_insert(y), y);
        }
        let distinct: std::collections::BTreeSet<_> = map.values().collect();
        prop_assert_eq!(distinct.len(), map.len());
    }

    #[test]
    fn evolution_flows_join_listed_themes(c in corpus_strategy(), width in 1u32..6, top in 1usize..8) {
        prop_assume!(c.iter().any(|r| r.year.is_some()));
        let e = themantix::thematic_evolution(&c, width, top).unwrap();
        prop_assert_eq!(e.slices.len(), e.themes_per_slice.len());
        for f in &e.flows {
            let has = |slice: usize, term: &str| e.themes_per_slice[slice].iter().any(|t| t.term == term);
            prop_assert!(has(f.from_slice, &f.from_term));
            prop_assert!(has(f.from_slice + 1, &f.to_term));
        }
    }

    #[test]
    fn year_window_matches_cropping(c in corpus_strategy(), start in 2008i32..2026, len in 0i32..8) {
        let r = bibtrail::publications_series(&c, SeriesMode::Total, 1).unwrap();
        let before = r.clone();
        let options = ChartOptions { start_year: Some(start), end_year: Some(start + len), ..ChartOptions::of_type(ChartType::Bar) };
        let spec = build_chart_spec(&r, &options).unwrap();
        prop_assert_eq!(&r, &before);
        let cropped: Vec<_> = r
            .rows
            .iter()
            .filter(|row| row.label.parse::<i32>().is_ok_and(|y| (start..=start + len).contains(&y)))
            .cloned()
            .collect();
        prop_assert_eq!(spec.data.rows, cropped);
    }

    #[test]
    fn template_summary_is_pure_and_bounded(c in corpus_strategy()) {
        for r in [
            bibtrail::publications_series(&c, SeriesMode::Total, 1).unwrap(),
            scitrace::author_analysis(&c, AuthorMode::TopAuthors(200)).unwrap(),
            themantix::keyword_frequencies(&c, themantix::KeywordSource::Both, 500).unwrap(),
        ] {
            let a = summarize_result(&r, None, &TemplateProvider);
            prop_assert_eq!(&a, &summarize_result(&r, None, &TemplateProvider));
            prop_assert!(!a.text.is_empty());
            prop_assert!(a.text.chars().count() <= MAX_SUMMARY_CHARS);
        }
    }
}
