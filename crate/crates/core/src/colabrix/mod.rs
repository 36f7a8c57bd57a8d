//! Collaboration networks: construction, components, centralities and
//! community detection.

mod centrality;
mod community;
mod graph;
mod leiden;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use centrality::{
    centrality, centrality_distribution, CentralityMeasure, CentralityScores, EIGEN_MAX_ITERATIONS,
    EIGEN_TOLERANCE,
};
pub use community::{
    detect_communities, detect_communities_with, modularity, CommunityMethod, Partition,
};
pub use graph::Graph;

use crate::corpus::Corpus;
use crate::result::{AnalysisResult, NetworkData, NetworkLink, NetworkNode, META_LABEL_AXIS};
use crate::scitrace::{author_labels, record_author_keys};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("no such component")]
    NoSuchComponent,
    #[error("partition does not cover the graph's nodes exactly")]
    PartitionMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkLevel {
    Author,
    Country,
}

/// Graph whose nodes are all distinct entities (sorted) and whose edge
/// weights count the sets containing both endpoints.
pub(crate) fn graph_from_sets(sets: &[Vec<String>]) -> Graph {
    let nodes: BTreeSet<&String> = sets.iter().flatten().collect();
    let index: BTreeMap<&String, usize> = nodes.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut graph = Graph::new(nodes.into_iter().cloned().collect());
    for set in sets {
        let ids: BTreeSet<usize> = set.iter().map(|l| index[l]).collect();
        let ids: Vec<usize> = ids.into_iter().collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                graph.add_weight(ids[i], ids[j], 1);
            }
        }
    }
    graph
}

/// Co-authorship or country collaboration graph; edge weight = number of
/// joint records.
pub fn build_graph(corpus: &Corpus, level: NetworkLevel) -> Graph {
    let sets: Vec<Vec<String>> = match level {
        NetworkLevel::Author => {
            let labels = author_labels(corpus);
            corpus
                .iter()
                .map(|r| record_author_keys(r).iter().map(|k| labels[k].clone()).collect())
                .collect()
        }
        NetworkLevel::Country => corpus
            .iter()
            .map(|r| r.resolved_countries().into_iter().map(String::from).collect())
            .collect(),
    };
    graph_from_sets(&sets)
}

/// Induced subgraph of the `rank`-th largest component (1 or 2). Equal sizes
/// are ordered by their smallest label.
pub fn giant_component(graph: &Graph, rank: usize) -> Result<Graph, GraphError> {
    if rank == 0 {
        return Err(GraphError::NoSuchComponent);
    }
    let mut comps = graph.components();
    comps.sort_by(|a, b| {
        let min_label = |c: &Vec<usize>| c.iter().map(|v| graph.label(*v)).min();
        b.len().cmp(&a.len()).then_with(|| min_label(a).cmp(&min_label(b)))
    });
    comps
        .get(rank - 1)
        .map(|c| graph.induced(c))
        .ok_or(GraphError::NoSuchComponent)
}

fn network_payload(graph: &Graph, values: &[f64], groups: Option<&[usize]>) -> NetworkData {
    NetworkData {
        nodes: graph
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| NetworkNode { id: l.clone(), group: groups.map(|g| g[i]), value: values[i] })
            .collect(),
        links: graph
            .edges()
            .map(|(u, v, w)| NetworkLink {
                source: graph.label(u).into(),
                target: graph.label(v).into(),
                weight: w as f64,
            })
            .collect(),
    }
}

/// Node table (degree, strength) with the node/link payload attached.
pub fn graph_result(graph: &Graph, kind: &str) -> AnalysisResult {
    let mut result = AnalysisResult::table(kind, "node", &["degree", "strength"])
        .with_meta(META_LABEL_AXIS, "node")
        .with_meta("nodes", graph.node_count())
        .with_meta("edges", graph.edge_count())
        .with_meta("components", graph.components().len());
    let degrees: Vec<f64> = (0..graph.node_count()).map(|v| graph.degree(v) as f64).collect();
    for v in 0..graph.node_count() {
        result.push(graph.label(v), vec![degrees[v], graph.strength(v)]);
    }
    result.network = Some(network_payload(graph, &degrees, None));
    result
}

pub fn centrality_result(graph: &Graph, scores: &CentralityScores) -> AnalysisResult {
    let mut result = AnalysisResult::table("centrality", "node", &[scores.measure.name()])
        .with_meta(META_LABEL_AXIS, "node")
        .with_meta("measure", scores.measure.name());
    result = match scores.measure {
        CentralityMeasure::Betweenness => result.with_meta("paths", "unweighted"),
        CentralityMeasure::Closeness => result
            .with_meta("paths", "unweighted")
            .with_meta("scope", "reachable nodes only"),
        CentralityMeasure::Eigenvector => result.with_meta("lambda", scores.lambda.unwrap_or(0.0)),
        CentralityMeasure::Degree => result,
    };
    let values: Vec<f64> = graph.labels().iter().map(|l| scores.scores[l]).collect();
    for (label, value) in graph.labels().iter().zip(&values) {
        result.push(label.clone(), vec![*value]);
    }
    result.network = Some(network_payload(graph, &values, None));
    result
}

pub fn partition_result(graph: &Graph, partition: &Partition, method: CommunityMethod) -> AnalysisResult {
    let mut result = AnalysisResult::table("communities", "node", &["community"])
        .with_meta(META_LABEL_AXIS, "node")
        .with_meta("method", method.name())
        .with_meta("modularity", partition.modularity)
        .with_meta("communities", partition.community_count());
    let groups: Vec<usize> = graph.labels().iter().map(|l| partition.assignment[l]).collect();
    for (label, g) in graph.labels().iter().zip(&groups) {
        result.push(label.clone(), vec![*g as f64]);
    }
    let degrees: Vec<f64> = (0..graph.node_count()).map(|v| graph.degree(v) as f64).collect();
    result.network = Some(network_payload(graph, &degrees, Some(&groups)));
    result
}
