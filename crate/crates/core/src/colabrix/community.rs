use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::centrality::brandes_accumulate;
use super::graph::{components_of, Graph};
use super::{leiden, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunityMethod {
    GirvanNewman,
    GreedyModularity,
    Leiden,
}

impl CommunityMethod {
    pub fn name(self) -> &'static str {
        match self {
            CommunityMethod::GirvanNewman => "girvan_newman",
            CommunityMethod::GreedyModularity => "greedy_modularity",
            CommunityMethod::Leiden => "leiden",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: BTreeMap<String, usize>,
    pub modularity: f64,
}

impl Partition {
    /// Builds a partition from a per-node membership vector. Community ids are
    /// renumbered by first appearance in node order.
    pub fn from_membership(graph: &Graph, membership: &[usize]) -> Self {
        let membership = canonical(membership);
        Self {
            modularity: modularity_of(graph, &membership, 1.0),
            assignment: graph.labels().iter().cloned().zip(membership).collect(),
        }
    }

    pub fn community_count(&self) -> usize {
        self.assignment.values().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, in label order.
    pub fn communities(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (label, c) in &self.assignment {
            out[*c].push(label.clone());
        }
        out
    }

    fn membership_for(&self, graph: &Graph) -> Result<Vec<usize>, GraphError> {
        if self.assignment.len() != graph.node_count() {
            return Err(GraphError::PartitionMismatch);
        }
        graph
            .labels()
            .iter()
            .map(|l| self.assignment.get(l).copied().ok_or(GraphError::PartitionMismatch))
            .collect()
    }
}

pub(crate) use crate::util::first_appearance_ids as canonical;

/// Weighted modularity `Q = Σ_c [in_c/(2m) − (tot_c/(2m))²]`; 0 when the graph
/// has no edges.
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64, GraphError> {
    let membership = partition.membership_for(graph)?;
    Ok(modularity_of(graph, &membership, 1.0))
}

pub(crate) fn modularity_of(graph: &Graph, membership: &[usize], resolution: f64) -> f64 {
    let m = graph.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total: BTreeMap<usize, f64> = BTreeMap::new();
    for (u, v, w) in graph.edges() {
        let w = w as f64;
        *total.entry(membership[u]).or_default() += w;
        *total.entry(membership[v]).or_default() += w;
        if membership[u] == membership[v] {
            *internal.entry(membership[u]).or_default() += 2.0 * w;
        }
    }
    let two_m = 2.0 * m;
    total
        .iter()
        .map(|(c, tot)| {
            let inside = internal.get(c).copied().unwrap_or(0.0);
            inside / two_m - resolution * (tot / two_m) * (tot / two_m)
        })
        .sum()
}

pub fn detect_communities(graph: &Graph, method: CommunityMethod, seed: u64) -> Result<Partition, GraphError> {
    detect_communities_with(graph, method, seed, 1.0)
}

/// As [`detect_communities`] with an explicit Leiden resolution. The reported
/// modularity always uses resolution 1.
pub fn detect_communities_with(
    graph: &Graph,
    method: CommunityMethod,
    seed: u64,
    resolution: f64,
) -> Result<Partition, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(GraphError::InvalidParameter("resolution must be positive"));
    }
    let membership = match method {
        CommunityMethod::GirvanNewman => girvan_newman(graph),
        CommunityMethod::GreedyModularity => greedy_modularity(graph),
        CommunityMethod::Leiden => leiden::leiden(graph, seed, resolution),
    };
    Ok(Partition::from_membership(graph, &membership))
}

fn membership_from_components(n: usize, comps: &[Vec<usize>]) -> Vec<usize> {
    let mut membership = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            membership[v] = c;
        }
    }
    membership
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Repeatedly removes the edge of highest betweenness and keeps the split of
/// highest modularity seen along the way.
fn girvan_newman(graph: &Graph) -> Vec<usize> {
    let n = graph.node_count();
    let mut adj = graph.unweighted_adjacency();
    let mut best = membership_from_components(n, &components_of(&adj));
    let mut best_q = modularity_of(graph, &best, 1.0);
    let mut component_count = components_of(&adj).len();

    let all: Vec<usize> = (0..n).collect();
    let mut eb: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut scratch = vec![0.0; n];
    brandes_accumulate(&adj, &all, &mut scratch, Some(&mut eb));

    let edge_key = |(u, v): (usize, usize)| {
        let (a, b) = (graph.label(u), graph.label(v));
        if a <= b { (a, b) } else { (b, a) }
    };

    while !eb.is_empty() {
        let mut chosen: Option<((usize, usize), f64)> = None;
        for (&e, &score) in &eb {
            chosen = match chosen {
                None => Some((e, score)),
                Some((c, cs)) if approx_eq(score, cs) => {
                    if edge_key(e) < edge_key(c) { Some((e, score)) } else { Some((c, cs)) }
                }
                Some((_, cs)) if score > cs => Some((e, score)),
                keep => keep,
            };
        }
        let ((u, v), _) = chosen.expect("nonempty");
        eb.remove(&(u, v));
        adj[u].retain(|&x| x != v);
        adj[v].retain(|&x| x != u);

        let comps = components_of(&adj);
        let affected: Vec<usize> = comps
            .iter()
            .filter(|c| c.binary_search(&u).is_ok() || c.binary_search(&v).is_ok())
            .flat_map(|c| c.iter().copied())
            .collect();
        for (&(a, _), score) in eb.iter_mut() {
            if affected.contains(&a) {
                *score = 0.0;
            }
        }
        let mut fresh = BTreeMap::new();
        brandes_accumulate(&adj, &affected, &mut scratch, Some(&mut fresh));
        for (e, s) in fresh {
            if let Some(slot) = eb.get_mut(&e) {
                *slot = s;
            }
        }

        if comps.len() > component_count {
            component_count = comps.len();
            let membership = membership_from_components(n, &comps);
            let q = modularity_of(graph, &membership, 1.0);
            if q > best_q + 1e-12 {
                best_q = q;
                best = membership;
            }
        }
    }
    best
}

/// Agglomerative merging by best modularity gain, stopping when no merge
/// increases modularity.
fn greedy_modularity(graph: &Graph) -> Vec<usize> {
    let n = graph.node_count();
    let m = graph.total_weight();
    let mut membership: Vec<usize> = (0..n).collect();
    if m == 0.0 {
        return membership;
    }
    let two_m = 2.0 * m;
    let mut share: BTreeMap<usize, f64> = (0..n).map(|v| (v, graph.strength(v) / two_m)).collect();
    let mut links: BTreeMap<usize, BTreeMap<usize, f64>> = (0..n).map(|v| (v, BTreeMap::new())).collect();
    for (u, v, w) in graph.edges() {
        links.get_mut(&u).unwrap().insert(v, w as f64);
        links.get_mut(&v).unwrap().insert(u, w as f64);
    }
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (&c, neighbors) in &links {
            for (&d, &w) in neighbors.range(c + 1..) {
                let gain = w / m - 2.0 * share[&c] * share[&d];
                if best.is_none_or(|(_, _, g)| gain > g + 1e-15) {
                    best = Some((c, d, gain));
                }
            }
        }
        let Some((c, d, gain)) = best else { break };
        if gain <= 1e-12 {
            break;
        }
        let absorbed = links.remove(&d).unwrap();
        for (e, w) in absorbed {
            let other = links.get_mut(&e).unwrap();
            other.remove(&d);
            if e != c {
                *other.entry(c).or_default() += w;
                *links.get_mut(&c).unwrap().entry(e).or_default() += w;
            }
        }
        links.get_mut(&c).unwrap().remove(&d);
        let s = share.remove(&d).unwrap();
        *share.get_mut(&c).unwrap() += s;
        for slot in membership.iter_mut() {
            if *slot == d {
                *slot = c;
            }
        }
    }
    membership
}
