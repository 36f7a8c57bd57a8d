use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::corpus::Corpus;
use crate::record::{normalize_title, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchBasis {
    Doi,
    TitleYear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateGroup {
    pub kept_record_id: String,
    pub dropped_record_ids: Vec<String>,
    pub match_basis: MatchBasis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub input_count: usize,
    pub kept: usize,
    pub duplicate_groups: Vec<DuplicateGroup>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays root so roots follow input order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Merge record lists (one per source file, in file order) and collapse
/// duplicates.
///
/// Two records match on equal normalized DOI when both carry one, otherwise on
/// equal normalized title and equal year. The kept record of a group is the one
/// with the most filled fields, then the most citations, then the earliest
/// file; it inherits the group's maximum citation count.
pub fn merge_and_dedup(record_lists: Vec<Vec<Record>>) -> Result<(Corpus, DedupReport), IngestError> {
    let mut all: Vec<(usize, Record)> = Vec::new();
    for (file_idx, list) in record_lists.into_iter().enumerate() {
        all.extend(list.into_iter().map(|r| (file_idx, r)));
    }
    if all.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let n = all.len();
    let mut uf = UnionFind::new(n);
    let mut title_linked = alloc::vec![false; n];

    let mut by_doi: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (_, r)) in all.iter().enumerate() {
        if let Some(doi) = r.doi.as_deref() {
            match by_doi.get(doi) {
                Some(&first) => uf.union(first, i),
                None => {
                    by_doi.insert(doi, i);
                }
            }
        }
    }

    let mut buckets: BTreeMap<(String, i32), Vec<usize>> = BTreeMap::new();
    for (i, (_, r)) in all.iter().enumerate() {
        let title = normalize_title(&r.title);
        if let (false, Some(year)) = (title.is_empty(), r.year) {
            buckets.entry((title, year)).or_default().push(i);
        }
    }
    for members in buckets.values() {
        let anchor = members
            .iter()
            .copied()
            .find(|&i| all[i].1.doi.is_some())
            .unwrap_or(members[0]);
        for &i in members {
            if i != anchor && (all[i].1.doi.is_none() || all[anchor].1.doi.is_none()) {
                uf.union(anchor, i);
                title_linked[i] = true;
                title_linked[anchor] = true;
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = uf.find(i);
        groups.entry(root).or_default().push(i);
    }

    let mut kept_indices: Vec<(usize, Option<DuplicateGroup>)> = Vec::with_capacity(groups.len());
    for members in groups.values() {
        let kept = *members
            .iter()
            .max_by(|&&a, &&b| {
                let (fa, ra) = &all[a];
                let (fb, rb) = &all[b];
                ra.filled_field_count()
                    .cmp(&rb.filled_field_count())
                    .then(ra.citations.cmp(&rb.citations))
                    .then(fb.cmp(fa))
                    .then(b.cmp(&a))
            })
            .expect("groups are non-empty");
        let report = (members.len() > 1).then(|| DuplicateGroup {
            kept_record_id: all[kept].1.id.clone(),
            dropped_record_ids: members
                .iter()
                .filter(|&&m| m != kept)
                .map(|&m| all[m].1.id.clone())
                .collect(),
            match_basis: if members.iter().any(|&m| title_linked[m]) {
                MatchBasis::TitleYear
            } else {
                MatchBasis::Doi
            },
        });
        kept_indices.push((kept, report));
    }
    kept_indices.sort_by_key(|(k, _)| *k);

    let max_citations: BTreeMap<usize, u64> = groups
        .values()
        .map(|m| {
            let root = m[0];
            (root, m.iter().map(|&i| all[i].1.citations).max().unwrap_or(0))
        })
        .collect();

    let mut duplicate_groups = Vec::new();
    let mut slots: Vec<Option<Record>> = all.into_iter().map(|(_, r)| Some(r)).collect();
    let mut records = Vec::with_capacity(kept_indices.len());
    for (kept, report) in kept_indices {
        let mut record = slots[kept].take().expect("each index kept once");
        record.citations = max_citations[&uf.find(kept)];
        records.push(record);
        if let Some(group) = report {
            duplicate_groups.push(group);
        }
    }
    let report = DedupReport {
        input_count: n,
        kept: records.len(),
        duplicate_groups,
    };
    Ok((Corpus::new(records), report))
}
