//! Seeded generator of plausible-looking corpora for tests, benchmarks and
//! demos. The same `(n, seed)` always yields the same corpus.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::record::Record;

const SURNAMES: [&str; 16] = [
    "Garcia", "Chen", "Okafor", "Novak", "Singh", "Tanaka", "Silva", "Muller", "Kowalski", "Haddad", "Larsen",
    "Rossi", "Kim", "Ivanova", "Dubois", "Nair",
];
const GIVEN: [&str; 12] = [
    "Maria", "Wei", "Chinedu", "Petra", "Arjun", "Yuki", "Lucas", "Anna", "Tomasz", "Leila", "Erik", "Priya",
];
const COUNTRIES: [&str; 8] = ["India", "China", "Nigeria", "Germany", "Brazil", "Japan", "United States", "Poland"];
const JOURNALS: [(&str, &str, &str); 6] = [
    ("Scientometrics", "0138-9130", "Springer"),
    ("Journal of Informetrics", "1751-1577", "Elsevier"),
    ("Quantitative Science Studies", "2641-3337", "MIT Press"),
    ("Research Policy", "0048-7333", "Elsevier"),
    ("PLOS ONE", "1932-6203", "Public Library of Science"),
    ("Information Processing and Management", "0306-4573", "Elsevier"),
];
const DOC_TYPES: [&str; 4] = ["Article", "Article", "Review", "Conference Paper"];
const ACCESS: [&str; 4] = ["Gold", "Green", "Hybrid", ""];
const LANGUAGES: [&str; 3] = ["English", "English", "Spanish"];
const TOPICS: [[&str; 5]; 3] = [
    ["citation", "impact", "ranking", "journals", "indicators"],
    ["collaboration", "network", "coauthorship", "centrality", "community"],
    ["topic", "keywords", "clustering", "semantic", "evolution"],
];
const FUNDERS: [&str; 4] = ["National Science Foundation", "European Research Council", "DST India", ""];

/// `n` records with ids `syn#0..`, years 2010 to 2024 (about one in twelve
/// undated), one to five authors with affiliations, keywords drawn per topic.
pub fn synthetic_corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n).map(|i| synthetic_record(i, &mut rng)).collect();
    Corpus::new(records)
}

fn synthetic_record(i: usize, rng: &mut ChaCha8Rng) -> Record {
    let topic = &TOPICS[rng.random_range(0..TOPICS.len())];
    let team = rng.random_range(1..=5);
    let mut authors: Vec<String> = Vec::new();
    let mut affiliations = Vec::new();
    let mut countries = Vec::new();
    while authors.len() < team {
        let s = rng.random_range(0..SURNAMES.len());
        let name = format!("{}, {}.", SURNAMES[s], &GIVEN[s % GIVEN.len()][..1]);
        if authors.contains(&name) {
            continue;
        }
        // Authors mostly stay in one country.
        let country = if rng.random_bool(0.85) { COUNTRIES[s % COUNTRIES.len()] } else { *COUNTRIES.choose(rng).unwrap() };
        affiliations.push(format!("Institute {}, University of {}, {country}", s % 5, SURNAMES[s]));
        countries.push(String::from(country));
        authors.push(name);
    }
    let (journal, issn, publisher) = JOURNALS[rng.random_range(0..JOURNALS.len())];
    let w = |rng: &mut ChaCha8Rng| topic[rng.random_range(0..topic.len())];
    let title = format!("{} {} and {} in {} studies", w(rng), w(rng), w(rng), w(rng));
    let mut author_keywords: Vec<String> = Vec::new();
    for _ in 0..rng.random_range(1..=4) {
        let k = String::from(w(rng));
        if !author_keywords.contains(&k) {
            author_keywords.push(k);
        }
    }
    let index_keywords = if rng.random_bool(0.5) { alloc::vec![String::from("bibliometrics")] } else { Vec::new() };
    let abstract_text = (0..12).map(|_| w(rng)).collect::<Vec<_>>().join(" ");
    let funder = *FUNDERS.choose(rng).unwrap();
    Record {
        id: format!("syn#{i}"),
        title,
        authors,
        author_ids: Vec::new(),
        affiliations,
        countries,
        year: (!rng.random_ratio(1, 12)).then(|| rng.random_range(2010..=2024)),
        source_title: String::from(journal),
        issn: alloc::vec![issn.replace('-', "")],
        doi: rng.random_bool(0.8).then(|| format!("10.5555/syn.{i}")),
        citations: rng.random_range(0..60u64) * rng.random_range(0..3u64),
        doc_type: String::from(*DOC_TYPES.choose(rng).unwrap()),
        publisher: String::from(publisher),
        open_access: String::from(*ACCESS.choose(rng).unwrap()),
        language: String::from(*LANGUAGES.choose(rng).unwrap()),
        author_keywords,
        index_keywords,
        abstract_text,
        funding: if funder.is_empty() { Vec::new() } else { alloc::vec![String::from(funder)] },
        source_label: String::from("synthetic"),
    }
}
