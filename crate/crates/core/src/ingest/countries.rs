use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::record::UNKNOWN_COUNTRY;
use crate::util::{collapse_whitespace, data_lines};

const BUNDLED: &str = include_str!("../../data/countries.txt");

/// Country-name lookup with aliases, keyed case-insensitively.
#[derive(Debug, Clone)]
pub struct CountryTable {
    by_alias: BTreeMap<String, String>,
}

impl CountryTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    /// One country per line: `Canonical|alias|alias`.
    pub fn parse(text: &str) -> Self {
        let mut by_alias = BTreeMap::new();
        for line in data_lines(text) {
            let mut parts = line.split('|').map(str::trim);
            let Some(canonical) = parts.next() else { continue };
            by_alias.insert(canonical.to_lowercase(), canonical.to_string());
            for alias in parts.filter(|a| !a.is_empty()) {
                by_alias.insert(alias.to_lowercase(), canonical.to_string());
            }
        }
        Self { by_alias }
    }

    pub fn lookup(&self, name: &str) -> Option<&str> {
        let key = collapse_whitespace(&name.to_lowercase());
        let key = key.trim_end_matches('.').trim();
        self.by_alias.get(key).map(String::as_str)
    }

    /// Country of one affiliation string: the last comma-separated token,
    /// falling back to its trailing words (WoS writes `NY 10027 USA`).
    pub fn country_of_affiliation(&self, affiliation: &str) -> String {
        let last = affiliation.rsplit(',').next().unwrap_or("").trim();
        if let Some(c) = self.lookup(last) {
            return c.to_string();
        }
        let words: Vec<&str> = last.split_whitespace().collect();
        for take in (1..words.len().min(4)).rev() {
            let tail = words[words.len() - take..].join(" ");
            if let Some(c) = self.lookup(&tail) {
                return c.to_string();
            }
        }
        UNKNOWN_COUNTRY.to_string()
    }
}
