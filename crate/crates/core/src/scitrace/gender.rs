use alloc::collections::BTreeMap;
use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::util::data_lines;

const BUNDLED: &str = include_str!("../../data/gender_names.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderLabel {
    Female,
    Male,
    Unknown,
}

impl GenderLabel {
    pub const ALL: [GenderLabel; 3] = [GenderLabel::Female, GenderLabel::Male, GenderLabel::Unknown];

    pub fn name(self) -> &'static str {
        match self {
            GenderLabel::Female => "female",
            GenderLabel::Male => "male",
            GenderLabel::Unknown => "unknown",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl core::str::FromStr for GenderLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(GenderLabel::Female),
            "male" | "m" => Ok(GenderLabel::Male),
            "unknown" | "" => Ok(GenderLabel::Unknown),
            other => Err(alloc::format!("unknown gender label '{other}'")),
        }
    }
}

/// A predicted label. `unknown` always carries confidence 0; any other label
/// carries confidence in `[0.5, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenderPrediction {
    pub label: GenderLabel,
    pub confidence: f64,
}

impl GenderPrediction {
    pub const UNKNOWN: GenderPrediction = GenderPrediction {
        label: GenderLabel::Unknown,
        confidence: 0.0,
    };

    /// Normalizes to the invariant: low-confidence or non-finite predictions
    /// become unknown.
    pub fn new(label: GenderLabel, confidence: f64) -> Self {
        if label == GenderLabel::Unknown || !confidence.is_finite() || confidence < 0.5 {
            Self::UNKNOWN
        } else {
            Self { label, confidence: confidence.min(1.0) }
        }
    }
}

/// Deterministic name-to-gender predictor.
pub trait GenderProvider {
    fn predict(&self, given_name: &str, country: Option<&str>) -> GenderPrediction;
}

impl<P: GenderProvider + ?Sized> GenderProvider for &P {
    fn predict(&self, given_name: &str, country: Option<&str>) -> GenderPrediction {
        (**self).predict(given_name, country)
    }
}

/// Offline lookup table (`name,country,label,confidence`; empty country means
/// any country).
#[derive(Debug, Clone, Default)]
pub struct TableGenderProvider {
    entries: BTreeMap<(String, String), GenderPrediction>,
}

impl TableGenderProvider {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled gender table is valid")
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, line) in data_lines(text).enumerate() {
            if i == 0 && line.starts_with("name,") {
                continue;
            }
            let cells: alloc::vec::Vec<&str> = line.split(',').map(str::trim).collect();
            let [name, country, label, confidence] = cells[..] else {
                return Err(alloc::format!("expected 4 cells in gender table line '{line}'"));
            };
            let label: GenderLabel = label.parse()?;
            let confidence: f64 = confidence
                .parse()
                .map_err(|_| alloc::format!("bad confidence in line '{line}'"))?;
            entries.insert(
                (name.to_lowercase(), country.to_lowercase()),
                GenderPrediction::new(label, confidence),
            );
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl GenderProvider for TableGenderProvider {
    fn predict(&self, given_name: &str, country: Option<&str>) -> GenderPrediction {
        let name = given_name.to_lowercase();
        if let Some(c) = country {
            if let Some(p) = self.entries.get(&(name.clone(), c.to_lowercase())) {
                return *p;
            }
        }
        self.entries
            .get(&(name, String::new()))
            .copied()
            .unwrap_or(GenderPrediction::UNKNOWN)
    }
}

/// Given name of an author string: the token after the comma for
/// `Surname, Given`, otherwise the first token; punctuation stripped.
pub fn given_name(author: &str) -> String {
    let part = match author.split_once(',') {
        Some((_, given)) => given,
        None => author,
    };
    part.split_whitespace()
        .next()
        .unwrap_or("")
        .chars()
        .filter(|c| c.is_alphabetic() || *c == '-' || *c == '\'')
        .collect::<String>()
        .to_lowercase()
}

pub(crate) fn slot(label: GenderLabel) -> usize {
    label.index()
}

pub(crate) fn label_names() -> [&'static str; 3] {
    GenderLabel::ALL.map(GenderLabel::name)
}

impl core::fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}
