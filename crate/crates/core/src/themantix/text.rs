use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Shortest token kept.
pub const MIN_TOKEN_CHARS: usize = 3;

/// Lowercasing unigram tokenizer with a stop-word list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Tokenizer {
    /// The bundled English stop-word list.
    pub fn bundled() -> Self {
        Self::with_stopwords(BUNDLED_STOPWORDS.split_whitespace())
    }

    pub fn with_stopwords<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Self { stopwords: words.into_iter().map(|w| w.to_lowercase()).collect() }
    }

    /// Splits on non-alphanumeric characters; drops short tokens, pure numbers
    /// and stop words.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= MIN_TOKEN_CHARS)
            .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
            .filter(|t| !self.stopwords.contains(*t))
            .map(String::from)
            .collect()
    }
}
