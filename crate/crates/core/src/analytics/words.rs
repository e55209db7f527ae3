//! Ranked word frequencies for word-cloud style summaries.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::sentiment::{score_text, SentimentLexicon};

const SHIPPED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

pub const MIN_TOKEN_CHARS: usize = 3;
/// Compound above which a comment counts as positive (and below the negation
/// of which it counts as negative).
pub const POLARITY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for Stopwords {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().map(|w| w.to_lowercase()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextSource {
    All,
    PositiveTexts,
    NegativeTexts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub token: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFrequencyReport {
    pub source: TextSource,
    pub texts: usize,
    /// Descending by count, ties in lexicographic order.
    pub words: Vec<WordCount>,
}

impl WordFrequencyReport {
    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.words.iter().take(k).map(|w| w.token.as_str())
    }
}

/// Lowercased runs of letters; everything else is a boundary.
pub fn tokenize_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn word_frequencies<S: AsRef<str>>(texts: &[S], stopwords: &Stopwords) -> WordFrequencyReport {
    word_frequencies_from(texts, stopwords, TextSource::All)
}

pub fn word_frequencies_from<S: AsRef<str>>(
    texts: &[S],
    stopwords: &Stopwords,
    source: TextSource,
) -> WordFrequencyReport {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        for token in tokenize_words(text.as_ref()) {
            if token.chars().count() < MIN_TOKEN_CHARS || stopwords.contains(&token) {
                continue;
            }
            *counts.entry(token).or_default() += 1;
        }
    }
    let mut words: Vec<WordCount> = counts
        .into_iter()
        .map(|(token, count)| WordCount { token, count })
        .collect();
    // BTreeMap order is lexicographic already; a stable sort keeps it for ties.
    words.sort_by_key(|w| std::cmp::Reverse(w.count));
    WordFrequencyReport {
        source,
        texts: texts.len(),
        words,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolarityPartition {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

/// Splits comments by compound score; comments within the neutral band are
/// dropped.
pub fn partition_by_polarity<S: AsRef<str>>(texts: &[S], lexicon: &SentimentLexicon) -> PolarityPartition {
    let mut out = PolarityPartition::default();
    for text in texts {
        let compound = score_text(text.as_ref(), lexicon).compound;
        if compound > POLARITY_THRESHOLD {
            out.positive.push(text.as_ref().to_string());
        } else if compound < -POLARITY_THRESHOLD {
            out.negative.push(text.as_ref().to_string());
        }
    }
    out
}
