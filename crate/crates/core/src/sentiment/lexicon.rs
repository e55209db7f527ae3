//! Valence lexicon and the rule tables used by the scorer.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

/// Mean intensity increase contributed by a booster word.
pub const BOOSTER_INCREMENT: f64 = 0.293;
/// Mean intensity decrease contributed by a dampener word.
pub const DAMPENER_DECREMENT: f64 = -0.293;

const SHIPPED_LEXICON: &str = include_str!("../../data/vader_lexicon.txt");

const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOSTERS: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const DAMPENERS: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("lexicon contains no entries")]
    Empty,
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Token valences plus the booster, negation and idiom tables.
///
/// Immutable once built; share it behind an `Arc` for concurrent scoring.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negations: HashSet<String>,
    special_cases: HashMap<String, f64>,
}

impl SentimentLexicon {
    /// The lexicon bundled with the crate, with the standard rule tables.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_LEXICON).expect("bundled lexicon is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses tab-separated `token<TAB>mean valence` lines. Extra columns are
    /// ignored, blank lines skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut valences = HashMap::new();
        for (idx, raw) in text.split('\n').enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default();
            let value = cols.next().ok_or_else(|| LexiconError::Malformed {
                line: idx + 1,
                reason: "missing valence column".into(),
            })?;
            let valence: f64 = value.trim().parse().map_err(|_| LexiconError::Malformed {
                line: idx + 1,
                reason: format!("valence {value:?} is not a number"),
            })?;
            if !valence.is_finite() {
                return Err(LexiconError::Malformed {
                    line: idx + 1,
                    reason: "valence is not finite".into(),
                });
            }
            valences.insert(token.to_string(), valence);
        }
        if valences.is_empty() {
            return Err(LexiconError::Empty);
        }
        Ok(Self::with_valences(valences))
    }

    /// Builds a lexicon from explicit valences and the standard rule tables.
    pub fn with_valences(valences: HashMap<String, f64>) -> Self {
        let mut boosters: HashMap<String, f64> = BOOSTERS
            .iter()
            .map(|w| (w.to_string(), BOOSTER_INCREMENT))
            .collect();
        boosters.extend(DAMPENERS.iter().map(|w| (w.to_string(), DAMPENER_DECREMENT)));
        Self {
            valences,
            boosters,
            negations: NEGATIONS.iter().map(|w| w.to_string()).collect(),
            special_cases: SPECIAL_CASES
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn valence(&self, lowercase_token: &str) -> Option<f64> {
        self.valences.get(lowercase_token).copied()
    }

    pub fn contains(&self, lowercase_token: &str) -> bool {
        self.valences.contains_key(lowercase_token)
    }

    pub fn booster(&self, lowercase_token: &str) -> Option<f64> {
        self.boosters.get(lowercase_token).copied()
    }

    pub fn is_negation(&self, lowercase_token: &str) -> bool {
        self.negations.contains(lowercase_token)
    }

    pub fn special_case(&self, phrase: &str) -> Option<f64> {
        self.special_cases.get(phrase).copied()
    }
}
