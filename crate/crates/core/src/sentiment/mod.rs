//! Rule-based sentiment scoring compatible with the VADER reference
//! implementation.
//!
//! Scores are produced unrounded. Each whitespace-separated token contributes
//! one valence slot; lexicon hits are adjusted by boosters, negations,
//! capitalisation emphasis, idioms and the contrastive "but" rule before the
//! sum is normalised into the compound score.

mod lexicon;

pub use lexicon::{LexiconError, SentimentLexicon, BOOSTER_INCREMENT, DAMPENER_DECREMENT};

use serde::{Deserialize, Serialize};

/// Emphasis added to a sentiment word written in capitals.
pub const CAPS_INCREMENT: f64 = 0.733;
/// Scalar applied to a negated valence.
pub const NEGATION_SCALAR: f64 = -0.74;
/// Normalisation constant for the compound score.
pub const NORMALIZATION_ALPHA: f64 = 15.0;

const EXCLAMATION_INCREMENT: f64 = 0.292;
const MAX_EXCLAMATIONS: usize = 4;
const QUESTION_INCREMENT: f64 = 0.18;
const QUESTION_FLOOD_AMPLIFIER: f64 = 0.96;

const ASCII_PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SentimentScores {
    pub compound: f64,
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

/// Scores one text. Empty or whitespace-only text yields all zeros.
pub fn score_text(text: &str, lexicon: &SentimentLexicon) -> SentimentScores {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return SentimentScores::default();
    }
    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let cap_differential = cap_differential(&tokens);

    let mut sentiments = Vec::with_capacity(tokens.len());
    for i in 0..tokens.len() {
        let lower = lowered[i].as_str();
        if lexicon.booster(lower).is_some()
            || (lower == "kind" && lowered.get(i + 1).is_some_and(|next| next == "of"))
        {
            sentiments.push(0.0);
            continue;
        }
        sentiments.push(token_valence(&tokens, &lowered, i, cap_differential, lexicon));
    }

    apply_but_rule(&lowered, &mut sentiments);
    summarize(&sentiments, text)
}

/// Elementwise [`score_text`], order preserved.
pub fn score_corpus<S: AsRef<str>>(texts: &[S], lexicon: &SentimentLexicon) -> Vec<SentimentScores> {
    texts
        .iter()
        .map(|t| score_text(t.as_ref(), lexicon))
        .collect()
}

/// `score / sqrt(score^2 + alpha)`, clamped to [-1, 1].
pub fn normalize(score: f64) -> f64 {
    (score / (score * score + NORMALIZATION_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

fn is_split_whitespace(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c' | '\x1c'..='\x1f')
}

fn tokenize(text: &str) -> Vec<&str> {
    text.split(is_split_whitespace)
        .filter(|t| !t.is_empty())
        .map(|token| {
            let stripped = token.trim_matches(|c| ASCII_PUNCTUATION.contains(c));
            // Short leftovers were most likely emoticons such as ":)".
            if stripped.chars().count() <= 2 {
                token
            } else {
                stripped
            }
        })
        .collect()
}

fn is_all_caps(word: &str) -> bool {
    word.chars().any(char::is_uppercase) && !word.chars().any(char::is_lowercase)
}

/// True when some, but not all, tokens are written in capitals.
fn cap_differential(tokens: &[&str]) -> bool {
    let caps = tokens.iter().filter(|t| is_all_caps(t)).count();
    caps > 0 && caps < tokens.len()
}

fn is_negated(lower: &str, lexicon: &SentimentLexicon) -> bool {
    lexicon.is_negation(lower) || lower.contains("n't")
}

fn booster_scalar(
    word: &str,
    lower: &str,
    valence: f64,
    cap_differential: bool,
    lexicon: &SentimentLexicon,
) -> f64 {
    let Some(mut scalar) = lexicon.booster(lower) else {
        return 0.0;
    };
    if valence < 0.0 {
        scalar = -scalar;
    }
    if cap_differential && is_all_caps(word) {
        if valence > 0.0 {
            scalar += CAPS_INCREMENT;
        } else {
            scalar -= CAPS_INCREMENT;
        }
    }
    scalar
}

fn token_valence(
    tokens: &[&str],
    lowered: &[String],
    i: usize,
    cap_differential: bool,
    lexicon: &SentimentLexicon,
) -> f64 {
    let lower = lowered[i].as_str();
    let Some(base) = lexicon.valence(lower) else {
        return 0.0;
    };
    let mut valence = base;
    let last = tokens.len() - 1;

    // "no" directly before another lexicon word acts as a negator, not a word.
    if lower == "no" && i != last && lexicon.contains(&lowered[i + 1]) {
        valence = 0.0;
    }
    if (i > 0 && lowered[i - 1] == "no")
        || (i > 1 && lowered[i - 2] == "no")
        || (i > 2 && lowered[i - 3] == "no" && matches!(lowered[i - 1].as_str(), "or" | "nor"))
    {
        valence = base * NEGATION_SCALAR;
    }

    if cap_differential && is_all_caps(tokens[i]) {
        if valence > 0.0 {
            valence += CAPS_INCREMENT;
        } else {
            valence -= CAPS_INCREMENT;
        }
    }

    for distance in 0..3 {
        if i <= distance {
            continue;
        }
        let prev = i - (distance + 1);
        if lexicon.contains(&lowered[prev]) {
            continue;
        }
        let mut scalar = booster_scalar(tokens[prev], &lowered[prev], valence, cap_differential, lexicon);
        if distance == 1 && scalar != 0.0 {
            scalar *= 0.95;
        }
        if distance == 2 && scalar != 0.0 {
            scalar *= 0.9;
        }
        valence += scalar;
        valence = negation_check(valence, lowered, distance, i, lexicon);
        if distance == 2 {
            valence = special_idioms_check(valence, lowered, i, lexicon);
        }
    }

    least_check(valence, lowered, i, lexicon)
}

fn negation_check(
    valence: f64,
    lowered: &[String],
    distance: usize,
    i: usize,
    lexicon: &SentimentLexicon,
) -> f64 {
    let w = |back: usize| lowered[i - back].as_str();
    match distance {
        0 => {
            if is_negated(w(1), lexicon) {
                return valence * NEGATION_SCALAR;
            }
        }
        1 => {
            if w(2) == "never" && matches!(w(1), "so" | "this") {
                return valence * 1.25;
            } else if w(2) == "without" && w(1) == "doubt" {
                return valence;
            } else if is_negated(w(2), lexicon) {
                return valence * NEGATION_SCALAR;
            }
        }
        _ => {
            // The reference groups this condition as
            // (never AND (so|this two back)) OR (so|this one back).
            if (w(3) == "never" && matches!(w(2), "so" | "this")) || matches!(w(1), "so" | "this") {
                return valence * 1.25;
            } else if w(3) == "without" && (w(2) == "doubt" || w(1) == "doubt") {
                return valence;
            } else if is_negated(w(3), lexicon) {
                return valence * NEGATION_SCALAR;
            }
        }
    }
    valence
}

fn special_idioms_check(mut valence: f64, lowered: &[String], i: usize, lexicon: &SentimentLexicon) -> f64 {
    let w = |idx: usize| lowered[idx].as_str();
    let one_zero = format!("{} {}", w(i - 1), w(i));
    let two_one_zero = format!("{} {} {}", w(i - 2), w(i - 1), w(i));
    let two_one = format!("{} {}", w(i - 2), w(i - 1));
    let three_two_one = format!("{} {} {}", w(i - 3), w(i - 2), w(i - 1));
    let three_two = format!("{} {}", w(i - 3), w(i - 2));

    for seq in [&one_zero, &two_one_zero, &two_one, &three_two_one, &three_two] {
        if let Some(v) = lexicon.special_case(seq) {
            valence = v;
            break;
        }
    }
    if lowered.len() - 1 > i {
        if let Some(v) = lexicon.special_case(&format!("{} {}", w(i), w(i + 1))) {
            valence = v;
        }
    }
    if lowered.len() - 1 > i + 1 {
        if let Some(v) = lexicon.special_case(&format!("{} {} {}", w(i), w(i + 1), w(i + 2))) {
            valence = v;
        }
    }
    for n_gram in [&three_two_one, &three_two, &two_one] {
        if let Some(b) = lexicon.booster(n_gram) {
            valence += b;
        }
    }
    valence
}

fn least_check(valence: f64, lowered: &[String], i: usize, lexicon: &SentimentLexicon) -> f64 {
    if i == 0 {
        return valence;
    }
    let prev = lowered[i - 1].as_str();
    if prev != "least" || lexicon.contains(prev) {
        return valence;
    }
    if i > 1 {
        if lowered[i - 2] != "at" && lowered[i - 2] != "very" {
            return valence * NEGATION_SCALAR;
        }
        valence
    } else {
        valence * NEGATION_SCALAR
    }
}

/// Halves valences before the first "but" and boosts those after it by half.
///
/// Mirrors the reference exactly, including its lookup of each slot by value:
/// the slot rewritten is the first one holding an equal value.
fn apply_but_rule(lowered: &[String], sentiments: &mut [f64]) {
    let Some(but_idx) = lowered.iter().position(|w| w == "but") else {
        return;
    };
    for k in 0..sentiments.len() {
        let value = sentiments[k];
        let slot = sentiments
            .iter()
            .position(|s| *s == value)
            .expect("value taken from the same slice");
        if slot < but_idx {
            sentiments[slot] = value * 0.5;
        } else if slot > but_idx {
            sentiments[slot] = value * 1.5;
        }
    }
}

fn punctuation_amplifier(text: &str) -> f64 {
    let exclamations = text.matches('!').count().min(MAX_EXCLAMATIONS);
    let questions = text.matches('?').count();
    let question_amp = match questions {
        0 | 1 => 0.0,
        2 | 3 => questions as f64 * QUESTION_INCREMENT,
        _ => QUESTION_FLOOD_AMPLIFIER,
    };
    exclamations as f64 * EXCLAMATION_INCREMENT + question_amp
}

fn summarize(sentiments: &[f64], text: &str) -> SentimentScores {
    let amplifier = punctuation_amplifier(text);
    let mut total: f64 = sentiments.iter().sum();
    if total > 0.0 {
        total += amplifier;
    } else if total < 0.0 {
        total -= amplifier;
    }
    let compound = normalize(total);

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neutral_count = 0usize;
    for &s in sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neutral_count += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += amplifier;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= amplifier;
    }

    let denom = pos_sum + neg_sum.abs() + neutral_count as f64;
    SentimentScores {
        compound,
        positive: (pos_sum / denom).abs(),
        neutral: (neutral_count as f64 / denom).abs(),
        negative: (neg_sum / denom).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn lex() -> &'static SentimentLexicon {
        static LEX: OnceLock<SentimentLexicon> = OnceLock::new();
        LEX.get_or_init(SentimentLexicon::shipped)
    }

    #[test]
    fn empty_text_is_all_zero() {
        assert_eq!(score_text("", lex()), SentimentScores::default());
        assert_eq!(score_text(" \t\n", lex()), SentimentScores::default());
    }

    #[test]
    fn no_hits_is_fully_neutral() {
        let s = score_text("the campus map", lex());
        assert_eq!(s.compound, 0.0);
        assert_eq!(s.neutral, 1.0);
        assert_eq!(s.positive + s.negative, 0.0);
    }

    #[test]
    fn tokenizer_keeps_short_emoticons() {
        assert_eq!(tokenize("Great job :) ok!!"), vec!["Great", "job", ":)", "ok!!"]);
        assert_eq!(tokenize("'hello', (world)"), vec!["hello", "world"]);
    }

    #[test]
    fn cap_differential_needs_mixed_case() {
        assert!(cap_differential(&["GOOD", "day"]));
        assert!(!cap_differential(&["GOOD", "DAY"]));
        assert!(!cap_differential(&["good", "day"]));
    }

    #[test]
    fn negation_flips_sign() {
        let plain = score_text("it was helpful", lex()).compound;
        let negated = score_text("it was not helpful", lex()).compound;
        assert!(plain > 0.0 && negated < 0.0);
    }

    #[test]
    fn but_rule_rewrites_first_equal_slot() {
        let lowered: Vec<String> = ["a", "but", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut s = vec![0.0, 0.0, 2.0, 3.0];
        apply_but_rule(&lowered, &mut s);
        // slot 2 becomes 3.0, so the trailing 3 resolves to slot 2 again.
        assert_eq!(s, vec![0.0, 0.0, 4.5, 3.0]);
    }

    #[test]
    fn question_marks_amplify_only_in_pairs() {
        assert_eq!(punctuation_amplifier("what?"), 0.0);
        assert!((punctuation_amplifier("what??") - 0.36).abs() < 1e-12);
        assert_eq!(punctuation_amplifier("what?????"), QUESTION_FLOOD_AMPLIFIER);
        assert!((punctuation_amplifier("!!!!!!") - 4.0 * 0.292).abs() < 1e-12);
    }

    #[test]
    fn corpus_preserves_order() {
        let texts = ["good", "bad"];
        let scores = score_corpus(&texts, lex());
        assert_eq!(scores[0], score_text("good", lex()));
        assert_eq!(scores[1], score_text("bad", lex()));
        assert!(score_corpus::<&str>(&[], lex()).is_empty());
    }

    #[test]
    fn unknown_emoji_is_neutral() {
        let s = score_text("🦄", lex());
        assert_eq!(s.neutral, 1.0);
        assert_eq!(s.compound, 0.0);
    }

    const WORDS: &[&str] = &[
        "good", "bad", "helpful", "the", "campus", "very", "not", "but", "slow", "friendly",
        "kind", "of", "never", "so", "least", "no", "love", "hate", "okay", "great", "awful",
    ];
    const LONG_WORDS: &[&str] = &["good", "bad", "helpful", "campus", "slow", "friendly", "great"];
    const FILLER: &[&str] = &["the", "campus", "was", "today", "for", "me", "advising", "really"];
    const SENTIMENT_WORDS: &[&str] = &["good", "bad", "helpful", "slow", "love", "hate", "awful"];

    fn sentence() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(WORDS), 1..12).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn channels_sum_to_one(text in sentence()) {
            let s = score_text(&text, lex());
            prop_assert!((s.positive + s.neutral + s.negative - 1.0).abs() < 1e-6);
            prop_assert!((-1.0..=1.0).contains(&s.compound));
        }

        #[test]
        fn exclamations_never_lower_positive_compound(
            head in prop::collection::vec(prop::sample::select(WORDS), 0..10),
            tail in prop::sample::select(LONG_WORDS),
        ) {
            let mut text = head.join(" ");
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(tail);
            let base = score_text(&text, lex()).compound;
            prop_assume!(base > 0.0);
            let mut prev = base;
            let mut amplified = text.clone();
            for _ in 0..3 {
                amplified.push('!');
                let next = score_text(&amplified, lex()).compound;
                prop_assert!(next >= prev);
                prev = next;
            }
        }

        #[test]
        fn capitalising_the_sentiment_word_does_not_weaken(
            before in prop::collection::vec(prop::sample::select(FILLER), 0..5),
            word in prop::sample::select(SENTIMENT_WORDS),
            after in prop::collection::vec(prop::sample::select(FILLER), 0..5),
        ) {
            let join = |w: &str| {
                let mut all: Vec<&str> = before.clone();
                all.push(w);
                all.extend(after.iter().copied());
                all.join(" ")
            };
            let base = score_text(&join(word), lex()).compound;
            let shouted = score_text(&join(&word.to_uppercase()), lex()).compound;
            if base > 0.0 {
                prop_assert!(shouted >= base);
            } else if base < 0.0 {
                prop_assert!(shouted <= base);
            }
        }
    }
}
