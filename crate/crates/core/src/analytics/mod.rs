//! Reporting over feedback questionnaires and scored written comments.

mod feedback;
mod histogram;
mod stats;
mod words;

pub use feedback::{
    aggregate_feedback, round1, Comprehension, FeedbackDistribution, FeedbackSurvey, LevelShare, LikertScale,
    Preference, PreferenceShare, QuestionDistribution, ReuseLikelihood, Satisfaction, MAX_COMMENT_CHARS,
};
pub use histogram::{sentiment_histogram, Histogram};
pub use stats::{descriptive_stats, descriptive_stats_with, ChannelStats, DescriptiveStats, SdKind};
pub use words::{
    partition_by_polarity, tokenize_words, word_frequencies, word_frequencies_from, PolarityPartition, Stopwords,
    TextSource, WordCount, WordFrequencyReport, MIN_TOKEN_CHARS, POLARITY_THRESHOLD,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sentiment::{score_corpus, SentimentLexicon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("no input records to analyze")]
    EmptyInput,
    #[error("histogram requires a positive bin width and lo < hi")]
    BadRange,
    #[error("comment exceeds {max} characters")]
    CommentTooLong { max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub sd_kind: SdKind,
    pub bin_width: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            sd_kind: SdKind::Sample,
            bin_width: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityWordFrequencies {
    pub positive: WordFrequencyReport,
    pub negative: WordFrequencyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelHistograms {
    pub compound: Histogram,
    pub positive: Histogram,
    pub neutral: Histogram,
    pub negative: Histogram,
}

/// The full analytics document. Sections whose input is empty are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub distributions: Option<FeedbackDistribution>,
    pub stats: Option<DescriptiveStats>,
    pub word_frequencies: PolarityWordFrequencies,
    pub histograms: Option<ChannelHistograms>,
}

/// Builds every report section. `comments` are the written reports to score;
/// fails with `EmptyInput` only when there are neither surveys nor comments.
pub fn build_report<S: AsRef<str>>(
    surveys: &[FeedbackSurvey],
    comments: &[S],
    lexicon: &SentimentLexicon,
    stopwords: &Stopwords,
    config: ReportConfig,
) -> Result<AnalyticsReport, AnalyticsError> {
    if surveys.is_empty() && comments.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let distributions = if surveys.is_empty() {
        None
    } else {
        Some(aggregate_feedback(surveys)?)
    };
    let scores = score_corpus(comments, lexicon);
    let (stats, histograms) = if scores.is_empty() {
        (None, None)
    } else {
        let w = config.bin_width;
        let channel = |f: fn(&crate::sentiment::SentimentScores) -> f64, range| {
            sentiment_histogram(&scores.iter().map(f).collect::<Vec<_>>(), w, range)
        };
        (
            Some(descriptive_stats_with(&scores, config.sd_kind)?),
            Some(ChannelHistograms {
                compound: channel(|s| s.compound, (-1.0, 1.0))?,
                positive: channel(|s| s.positive, (0.0, 1.0))?,
                neutral: channel(|s| s.neutral, (0.0, 1.0))?,
                negative: channel(|s| s.negative, (0.0, 1.0))?,
            }),
        )
    };
    let split = partition_by_polarity(comments, lexicon);
    Ok(AnalyticsReport {
        distributions,
        stats,
        word_frequencies: PolarityWordFrequencies {
            positive: word_frequencies_from(&split.positive, stopwords, TextSource::PositiveTexts),
            negative: word_frequencies_from(&split.negative, stopwords, TextSource::NegativeTexts),
        },
        histograms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_everything_rejected() {
        let r = build_report::<&str>(
            &[],
            &[],
            &SentimentLexicon::shipped(),
            &Stopwords::shipped(),
            ReportConfig::default(),
        );
        assert_eq!(r, Err(AnalyticsError::EmptyInput));
    }

    #[test]
    fn comments_only_report() {
        let r = build_report(
            &[],
            &["Great experience, very friendly", "The response time was slow and awful"],
            &SentimentLexicon::shipped(),
            &Stopwords::shipped(),
            ReportConfig::default(),
        )
        .unwrap();
        assert!(r.distributions.is_none());
        assert_eq!(r.stats.as_ref().unwrap().n, 2);
        assert_eq!(r.histograms.as_ref().unwrap().compound.counts.len(), 20);
        assert!(r.word_frequencies.negative.top(5).any(|w| w == "slow"));
        let v = serde_json::to_value(&r).unwrap();
        for key in ["distributions", "stats", "word_frequencies", "histograms"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
