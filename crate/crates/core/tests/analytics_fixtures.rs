//! Reporting artifacts reproduced on synthetic fixtures, plus brute-force
//! oracles for the descriptive statistics.

use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pulsechat_core::analytics::{
    aggregate_feedback, descriptive_stats, descriptive_stats_with, partition_by_polarity, sentiment_histogram,
    word_frequencies, Comprehension, FeedbackSurvey, LikertScale, Preference, ReuseLikelihood, Satisfaction, SdKind, Stopwords,
};
use pulsechat_core::sentiment::{SentimentLexicon, SentimentScores};

const FEEDBACK_21: &str = include_str!("fixtures/feedback_21.json");
const SCORES_17: &str = include_str!("fixtures/table_scores_17.json");
const NEGATIVE_COMMENTS: &str = include_str!("fixtures/negative_comments.txt");

fn surveys() -> Vec<FeedbackSurvey> {
    serde_json::from_str(FEEDBACK_21).unwrap()
}

fn scores17() -> Vec<SentimentScores> {
    serde_json::from_str(SCORES_17).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn feedback_fixture_counts() {
    let s = surveys();
    assert_eq!(s.len(), 21);
    let count = |f: &dyn Fn(&FeedbackSurvey) -> bool| s.iter().filter(|x| f(x)).count();
    assert_eq!(count(&|x| x.satisfaction == Satisfaction::ExtremelySatisfied), 6);
    assert_eq!(count(&|x| x.satisfaction == Satisfaction::SomewhatSatisfied), 11);
    assert_eq!(count(&|x| x.satisfaction == Satisfaction::Neutral), 2);
    assert_eq!(count(&|x| x.reuse_likelihood.rank() >= ReuseLikelihood::ModeratelyLikely.rank()), 13);
    assert_eq!(count(&|x| x.comprehension.rank() >= Comprehension::VeryWell.rank()), 16);
    assert_eq!(count(&|x| x.preference == Preference::Chatbot), 11);
}

#[test]
fn feedback_percentages_match_direct_division() {
    let d = aggregate_feedback(&surveys()).unwrap();
    let pct = |k: usize| (1000.0 * k as f64 / 21.0).round() / 10.0;
    let sat = &d.satisfaction;
    assert_eq!(sat.level("extremely_satisfied").unwrap().percent, pct(6));
    assert!(close(sat.level("extremely_satisfied").unwrap().percent, 28.6, 0.1));
    assert!(close(sat.level("somewhat_satisfied").unwrap().at_least_percent, 81.0, 0.1));
    assert!(close(sat.level("somewhat_dissatisfied").unwrap().at_most_percent, 9.5, 0.1));
    assert!(close(d.reuse_likelihood.level("moderately_likely").unwrap().at_least_percent, 61.9, 0.1));
    assert!(close(d.comprehension.level("very_well").unwrap().at_least_percent, 76.2, 0.1));
    let shares: Vec<f64> = d.preference.iter().map(|p| p.percent).collect();
    assert_eq!(shares, vec![52.4, 23.8, 23.8]);
}

#[test]
fn table_layout_on_seventeen_reports() {
    let scores = scores17();
    assert_eq!(scores.len(), 17);
    let stats = descriptive_stats(&scores).unwrap();
    let table = stats.render_table();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 7);
    let header: Vec<&str> = lines[0].split_whitespace().collect();
    assert_eq!(header, ["Compound", "Positive", "Neutral", "Negative"]);
    for (line, name) in lines[1..5].iter().zip(["Mean", "SD", "Min", "Max"]) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cells[0], name);
        assert_eq!(cells.len(), 5);
        assert!(cells[1..].iter().all(|c| c.split('.').nth(1).map(str::len) == Some(2)));
    }
    assert!(lines[1].split_whitespace().nth(1) == Some("0.93"));
    assert_eq!(lines[5], "Number of reports: 17");
    assert_eq!(lines[6], "Average Compound Score: 0.93");
    assert!(stats.to_csv().starts_with("Channel,Mean,SD,Min,Max\n"));
}

/// Two-pass textbook formulas, independent of the streaming implementation.
fn naive(values: &[f64], kind: SdKind) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match kind {
        SdKind::Sample => n - 1.0,
        SdKind::Population => n,
    };
    let sd = if denom <= 0.0 { 0.0 } else { (ss / denom).sqrt() };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (mean, sd, min, max)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<SentimentScores> {
    (0..n)
        .map(|_| {
            let p = unit(rng);
            let g = unit(rng) * (1.0 - p);
            SentimentScores {
                compound: unit(rng) * 2.0 - 1.0,
                positive: p,
                neutral: 1.0 - p - g,
                negative: g,
            }
        })
        .collect()
}

#[test]
fn stats_match_brute_force_on_1000_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let n = 1 + (rng.next_u64() % 100) as usize;
        let scores = random_scores(&mut rng, n);
        for kind in [SdKind::Sample, SdKind::Population] {
            let stats = descriptive_stats_with(&scores, kind).unwrap();
            let channels: [fn(&SentimentScores) -> f64; 4] =
                [|s| s.compound, |s| s.positive, |s| s.neutral, |s| s.negative];
            for ((_, got), pick) in stats.channels().iter().zip(channels) {
                let values: Vec<f64> = scores.iter().map(pick).collect();
                let (mean, sd, min, max) = naive(&values, kind);
                assert!(close(got.mean, mean, 1e-9), "case {case} mean");
                assert!(close(got.sd, sd, 1e-9), "case {case} sd");
                assert_eq!((got.min, got.max), (min, max), "case {case}");
                assert!(got.min <= got.mean && got.mean <= got.max && got.sd >= 0.0);
            }
        }
    }
}

#[test]
fn negative_cloud_top_words() {
    let comments: Vec<&str> = NEGATIVE_COMMENTS.lines().filter(|l| !l.is_empty()).collect();
    let lex = SentimentLexicon::shipped();
    let split = partition_by_polarity(&comments, &lex);
    assert!(split.negative.len() >= 5, "fixture should read as negative");
    let report = word_frequencies(&split.negative, &Stopwords::shipped());
    let top: Vec<&str> = report.top(3).collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(sorted, vec!["response", "time", "topic"], "top: {top:?}");
}

#[test]
fn positive_channel_clusters_low() {
    let values: Vec<f64> = scores17().iter().map(|s| s.positive).collect();
    let h = sentiment_histogram(&values, 0.1, (0.0, 1.0)).unwrap();
    assert_eq!(h.modal_bin(), Some(2));
    let (lo, hi) = h.bin_range(2);
    assert!(close(lo, 0.2, 1e-12) && close(hi, 0.3, 1e-12));
    assert_eq!(h.total(), 17);
}

fn survey_strategy() -> impl Strategy<Value = FeedbackSurvey> {
    (0usize..5, 0usize..5, 0usize..5, 0usize..3).prop_map(|(s, r, c, p)| {
        FeedbackSurvey {
            satisfaction: Satisfaction::LEVELS[s],
            reuse_likelihood: ReuseLikelihood::LEVELS[r],
            comprehension: Comprehension::LEVELS[c],
            preference: Preference::ALL[p],
            comment: None,
        }
    })
}

proptest! {
    #[test]
    fn percentages_sum_to_hundred_and_counts_to_n(surveys in prop::collection::vec(survey_strategy(), 1..60)) {
        let d = aggregate_feedback(&surveys).unwrap();
        for q in [&d.satisfaction, &d.reuse_likelihood, &d.comprehension] {
            let counts: usize = q.levels.iter().map(|l| l.count).sum();
            prop_assert_eq!(counts, surveys.len());
            let pct: f64 = q.levels.iter().map(|l| l.percent).sum();
            prop_assert!((pct - 100.0).abs() <= 0.2 + 1e-9, "sum {}", pct);
        }
        let pref: f64 = d.preference.iter().map(|p| p.percent).sum();
        prop_assert!((pref - 100.0).abs() <= 0.2 + 1e-9);
    }

    #[test]
    fn aggregation_is_permutation_invariant(
        surveys in prop::collection::vec(survey_strategy(), 1..40),
        seed in any::<u64>(),
    ) {
        let mut shuffled = surveys.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        prop_assert_eq!(aggregate_feedback(&surveys).unwrap(), aggregate_feedback(&shuffled).unwrap());
    }
}
