//! Post-survey feedback questionnaire and its distribution report.

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

pub const MAX_COMMENT_CHARS: usize = 5000;

/// A five-level ordered response scale. Levels are listed lowest first.
pub trait LikertScale: Copy + Eq + Sized + 'static {
    const LEVELS: [Self; 5];
    const QUESTION: &'static str;

    fn label(self) -> &'static str;

    fn rank(self) -> usize {
        Self::LEVELS
            .iter()
            .position(|l| *l == self)
            .expect("level is listed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Satisfaction {
    ExtremelyDissatisfied,
    SomewhatDissatisfied,
    Neutral,
    SomewhatSatisfied,
    ExtremelySatisfied,
}

impl LikertScale for Satisfaction {
    const LEVELS: [Self; 5] = [
        Self::ExtremelyDissatisfied,
        Self::SomewhatDissatisfied,
        Self::Neutral,
        Self::SomewhatSatisfied,
        Self::ExtremelySatisfied,
    ];
    const QUESTION: &'static str = "satisfaction";

    fn label(self) -> &'static str {
        match self {
            Self::ExtremelyDissatisfied => "extremely_dissatisfied",
            Self::SomewhatDissatisfied => "somewhat_dissatisfied",
            Self::Neutral => "neutral",
            Self::SomewhatSatisfied => "somewhat_satisfied",
            Self::ExtremelySatisfied => "extremely_satisfied",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReuseLikelihood {
    NotAtAllLikely,
    SlightlyLikely,
    ModeratelyLikely,
    VeryLikely,
    ExtremelyLikely,
}

impl LikertScale for ReuseLikelihood {
    const LEVELS: [Self; 5] = [
        Self::NotAtAllLikely,
        Self::SlightlyLikely,
        Self::ModeratelyLikely,
        Self::VeryLikely,
        Self::ExtremelyLikely,
    ];
    const QUESTION: &'static str = "reuse_likelihood";

    fn label(self) -> &'static str {
        match self {
            Self::NotAtAllLikely => "not_at_all_likely",
            Self::SlightlyLikely => "slightly_likely",
            Self::ModeratelyLikely => "moderately_likely",
            Self::VeryLikely => "very_likely",
            Self::ExtremelyLikely => "extremely_likely",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comprehension {
    NotAtAllWell,
    SlightlyWell,
    ModeratelyWell,
    VeryWell,
    ExtremelyWell,
}

impl LikertScale for Comprehension {
    const LEVELS: [Self; 5] = [
        Self::NotAtAllWell,
        Self::SlightlyWell,
        Self::ModeratelyWell,
        Self::VeryWell,
        Self::ExtremelyWell,
    ];
    const QUESTION: &'static str = "comprehension";

    fn label(self) -> &'static str {
        match self {
            Self::NotAtAllWell => "not_at_all_well",
            Self::SlightlyWell => "slightly_well",
            Self::ModeratelyWell => "moderately_well",
            Self::VeryWell => "very_well",
            Self::ExtremelyWell => "extremely_well",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Chatbot,
    Traditional,
    Neither,
}

impl Preference {
    pub const ALL: [Preference; 3] = [Self::Chatbot, Self::Traditional, Self::Neither];

    pub fn label(self) -> &'static str {
        match self {
            Self::Chatbot => "chatbot",
            Self::Traditional => "traditional",
            Self::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackSurvey {
    pub satisfaction: Satisfaction,
    pub reuse_likelihood: ReuseLikelihood,
    pub comprehension: Comprehension,
    pub preference: Preference,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl FeedbackSurvey {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        match &self.comment {
            Some(c) if c.chars().count() > MAX_COMMENT_CHARS => Err(AnalyticsError::CommentTooLong {
                max: MAX_COMMENT_CHARS,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelShare {
    pub level: String,
    pub count: usize,
    /// `100 * count / n`, one decimal.
    pub percent: f64,
    /// Share answering this level or higher, one decimal.
    pub at_least_percent: f64,
    /// Share answering this level or lower, one decimal.
    pub at_most_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionDistribution {
    pub question: String,
    pub n: usize,
    pub levels: Vec<LevelShare>,
}

impl QuestionDistribution {
    pub fn level(&self, label: &str) -> Option<&LevelShare> {
        self.levels.iter().find(|l| l.level == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceShare {
    pub preference: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackDistribution {
    pub n: usize,
    pub satisfaction: QuestionDistribution,
    pub reuse_likelihood: QuestionDistribution,
    pub comprehension: QuestionDistribution,
    pub preference: Vec<PreferenceShare>,
}

pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn percent(count: usize, n: usize) -> f64 {
    round1(100.0 * count as f64 / n as f64)
}

fn distribution<L: LikertScale>(answers: impl Iterator<Item = L>, n: usize) -> QuestionDistribution {
    let mut counts = [0usize; 5];
    for a in answers {
        counts[a.rank()] += 1;
    }
    let levels = L::LEVELS
        .iter()
        .enumerate()
        .map(|(i, level)| LevelShare {
            level: level.label().to_string(),
            count: counts[i],
            percent: percent(counts[i], n),
            at_least_percent: percent(counts[i..].iter().sum(), n),
            at_most_percent: percent(counts[..=i].iter().sum(), n),
        })
        .collect();
    QuestionDistribution {
        question: L::QUESTION.to_string(),
        n,
        levels,
    }
}

/// Counts and percentages per level for every question, plus the
/// preference breakdown.
pub fn aggregate_feedback(surveys: &[FeedbackSurvey]) -> Result<FeedbackDistribution, AnalyticsError> {
    let n = surveys.len();
    if n == 0 {
        return Err(AnalyticsError::EmptyInput);
    }
    let preference = Preference::ALL
        .iter()
        .map(|p| {
            let count = surveys.iter().filter(|s| s.preference == *p).count();
            PreferenceShare {
                preference: p.label().to_string(),
                count,
                percent: percent(count, n),
            }
        })
        .collect();
    Ok(FeedbackDistribution {
        n,
        satisfaction: distribution(surveys.iter().map(|s| s.satisfaction), n),
        reuse_likelihood: distribution(surveys.iter().map(|s| s.reuse_likelihood), n),
        comprehension: distribution(surveys.iter().map(|s| s.comprehension), n),
        preference,
    })
}
