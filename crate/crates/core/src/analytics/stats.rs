//! Descriptive statistics over sentiment channels, in the layout of a
//! four-channel summary table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::sentiment::SentimentScores;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdKind {
    /// Divides by `n - 1`; a single observation has sd 0.
    #[default]
    Sample,
    /// Divides by `n`.
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub sd_kind: SdKind,
    pub compound: ChannelStats,
    pub positive: ChannelStats,
    pub neutral: ChannelStats,
    pub negative: ChannelStats,
}

/// A table row label and the statistic it shows.
type StatRow = (&'static str, fn(&ChannelStats) -> f64);

impl DescriptiveStats {
    pub fn channels(&self) -> [(&'static str, &ChannelStats); 4] {
        [
            ("Compound", &self.compound),
            ("Positive", &self.positive),
            ("Neutral", &self.neutral),
            ("Negative", &self.negative),
        ]
    }

    /// Plain-text table: one row per statistic, one column per channel, values
    /// to two decimals, followed by the report count and average compound.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8}{:>10}{:>10}{:>10}{:>10}",
            "", "Compound", "Positive", "Neutral", "Negative"
        );
        let rows: [StatRow; 4] = [
            ("Mean", |c| c.mean),
            ("SD", |c| c.sd),
            ("Min", |c| c.min),
            ("Max", |c| c.max),
        ];
        for (name, get) in rows {
            let _ = write!(out, "{name:<8}");
            for (_, c) in self.channels() {
                let _ = write!(out, "{:>10}", format!("{:.2}", get(c)));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "Number of reports: {}", self.n);
        let _ = writeln!(out, "Average Compound Score: {:.2}", self.compound.mean);
        out
    }

    /// CSV with header `Channel,Mean,SD,Min,Max`, full precision.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["Channel", "Mean", "SD", "Min", "Max"])
            .expect("in-memory write");
        for (name, c) in self.channels() {
            writer
                .write_record([
                    name.to_string(),
                    c.mean.to_string(),
                    c.sd.to_string(),
                    c.min.to_string(),
                    c.max.to_string(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
    }
}

fn channel(values: impl Iterator<Item = f64>, kind: SdKind) -> ChannelStats {
    // Welford's update keeps the variance stable for long runs.
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for x in values {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
        min = min.min(x);
        max = max.max(x);
    }
    let denom = match kind {
        SdKind::Sample => n.saturating_sub(1),
        SdKind::Population => n,
    };
    let sd = if denom == 0 { 0.0 } else { (m2.max(0.0) / denom as f64).sqrt() };
    ChannelStats {
        mean: mean.clamp(min, max),
        sd,
        min,
        max,
    }
}

pub fn descriptive_stats(scores: &[SentimentScores]) -> Result<DescriptiveStats, AnalyticsError> {
    descriptive_stats_with(scores, SdKind::default())
}

pub fn descriptive_stats_with(
    scores: &[SentimentScores],
    sd_kind: SdKind,
) -> Result<DescriptiveStats, AnalyticsError> {
    if scores.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    Ok(DescriptiveStats {
        n: scores.len(),
        sd_kind,
        compound: channel(scores.iter().map(|s| s.compound), sd_kind),
        positive: channel(scores.iter().map(|s| s.positive), sd_kind),
        neutral: channel(scores.iter().map(|s| s.neutral), sd_kind),
        negative: channel(scores.iter().map(|s| s.negative), sd_kind),
    })
}
