//! Statistical evaluation harness: paired permutation significance tests,
//! metric-vs-judge agreement with a tie margin, win/loss/tie aggregation,
//! and classification metrics (re-exported from [`crate::lid`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::lid::{f1_from_pr, prf_from_confusion, Prf};

/// Aligned per-segment scores for two systems (paired design).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemScores {
    pub system_a: String,
    pub system_b: String,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub score_a: f64,
    pub score_b: f64,
}

impl SystemScores {
    pub fn validate(&self) -> Result<(), EvalError> {
        let mut ids: Vec<&str> = self.segments.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        let before = ids.len();
        ids.dedup();
        if ids.len() != before {
            return Err(EvalError::DuplicateSegmentIds);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JudgeVerdict {
    A,
    B,
    Tie,
    BothBad,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgePreference {
    pub id: String,
    pub verdict: JudgeVerdict,
    #[serde(default)]
    pub rationale: Option<String>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 segments for a permutation test")]
    TooFewSegments,
    #[error("n_resamples must be >= 1000")]
    TooFewResamples,
    #[error("segment ids are not unique")]
    DuplicateSegmentIds,
    #[error("empty preference set")]
    EmptyPreferences,
    #[error("margin must lie in [0, 1)")]
    BadMargin,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationResult {
    /// Mean per-segment difference, system A minus system B.
    pub statistic: f64,
    pub p_value: f64,
    /// True when every sign pattern was enumerated instead of sampled.
    pub exact: bool,
    /// All per-segment differences were zero; p is 1 by convention.
    pub degenerate: bool,
    pub n_segments: usize,
    pub band: SignificanceBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceBand {
    /// p < .001
    Strong,
    /// p < .05
    Significant,
    /// p >= .05
    NotSignificant,
}

pub fn significance_band(p: f64) -> SignificanceBand {
    if p < 0.001 {
        SignificanceBand::Strong
    } else if p < 0.05 {
        SignificanceBand::Significant
    } else {
        SignificanceBand::NotSignificant
    }
}

/// Two-sided paired permutation test on the per-segment score differences.
///
/// When `2^n <= n_resamples` every sign pattern is enumerated and the p-value
/// is the exact tail ratio; otherwise `n_resamples` random sign flips are
/// drawn from a ChaCha8 stream seeded with `seed` and the add-one-corrected
/// Monte Carlo estimate is returned.
pub fn paired_permutation_test(
    scores: &SystemScores,
    n_resamples: usize,
    seed: u64,
) -> Result<PermutationResult, EvalError> {
    scores.validate()?;
    let n = scores.segments.len();
    if n < 2 {
        return Err(EvalError::TooFewSegments);
    }
    if n_resamples < 1000 {
        return Err(EvalError::TooFewResamples);
    }
    let diffs: Vec<f64> = scores
        .segments
        .iter()
        .map(|s| s.score_a - s.score_b)
        .collect();
    let observed_sum: f64 = diffs.iter().sum();
    let statistic = observed_sum / n as f64;

    if diffs.iter().all(|d| *d == 0.0) {
        return Ok(PermutationResult {
            statistic: 0.0,
            p_value: 1.0,
            exact: true,
            degenerate: true,
            n_segments: n,
            band: SignificanceBand::NotSignificant,
        });
    }

    // Tolerance so resampled sums equal to the observed one (up to float
    // noise) land in the tail.
    let eps = 1e-9 * (observed_sum.abs() + 1.0);
    let target = observed_sum.abs() - eps;

    let (p_value, exact) = if n < 64 && (1u128 << n) <= n_resamples as u128 {
        let total = 1u128 << n;
        let mut hits = 0u128;
        for mask in 0..total {
            let mut sum = 0.0;
            for (i, d) in diffs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum -= d;
                } else {
                    sum += d;
                }
            }
            if sum.abs() >= target {
                hits += 1;
            }
        }
        (hits as f64 / total as f64, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        for _ in 0..n_resamples {
            let mut sum = 0.0;
            for d in &diffs {
                if rng.gen::<bool>() {
                    sum -= d;
                } else {
                    sum += d;
                }
            }
            if sum.abs() >= target {
                hits += 1;
            }
        }
        ((hits + 1) as f64 / (n_resamples + 1) as f64, false)
    };

    Ok(PermutationResult {
        statistic,
        p_value,
        exact,
        degenerate: false,
        n_segments: n,
        band: significance_band(p_value),
    })
}

/// How the tie margin is applied when the metric picks a winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginMode {
    /// A wins when `score_a > score_b * (1 + margin)`.
    #[default]
    Relative,
    /// A wins when `score_a > score_b + margin`.
    Absolute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementResult {
    pub total_segments: usize,
    pub metric_decided: usize,
    pub judge_decided: usize,
    /// Segments where both the metric and the judge picked a side.
    pub n_decided: usize,
    pub matches: usize,
    /// `matches / n_decided`; `None` when nothing was jointly decided.
    pub agreement: Option<f64>,
}

fn metric_pick(score_a: f64, score_b: f64, margin: f64, mode: MarginMode) -> Option<JudgeVerdict> {
    let (a_wins, b_wins) = match mode {
        MarginMode::Relative => (
            score_a > score_b * (1.0 + margin),
            score_b > score_a * (1.0 + margin),
        ),
        MarginMode::Absolute => (score_a > score_b + margin, score_b > score_a + margin),
    };
    match (a_wins, b_wins) {
        (true, false) => Some(JudgeVerdict::A),
        (false, true) => Some(JudgeVerdict::B),
        _ => None,
    }
}

/// Agreement between metric-declared wins and judge preferences.
///
/// A segment counts toward agreement only when the metric picks a side (the
/// margin rule) and the judge picked A or B; metric ties and judge
/// Tie/BothBad verdicts are excluded, and both exclusion counts are reported.
pub fn metric_judge_agreement(
    scores: &SystemScores,
    prefs: &[JudgePreference],
    margin: f64,
    mode: MarginMode,
) -> Result<AgreementResult, EvalError> {
    if !(0.0..1.0).contains(&margin) {
        return Err(EvalError::BadMargin);
    }
    scores.validate()?;
    let pref_map: std::collections::HashMap<&str, JudgeVerdict> =
        prefs.iter().map(|p| (p.id.as_str(), p.verdict)).collect();
    let mut result = AgreementResult {
        total_segments: scores.segments.len(),
        metric_decided: 0,
        judge_decided: 0,
        n_decided: 0,
        matches: 0,
        agreement: None,
    };
    for segment in &scores.segments {
        let metric = metric_pick(segment.score_a, segment.score_b, margin, mode);
        if metric.is_some() {
            result.metric_decided += 1;
        }
        let judge = pref_map.get(segment.id.as_str()).copied();
        let judge_side = match judge {
            Some(JudgeVerdict::A) => Some(JudgeVerdict::A),
            Some(JudgeVerdict::B) => Some(JudgeVerdict::B),
            _ => None,
        };
        if judge_side.is_some() {
            result.judge_decided += 1;
        }
        if let (Some(m), Some(j)) = (metric, judge_side) {
            result.n_decided += 1;
            if m == j {
                result.matches += 1;
            }
        }
    }
    if result.n_decided > 0 {
        result.agreement = Some(result.matches as f64 / result.n_decided as f64);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinTieSummary {
    pub win_pct: f64,
    pub loss_pct: f64,
    pub tie_pct: f64,
    pub bothbad_pct: f64,
}

/// Percentage of judgments in each verdict class; percentages over all prefs
/// sum to 100.
pub fn win_tie_aggregate(prefs: &[JudgePreference]) -> Result<WinTieSummary, EvalError> {
    if prefs.is_empty() {
        return Err(EvalError::EmptyPreferences);
    }
    let n = prefs.len() as f64;
    let count = |v: JudgeVerdict| prefs.iter().filter(|p| p.verdict == v).count() as f64;
    Ok(WinTieSummary {
        win_pct: 100.0 * count(JudgeVerdict::A) / n,
        loss_pct: 100.0 * count(JudgeVerdict::B) / n,
        tie_pct: 100.0 * count(JudgeVerdict::Tie) / n,
        bothbad_pct: 100.0 * count(JudgeVerdict::BothBad) / n,
    })
}
