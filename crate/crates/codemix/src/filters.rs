//! Quality-filter bank for candidate parallel pairs: four heuristic
//! constraints (length ratio, lexical 5-gram repetition, sub-lexical
//! 10-character repetition, code-mixing equilibrium) followed by two
//! model-gated filters (naturalness classifier, quality-estimation
//! threshold).
//!
//! Heuristics run first; a pair only reaches the classifier gate after
//! passing every heuristic, and the QE gate is the final check. The bank
//! short-circuits per pair on the first failing filter but records the
//! failing verdict for audit.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::backend::{call_with_retries, Backend, BackendConfig, BackendError};
use crate::textcore::{LanguageTag, Token};

/// A source/target candidate pair moving through the bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParallelPair {
    pub id: String,
    /// Embedded-language side (e.g. English source).
    pub source_text: String,
    /// Generated code-mixed side.
    pub target_text: String,
    #[serde(default)]
    pub source_tokens: Vec<Token>,
    #[serde(default)]
    pub target_tokens: Vec<Token>,
    #[serde(default)]
    pub verdicts: Vec<FilterVerdict>,
    #[serde(default)]
    pub quality_score: Option<f64>,
    #[serde(default)]
    pub naturalness_score: Option<f64>,
}

impl ParallelPair {
    pub fn new(id: &str, source_text: &str, target_text: &str) -> Self {
        ParallelPair {
            id: id.to_string(),
            source_text: source_text.to_string(),
            target_text: target_text.to_string(),
            source_tokens: Vec::new(),
            target_tokens: Vec::new(),
            verdicts: Vec::new(),
            quality_score: None,
            naturalness_score: None,
        }
    }

    /// A pair is accepted iff every recorded verdict passed.
    pub fn accepted(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// How a statistic is compared against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Direction {
    RejectIfGe,
    RejectIfGt,
    RejectIfLt,
    RejectIfOutsideInterval { lo: f64, hi: f64 },
}

impl Direction {
    pub fn rejects(&self, statistic: f64, threshold: f64) -> bool {
        match *self {
            Direction::RejectIfGe => statistic >= threshold,
            Direction::RejectIfGt => statistic > threshold,
            Direction::RejectIfLt => statistic < threshold,
            Direction::RejectIfOutsideInterval { lo, hi } => statistic < lo || statistic > hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub filter_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub pass: bool,
}

impl FilterVerdict {
    fn decide(filter_name: &str, statistic: f64, threshold: f64, direction: Direction) -> Self {
        FilterVerdict {
            filter_name: filter_name.to_string(),
            statistic,
            threshold,
            direction,
            pass: !direction.rejects(statistic, threshold),
        }
    }

    /// Re-evaluate the stated comparison; must always equal `pass`.
    pub fn self_consistent(&self) -> bool {
        self.pass == !self.direction.rejects(self.statistic, self.threshold)
    }
}

/// Thresholds and toggles for the bank.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub length_ratio_min: f64,
    pub length_ratio_max: f64,
    pub lexical_ngram: usize,
    pub lexical_threshold: f64,
    pub char_ngram: usize,
    pub char_threshold: f64,
    pub equilibrium_max: f64,
    pub classifier_threshold: f64,
    pub qe_threshold: f64,
    /// Filter names to skip entirely.
    pub disabled: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            length_ratio_min: 0.5,
            length_ratio_max: 1.5,
            lexical_ngram: 5,
            lexical_threshold: 0.3,
            char_ngram: 10,
            char_threshold: 0.2,
            equilibrium_max: 0.30,
            classifier_threshold: 0.5,
            qe_threshold: 0.9,
            disabled: Vec::new(),
        }
    }
}

pub const LENGTH_RATIO: &str = "length_ratio";
pub const LEXICAL_REPETITION: &str = "lexical_repetition";
pub const CHAR_REPETITION: &str = "char_repetition";
pub const CODEMIX_EQUILIBRIUM: &str = "codemix_equilibrium";
pub const CLASSIFIER_GATE: &str = "classifier_gate";
pub const QE_GATE: &str = "qe_gate";

/// Target-to-source token ratio, permissible interval inclusive.
/// An empty source is an immediate reject with an infinite statistic.
pub fn length_ratio_filter(pair: &ParallelPair, config: &FilterConfig) -> FilterVerdict {
    let direction = Direction::RejectIfOutsideInterval {
        lo: config.length_ratio_min,
        hi: config.length_ratio_max,
    };
    let statistic = if pair.source_tokens.is_empty() {
        f64::INFINITY
    } else {
        pair.target_tokens.len() as f64 / pair.source_tokens.len() as f64
    };
    FilterVerdict::decide(LENGTH_RATIO, statistic, config.length_ratio_max, direction)
}

/// Weighted repetition coefficient over the target's token n-grams:
/// total count of repeated gram types over total gram count. 0 below the
/// n-gram length.
pub fn lexical_repetition(pair: &ParallelPair, config: &FilterConfig) -> FilterVerdict {
    let statistic = lexical_repetition_coefficient(
        &pair
            .target_tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>(),
        config.lexical_ngram,
    );
    FilterVerdict::decide(
        LEXICAL_REPETITION,
        statistic,
        config.lexical_threshold,
        Direction::RejectIfGe,
    )
}

pub fn lexical_repetition_coefficient(tokens: &[&str], n: usize) -> f64 {
    if n == 0 || tokens.len() < n {
        return 0.0;
    }
    let mut counts: HashMap<&[&str], usize> = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    let total: usize = counts.values().sum();
    let repeated: usize = counts.values().filter(|&&c| c > 1).sum();
    repeated as f64 / total as f64
}

/// Sub-lexical repetition over 10-character sliding windows of the
/// whitespace-normalized target: the mass of the top
/// `k = min(floor(sqrt(N)), N - U)` most frequent window types over all
/// windows. 0 when the text is shorter than a window or `k` collapses to 0.
pub fn char_repetition(pair: &ParallelPair, config: &FilterConfig) -> FilterVerdict {
    let statistic = char_repetition_coefficient(&pair.target_text, config.char_ngram);
    FilterVerdict::decide(
        CHAR_REPETITION,
        statistic,
        config.char_threshold,
        Direction::RejectIfGe,
    )
}

/// Collapse whitespace runs to a single space so padding cannot game the
/// character filter.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_ws = false;
    for c in text.trim().chars() {
        if c.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws && !out.is_empty() {
                out.push(' ');
            }
            in_ws = false;
            out.push(c);
        }
    }
    out
}

pub fn char_repetition_coefficient(text: &str, n: usize) -> f64 {
    let normalized = normalize_whitespace(text);
    let chars: Vec<char> = normalized.chars().collect();
    if n == 0 || chars.len() < n {
        return 0.0;
    }
    let mut counts: HashMap<&[char], usize> = HashMap::new();
    for window in chars.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    let total = chars.len() - n + 1;
    let unique = counts.len();
    let k = ((total as f64).sqrt().floor() as usize).min(total - unique);
    if k == 0 {
        return 0.0;
    }
    let mut freqs: Vec<usize> = counts.into_values().collect();
    freqs.sort_unstable_by(|a, b| b.cmp(a));
    let top: usize = freqs.iter().take(k).sum();
    top as f64 / total as f64
}

/// Embedded-language token share of the target must not exceed the
/// equilibrium bound (boundary inclusive). Zero tokens reject.
pub fn codemix_equilibrium(pair: &ParallelPair, config: &FilterConfig) -> FilterVerdict {
    let total = pair.target_tokens.len();
    let statistic = if total == 0 {
        f64::INFINITY
    } else {
        let lang_b = pair
            .target_tokens
            .iter()
            .filter(|t| t.tag == LanguageTag::LangB)
            .count();
        lang_b as f64 / total as f64
    };
    FilterVerdict::decide(
        CODEMIX_EQUILIBRIUM,
        statistic,
        config.equilibrium_max,
        Direction::RejectIfGt,
    )
}

/// Reference-free scorer for the model-gated filters.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, pair: &ParallelPair) -> Result<f64, BackendError>;
}

/// Scorer backed by a generic JSON backend: request `{id, source, target}`,
/// response `{score}` in [0, 1].
pub struct BackendScorer {
    backend: Box<dyn Backend>,
    config: BackendConfig,
}

impl BackendScorer {
    pub fn new(backend: Box<dyn Backend>, config: BackendConfig) -> Self {
        BackendScorer { backend, config }
    }
}

impl Scorer for BackendScorer {
    fn name(&self) -> &str {
        self.backend.name()
    }

    fn score(&self, pair: &ParallelPair) -> Result<f64, BackendError> {
        let request = serde_json::json!({
            "id": pair.id,
            "source": pair.source_text,
            "target": pair.target_text,
        });
        let response = call_with_retries(self.backend.as_ref(), &request, self.config.max_retries)?;
        response
            .get("score")
            .and_then(serde_json::Value::as_f64)
            .filter(|s| (0.0..=1.0).contains(s))
            .ok_or_else(|| BackendError::MalformedResponse {
                name: self.backend.name().to_string(),
                detail: format!("expected a 'score' field in [0,1], got {response}"),
            })
    }
}

/// Fixed per-id scores for tests and dry runs; ids missing from the table
/// fall back to `default`.
pub struct TableScorer {
    pub name: String,
    pub scores: HashMap<String, f64>,
    pub default: f64,
}

impl Scorer for TableScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, pair: &ParallelPair) -> Result<f64, BackendError> {
        Ok(*self.scores.get(&pair.id).unwrap_or(&self.default))
    }
}

/// Synthetic-probability gate: pairs the classifier is confident are
/// synthetic (score at or above the threshold) are discarded.
pub fn classifier_gate(
    pair: &ParallelPair,
    scorer: &dyn Scorer,
    config: &FilterConfig,
) -> Result<FilterVerdict, BackendError> {
    let statistic = scorer.score(pair)?;
    Ok(FilterVerdict::decide(
        CLASSIFIER_GATE,
        statistic,
        config.classifier_threshold,
        Direction::RejectIfGe,
    ))
}

/// Final quality-estimation gate: only pairs scoring at or above the
/// threshold survive.
pub fn qe_gate(
    pair: &ParallelPair,
    scorer: &dyn Scorer,
    config: &FilterConfig,
) -> Result<FilterVerdict, BackendError> {
    let statistic = scorer.score(pair)?;
    Ok(FilterVerdict::decide(
        QE_GATE,
        statistic,
        config.qe_threshold,
        Direction::RejectIfLt,
    ))
}

/// Aggregate outcome of one bank run.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct FilterReport {
    pub input: usize,
    /// Rejection counts keyed by the filter that fired.
    pub rejections: BTreeMap<String, usize>,
    pub survived_heuristics: usize,
    pub survived_classifier: usize,
    pub survived_qe: usize,
    pub deferred: usize,
    pub accepted: usize,
    /// Rejected / input; `None` for empty input.
    pub elimination_rate: Option<f64>,
}

#[derive(Debug, Default)]
pub struct BankOutcome {
    pub accepted: Vec<ParallelPair>,
    pub rejected: Vec<ParallelPair>,
    /// Scorer was unavailable: parked for retry, never silently passed.
    pub deferred: Vec<ParallelPair>,
    pub report: FilterReport,
}

/// Run the full bank over `pairs` in the fixed order: heuristics, then the
/// classifier gate, then the QE gate. Gates without a scorer are skipped.
pub fn run_filter_bank(
    pairs: Vec<ParallelPair>,
    config: &FilterConfig,
    classifier: Option<&dyn Scorer>,
    qe: Option<&dyn Scorer>,
) -> BankOutcome {
    let mut outcome = BankOutcome::default();
    outcome.report.input = pairs.len();
    let enabled = |name: &str| !config.disabled.iter().any(|d| d == name);

    'pair: for mut pair in pairs {
        type Heuristic = fn(&ParallelPair, &FilterConfig) -> FilterVerdict;
        let heuristics: [(&str, Heuristic); 4] = [
            (LENGTH_RATIO, length_ratio_filter),
            (LEXICAL_REPETITION, lexical_repetition),
            (CHAR_REPETITION, char_repetition),
            (CODEMIX_EQUILIBRIUM, codemix_equilibrium),
        ];
        for (name, filter) in heuristics {
            if !enabled(name) {
                continue;
            }
            let verdict = filter(&pair, config);
            let pass = verdict.pass;
            pair.verdicts.push(verdict);
            if !pass {
                *outcome.report.rejections.entry(name.to_string()).or_insert(0) += 1;
                outcome.rejected.push(pair);
                continue 'pair;
            }
        }
        outcome.report.survived_heuristics += 1;

        if let Some(scorer) = classifier.filter(|_| enabled(CLASSIFIER_GATE)) {
            match classifier_gate(&pair, scorer, config) {
                Ok(verdict) => {
                    pair.naturalness_score = Some(verdict.statistic);
                    let pass = verdict.pass;
                    pair.verdicts.push(verdict);
                    if !pass {
                        *outcome
                            .report
                            .rejections
                            .entry(CLASSIFIER_GATE.to_string())
                            .or_insert(0) += 1;
                        outcome.rejected.push(pair);
                        continue;
                    }
                }
                Err(e) => {
                    log::warn!("pair {}: classifier scorer unavailable: {e}", pair.id);
                    outcome.report.deferred += 1;
                    outcome.deferred.push(pair);
                    continue;
                }
            }
        }
        outcome.report.survived_classifier += 1;

        if let Some(scorer) = qe.filter(|_| enabled(QE_GATE)) {
            match qe_gate(&pair, scorer, config) {
                Ok(verdict) => {
                    pair.quality_score = Some(verdict.statistic);
                    let pass = verdict.pass;
                    pair.verdicts.push(verdict);
                    if !pass {
                        *outcome
                            .report
                            .rejections
                            .entry(QE_GATE.to_string())
                            .or_insert(0) += 1;
                        outcome.rejected.push(pair);
                        continue;
                    }
                }
                Err(e) => {
                    log::warn!("pair {}: qe scorer unavailable: {e}", pair.id);
                    outcome.report.deferred += 1;
                    outcome.deferred.push(pair);
                    continue;
                }
            }
        }
        outcome.report.survived_qe += 1;
        outcome.accepted.push(pair);
    }

    outcome.report.accepted = outcome.accepted.len();
    if outcome.report.input > 0 {
        outcome.report.elimination_rate =
            Some(outcome.rejected.len() as f64 / outcome.report.input as f64);
    }
    outcome
}
