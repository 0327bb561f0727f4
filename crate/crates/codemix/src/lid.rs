//! Two-stage code-mixing identification.
//!
//! Stage 1 is a deterministic high-recall pass over tagged tokens: a record
//! qualifies when both languages are present. Stage 2 validates survivors
//! with a majority-vote ensemble of external classifier backends. Evaluation
//! against a gold-labeled set reports accuracy/precision/recall/F1 with
//! code-mixed as the positive class.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::backend::{call_with_retries, Backend, BackendConfig};
use crate::textcore::{LanguageTag, Token};

/// Final LID label; `CodeMixed` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LidLabel {
    CodeMixed,
    Monolingual,
}

/// One ensemble member's vote; `None` records an abstention (backend failed
/// after retries or answered something unparseable).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleVote {
    pub backend: String,
    pub vote: Option<LidLabel>,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LidDecision {
    pub record_id: String,
    pub stage1_pass: bool,
    #[serde(default)]
    pub ensemble_votes: Vec<EnsembleVote>,
    pub final_label: Option<LidLabel>,
    #[serde(default)]
    pub rationale: Option<String>,
}

#[derive(Debug, Error)]
pub enum LidError {
    #[error("ensemble requires an odd number of backends, got {0}")]
    EvenEnsemble(usize),
    #[error("all {0} backends failed; record cannot be classified")]
    EnsembleUnavailable(usize),
    #[error("cannot evaluate an empty prediction set")]
    EmptyEvaluation,
    #[error("gold label missing for record {0}")]
    MissingGold(String),
}

/// Stage-1 gate: true iff the tagged record contains at least one token of
/// each language. Neutral tokens (named entities, numerals) never count.
pub fn stage1_filter(tagged: &[Token]) -> bool {
    let mut has_a = false;
    let mut has_b = false;
    for t in tagged {
        match t.tag {
            LanguageTag::LangA => has_a = true,
            LanguageTag::LangB => has_b = true,
            LanguageTag::Neutral => {}
        }
    }
    has_a && has_b
}

fn parse_vote(response: &Value) -> Option<LidLabel> {
    let label = response.get("label")?.as_str()?;
    match label.to_lowercase().as_str() {
        "code_mixed" | "code-mixed" | "codemixed" => Some(LidLabel::CodeMixed),
        "monolingual" | "mono" => Some(LidLabel::Monolingual),
        _ => None,
    }
}

/// Query every backend for one record and fold the votes into a decision.
///
/// A backend failure after retries counts as an abstention; a strict majority
/// of cast votes decides, and an exact tie falls back to `CodeMixed` (stage 2
/// refines a high-recall set, so the recall-biased tie-break loses less data).
/// Errors only when every backend abstained.
pub fn ensemble_classify(
    record_id: &str,
    text: &str,
    backends: &[(Box<dyn Backend>, BackendConfig)],
) -> Result<LidDecision, LidError> {
    if backends.is_empty() || backends.len().is_multiple_of(2) {
        return Err(LidError::EvenEnsemble(backends.len()));
    }
    let mut votes = Vec::with_capacity(backends.len());
    for (backend, config) in backends {
        let request = serde_json::json!({
            "text": text,
            "prompt_template": config.prompt_template,
        });
        let started = Instant::now();
        let vote = match call_with_retries(backend.as_ref(), &request, config.max_retries) {
            Ok(response) => {
                let parsed = parse_vote(&response);
                if parsed.is_none() {
                    log::warn!(
                        "record {record_id}: backend {} returned malformed response: {response}",
                        backend.name()
                    );
                }
                parsed
            }
            Err(e) => {
                log::warn!("record {record_id}: backend {} failed: {e}", backend.name());
                None
            }
        };
        votes.push(EnsembleVote {
            backend: backend.name().to_string(),
            vote,
            latency_ms: started.elapsed().as_millis() as u64,
        });
    }
    let cast: Vec<LidLabel> = votes.iter().filter_map(|v| v.vote).collect();
    if cast.is_empty() {
        return Err(LidError::EnsembleUnavailable(backends.len()));
    }
    let mixed = cast.iter().filter(|v| **v == LidLabel::CodeMixed).count();
    let mono = cast.len() - mixed;
    let (final_label, rationale) = if mixed > mono {
        (LidLabel::CodeMixed, format!("{mixed}-{mono} majority"))
    } else if mono > mixed {
        (LidLabel::Monolingual, format!("{mono}-{mixed} majority"))
    } else {
        (LidLabel::CodeMixed, format!("{mixed}-{mono} tie-break"))
    };
    Ok(LidDecision {
        record_id: record_id.to_string(),
        stage1_pass: true,
        ensemble_votes: votes,
        final_label: Some(final_label),
        rationale: Some(rationale),
    })
}

/// Classification metrics, each as a percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when there were no predicted positives, so precision was forced to 0.
    pub zero_predicted_positives: bool,
}

/// F1 from precision and recall percentages; 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Metrics from raw confusion counts, code-mixed positive.
pub fn prf_from_confusion(tp: usize, fp: usize, fn_: usize, tn: usize) -> Prf {
    let total = tp + fp + fn_ + tn;
    let accuracy = if total == 0 {
        0.0
    } else {
        100.0 * (tp + tn) as f64 / total as f64
    };
    let zero_predicted_positives = tp + fp == 0;
    let precision = if zero_predicted_positives {
        0.0
    } else {
        100.0 * tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        100.0 * tp as f64 / (tp + fn_) as f64
    };
    Prf {
        accuracy,
        precision,
        recall,
        f1: f1_from_pr(precision, recall),
        zero_predicted_positives,
    }
}

/// Score ensemble decisions against gold labels, aligned by record id.
pub fn evaluate_lid(
    predictions: &[LidDecision],
    gold: &[(String, LidLabel)],
) -> Result<Prf, LidError> {
    if predictions.is_empty() {
        return Err(LidError::EmptyEvaluation);
    }
    let gold_map: HashMap<&str, LidLabel> =
        gold.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for pred in predictions {
        let gold_label = gold_map
            .get(pred.record_id.as_str())
            .ok_or_else(|| LidError::MissingGold(pred.record_id.clone()))?;
        // A record that never reached or passed the ensemble is a predicted
        // negative.
        let predicted = pred.final_label.unwrap_or(LidLabel::Monolingual);
        match (predicted, gold_label) {
            (LidLabel::CodeMixed, LidLabel::CodeMixed) => tp += 1,
            (LidLabel::CodeMixed, LidLabel::Monolingual) => fp += 1,
            (LidLabel::Monolingual, LidLabel::CodeMixed) => fn_ += 1,
            (LidLabel::Monolingual, LidLabel::Monolingual) => tn += 1,
        }
    }
    let prf = prf_from_confusion(tp, fp, fn_, tn);
    if prf.zero_predicted_positives {
        log::warn!("no predicted positives; precision reported as 0");
    }
    Ok(prf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendError, BackendKind, StubBackend};
    use crate::metrics::tokens_from_tags;
    use LanguageTag::{LangA as A, LangB as B, Neutral as N};

    fn stub_config(name: &str) -> BackendConfig {
        BackendConfig {
            name: name.into(),
            transport: BackendKind::Stub {
                behavior: "echo".into(),
            },
            prompt_template: Some("classify: {text}".into()),
            timeout_ms: 1_000,
            max_retries: 0,
            requests_per_sec: None,
            api_key_env: None,
        }
    }

    fn voting_backend(name: &str, label: Option<&str>) -> (Box<dyn Backend>, BackendConfig) {
        let response = label.map(|l| serde_json::json!({ "label": l }));
        let backend: Box<dyn Backend> = match response {
            Some(r) => Box::new(StubBackend::constant(name, r)),
            None => Box::new(StubBackend::new(name, |_| {
                Err(BackendError::Transport {
                    name: "down".into(),
                    detail: "unreachable".into(),
                })
            })),
        };
        (backend, stub_config(name))
    }

    #[test]
    fn stage1_requires_both_languages() {
        assert!(!stage1_filter(&tokens_from_tags(&[A, A, A])));
        assert!(stage1_filter(&tokens_from_tags(&[A, A, B])));
        // Named entities tagged Neutral do not trigger the gate.
        assert!(!stage1_filter(&tokens_from_tags(&[A, N, N])));
    }

    #[test]
    fn majority_two_of_three() {
        let backends = vec![
            voting_backend("x", Some("code_mixed")),
            voting_backend("y", Some("code_mixed")),
            voting_backend("z", Some("monolingual")),
        ];
        let d = ensemble_classify("r1", "text", &backends).unwrap();
        assert_eq!(d.final_label, Some(LidLabel::CodeMixed));
    }

    #[test]
    fn unanimous_monolingual() {
        let backends = vec![
            voting_backend("x", Some("monolingual")),
            voting_backend("y", Some("monolingual")),
            voting_backend("z", Some("monolingual")),
        ];
        let d = ensemble_classify("r1", "text", &backends).unwrap();
        assert_eq!(d.final_label, Some(LidLabel::Monolingual));
    }

    #[test]
    fn abstention_tie_breaks_code_mixed() {
        let backends = vec![
            voting_backend("x", Some("code_mixed")),
            voting_backend("y", None),
            voting_backend("z", Some("monolingual")),
        ];
        let d = ensemble_classify("r1", "text", &backends).unwrap();
        assert_eq!(d.final_label, Some(LidLabel::CodeMixed));
        assert_eq!(d.ensemble_votes.iter().filter(|v| v.vote.is_none()).count(), 1);
    }

    #[test]
    fn all_failed_is_unavailable() {
        let backends = vec![
            voting_backend("x", None),
            voting_backend("y", None),
            voting_backend("z", None),
        ];
        let err = ensemble_classify("r1", "text", &backends).unwrap_err();
        assert!(matches!(err, LidError::EnsembleUnavailable(3)));
    }

    #[test]
    fn even_ensemble_rejected() {
        let backends = vec![
            voting_backend("x", Some("code_mixed")),
            voting_backend("y", Some("code_mixed")),
        ];
        assert!(matches!(
            ensemble_classify("r1", "text", &backends),
            Err(LidError::EvenEnsemble(2))
        ));
    }

    #[test]
    fn decision_invariant_under_backend_order() {
        let mk = |order: [Option<&str>; 3]| {
            let backends = vec![
                voting_backend("x", order[0]),
                voting_backend("y", order[1]),
                voting_backend("z", order[2]),
            ];
            ensemble_classify("r", "t", &backends).unwrap().final_label
        };
        let base = mk([Some("code_mixed"), Some("monolingual"), Some("code_mixed")]);
        assert_eq!(base, mk([Some("monolingual"), Some("code_mixed"), Some("code_mixed")]));
        assert_eq!(base, mk([Some("code_mixed"), Some("code_mixed"), Some("monolingual")]));
    }

    #[test]
    fn f1_printed_values() {
        assert!((f1_from_pr(83.25, 91.62) - 87.23).abs() < 0.01);
        assert!((f1_from_pr(92.59, 83.80) - 87.98).abs() < 0.01);
    }

    #[test]
    fn perfect_classifier() {
        let prf = prf_from_confusion(10, 0, 0, 10);
        assert_eq!(prf.accuracy, 100.0);
        assert_eq!(prf.f1, 100.0);
    }

    #[test]
    fn zero_predicted_positives_flagged() {
        let prf = prf_from_confusion(0, 0, 5, 5);
        assert!(prf.zero_predicted_positives);
        assert_eq!(prf.precision, 0.0);
    }

    #[test]
    fn evaluate_aligns_by_id() {
        let mk = |id: &str, label: LidLabel| LidDecision {
            record_id: id.into(),
            stage1_pass: true,
            ensemble_votes: vec![],
            final_label: Some(label),
            rationale: None,
        };
        let preds = vec![
            mk("a", LidLabel::CodeMixed),
            mk("b", LidLabel::Monolingual),
        ];
        // Gold order differs from prediction order.
        let gold = vec![
            ("b".to_string(), LidLabel::Monolingual),
            ("a".to_string(), LidLabel::CodeMixed),
        ];
        let prf = evaluate_lid(&preds, &gold).unwrap();
        assert_eq!(prf.accuracy, 100.0);
    }

    #[test]
    fn empty_evaluation_errors() {
        assert!(matches!(evaluate_lid(&[], &[]), Err(LidError::EmptyEvaluation)));
    }
}
