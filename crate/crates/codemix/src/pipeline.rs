//! Three-stage augmentation orchestration: seed translation, iterative
//! generation + filtering with a retraining hook, and final QA.
//!
//! Stage 2 is checkpointed: the manifest plus per-iteration survivor files
//! let a killed run resume and produce a corpus byte-identical to an
//! uninterrupted run (given deterministic backends). Retraining is a hook
//! ("submit dataset, receive model tag") so a real training service and a
//! no-op stub are interchangeable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{call_with_retries, Backend, BackendConfig, BackendError};
use crate::corpus::{read_jsonl, write_jsonl, CorpusError, Post};
use crate::filters::{run_filter_bank, FilterConfig, FilterReport, ParallelPair, Scorer};
use crate::textcore::{analyze, tokenize, LexiconSet};

/// Translation + retraining contract for the augmentation engine.
pub trait Translator: Send + Sync {
    fn name(&self) -> &str;
    fn translate(&self, text: &str) -> Result<String, BackendError>;
    /// Submit the current training set; returns the new model tag.
    fn retrain(&self, dataset: &[(String, String)]) -> Result<String, BackendError>;
}

/// Deterministic stub translator for tests and dry runs: translation is a
/// marked copy of the input, the model tag is derived from the dataset size.
pub struct StubTranslator;

impl Translator for StubTranslator {
    fn name(&self) -> &str {
        "stub-translator"
    }

    fn translate(&self, text: &str) -> Result<String, BackendError> {
        Ok(format!("[stub] {text}"))
    }

    fn retrain(&self, dataset: &[(String, String)]) -> Result<String, BackendError> {
        Ok(format!("stub-model-{}", dataset.len()))
    }
}

/// Translator backed by a JSON backend. Requests carry an `op` field so one
/// endpoint can serve both calls.
pub struct BackendTranslator {
    backend: Box<dyn Backend>,
    config: BackendConfig,
}

impl BackendTranslator {
    pub fn new(backend: Box<dyn Backend>, config: BackendConfig) -> Self {
        BackendTranslator { backend, config }
    }
}

impl Translator for BackendTranslator {
    fn name(&self) -> &str {
        self.backend.name()
    }

    fn translate(&self, text: &str) -> Result<String, BackendError> {
        let request = serde_json::json!({
            "op": "translate",
            "text": text,
            "prompt_template": self.config.prompt_template,
        });
        let response = call_with_retries(self.backend.as_ref(), &request, self.config.max_retries)?;
        response
            .get("translation")
            .and_then(serde_json::Value::as_str)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .ok_or_else(|| BackendError::MalformedResponse {
                name: self.backend.name().to_string(),
                detail: format!("expected a non-empty 'translation' field, got {response}"),
            })
    }

    fn retrain(&self, dataset: &[(String, String)]) -> Result<String, BackendError> {
        let request = serde_json::json!({
            "op": "retrain",
            "dataset": dataset
                .iter()
                .map(|(src, tgt)| serde_json::json!({"source": src, "target": tgt}))
                .collect::<Vec<_>>(),
        });
        let response = call_with_retries(self.backend.as_ref(), &request, self.config.max_retries)?;
        response
            .get("model_tag")
            .and_then(serde_json::Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::MalformedResponse {
                name: self.backend.name().to_string(),
                detail: format!("expected a 'model_tag' field, got {response}"),
            })
    }
}

/// Monolingual embedded-language sentence feeding stage 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSentence {
    pub id: String,
    pub text: String,
}

/// Per-iteration accounting. The survivor chain is monotone by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub generated: usize,
    pub survived_heuristics: usize,
    pub survived_classifier: usize,
    pub survived_qe: usize,
    pub model_tag: String,
}

impl IterationRecord {
    pub fn monotone(&self) -> bool {
        self.generated >= self.survived_heuristics
            && self.survived_heuristics >= self.survived_classifier
            && self.survived_classifier >= self.survived_qe
    }
}

/// Audit line emitted whenever a record is skipped, rejected, or deferred.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditEntry {
    pub record_id: String,
    pub event: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub iteration_count: usize,
    /// Sentences translated per iteration; `None` means the full remaining source.
    pub batch_size: Option<usize>,
    pub filter: FilterConfig,
    pub checkpoint_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            iteration_count: 4,
            batch_size: None,
            filter: FilterConfig::default(),
            checkpoint_dir: PathBuf::from("checkpoints"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("iteration_count must be >= 1")]
    ZeroIterations,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("checkpoint io at {path}: {source}")]
    CheckpointIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("retrain hook failed, pipeline paused at checkpoint: {0}")]
    RetrainFailed(#[source] BackendError),
    #[error("corrupt checkpoint manifest: {0}")]
    CorruptManifest(String),
}

/// Stage 1: pair each LID-confirmed natural code-mixed post with a backend
/// translation (natural target, synthetic source). Backend failures are
/// skipped with an audit entry, never given empty targets.
pub fn stage1_seed(
    natural_cm: &[Post],
    translator: &dyn Translator,
) -> (Vec<ParallelPair>, Vec<AuditEntry>) {
    let mut pairs = Vec::new();
    let mut audit = Vec::new();
    if natural_cm.is_empty() {
        log::warn!("stage 1 called on an empty corpus");
    }
    for post in natural_cm {
        match translator.translate(&post.text) {
            Ok(translation) => {
                let mut pair = ParallelPair::new(&post.id, &translation, &post.text);
                pair.source_tokens = tokenize(&pair.source_text);
                pair.target_tokens = tokenize(&pair.target_text);
                pairs.push(pair);
            }
            Err(e) => {
                log::warn!("stage 1: skipping {}: {e}", post.id);
                audit.push(AuditEntry {
                    record_id: post.id.clone(),
                    event: "translation_failed".into(),
                    detail: e.to_string(),
                });
            }
        }
    }
    (pairs, audit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Phase {
    /// Next step translates a fresh batch.
    Start,
    /// A translated batch awaits filtering (batch file on disk).
    Translated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Stage2Manifest {
    next_iteration: usize,
    phase: Phase,
    /// Source sentences consumed so far.
    cursor: usize,
    model_tag: String,
    iterations: Vec<IterationRecord>,
    done: bool,
}

impl Stage2Manifest {
    fn fresh(initial_tag: &str) -> Self {
        Stage2Manifest {
            next_iteration: 0,
            phase: Phase::Start,
            cursor: 0,
            model_tag: initial_tag.to_string(),
            iterations: Vec::new(),
            done: false,
        }
    }
}

/// Outcome of one `stage2_iterate` call.
#[derive(Debug)]
pub struct Stage2Status {
    pub done: bool,
    pub iterations: Vec<IterationRecord>,
    pub audit: Vec<AuditEntry>,
}

fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

fn batch_path(dir: &Path) -> PathBuf {
    dir.join("batch.jsonl")
}

fn survivors_path(dir: &Path, iteration: usize) -> PathBuf {
    dir.join(format!("survivors_iter_{iteration:04}.jsonl"))
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    let io = |source: std::io::Error| PipelineError::CheckpointIo {
        path: path.display().to_string(),
        source,
    };
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn write_pairs_atomic(path: &Path, pairs: &[ParallelPair]) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    for pair in pairs {
        buf.extend_from_slice(serde_json::to_string(pair).expect("pair serializes").as_bytes());
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

fn load_manifest(dir: &Path) -> Result<Option<Stage2Manifest>, PipelineError> {
    let path = manifest_path(dir);
    if !path.exists() {
        return Ok(None);
    }
    let raw = fs::read_to_string(&path).map_err(|source| PipelineError::CheckpointIo {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&raw)
        .map(Some)
        .map_err(|e| PipelineError::CorruptManifest(e.to_string()))
}

fn store_manifest(dir: &Path, manifest: &Stage2Manifest) -> Result<(), PipelineError> {
    let raw = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    write_atomic(&manifest_path(dir), &raw)
}

/// Stage 2 driver. Starts fresh or resumes from the checkpoint directory.
///
/// Each checkpointable step is either "translate one batch" or "filter the
/// pending batch, record the iteration, retrain". `max_steps` bounds how many
/// steps run before returning (used to exercise crash/resume); `None` runs to
/// completion.
#[allow(clippy::too_many_arguments)]
pub fn stage2_iterate(
    config: &PipelineConfig,
    source: &[SourceSentence],
    seed_pairs: &[ParallelPair],
    translator: &dyn Translator,
    classifier: Option<&dyn Scorer>,
    qe: Option<&dyn Scorer>,
    lexicons: &LexiconSet,
    max_steps: Option<usize>,
) -> Result<Stage2Status, PipelineError> {
    if config.iteration_count == 0 {
        return Err(PipelineError::ZeroIterations);
    }
    let dir = &config.checkpoint_dir;
    fs::create_dir_all(dir).map_err(|source| PipelineError::CheckpointIo {
        path: dir.display().to_string(),
        source,
    })?;
    let mut manifest = match load_manifest(dir)? {
        Some(m) => m,
        None => {
            let m = Stage2Manifest::fresh(translator.name());
            store_manifest(dir, &m)?;
            m
        }
    };
    let mut audit = Vec::new();
    let mut steps = 0usize;
    let step_budget = max_steps.unwrap_or(usize::MAX);

    while !manifest.done && steps < step_budget {
        match manifest.phase {
            Phase::Start => {
                if manifest.next_iteration >= config.iteration_count
                    || manifest.cursor >= source.len()
                {
                    manifest.done = true;
                    store_manifest(dir, &manifest)?;
                    break;
                }
                let remaining = source.len() - manifest.cursor;
                let batch_len = config.batch_size.unwrap_or(remaining).min(remaining);
                let batch = &source[manifest.cursor..manifest.cursor + batch_len];
                let mut pairs = Vec::with_capacity(batch.len());
                for sentence in batch {
                    match translator.translate(&sentence.text) {
                        Ok(target) => {
                            let mut pair =
                                ParallelPair::new(&sentence.id, &sentence.text, &target);
                            pair.source_tokens = tokenize(&pair.source_text);
                            pair.target_tokens = analyze(&pair.target_text, lexicons);
                            pairs.push(pair);
                        }
                        Err(e) => {
                            log::warn!("stage 2: skipping {}: {e}", sentence.id);
                            audit.push(AuditEntry {
                                record_id: sentence.id.clone(),
                                event: "translation_failed".into(),
                                detail: e.to_string(),
                            });
                        }
                    }
                }
                write_pairs_atomic(&batch_path(dir), &pairs)?;
                manifest.cursor += batch_len;
                manifest.phase = Phase::Translated;
                store_manifest(dir, &manifest)?;
                steps += 1;
            }
            Phase::Translated => {
                let (pairs, _) = read_jsonl::<ParallelPair>(&batch_path(dir), 0.0)?;
                let generated = pairs.len();
                let outcome = run_filter_bank(pairs, &config.filter, classifier, qe);
                for rejected in &outcome.rejected {
                    audit.push(AuditEntry {
                        record_id: rejected.id.clone(),
                        event: "filtered_out".into(),
                        detail: rejected
                            .verdicts
                            .last()
                            .map(|v| v.filter_name.clone())
                            .unwrap_or_default(),
                    });
                }
                for deferred in &outcome.deferred {
                    audit.push(AuditEntry {
                        record_id: deferred.id.clone(),
                        event: "scorer_deferred".into(),
                        detail: "parked for retry".into(),
                    });
                }
                let iteration = manifest.next_iteration;
                // Survivor file is rewritten whole, so redoing this step after
                // a crash cannot double-append.
                write_pairs_atomic(&survivors_path(dir, iteration), &outcome.accepted)?;

                let mut dataset: Vec<(String, String)> = seed_pairs
                    .iter()
                    .map(|p| (p.source_text.clone(), p.target_text.clone()))
                    .collect();
                for i in 0..=iteration {
                    let path = survivors_path(dir, i);
                    let (survivors, _) = read_jsonl::<ParallelPair>(&path, 0.0)?;
                    dataset
                        .extend(survivors.into_iter().map(|p| (p.source_text, p.target_text)));
                }
                let model_tag = translator
                    .retrain(&dataset)
                    .map_err(PipelineError::RetrainFailed)?;

                manifest.iterations.push(IterationRecord {
                    iteration,
                    generated,
                    survived_heuristics: outcome.report.survived_heuristics,
                    survived_classifier: outcome.report.survived_classifier,
                    survived_qe: outcome.report.survived_qe,
                    model_tag: model_tag.clone(),
                });
                manifest.model_tag = model_tag;
                manifest.next_iteration = iteration + 1;
                manifest.phase = Phase::Start;
                if manifest.next_iteration >= config.iteration_count
                    || manifest.cursor >= source.len()
                {
                    manifest.done = true;
                }
                store_manifest(dir, &manifest)?;
                let _ = fs::remove_file(batch_path(dir));
                steps += 1;
            }
        }
    }

    Ok(Stage2Status {
        done: manifest.done,
        iterations: manifest.iterations,
        audit,
    })
}

/// Concatenate all per-iteration survivor files into the accumulated corpus,
/// in iteration order.
pub fn collect_stage2_corpus(config: &PipelineConfig) -> Result<Vec<ParallelPair>, PipelineError> {
    let manifest = load_manifest(&config.checkpoint_dir)?
        .ok_or_else(|| PipelineError::CorruptManifest("no manifest in checkpoint dir".into()))?;
    let mut corpus = Vec::new();
    for record in &manifest.iterations {
        let path = survivors_path(&config.checkpoint_dir, record.iteration);
        let (pairs, _) = read_jsonl::<ParallelPair>(&path, 0.0)?;
        corpus.extend(pairs);
    }
    Ok(corpus)
}

/// Stage 3: final reference-free QA gate over the accumulated pairs.
pub fn stage3_qa(
    pairs: Vec<ParallelPair>,
    qe: &dyn Scorer,
    config: &FilterConfig,
) -> (Vec<ParallelPair>, FilterReport, Vec<ParallelPair>) {
    let mut heuristics_off = config.clone();
    for name in [
        crate::filters::LENGTH_RATIO,
        crate::filters::LEXICAL_REPETITION,
        crate::filters::CHAR_REPETITION,
        crate::filters::CODEMIX_EQUILIBRIUM,
        crate::filters::CLASSIFIER_GATE,
    ] {
        heuristics_off.disabled.push(name.to_string());
    }
    let outcome = run_filter_bank(pairs, &heuristics_off, None, Some(qe));
    if outcome.accepted.is_empty() && outcome.report.input > 0 {
        log::warn!(
            "stage 3: every pair scored below the QA threshold {}",
            config.qe_threshold
        );
    }
    (outcome.accepted, outcome.report, outcome.deferred)
}

/// Persist stage-3 output next to the checkpoints.
pub fn write_final_corpus(
    config: &PipelineConfig,
    accepted: &[ParallelPair],
) -> Result<PathBuf, PipelineError> {
    let path = config.checkpoint_dir.join("final_corpus.jsonl");
    write_jsonl(accepted, &path)?;
    Ok(path)
}
