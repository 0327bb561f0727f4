//! Corpus data model, JSONL ingestion/emission, split management, and the
//! MQM annotation record schema.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lid::LidDecision;
use crate::textcore::{analyze, is_url_surface, LanguageTag, LexiconSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiStatus {
    #[default]
    Clean,
    Redacted,
    Discarded,
}

/// A raw or curated text record with provenance and PII status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub platform: Option<String>,
    /// RFC 3339 timestamp string; kept opaque for round-trip stability.
    #[serde(default)]
    pub collected_at: Option<String>,
    #[serde(default)]
    pub pii_status: PiiStatus,
    /// Split assignment, when the record has already been partitioned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lid: Option<LidDecision>,
}

/// Split fractions and the PRNG seed that fixes the assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, dev: f64, test: f64, seed: u64) -> Result<Self, CorpusError> {
        let spec = SplitSpec {
            train_fraction: train,
            dev_fraction: dev,
            test_fraction: test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let fractions = [self.train_fraction, self.dev_fraction, self.test_fraction];
        if fractions.iter().any(|f| *f <= 0.0 || *f >= 1.0) {
            return Err(CorpusError::BadSplitSpec(
                "fractions must lie in (0, 1)".into(),
            ));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadSplitSpec(format!(
                "fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// MQM-style rating on six quality dimensions, each in 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MqmRatingRaw")]
pub struct MqmRating {
    pub terminology: u8,
    pub accuracy: u8,
    pub linguistic_conventions: u8,
    pub style: u8,
    pub locale_conventions: u8,
    pub audience_appropriateness: u8,
}

#[derive(Deserialize)]
struct MqmRatingRaw {
    terminology: u8,
    accuracy: u8,
    linguistic_conventions: u8,
    style: u8,
    locale_conventions: u8,
    audience_appropriateness: u8,
}

impl TryFrom<MqmRatingRaw> for MqmRating {
    type Error = String;

    fn try_from(raw: MqmRatingRaw) -> Result<Self, Self::Error> {
        let scores = [
            ("terminology", raw.terminology),
            ("accuracy", raw.accuracy),
            ("linguistic_conventions", raw.linguistic_conventions),
            ("style", raw.style),
            ("locale_conventions", raw.locale_conventions),
            ("audience_appropriateness", raw.audience_appropriateness),
        ];
        for (name, score) in scores {
            if !(1..=5).contains(&score) {
                return Err(format!("{name} score {score} outside 1..=5"));
            }
        }
        Ok(MqmRating {
            terminology: raw.terminology,
            accuracy: raw.accuracy,
            linguistic_conventions: raw.linguistic_conventions,
            style: raw.style,
            locale_conventions: raw.locale_conventions,
            audience_appropriateness: raw.audience_appropriateness,
        })
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {malformed} of {total} lines malformed, above tolerance {tolerance}")]
    TooManyMalformed {
        path: String,
        malformed: usize,
        total: usize,
        tolerance: f64,
    },
    #[error("invalid split spec: {0}")]
    BadSplitSpec(String),
    #[error("cannot split an empty corpus")]
    EmptySplit,
    #[error("post {0} has pii_status=discarded and must not enter a split")]
    DiscardedInSplit(String),
}

/// Per-file read report: malformed lines are collected with their 1-based
/// line numbers, never silently dropped.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReadReport {
    pub total_lines: usize,
    pub records: usize,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Read a JSONL file, tolerating up to `tolerance` fraction of malformed
/// lines (blank lines are skipped silently).
pub fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    tolerance: f64,
) -> Result<(Vec<T>, ReadReport), CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut report = ReadReport::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        report.total_lines += 1;
        match serde_json::from_str::<T>(&line) {
            Ok(record) => {
                records.push(record);
                report.records += 1;
            }
            Err(e) => report.errors.push(LineError {
                line: idx + 1,
                message: e.to_string(),
            }),
        }
    }
    if report.total_lines > 0 {
        let frac = report.errors.len() as f64 / report.total_lines as f64;
        if frac > tolerance {
            return Err(CorpusError::TooManyMalformed {
                path: path.display().to_string(),
                malformed: report.errors.len(),
                total: report.total_lines,
                tolerance,
            });
        }
    }
    Ok((records, report))
}

/// Write records as JSONL, one compact object per line.
pub fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    let io_err = |source: std::io::Error| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

#[derive(Debug, Clone)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Deterministic shuffled-index partition. The generator is ChaCha8 seeded
/// with `spec.seed`, so the assignment reproduces across platforms. Dev and
/// test sizes are the rounded fractions; the remainder goes to train.
pub fn split(posts: Vec<Post>, spec: &SplitSpec) -> Result<Splits<Post>, CorpusError> {
    spec.validate()?;
    if posts.is_empty() {
        return Err(CorpusError::EmptySplit);
    }
    if let Some(bad) = posts.iter().find(|p| p.pii_status == PiiStatus::Discarded) {
        return Err(CorpusError::DiscardedInSplit(bad.id.clone()));
    }
    let n = posts.len();
    let n_dev = ((n as f64) * spec.dev_fraction).round() as usize;
    let n_test = ((n as f64) * spec.test_fraction).round() as usize;
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);

    let mut slots: Vec<u8> = vec![0; n]; // 0 train, 1 dev, 2 test
    for &i in indices.iter().take(n_dev) {
        slots[i] = 1;
    }
    for &i in indices.iter().skip(n_dev).take(n_test) {
        slots[i] = 2;
    }
    let mut splits = Splits {
        train: Vec::with_capacity(n - n_dev - n_test),
        dev: Vec::with_capacity(n_dev),
        test: Vec::with_capacity(n_test),
    };
    for (post, slot) in posts.into_iter().zip(slots) {
        match slot {
            1 => splits.dev.push(post),
            2 => splits.test.push(post),
            _ => splits.train.push(post),
        }
    }
    Ok(splits)
}

/// Sourcing-stage prefilter: drop posts that are overly short (at most 10
/// word tokens, where only non-Neutral tokens count), contain a link, or
/// consist solely of emoji/symbol tokens.
pub fn heuristic_prefilter(posts: Vec<Post>, lexicons: &LexiconSet) -> Vec<Post> {
    posts
        .into_iter()
        .filter(|post| {
            let tokens = analyze(&post.text, lexicons);
            if tokens.iter().any(|t| is_url_surface(&t.surface)) {
                log::debug!("prefilter drop {}: contains URL", post.id);
                return false;
            }
            let words = tokens
                .iter()
                .filter(|t| t.tag != LanguageTag::Neutral)
                .count();
            if words <= 10 {
                log::debug!("prefilter drop {}: {words} word tokens", post.id);
                return false;
            }
            true
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn post(id: &str, text: &str) -> Post {
        Post {
            id: id.into(),
            text: text.into(),
            platform: None,
            collected_at: None,
            pii_status: PiiStatus::Clean,
            split: None,
            lid: None,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("posts.jsonl");
        let posts: Vec<Post> = (0..100).map(|i| post(&format!("p{i}"), "xin chào")).collect();
        write_jsonl(&posts, &path).unwrap();
        let (read, report) = read_jsonl::<Post>(&path, 0.0).unwrap();
        assert_eq!(read.len(), 100);
        assert!(report.errors.is_empty());
        for (a, b) in posts.iter().zip(&read) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.text, b.text);
        }
    }

    #[test]
    fn empty_file_is_empty_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        let (read, _) = read_jsonl::<Post>(&path, 0.0).unwrap();
        assert!(read.is_empty());
    }

    #[test]
    fn malformed_lines_reported_not_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixed.jsonl");
        let good = serde_json::to_string(&post("a", "t")).unwrap();
        std::fs::write(&path, format!("{good}\n{good}\nnot json\n{good}\n")).unwrap();
        let (read, report) = read_jsonl::<Post>(&path, 0.5).unwrap();
        assert_eq!(read.len(), 3);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].line, 3);
    }

    #[test]
    fn tolerance_exceeded_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "junk\nmore junk\n").unwrap();
        assert!(matches!(
            read_jsonl::<Post>(&path, 0.1),
            Err(CorpusError::TooManyMalformed { .. })
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let posts: Vec<Post> = (0..10).map(|i| post(&format!("p{i}"), "t")).collect();
        let spec = SplitSpec::new(0.8, 0.1, 0.1, 7).unwrap();
        let s1 = split(posts.clone(), &spec).unwrap();
        assert_eq!((s1.train.len(), s1.dev.len(), s1.test.len()), (8, 1, 1));
        let s2 = split(posts, &spec).unwrap();
        let ids = |v: &[Post]| v.iter().map(|p| p.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&s1.train), ids(&s2.train));
        assert_eq!(ids(&s1.dev), ids(&s2.dev));
        assert_eq!(ids(&s1.test), ids(&s2.test));
    }

    #[test]
    fn split_is_a_partition() {
        let posts: Vec<Post> = (0..103).map(|i| post(&format!("p{i}"), "t")).collect();
        let spec = SplitSpec::new(0.7, 0.15, 0.15, 99).unwrap();
        let s = split(posts, &spec).unwrap();
        let mut all: Vec<String> = s
            .train
            .iter()
            .chain(&s.dev)
            .chain(&s.test)
            .map(|p| p.id.clone())
            .collect();
        assert_eq!(all.len(), 103);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 103);
    }

    #[test]
    fn corpus_scale_split_sizes() {
        // 10,254 records at the published split proportions.
        let posts: Vec<Post> = (0..10_254).map(|i| post(&format!("p{i}"), "t")).collect();
        let spec = SplitSpec::new(
            8_790.0 / 10_254.0,
            462.0 / 10_254.0,
            1_002.0 / 10_254.0,
            42,
        )
        .unwrap();
        let s = split(posts, &spec).unwrap();
        assert_eq!(
            (s.train.len(), s.dev.len(), s.test.len()),
            (8_790, 462, 1_002)
        );
    }

    #[test]
    fn discarded_posts_rejected_by_split() {
        let mut p = post("bad", "t");
        p.pii_status = PiiStatus::Discarded;
        let spec = SplitSpec::new(0.8, 0.1, 0.1, 1).unwrap();
        assert!(matches!(
            split(vec![post("ok", "t"), p], &spec),
            Err(CorpusError::DiscardedInSplit(id)) if id == "bad"
        ));
    }

    #[test]
    fn mqm_rejects_out_of_range() {
        let ok = r#"{"terminology":5,"accuracy":4,"linguistic_conventions":3,"style":2,"locale_conventions":1,"audience_appropriateness":5}"#;
        assert!(serde_json::from_str::<MqmRating>(ok).is_ok());
        let bad = ok.replace("\"accuracy\":4", "\"accuracy\":6");
        assert!(serde_json::from_str::<MqmRating>(&bad).is_err());
        let zero = ok.replace("\"style\":2", "\"style\":0");
        assert!(serde_json::from_str::<MqmRating>(&zero).is_err());
    }

    #[test]
    fn prefilter_rules() {
        let lex = LexiconSet::from_words(["một"], ["word"]);
        let eleven = (0..11).map(|i| format!("từa{i}")).collect::<Vec<_>>().join(" ");
        let ten = (0..10).map(|i| format!("từa{i}")).collect::<Vec<_>>().join(" ");
        let with_url = format!("{eleven} https://spam.vn");
        let posts = vec![
            post("short", &ten),
            post("keep", &eleven),
            post("url", &with_url),
            post("emoji", "😀 😀 😀"),
        ];
        let kept = heuristic_prefilter(posts, &lex);
        let ids: Vec<_> = kept.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["keep"]);
    }
}
