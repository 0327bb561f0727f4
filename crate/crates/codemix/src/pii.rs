//! PII detection and redaction with a discard policy for records that cannot
//! be cleanly scrubbed.
//!
//! The default pattern set covers phone numbers (7-12 digits, separators
//! allowed), RFC-style email addresses, and long account-number runs preceded
//! by an account keyword. "Cannot be cleanly redacted" is operationalized as
//! a residual digit run of 5+ next to a redacted span, or more than 3
//! findings in one record; such records are discarded in full.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiKind {
    Phone,
    Email,
    AccountNumber,
    Other,
}

impl PiiKind {
    pub fn placeholder(self) -> &'static str {
        match self {
            PiiKind::Phone => "[PHONE]",
            PiiKind::Email => "[EMAIL]",
            PiiKind::AccountNumber => "[ACCT]",
            PiiKind::Other => "[PII]",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiFinding {
    pub kind: PiiKind,
    /// Byte offsets `[start, end)` into the scanned text.
    pub span: (usize, usize),
    pub replacement: String,
}

/// Outcome of redacting one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum RedactionResult {
    Clean { text: String },
    Redacted { text: String, n_findings: usize },
    Discarded { reason: String },
}

#[derive(Debug, Error)]
pub enum PiiError {
    #[error("cannot read pattern file {path}: {source}")]
    PatternFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad pattern line {line}: {detail}")]
    BadPattern { line: usize, detail: String },
}

/// A compiled scanner: the default built-in patterns or a user-supplied set.
pub struct PiiScanner {
    patterns: Vec<(PiiKind, Regex)>,
}

const MAX_FINDINGS_PER_RECORD: usize = 3;
const RESIDUAL_DIGIT_RUN: usize = 5;
/// How close (in bytes) a residual digit run must be to a redacted span to
/// count as part of the same artifact.
const ADJACENCY_BYTES: usize = 3;

fn default_patterns() -> &'static [(PiiKind, Regex)] {
    static PATTERNS: OnceLock<Vec<(PiiKind, Regex)>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        vec![
            // Account numbers first so keyword-prefixed long runs out-rank the
            // plain phone pattern (longest-match-wins resolution below still
            // applies on overlap).
            (
                PiiKind::AccountNumber,
                Regex::new(r"(?i)(?:stk|số tài khoản|tài khoản|account|acct)\s*:?\s*\d{9,}")
                    .unwrap(),
            ),
            (
                PiiKind::Email,
                Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}").unwrap(),
            ),
            // 7-12 digits, optional separators and leading +.
            (PiiKind::Phone, Regex::new(r"\+?\d(?:[ .\-]?\d){6,11}").unwrap()),
        ]
    })
}

impl Default for PiiScanner {
    fn default() -> Self {
        PiiScanner {
            patterns: default_patterns().to_vec(),
        }
    }
}

impl PiiScanner {
    /// Load user patterns: one per line, `kind<TAB>regex` (kind is one of
    /// phone/email/account_number/other). Empty lines and `#` comments skipped.
    pub fn from_pattern_file(path: &Path) -> Result<Self, PiiError> {
        let raw = fs::read_to_string(path).map_err(|source| PiiError::PatternFile {
            path: path.display().to_string(),
            source,
        })?;
        let mut patterns = Vec::new();
        for (idx, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind_str, pattern) =
                line.split_once('\t')
                    .or_else(|| line.split_once(' '))
                    .ok_or(PiiError::BadPattern {
                        line: idx + 1,
                        detail: "expected '<kind> <regex>'".into(),
                    })?;
            let kind = match kind_str {
                "phone" => PiiKind::Phone,
                "email" => PiiKind::Email,
                "account_number" => PiiKind::AccountNumber,
                "other" => PiiKind::Other,
                other => {
                    return Err(PiiError::BadPattern {
                        line: idx + 1,
                        detail: format!("unknown kind '{other}'"),
                    })
                }
            };
            let regex = Regex::new(pattern.trim()).map_err(|e| PiiError::BadPattern {
                line: idx + 1,
                detail: e.to_string(),
            })?;
            patterns.push((kind, regex));
        }
        Ok(PiiScanner { patterns })
    }

    /// Find all PII spans, sorted by start, overlaps resolved longest-match-wins.
    pub fn scan(&self, text: &str) -> Vec<PiiFinding> {
        let mut raw: Vec<PiiFinding> = Vec::new();
        for (kind, regex) in &self.patterns {
            for m in regex.find_iter(text) {
                raw.push(PiiFinding {
                    kind: *kind,
                    span: (m.start(), m.end()),
                    replacement: kind.placeholder().to_string(),
                });
            }
        }
        // Longest match wins on overlap; earlier pattern wins on exact tie.
        raw.sort_by_key(|f| (f.span.0, usize::MAX - (f.span.1 - f.span.0)));
        let mut resolved: Vec<PiiFinding> = Vec::new();
        for f in raw {
            match resolved.last() {
                Some(last) if f.span.0 < last.span.1 => {
                    // Overlaps the previous accepted finding: keep the longer.
                    if f.span.1 - f.span.0 > last.span.1 - last.span.0 && f.span.0 == last.span.0 {
                        *resolved.last_mut().unwrap() = f;
                    }
                }
                _ => resolved.push(f),
            }
        }
        resolved
    }

    /// Scan then redact in one call.
    pub fn sanitize(&self, text: &str) -> RedactionResult {
        let findings = self.scan(text);
        redact(text, &findings)
    }
}

/// Replace finding spans with placeholders, or discard the record when the
/// result would still leak (residual digit runs next to a redacted span, or
/// too many findings to trust pattern coverage).
pub fn redact(text: &str, findings: &[PiiFinding]) -> RedactionResult {
    if findings.is_empty() {
        return RedactionResult::Clean {
            text: text.to_string(),
        };
    }
    if findings.len() > MAX_FINDINGS_PER_RECORD {
        return RedactionResult::Discarded {
            reason: format!(
                "{} findings exceed the per-record limit of {MAX_FINDINGS_PER_RECORD}",
                findings.len()
            ),
        };
    }
    for f in findings {
        if let Some(run) = residual_run_near(text, f.span, findings) {
            return RedactionResult::Discarded {
                reason: format!(
                    "residual digit run of {run} adjacent to a {:?} span cannot be cleanly redacted",
                    f.kind
                ),
            };
        }
    }
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for f in findings {
        out.push_str(&text[cursor..f.span.0]);
        out.push_str(&f.replacement);
        cursor = f.span.1;
    }
    out.push_str(&text[cursor..]);
    RedactionResult::Redacted {
        text: out,
        n_findings: findings.len(),
    }
}

/// Longest digit run within `ADJACENCY_BYTES` of the span that is not itself
/// covered by any finding; `Some(len)` when it reaches the discard threshold.
fn residual_run_near(text: &str, span: (usize, usize), findings: &[PiiFinding]) -> Option<usize> {
    let mut lo = span.0.saturating_sub(ADJACENCY_BYTES + RESIDUAL_DIGIT_RUN * 2);
    let mut hi = (span.1 + ADJACENCY_BYTES + RESIDUAL_DIGIT_RUN * 2).min(text.len());
    while !text.is_char_boundary(lo) {
        lo -= 1;
    }
    while !text.is_char_boundary(hi) {
        hi += 1;
    }
    let mut run_start = None;
    let mut best: Option<usize> = None;
    let mut check = |start: usize, end: usize| {
        let len = text[start..end].chars().filter(|c| c.is_ascii_digit()).count();
        let covered = findings
            .iter()
            .any(|f| start >= f.span.0 && end <= f.span.1);
        let near = end + ADJACENCY_BYTES >= span.0 && start <= span.1 + ADJACENCY_BYTES;
        if !covered && near && len >= RESIDUAL_DIGIT_RUN {
            best = Some(best.map_or(len, |b: usize| b.max(len)));
        }
    };
    for (i, c) in text[lo..hi].char_indices() {
        let abs = lo + i;
        if c.is_ascii_digit() {
            if run_start.is_none() {
                run_start = Some(abs);
            }
        } else if let Some(s) = run_start.take() {
            check(s, abs);
        }
    }
    if let Some(s) = run_start {
        check(s, hi);
    }
    best
}
