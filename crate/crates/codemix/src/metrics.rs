//! Code-mixing quantification: Code-Mixing Index (CMI) and Switching Point
//! Frequency (SPF) at sentence and corpus level.
//!
//! CMI is the sentence-level `100 * (1 - max_lang / (n - u))` form, where `u`
//! is the Neutral token count; a score of 0 means monolingual and 50 means a
//! perfectly balanced mix. SPF is the fraction of adjacent non-Neutral token
//! boundaries where the language changes; Neutral tokens neither create nor
//! destroy a switch point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textcore::{LanguageTag, Token};

/// Mixing statistics for one sentence or a whole corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixStats {
    pub cmi: f64,
    pub spf: f64,
    pub n_tokens: usize,
    pub n_lang_a: usize,
    pub n_lang_b: usize,
    pub n_neutral: usize,
    pub n_switch_points: usize,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("corpus statistics are undefined for an empty corpus")]
    EmptyCorpus,
}

/// Code-Mixing Index in `[0, 100]`. Returns 0 for empty or all-Neutral input.
pub fn cmi(tagged: &[Token]) -> f64 {
    let (a, b, neutral) = tag_counts(tagged);
    let informative = a + b;
    if informative == 0 {
        return 0.0;
    }
    let _ = neutral;
    100.0 * (1.0 - a.max(b) as f64 / informative as f64)
}

/// Switching Point Frequency in `[0, 1]`: switches over adjacent non-Neutral
/// pairs, skipping intervening Neutral tokens. 0 with fewer than two
/// non-Neutral tokens.
pub fn spf(tagged: &[Token]) -> f64 {
    let (switches, boundaries) = switch_counts(tagged);
    if boundaries == 0 {
        0.0
    } else {
        switches as f64 / boundaries as f64
    }
}

/// Per-sentence statistics.
pub fn sentence_stats(tagged: &[Token]) -> MixStats {
    let (a, b, neutral) = tag_counts(tagged);
    let (switches, _) = switch_counts(tagged);
    MixStats {
        cmi: cmi(tagged),
        spf: spf(tagged),
        n_tokens: tagged.len(),
        n_lang_a: a,
        n_lang_b: b,
        n_neutral: neutral,
        n_switch_points: switches,
    }
}

/// Corpus-level statistics: CMI/SPF are unweighted means over records, counts
/// are sums. Errors on an empty corpus (the mean is undefined).
pub fn corpus_stats<'a, I>(corpus: I) -> Result<MixStats, MetricsError>
where
    I: IntoIterator<Item = &'a [Token]>,
{
    let mut n_records = 0usize;
    let mut cmi_sum = 0.0;
    let mut spf_sum = 0.0;
    let mut acc = MixStats {
        cmi: 0.0,
        spf: 0.0,
        n_tokens: 0,
        n_lang_a: 0,
        n_lang_b: 0,
        n_neutral: 0,
        n_switch_points: 0,
    };
    for record in corpus {
        let s = sentence_stats(record);
        n_records += 1;
        cmi_sum += s.cmi;
        spf_sum += s.spf;
        acc.n_tokens += s.n_tokens;
        acc.n_lang_a += s.n_lang_a;
        acc.n_lang_b += s.n_lang_b;
        acc.n_neutral += s.n_neutral;
        acc.n_switch_points += s.n_switch_points;
    }
    if n_records == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    acc.cmi = cmi_sum / n_records as f64;
    acc.spf = spf_sum / n_records as f64;
    Ok(acc)
}

fn tag_counts(tagged: &[Token]) -> (usize, usize, usize) {
    let mut a = 0;
    let mut b = 0;
    let mut neutral = 0;
    for t in tagged {
        match t.tag {
            LanguageTag::LangA => a += 1,
            LanguageTag::LangB => b += 1,
            LanguageTag::Neutral => neutral += 1,
        }
    }
    (a, b, neutral)
}

/// (switch points, non-Neutral adjacency boundaries).
fn switch_counts(tagged: &[Token]) -> (usize, usize) {
    let mut switches = 0;
    let mut boundaries = 0;
    let mut prev: Option<LanguageTag> = None;
    for t in tagged {
        if t.tag == LanguageTag::Neutral {
            continue;
        }
        if let Some(p) = prev {
            boundaries += 1;
            if p != t.tag {
                switches += 1;
            }
        }
        prev = Some(t.tag);
    }
    (switches, boundaries)
}

#[cfg(test)]
pub(crate) fn tokens_from_tags(tags: &[LanguageTag]) -> Vec<Token> {
    tags.iter()
        .enumerate()
        .map(|(i, &tag)| Token {
            surface: format!("t{i}"),
            span: (i, i + 1),
            tag,
        })
        .collect()
}
