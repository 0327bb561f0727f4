//! Tokenization and per-token language tagging for code-mixed text.
//!
//! Tokens are whitespace/punctuation segments with byte spans into the
//! original string. URLs and emoji are kept as single tokens. Tagging
//! assigns each token to the matrix language, the embedded language, or
//! a language-independent `Neutral` class (numerals, emoji, punctuation,
//! URLs, capitalized unknown named entities).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Language class assigned to a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageTag {
    /// Matrix language of the corpus (e.g. Vietnamese).
    LangA,
    /// Embedded language (e.g. English).
    LangB,
    /// Language-independent: numerals, emoji, punctuation, URLs, named entities.
    Neutral,
}

/// A token with its byte span into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Byte offsets `[start, end)` into the source string.
    pub span: (usize, usize),
    pub tag: LanguageTag,
}

impl Token {
    fn new(surface: &str, start: usize, end: usize) -> Self {
        Token {
            surface: surface.to_string(),
            span: (start, end),
            // Untagged tokens default to Neutral until `tag_tokens` runs.
            tag: LanguageTag::Neutral,
        }
    }
}

/// Policy for diacritic-free tokens present in both lexicons (the "ban" problem).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbiguousTagPolicy {
    /// Tag as the matrix language (default: it is the higher-prior class).
    #[default]
    Matrix,
    /// Tag as the embedded language.
    Embedded,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Word lists for the matrix and embedded languages.
///
/// Lexicon files hold one term per line, UTF-8; entries are lowercased on load.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    matrix: HashSet<String>,
    embedded: HashSet<String>,
    pub ambiguous_policy: AmbiguousTagPolicy,
}

impl LexiconSet {
    pub fn from_paths(matrix: &Path, embedded: &Path) -> Result<Self, LexiconError> {
        Ok(LexiconSet {
            matrix: load_lexicon(matrix)?,
            embedded: load_lexicon(embedded)?,
            ambiguous_policy: AmbiguousTagPolicy::default(),
        })
    }

    pub fn from_words<I, J, S, T>(matrix: I, embedded: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        LexiconSet {
            matrix: matrix
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            embedded: embedded
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            ambiguous_policy: AmbiguousTagPolicy::default(),
        }
    }

    pub fn with_policy(mut self, policy: AmbiguousTagPolicy) -> Self {
        self.ambiguous_policy = policy;
        self
    }
}

fn load_lexicon(path: &Path) -> Result<HashSet<String>, LexiconError> {
    let raw = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(raw
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Precomposed Vietnamese letters (all tonal vowels plus đ). Any of these in a
/// token rules out the embedded language.
const VIETNAMESE_LETTERS: &str = "\
àáảãạăằắẳẵặâầấẩẫậ\
èéẻẽẹêềếểễệ\
ìíỉĩị\
òóỏõọôồốổỗộơờớởỡợ\
ùúủũụưừứửữự\
ỳýỷỹỵ\
đ";

fn has_vietnamese_letter(surface: &str) -> bool {
    surface
        .to_lowercase()
        .chars()
        .any(|c| VIETNAMESE_LETTERS.contains(c))
}

pub fn is_url_surface(chunk: &str) -> bool {
    let lower = chunk.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Split `text` into tokens with byte spans. Whitespace separates chunks;
/// within a chunk, alphanumeric runs form word tokens and every other
/// character becomes its own token. URL chunks stay whole.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk_start = None;
    let mut iter = text.char_indices().peekable();
    while let Some(&(i, c)) = iter.peek() {
        if c.is_whitespace() {
            if let Some(start) = chunk_start.take() {
                tokenize_chunk(text, start, i, &mut tokens);
            }
            iter.next();
        } else {
            if chunk_start.is_none() {
                chunk_start = Some(i);
            }
            iter.next();
        }
    }
    if let Some(start) = chunk_start {
        tokenize_chunk(text, start, text.len(), &mut tokens);
    }
    tokens
}

fn tokenize_chunk(text: &str, start: usize, end: usize, out: &mut Vec<Token>) {
    let chunk = &text[start..end];
    if is_url_surface(chunk) {
        out.push(Token::new(chunk, start, end));
        return;
    }
    let mut word_start: Option<usize> = None;
    for (off, c) in chunk.char_indices() {
        let abs = start + off;
        if c.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(abs);
            }
        } else {
            if let Some(ws) = word_start.take() {
                out.push(Token::new(&text[ws..abs], ws, abs));
            }
            let char_end = abs + c.len_utf8();
            out.push(Token::new(&text[abs..char_end], abs, char_end));
        }
    }
    if let Some(ws) = word_start {
        out.push(Token::new(&text[ws..end], ws, end));
    }
}

fn is_neutral_surface(surface: &str) -> bool {
    if is_url_surface(surface) {
        return true;
    }
    // Pure numerals count as Neutral; anything without a letter (punctuation,
    // emoji, symbols) does too.
    !surface.chars().any(|c| c.is_alphabetic())
}

fn is_capitalized_ascii(surface: &str) -> bool {
    let mut chars = surface.chars();
    match chars.next() {
        Some(first) if first.is_ascii_uppercase() => chars.all(|c| c.is_ascii_alphabetic()),
        _ => false,
    }
}

/// Assign a [`LanguageTag`] to every token. Deterministic given the lexicons.
///
/// Priority: Neutral classes, then Vietnamese-specific letters, then lexicon
/// membership (ambiguity resolved by `lexicons.ambiguous_policy`), then a
/// capitalized-unknown named-entity heuristic, then matrix-language fallback.
pub fn tag_tokens(tokens: &[Token], lexicons: &LexiconSet) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut tagged = t.clone();
            tagged.tag = tag_surface(&t.surface, lexicons);
            tagged
        })
        .collect()
}

fn tag_surface(surface: &str, lexicons: &LexiconSet) -> LanguageTag {
    if is_neutral_surface(surface) {
        return LanguageTag::Neutral;
    }
    if has_vietnamese_letter(surface) {
        return LanguageTag::LangA;
    }
    let lower = surface.to_lowercase();
    let in_matrix = lexicons.matrix.contains(&lower);
    let in_embedded = lexicons.embedded.contains(&lower);
    match (in_matrix, in_embedded) {
        (true, true) => match lexicons.ambiguous_policy {
            AmbiguousTagPolicy::Matrix => LanguageTag::LangA,
            AmbiguousTagPolicy::Embedded => LanguageTag::LangB,
        },
        (true, false) => LanguageTag::LangA,
        (false, true) => LanguageTag::LangB,
        (false, false) => {
            if is_capitalized_ascii(surface) {
                // Unknown capitalized ASCII token: treat as a named entity.
                LanguageTag::Neutral
            } else {
                LanguageTag::LangA
            }
        }
    }
}

/// Convenience: tokenize then tag in one call.
pub fn analyze(text: &str, lexicons: &LexiconSet) -> Vec<Token> {
    tag_tokens(&tokenize(text), lexicons)
}
