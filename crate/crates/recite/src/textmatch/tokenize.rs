//! Word-level tokenization shared by every metric.
//!
//! The scheme is fixed so that scores are comparable across runs: lowercase,
//! curly quotes and apostrophes normalized to straight ones, punctuation
//! detached as single-character tokens, contractions split at the apostrophe
//! ("wasn't" -> `was` + `n't`). A trailing period is detached only at the end
//! of the input, so mid-text abbreviations like "a.m." or "Sept." survive as
//! single tokens.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenOrigin {
    Source,
    Generation,
}

/// An ordered sequence of normalized word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub origin: TokenOrigin,
}

impl TokenSeq {
    pub fn source(text: &str) -> Self {
        TokenSeq {
            tokens: tokenize(text),
            origin: TokenOrigin::Source,
        }
    }

    pub fn generation(text: &str) -> Self {
        TokenSeq {
            tokens: tokenize(text),
            origin: TokenOrigin::Generation,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Map curly quote glyphs to their straight equivalents.
pub fn normalize_quotes(c: char) -> char {
    match c {
        '\u{2018}' | '\u{2019}' | '\u{201B}' | '`' => '\'',
        '\u{201C}' | '\u{201D}' | '\u{201E}' => '"',
        other => other,
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// True for tokens that count as words (contain at least one alphanumeric).
pub fn is_word_token(token: &str) -> bool {
    token.chars().any(is_word_char)
}

/// Number of word tokens in a token slice.
pub fn word_count(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| is_word_token(t)).count()
}

const CONTRACTION_SUFFIXES: [&str; 6] = ["'s", "'re", "'ve", "'ll", "'d", "'m"];

/// Split one whitespace-delimited chunk into tokens, appending to `out`.
/// `last_chunk` controls the end-of-input period rule.
fn split_chunk(chunk: &str, last_chunk: bool, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    let mut end = chars.len();

    // Leading punctuation, one token per character.
    while start < end && !is_word_char(chars[start]) && chars[start] != '\'' {
        out.push(chars[start].to_string());
        start += 1;
    }
    if start == end {
        return;
    }

    // Trailing punctuation except periods; collected in reverse.
    let mut trailing: Vec<String> = Vec::new();
    while end > start {
        let c = chars[end - 1];
        if !is_word_char(c) && c != '.' && c != '\'' {
            trailing.push(c.to_string());
            end -= 1;
        } else if c == '\'' && end - 1 == start {
            // A bare apostrophe left over after peeling.
            trailing.push(c.to_string());
            end -= 1;
        } else {
            break;
        }
    }

    // End-of-input: the final period comes off as its own token, unless the
    // whole core is periods (an ellipsis).
    let mut final_period = false;
    if last_chunk && trailing.is_empty() && end > start && chars[end - 1] == '.' {
        let core: &[char] = &chars[start..end - 1];
        if core.iter().any(|&c| c != '.') {
            final_period = true;
            end -= 1;
        }
    }

    if end > start {
        let core: String = chars[start..end].iter().collect();
        push_core(&core, out);
    }
    if final_period {
        out.push(".".to_string());
    }
    for t in trailing.into_iter().rev() {
        out.push(t);
    }
}

/// Emit a punctuation-stripped core, splitting contractions.
fn push_core(core: &str, out: &mut Vec<String>) {
    if let Some(stem) = core.strip_suffix("n't") {
        if !stem.is_empty() {
            push_core(stem, out);
            out.push("n't".to_string());
            return;
        }
    }
    for suffix in CONTRACTION_SUFFIXES {
        if let Some(stem) = core.strip_suffix(suffix) {
            if !stem.is_empty() {
                push_core(stem, out);
                out.push(suffix.to_string());
                return;
            }
        }
    }
    // Trailing apostrophe (plural possessive) detaches.
    if let Some(stem) = core.strip_suffix('\'') {
        if !stem.is_empty() {
            push_core(stem, out);
            out.push("'".to_string());
            return;
        }
    }
    out.push(core.to_string());
}

/// Tokenize text into lowercase word-level tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.chars().map(normalize_quotes).collect();
    let lowered = normalized.to_lowercase();
    let chunks: Vec<&str> = lowered.split_whitespace().collect();
    let mut out = Vec::new();
    for (i, chunk) in chunks.iter().enumerate() {
        split_chunk(chunk, i + 1 == chunks.len(), &mut out);
    }
    out
}
