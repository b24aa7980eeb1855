//! Arabic-aware text normalization and surface tokenization.
//!
//! Everything downstream (grouping keys, lexicon lookup, token counts) goes
//! through [`normalize`] and [`tokenize`], so both are pure and deterministic.
//! Letter unification (alef/ya/ta marbuta) is deliberately not offered: those
//! spellings are themselves dialectness cues.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Arabic tanween, short vowels, shadda and sukun.
pub const DIACRITICS: std::ops::RangeInclusive<char> = '\u{064B}'..='\u{0652}';

/// Arabic tatweel (kashida), used only for elongation.
pub const TATWEEL: char = '\u{0640}';

#[derive(Debug, thiserror::Error)]
#[error("input is not valid UTF-8 (byte offset {offset})")]
pub struct DecodeError {
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub strip_diacritics: bool,
    pub strip_tatweel: bool,
    pub unify_whitespace: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            strip_diacritics: true,
            strip_tatweel: true,
            unify_whitespace: true,
        }
    }
}

impl NormalizationConfig {
    /// NFC only; everything else left untouched.
    pub fn nfc_only() -> Self {
        Self {
            strip_diacritics: false,
            strip_tatweel: false,
            unify_whitespace: false,
        }
    }
}

/// Normalizes text: NFC, optional diacritic and tatweel removal, whitespace
/// runs collapsed to one space and trimmed.
///
/// ```
/// use aldi::textnorm::{normalize, NormalizationConfig};
///
/// let cfg = NormalizationConfig::default();
/// assert_eq!(normalize("  ابـــدا \t جدا ", &cfg), "ابدا جدا");
/// ```
pub fn normalize(text: &str, cfg: &NormalizationConfig) -> String {
    let composed: String = text.nfc().collect();
    let stripped: String = if cfg.strip_diacritics || cfg.strip_tatweel {
        // Removing a mark can expose a new composable pair, so recompose.
        composed
            .chars()
            .filter(|&c| {
                !(cfg.strip_diacritics && DIACRITICS.contains(&c)
                    || cfg.strip_tatweel && c == TATWEEL)
            })
            .nfc()
            .collect()
    } else {
        composed
    };
    if cfg.unify_whitespace {
        stripped.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        stripped
    }
}

/// Byte-level entry point: validates UTF-8 first.
pub fn normalize_bytes(bytes: &[u8], cfg: &NormalizationConfig) -> Result<String, DecodeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DecodeError {
        offset: e.valid_up_to(),
    })?;
    Ok(normalize(text, cfg))
}

/// Punctuation and symbol characters, Arabic and Latin alike (Unicode P* and S*).
static PUNCT_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]+|[^\s\p{P}\p{S}]+").unwrap());

pub fn is_punct_or_symbol(c: char) -> bool {
    static ONE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\p{P}\p{S}]$").unwrap());
    let mut buf = [0u8; 4];
    ONE.is_match(c.encode_utf8(&mut buf))
}

/// Ordered surface tokens of one sentence. Never holds an empty token or one
/// containing whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    tokens: Vec<String>,
}

impl TokenList {
    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    /// Tokens that carry at least one letter or digit.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !t.chars().all(is_punct_or_symbol))
    }

    pub fn into_vec(self) -> Vec<String> {
        self.tokens
    }
}

impl IntoIterator for TokenList {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.into_iter()
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Splits on whitespace after detaching runs of punctuation into their own
/// tokens. `"جدا...."` becomes `["جدا", "...."]`.
///
/// ```
/// use aldi::textnorm::tokenize;
///
/// let toks = tokenize("برافو للسيد الوزير");
/// assert_eq!(toks.len(), 3);
/// assert_eq!(tokenize("جدا....").as_slice(), ["جدا", "...."]);
/// ```
pub fn tokenize(text: &str) -> TokenList {
    TokenList {
        tokens: PUNCT_RUN
            .find_iter(text)
            .map(|m| m.as_str().to_owned())
            .collect(),
    }
}

/// Whitespace-delimited word count, i.e. before punctuation detachment.
pub fn whitespace_word_count(text: &str) -> usize {
    text.split_whitespace().count()
}
