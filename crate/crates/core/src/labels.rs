//! Label vocabularies of the AOC annotations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("unknown {kind} label {value:?}")]
pub struct UnknownLabel {
    pub kind: &'static str,
    pub value: String,
}

fn unknown(kind: &'static str, value: &str) -> UnknownLabel {
    UnknownLabel {
        kind,
        value: value.to_owned(),
    }
}

fn fold(s: &str) -> String {
    s.trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Newspaper the sentence was scraped from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    AlGhad,
    AlRiyadh,
    Youm7,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::AlGhad, Source::AlRiyadh, Source::Youm7];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::AlGhad => "AlGhad",
            Source::AlRiyadh => "AlRiyadh",
            Source::Youm7 => "Youm7",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Source {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "alghad" | "ghad" | "gh" => Ok(Source::AlGhad),
            "alriyadh" | "riyadh" | "ri" => Ok(Source::AlRiyadh),
            "youm7" | "y7" => Ok(Source::Youm7),
            _ => Err(unknown("source", s)),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comment from readers, or control sentence sampled from the article body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SentenceKind {
    Comment,
    Control,
}

impl SentenceKind {
    pub const ALL: [SentenceKind; 2] = [SentenceKind::Comment, SentenceKind::Control];

    pub fn as_str(self) -> &'static str {
        match self {
            SentenceKind::Comment => "comment",
            SentenceKind::Control => "control",
        }
    }
}

impl FromStr for SentenceKind {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "comment" | "cmnt" => Ok(SentenceKind::Comment),
            "control" | "cntrl" => Ok(SentenceKind::Control),
            _ => Err(unknown("kind", s)),
        }
    }
}

impl fmt::Display for SentenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Level-of-dialectness annotation, including the two non-ordinal outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Msa,
    Little,
    Mixed,
    Most,
    NotArabic,
    Missing,
}

impl Level {
    pub const ALL: [Level; 6] = [
        Level::Msa,
        Level::Little,
        Level::Mixed,
        Level::Most,
        Level::NotArabic,
        Level::Missing,
    ];

    pub const ORDINAL: [Level; 4] = [Level::Msa, Level::Little, Level::Mixed, Level::Most];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Msa => "MSA",
            Level::Little => "Little",
            Level::Mixed => "Mixed",
            Level::Most => "Most",
            Level::NotArabic => "NotArabic",
            Level::Missing => "Missing",
        }
    }

    /// Position on the 0..=3 ordinal scale; `None` for NotArabic/Missing.
    pub fn ordinal(self) -> Option<u8> {
        match self {
            Level::Msa => Some(0),
            Level::Little => Some(1),
            Level::Mixed => Some(2),
            Level::Most => Some(3),
            Level::NotArabic | Level::Missing => None,
        }
    }

    /// Numeric ALDi value: MSA 0, Little 1/3, Mixed 2/3, Most 1.
    pub fn value(self) -> Option<f64> {
        self.ordinal().map(|k| f64::from(k) / 3.0)
    }

    pub fn is_usable(self) -> bool {
        self.ordinal().is_some()
    }

    pub fn is_dialectal(self) -> bool {
        matches!(self, Level::Little | Level::Mixed | Level::Most)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = UnknownLabel;

    /// Canonical spellings only; raw exports go through [`LevelAliases`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| unknown("level", s))
    }
}

/// Case- and separator-insensitive table from raw level strings to [`Level`].
/// A blank cell always maps to [`Level::Missing`].
#[derive(Debug, Clone)]
pub struct LevelAliases {
    table: BTreeMap<String, Level>,
}

impl Default for LevelAliases {
    fn default() -> Self {
        let mut table = BTreeMap::new();
        for (alias, level) in [
            ("msa", Level::Msa),
            ("modern standard arabic", Level::Msa),
            ("little", Level::Little),
            ("little dialectal", Level::Little),
            ("mixed", Level::Mixed),
            ("most", Level::Most),
            ("mostly", Level::Most),
            ("mostly dialectal", Level::Most),
            ("notarabic", Level::NotArabic),
            ("not arabic", Level::NotArabic),
            ("nonarabic", Level::NotArabic),
            ("missing", Level::Missing),
        ] {
            table.insert(fold(alias), level);
        }
        Self { table }
    }
}

impl LevelAliases {
    pub fn insert(&mut self, alias: &str, level: Level) {
        self.table.insert(fold(alias), level);
    }

    pub fn resolve(&self, raw: &str) -> Result<Level, UnknownLabel> {
        if raw.trim().is_empty() {
            return Ok(Level::Missing);
        }
        self.table
            .get(&fold(raw))
            .copied()
            .ok_or_else(|| unknown("level", raw))
    }
}

/// Dialect chosen by the annotator for non-MSA sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dialect {
    Egy,
    Lev,
    Glf,
    Mag,
    Irq,
    Gen,
    Unfamiliar,
    Other,
}

impl Dialect {
    pub const ALL: [Dialect; 8] = [
        Dialect::Egy,
        Dialect::Lev,
        Dialect::Glf,
        Dialect::Mag,
        Dialect::Irq,
        Dialect::Gen,
        Dialect::Unfamiliar,
        Dialect::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Egy => "EGY",
            Dialect::Lev => "LEV",
            Dialect::Glf => "GLF",
            Dialect::Mag => "MAG",
            Dialect::Irq => "IRQ",
            Dialect::Gen => "GEN",
            Dialect::Unfamiliar => "Unfamiliar",
            Dialect::Other => "Other",
        }
    }

    /// Parses a raw dialect cell. Blank means no dialect was given.
    pub fn parse_cell(raw: &str) -> Result<Option<Dialect>, UnknownLabel> {
        if raw.trim().is_empty() {
            return Ok(None);
        }
        raw.parse().map(Some)
    }
}

impl FromStr for Dialect {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match fold(s).as_str() {
            "egy" | "egyptian" => Dialect::Egy,
            "lev" | "levantine" | "levant" => Dialect::Lev,
            "glf" | "gulf" => Dialect::Glf,
            "mag" | "maghrebi" | "maghrib" => Dialect::Mag,
            "irq" | "iraqi" => Dialect::Irq,
            "gen" | "general" => Dialect::Gen,
            "unfamiliar" | "unknown" => Dialect::Unfamiliar,
            "other" => Dialect::Other,
            _ => return Err(unknown("dialect", s)),
        })
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_values_are_thirds() {
        let values: Vec<f64> = Level::ORDINAL.iter().map(|l| l.value().unwrap()).collect();
        assert_eq!(values, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(Level::NotArabic.value(), None);
        assert_eq!(Level::Missing.value(), None);
    }

    #[test]
    fn aliases() {
        let a = LevelAliases::default();
        assert_eq!(a.resolve("mostly dialectal").unwrap(), Level::Most);
        assert_eq!(a.resolve("Most").unwrap(), Level::Most);
        assert_eq!(a.resolve("not_arabic").unwrap(), Level::NotArabic);
        assert_eq!(a.resolve("  ").unwrap(), Level::Missing);
        let err = a.resolve("very").unwrap_err();
        assert_eq!(err.value, "very");
    }

    #[test]
    fn canonical_round_trip() {
        for l in Level::ALL {
            assert_eq!(l.as_str().parse::<Level>().unwrap(), l);
        }
        for d in Dialect::ALL {
            assert_eq!(d.as_str().parse::<Dialect>().unwrap(), d);
        }
        for s in Source::ALL {
            assert_eq!(s.as_str().parse::<Source>().unwrap(), s);
        }
    }
}
