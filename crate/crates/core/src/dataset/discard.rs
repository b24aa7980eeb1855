use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

use super::CommentGroup;
use crate::textnorm::{is_punct_or_symbol, tokenize};

/// Why a group ended up mostly NotArabic/Missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiscardCategory {
    UrlOrEmail,
    HtmlArtifacts,
    Symbols,
    Arabizi,
    English,
    Other,
}

impl DiscardCategory {
    /// Also the priority order of the rules.
    pub const ALL: [DiscardCategory; 6] = [
        DiscardCategory::UrlOrEmail,
        DiscardCategory::HtmlArtifacts,
        DiscardCategory::Symbols,
        DiscardCategory::Arabizi,
        DiscardCategory::English,
        DiscardCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiscardCategory::UrlOrEmail => "UrlOrEmail",
            DiscardCategory::HtmlArtifacts => "HtmlArtifacts",
            DiscardCategory::Symbols => "Symbols",
            DiscardCategory::Arabizi => "Arabizi",
            DiscardCategory::English => "English",
            DiscardCategory::Other => "Other",
        }
    }
}

static URL_OR_EMAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:\b(?:https?|ftp)://\S+|\bwww\.\S+|[a-z0-9._%+-]+@[a-z0-9-]+(?:\.[a-z0-9-]+)*\.[a-z]{2,})")
        .unwrap()
});

static HTML: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)&#|<a\s|</|&[a-z]+;|<br\s*/?>").unwrap());

// A digit standing in for a letter: between letters, or leading a word.
static ARABIZI_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[a-z][235-9]+[a-z]|^[235-9]+[a-z]{2,}").unwrap());

/// Share of letters that must be Latin for the Latin-script categories.
const LATIN_SHARE: f64 = 0.8;

fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic() && (c as u32) < 0x0250
}

fn is_arabic_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c as u32, 0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

/// Rule-based reason for a discarded group, applied to its raw text.
/// First matching rule wins: URL/e-mail, HTML, symbols, Arabizi, English.
pub fn categorize_discard(group: &CommentGroup) -> DiscardCategory {
    categorize_text(&group.raw_text)
}

pub fn categorize_text(text: &str) -> DiscardCategory {
    if URL_OR_EMAIL.is_match(text) {
        return DiscardCategory::UrlOrEmail;
    }
    if HTML.is_match(text) {
        return DiscardCategory::HtmlArtifacts;
    }
    let mut visible = text.chars().filter(|c| !c.is_whitespace()).peekable();
    if visible.peek().is_some() && visible.all(is_punct_or_symbol) {
        return DiscardCategory::Symbols;
    }
    let latin = text.chars().filter(|&c| is_latin_letter(c)).count();
    let arabic = text.chars().filter(|&c| is_arabic_letter(c)).count();
    if latin > 0 && latin as f64 >= LATIN_SHARE * (latin + arabic) as f64 {
        let tokens = tokenize(text);
        if tokens.words().any(|t| ARABIZI_TOKEN.is_match(t)) {
            return DiscardCategory::Arabizi;
        }
        return DiscardCategory::English;
    }
    DiscardCategory::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use DiscardCategory::*;

    #[test]
    fn categorized_examples() {
        let cases = [
            ("؟؟؟؟؟", Symbols),
            ("********", Symbols),
            ("ممكن تلبس gloves to protect the baby from infection !", English),
            ("I agree with you that racism exists in the United States; I also know it exists in Arab countries as well. Just remember that America elected a black president with 360 electoral college votes. Lets learn to be better...ccc", English),
            ("very nice...", English),
            ("ya zamalek ya 7arameyaaaa", Arabizi),
            ("ma howeh el blogs m3abbiyeh el denya ? ya3ni law doctor el jam3a bedo yet3ab shway w yekteb articles, ma kan 3emel blog men zaman.", Arabizi),
            ("http://elbeet-elmuslim.ace.st/forum.htm", UrlOrEmail),
            ("Ahmad.altamimi@alghad.jo", UrlOrEmail),
            ("&#9608;&#9608;&#9608;&#9608;&#9608; 5000 &#8730;DONE", HtmlArtifacts),
            ("<a href=\"EditorOpinions.asp?EditorID=404\">د. أشرف بلبع</a>", HtmlArtifacts),
            ("بيتهيألى قربنا قوى من سبتمبر &#1633;&#1641;&#1640;&#1633;", HtmlArtifacts),
        ];
        for (text, want) in cases {
            assert_eq!(categorize_text(text), want, "{text}");
        }
    }

    #[test]
    fn fallbacks() {
        assert_eq!(categorize_text("كلام عربي عادي"), Other);
        assert_eq!(categorize_text(""), Other);
        assert_eq!(categorize_text("12345"), Other);
        assert_eq!(categorize_text("mp3 player"), English);
    }

    #[test]
    fn url_beats_html() {
        assert_eq!(categorize_text("<a href=\"http://x.com\">x</a>"), UrlOrEmail);
    }
}
