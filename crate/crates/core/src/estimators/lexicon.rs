use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use super::{AldiScore, Estimator, EstimatorError};
use crate::textnorm::{normalize, tokenize, NormalizationConfig};

/// Token frequencies streamed from an MSA corpus, one line at a time.
#[derive(Debug, Clone, Default)]
pub struct LexiconBuilder {
    counts: HashMap<String, u64>,
    lines: u64,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_line(&mut self, line: &str) {
        self.lines += 1;
        for tok in tokenize(&normalize(line, &NormalizationConfig::default())) {
            *self.counts.entry(tok).or_default() += 1;
        }
    }

    /// Counts a chunk of lines on the current rayon pool.
    pub fn add_lines<S: AsRef<str> + Sync>(&mut self, lines: &[S]) {
        let part = lines
            .par_iter()
            .fold(LexiconBuilder::new, |mut b, l| {
                b.add_line(l.as_ref());
                b
            })
            .reduce(LexiconBuilder::new, LexiconBuilder::merge);
        *self = std::mem::take(self).merge(part);
    }

    pub fn merge(mut self, other: LexiconBuilder) -> LexiconBuilder {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self.counts), other.counts)
        } else {
            (other.counts, std::mem::take(&mut self.counts))
        };
        for (k, v) in small {
            *big.entry(k).or_default() += v;
        }
        LexiconBuilder {
            counts: big,
            lines: self.lines + other.lines,
        }
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    /// Keeps tokens seen at least `min_count` times.
    pub fn finish(self, min_count: u64, source_name: &str) -> Lexicon {
        let min_count = min_count.max(1);
        Lexicon {
            counts: self
                .counts
                .into_iter()
                .filter(|(_, c)| *c >= min_count)
                .collect(),
            min_count,
            source_name: source_name.to_owned(),
        }
    }
}

/// Normalized tokens considered MSA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    counts: BTreeMap<String, u64>,
    min_count: u64,
    source_name: String,
}

/// Lexicon of tokens occurring at least `min_occurrences` times in `corpus`.
/// An empty corpus gives an empty lexicon.
///
/// ```
/// use aldi::estimators::build_lexicon;
///
/// let lex = build_lexicon(&["a b a"], 2, "toy");
/// assert!(lex.contains("a") && !lex.contains("b"));
/// ```
pub fn build_lexicon<S: AsRef<str> + Sync>(corpus: &[S], min_occurrences: u64, source_name: &str) -> Lexicon {
    let mut b = LexiconBuilder::new();
    b.add_lines(corpus);
    b.finish(min_occurrences, source_name)
}

impl Lexicon {
    pub const HEADER_PREFIX: &'static str = "#aldi-lexicon v1";

    pub fn from_tokens<I: IntoIterator<Item = S>, S: AsRef<str>>(tokens: I, source_name: &str) -> Self {
        let cfg = NormalizationConfig::default();
        Self {
            counts: tokens
                .into_iter()
                .map(|t| (normalize(t.as_ref(), &cfg), 1))
                .filter(|(t, _)| !t.is_empty())
                .collect(),
            min_count: 1,
            source_name: source_name.to_owned(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn insert(&mut self, token: &str) {
        self.counts.entry(token.to_owned()).or_insert(1);
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} min_count={}", Self::HEADER_PREFIX, self.min_count)?;
        for (tok, count) in &self.counts {
            writeln!(out, "{tok}\t{count}")?;
        }
        out.flush()
    }

    /// Reads the lexicon file format. The header is optional (min_count 1
    /// when absent); the count column is optional.
    pub fn read<R: BufRead>(reader: R, source_name: &str) -> Result<Self, EstimatorError> {
        let mut counts = BTreeMap::new();
        let mut min_count = 1;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            let bad = |message: String| EstimatorError::Format {
                line: i + 1,
                message,
            };
            if i == 0 {
                if let Some(rest) = line.strip_prefix(Self::HEADER_PREFIX) {
                    let k = rest
                        .trim()
                        .strip_prefix("min_count=")
                        .ok_or_else(|| bad("header lacks min_count=".into()))?;
                    min_count = k.parse().map_err(|_| bad(format!("bad min_count {k:?}")))?;
                    continue;
                }
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tok, count) = match line.split_once('\t') {
                Some((t, c)) => (t, c.parse().map_err(|_| bad(format!("bad count {c:?}")))?),
                None => (line, 1),
            };
            counts.insert(tok.to_owned(), count);
        }
        Ok(Self {
            counts,
            min_count,
            source_name: source_name.to_owned(),
        })
    }
}

/// Share of the sentence's tokens missing from the lexicon.
///
/// ```
/// use aldi::estimators::{lexicon_score, Lexicon};
///
/// let lex = Lexicon::from_tokens(["قيلت", "الحقيقة"], "fixture");
/// assert_eq!(lexicon_score("اتقالت الحقيقة", &lex).unwrap().value, 0.5);
/// assert_eq!(lexicon_score("قيلت الحقيقة", &lex).unwrap().value, 0.0);
/// ```
pub fn lexicon_score(sentence: &str, lex: &Lexicon) -> Result<AldiScore, EstimatorError> {
    score_one(sentence, lex, 1)
}

/// The score as an exact fraction: (out-of-lexicon tokens, tokens).
pub fn lexicon_oov(sentence: &str, lex: &Lexicon) -> Result<(usize, usize), EstimatorError> {
    oov_counts(sentence, lex, 1)
}

fn oov_counts(sentence: &str, lex: &Lexicon, index: usize) -> Result<(usize, usize), EstimatorError> {
    let tokens = tokenize(&normalize(sentence, &NormalizationConfig::default()));
    if tokens.is_empty() {
        return Err(EstimatorError::EmptySentence { index });
    }
    let oov = tokens.iter().filter(|t| !lex.contains(t)).count();
    Ok((oov, tokens.len()))
}

fn score_one(sentence: &str, lex: &Lexicon, index: usize) -> Result<AldiScore, EstimatorError> {
    let (oov, n) = oov_counts(sentence, lex, index)?;
    Ok(AldiScore::clipped(oov as f64 / n as f64, LexiconEstimator::ID))
}

#[derive(Debug, Clone)]
pub struct LexiconEstimator {
    pub lexicon: Lexicon,
}

impl LexiconEstimator {
    pub const ID: &'static str = "msa-lexicon";

    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon }
    }
}

impl Estimator for LexiconEstimator {
    fn id(&self) -> &str {
        Self::ID
    }

    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError> {
        sentences
            .par_iter()
            .enumerate()
            .map(|(i, s)| score_one(s, &self.lexicon, i + 1))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thresholds() {
        let two = build_lexicon(&["a b a"], 2, "t");
        assert_eq!(two.tokens().collect::<Vec<_>>(), ["a"]);
        let one = build_lexicon(&["a b a"], 1, "t");
        assert_eq!(one.tokens().collect::<Vec<_>>(), ["a", "b"]);
        let empty: [&str; 0] = [];
        assert!(build_lexicon(&empty, 2, "t").is_empty());
    }

    #[test]
    fn counts_span_lines_and_normalize() {
        let lex = build_lexicon(&["كَتب", "كتب جدا", "جـدا"], 2, "t");
        assert!(lex.contains("كتب"));
        assert!(lex.contains("جدا"));
    }

    #[test]
    fn scoring() {
        let lex = Lexicon::from_tokens(["w1", "w2", "w3"], "t");
        assert_eq!(lexicon_score("w1 w2 w3 zz", &lex).unwrap().value, 0.25);
        assert_eq!(lexicon_score("w1 w2", &lex).unwrap().value, 0.0);
        assert!(matches!(
            lexicon_score("  \u{064E} ", &lex),
            Err(EstimatorError::EmptySentence { index: 1 })
        ));
        let est = LexiconEstimator::new(lex);
        let err = est.score_batch(&["w1".into(), "".into()]).unwrap_err();
        assert!(matches!(err, EstimatorError::EmptySentence { index: 2 }));
    }

    #[test]
    fn file_round_trip() {
        let lex = build_lexicon(&["b a c a b"], 2, "t");
        let mut buf = Vec::new();
        lex.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "#aldi-lexicon v1 min_count=2\na\t2\nb\t2\n");
        let back = Lexicon::read(buf.as_slice(), "t").unwrap();
        assert_eq!(back, lex);
        let bare = Lexicon::read("x\ny\n".as_bytes(), "t").unwrap();
        assert!(bare.contains("x") && bare.min_count() == 1);
    }

    #[test]
    fn parallel_count_matches_sequential() {
        let lines: Vec<String> = (0..500).map(|i| format!("t{} t{} common", i % 7, i % 13)).collect();
        let mut seq = LexiconBuilder::new();
        for l in &lines {
            seq.add_line(l);
        }
        assert_eq!(seq.finish(2, "t"), build_lexicon(&lines, 2, "t"));
    }

    proptest! {
        #[test]
        fn antitone_in_lexicon(words in prop::collection::vec("[a-f]{1,3}", 1..12), base in prop::collection::vec("[a-f]{1,3}", 0..10), extra in prop::collection::vec("[a-f]{1,3}", 0..10)) {
            let sentence = words.join(" ");
            let small = Lexicon::from_tokens(&base, "t");
            let big = Lexicon::from_tokens(base.iter().chain(&extra), "t");
            let a = lexicon_score(&sentence, &small).unwrap().value;
            let b = lexicon_score(&sentence, &big).unwrap().value;
            prop_assert!(b <= a);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
