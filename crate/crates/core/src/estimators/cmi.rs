use std::io::BufRead;

use serde::Serialize;

use super::{check_aligned, AldiScore, Estimator, EstimatorError};

/// Token-level dialect-ID tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenTag {
    Msa,
    Egy,
    NamedEntity,
    Ambiguous,
    Mixed,
    Other,
}

impl TokenTag {
    pub const ALL: [TokenTag; 6] = [
        TokenTag::Msa,
        TokenTag::Egy,
        TokenTag::NamedEntity,
        TokenTag::Ambiguous,
        TokenTag::Mixed,
        TokenTag::Other,
    ];

    /// Accepts both our names and the `lang1`/`lang2`/`ne` convention.
    pub fn parse(raw: &str) -> Option<Self> {
        Some(match raw.trim().to_ascii_lowercase().as_str() {
            "msa" | "lang1" => TokenTag::Msa,
            "egy" | "lang2" | "da" => TokenTag::Egy,
            "ne" | "namedentity" | "named-entity" | "named_entity" => TokenTag::NamedEntity,
            "ambiguous" | "amb" => TokenTag::Ambiguous,
            "mixed" => TokenTag::Mixed,
            "other" | "fw" | "unk" => TokenTag::Other,
            _ => return None,
        })
    }
}

/// Tags aligned one-to-one with a sentence's tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenTagSequence {
    pub tokens: Vec<String>,
    pub tags: Vec<TokenTag>,
}

impl TokenTagSequence {
    pub fn sentence(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Code-Mixing Index: EGY / (EGY + MSA), 0 when neither tag occurs.
///
/// ```
/// use aldi::estimators::{cmi_score, TokenTag::*};
///
/// assert!((cmi_score(&[Egy, Egy, Msa, NamedEntity]).value - 2.0 / 3.0).abs() < 1e-12);
/// assert_eq!(cmi_score(&[NamedEntity, Other]).value, 0.0);
/// ```
pub fn cmi_score(tags: &[TokenTag]) -> AldiScore {
    let egy = tags.iter().filter(|t| **t == TokenTag::Egy).count();
    let msa = tags.iter().filter(|t| **t == TokenTag::Msa).count();
    let v = if egy + msa == 0 {
        0.0
    } else {
        egy as f64 / (egy + msa) as f64
    };
    AldiScore::clipped(v, CmiEstimator::ID)
}

/// `token TAB tag` per line, blank line between sentences.
pub fn read_tag_file<R: BufRead>(reader: R) -> Result<Vec<TokenTagSequence>, EstimatorError> {
    let mut out = Vec::new();
    let mut cur = TokenTagSequence {
        tokens: Vec::new(),
        tags: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !cur.tokens.is_empty() {
                out.push(std::mem::replace(
                    &mut cur,
                    TokenTagSequence {
                        tokens: Vec::new(),
                        tags: Vec::new(),
                    },
                ));
            }
            continue;
        }
        let (tok, tag) = line.rsplit_once('\t').ok_or_else(|| EstimatorError::Format {
            line: i + 1,
            message: "expected token<TAB>tag".into(),
        })?;
        let tag = TokenTag::parse(tag).ok_or_else(|| EstimatorError::UnknownLabel {
            line: i + 1,
            kind: "token tag",
            value: tag.to_owned(),
        })?;
        cur.tokens.push(tok.to_owned());
        cur.tags.push(tag);
    }
    if !cur.tokens.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CmiEstimator {
    pub sequences: Vec<TokenTagSequence>,
}

impl CmiEstimator {
    pub const ID: &'static str = "token-di-cmi";
}

impl Estimator for CmiEstimator {
    fn id(&self) -> &str {
        Self::ID
    }

    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError> {
        check_aligned("token-tag sentences", sentences.len(), self.sequences.len())?;
        Ok(self.sequences.iter().map(|s| cmi_score(&s.tags)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use TokenTag::*;

    #[test]
    fn formula() {
        assert_eq!(cmi_score(&[Msa, Msa]).value, 0.0);
        assert_eq!(cmi_score(&[]).value, 0.0);
        assert_eq!(cmi_score(&[Egy]).value, 1.0);
    }

    #[test]
    fn tag_file() {
        let text = "الحقيقة\tlang1\nبتقول\tlang2\n\n\nمصر\tne\n";
        let seqs = read_tag_file(text.as_bytes()).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].tags, [Msa, Egy]);
        assert_eq!(seqs[0].sentence(), "الحقيقة بتقول");
        assert_eq!(seqs[1].tags, [NamedEntity]);
        assert!(matches!(
            read_tag_file("x\tzz\n".as_bytes()),
            Err(EstimatorError::UnknownLabel { line: 1, .. })
        ));
        assert!(matches!(read_tag_file("x\n".as_bytes()), Err(EstimatorError::Format { .. })));
    }

    fn tag() -> impl Strategy<Value = TokenTag> {
        prop::sample::select(TokenTag::ALL.to_vec())
    }

    fn neutral() -> impl Strategy<Value = TokenTag> {
        prop::sample::select(vec![NamedEntity, Ambiguous, Mixed, Other])
    }

    proptest! {
        #[test]
        fn permutation_and_padding_invariant(tags in prop::collection::vec(tag(), 0..20), pad in prop::collection::vec((neutral(), any::<prop::sample::Index>()), 0..10), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let base = cmi_score(&tags).value;
            prop_assert!((0.0..=1.0).contains(&base));
            let mut shuffled = tags.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(cmi_score(&shuffled).value, base);
            if tags.iter().any(|t| matches!(t, Msa | Egy)) {
                let mut padded = tags.clone();
                for (t, at) in pad {
                    padded.insert(at.index(padded.len() + 1), t);
                }
                prop_assert_eq!(cmi_score(&padded).value, base);
            }
        }
    }
}
