use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Serialize;

use super::EvalError;
use crate::estimators::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variant {
    Msa,
    Egy,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Msa => "MSA",
            Variant::Egy => "EGY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gender {
    Masculine,
    Feminine,
    /// The feature has no gendered forms.
    Unspecified,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Masculine => "masc",
            Gender::Feminine => "fem",
            Gender::Unspecified => "-",
        }
    }

    fn parse(raw: &str) -> Option<Self> {
        Some(match raw.trim().to_ascii_lowercase().as_str() {
            "m" | "masc" | "masculine" => Gender::Masculine,
            "f" | "fem" | "feminine" => Gender::Feminine,
            "" | "-" | "none" => Gender::Unspecified,
            _ => return None,
        })
    }
}

/// One line of a pair file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastivePair {
    pub feature: String,
    pub word_order: String,
    pub gender: Gender,
    pub variant: Variant,
    pub text: String,
}

pub const PAIRS_HEADER: [&str; 5] = ["feature", "word_order", "gender", "variant", "text"];

/// Tab-separated with the [`PAIRS_HEADER`] header line.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<ContrastivePair>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let bad = |message: String| EvalError::Format { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if i == 0 {
            if cols != PAIRS_HEADER {
                return Err(bad(format!("expected header {}", PAIRS_HEADER.join("\\t"))));
            }
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if cols.len() != PAIRS_HEADER.len() {
            return Err(bad(format!("expected {} columns, found {}", PAIRS_HEADER.len(), cols.len())));
        }
        let gender = Gender::parse(cols[2]).ok_or_else(|| bad(format!("unknown gender {:?}", cols[2])))?;
        let variant = match cols[3].trim().to_ascii_uppercase().as_str() {
            "MSA" => Variant::Msa,
            "EGY" | "DA" => Variant::Egy,
            other => return Err(bad(format!("unknown variant {other:?}"))),
        };
        out.push(ContrastivePair {
            feature: cols[0].trim().to_owned(),
            word_order: cols[1].trim().to_owned(),
            gender,
            variant,
            text: cols[4].trim().to_owned(),
        });
    }
    Ok(out)
}

/// Scores for one variant; masculine and feminine collapse when equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GenderScores {
    Single(f64),
    Split { masculine: f64, feminine: f64 },
}

impl GenderScores {
    fn from_map(m: &BTreeMap<Gender, f64>) -> Self {
        match (m.get(&Gender::Masculine), m.get(&Gender::Feminine)) {
            (Some(&a), Some(&b)) if a != b => GenderScores::Split {
                masculine: a,
                feminine: b,
            },
            _ => GenderScores::Single(*m.values().next().expect("at least one gender")),
        }
    }

    pub fn format(&self, places: usize) -> String {
        match self {
            GenderScores::Single(v) => format!("{v:.places$}"),
            GenderScores::Split { masculine, feminine } => format!("{masculine:.places$}/{feminine:.places$}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastiveCell {
    pub estimator: String,
    pub msa: GenderScores,
    pub egy: GenderScores,
    /// Some gender form scores MSA at or above its EGY counterpart.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastiveRow {
    pub feature: String,
    pub word_order: String,
    pub cells: Vec<ContrastiveCell>,
}

impl ContrastiveRow {
    pub fn flagged(&self) -> bool {
        self.cells.iter().any(|c| c.flagged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastiveTable {
    pub rows: Vec<ContrastiveRow>,
}

impl ContrastiveTable {
    pub fn to_tsv(&self, places: usize) -> String {
        let mut s = String::from("feature\tword_order\testimator\tMSA\tEGY\tflagged\n");
        for r in &self.rows {
            for c in &r.cells {
                s += &format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.feature,
                    r.word_order,
                    c.estimator,
                    c.msa.format(places),
                    c.egy.format(places),
                    c.flagged
                );
            }
        }
        s
    }
}

type RowKey = (String, String);

/// Scores every text with every estimator and lays the results out one row
/// per (feature, word order), in first-appearance order. Texts reach the
/// estimators in file order, so side files (DI labels) align with the pair
/// file's lines.
pub fn contrastive_matrix(pairs: &[ContrastivePair], estimators: &[&dyn Estimator]) -> Result<ContrastiveTable, EvalError> {
    let mut order: Vec<RowKey> = Vec::new();
    let mut slots: BTreeMap<(RowKey, Gender, Variant), usize> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        let key = (p.feature.clone(), p.word_order.clone());
        if !order.contains(&key) {
            order.push(key.clone());
        }
        if slots.insert((key, p.gender, p.variant), i).is_some() {
            return Err(EvalError::Format {
                line: i + 2,
                message: format!(
                    "duplicate {} {} {} variant of feature {}",
                    p.word_order,
                    p.gender.as_str(),
                    p.variant.as_str(),
                    p.feature
                ),
            });
        }
    }
    for (key, gender, variant) in slots.keys() {
        let other = match variant {
            Variant::Msa => Variant::Egy,
            Variant::Egy => Variant::Msa,
        };
        if !slots.contains_key(&(key.clone(), *gender, other)) {
            return Err(EvalError::MissingVariant {
                feature: key.0.clone(),
                word_order: key.1.clone(),
                gender: gender.as_str().into(),
                variant: other.as_str(),
            });
        }
    }

    let texts: Vec<String> = pairs.iter().map(|p| p.text.clone()).collect();
    let mut scored = Vec::with_capacity(estimators.len());
    for e in estimators {
        let s = e.score_batch(&texts)?;
        scored.push((e.id().to_owned(), s));
    }

    let rows = order
        .into_iter()
        .map(|key| {
            let cells = scored
                .iter()
                .map(|(id, scores)| {
                    let mut msa = BTreeMap::new();
                    let mut egy = BTreeMap::new();
                    for ((k, g, v), &i) in &slots {
                        if *k == key {
                            let target = if *v == Variant::Msa { &mut msa } else { &mut egy };
                            target.insert(*g, scores[i].value);
                        }
                    }
                    let flagged = msa.iter().any(|(g, m)| *m >= egy[g]);
                    ContrastiveCell {
                        estimator: id.clone(),
                        msa: GenderScores::from_map(&msa),
                        egy: GenderScores::from_map(&egy),
                        flagged,
                    }
                })
                .collect();
            ContrastiveRow {
                feature: key.0,
                word_order: key.1,
                cells,
            }
        })
        .collect();
    Ok(ContrastiveTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{BinaryDiEstimator, DiLabel, Lexicon, LexiconEstimator};

    const F3: &str = "feature\tword_order\tgender\tvariant\ttext\n\
        F3\tVSO\tfem\tMSA\tقيلت الحقيقة\n\
        F3\tVSO\tfem\tEGY\tاتقالت الحقيقة\n\
        F3\tVSO\tmasc\tMSA\tقيل الكلام\n\
        F3\tVSO\tmasc\tEGY\tاتقال الكلام\n";

    #[test]
    fn lexicon_row() {
        let pairs = read_pairs(F3.as_bytes()).unwrap();
        let lex = LexiconEstimator::new(Lexicon::from_tokens(["قيلت", "قيل", "الحقيقة", "الكلام"], "fixture"));
        let t = contrastive_matrix(&pairs, &[&lex]).unwrap();
        let cell = &t.rows[0].cells[0];
        assert_eq!(cell.msa, GenderScores::Single(0.0));
        assert_eq!(cell.egy, GenderScores::Single(0.5));
        assert!(!t.rows[0].flagged());
        assert_eq!(
            t.to_tsv(2),
            "feature\tword_order\testimator\tMSA\tEGY\tflagged\nF3\tVSO\tmsa-lexicon\t0.00\t0.50\tfalse\n"
        );
    }

    #[test]
    fn genders_split_when_different() {
        let pairs = read_pairs(F3.as_bytes()).unwrap();
        let lex = LexiconEstimator::new(Lexicon::from_tokens(["قيلت", "قيل", "الحقيقة"], "fixture"));
        let cell = &contrastive_matrix(&pairs, &[&lex]).unwrap().rows[0].cells[0];
        assert_eq!(
            cell.msa,
            GenderScores::Split {
                masculine: 0.5,
                feminine: 0.0
            }
        );
        assert_eq!(cell.msa.format(2), "0.50/0.00");
    }

    #[test]
    fn binary_di_and_degenerate_rows() {
        let text = "feature\tword_order\tgender\tvariant\ttext\nX\tVSO\t-\tMSA\tنص\nX\tVSO\t-\tEGY\tنص\n";
        let pairs = read_pairs(text.as_bytes()).unwrap();
        let di = BinaryDiEstimator {
            labels: vec![DiLabel::Msa, DiLabel::Dialect("EGY".into())],
        };
        let lex = LexiconEstimator::new(Lexicon::from_tokens(["نص"], "t"));
        let t = contrastive_matrix(&pairs, &[&di, &lex]).unwrap();
        assert_eq!(t.rows[0].cells[0].msa, GenderScores::Single(0.0));
        assert_eq!(t.rows[0].cells[0].egy, GenderScores::Single(1.0));
        assert!(!t.rows[0].cells[0].flagged);
        assert!(t.rows[0].cells[1].flagged);
    }

    #[test]
    fn structural_errors() {
        let missing = "feature\tword_order\tgender\tvariant\ttext\nX\tVSO\t-\tMSA\tنص\n";
        let pairs = read_pairs(missing.as_bytes()).unwrap();
        let lex = LexiconEstimator::new(Lexicon::from_tokens(["نص"], "t"));
        assert!(matches!(
            contrastive_matrix(&pairs, &[&lex]),
            Err(EvalError::MissingVariant { variant: "EGY", .. })
        ));
        assert!(read_pairs("bad header\n".as_bytes()).is_err());
        let bad_variant = "feature\tword_order\tgender\tvariant\ttext\nX\tVSO\t-\tFRA\tنص\n";
        assert!(matches!(read_pairs(bad_variant.as_bytes()), Err(EvalError::Format { line: 2, .. })));
    }
}
