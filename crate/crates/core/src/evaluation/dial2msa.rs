use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::textnorm::{normalize, tokenize, NormalizationConfig};

/// Filter settings. Term lists are per dialect code and may hold
/// multi-word terms.
///
/// ```toml
/// max_confidence = 1.0
///
/// [terms]
/// EGY = ["ده", "مش", "عايز"]
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dial2MsaConfig {
    pub max_confidence: f64,
    #[serde(default)]
    pub terms: BTreeMap<String, Vec<String>>,
}

impl Dial2MsaConfig {
    pub fn from_toml(text: &str) -> Result<Self, EvalError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dial2MsaRecord {
    pub id: String,
    pub dialect: String,
    pub confidence: Option<f64>,
    pub dialect_text: String,
    pub translations: Vec<String>,
    pub line: usize,
}

pub const DIAL2MSA_HEADER: [&str; 4] = ["id", "dialect", "confidence", "dialect_text"];

/// Tab-separated: `id dialect confidence dialect_text` followed by one or
/// more MSA translation columns. An empty confidence cell reads as `None`.
pub fn read_dial2msa<R: BufRead>(reader: R) -> Result<Vec<Dial2MsaRecord>, EvalError> {
    let mut out = Vec::new();
    let mut width = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let bad = |message: String| EvalError::Format { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if i == 0 {
            if cols.len() < 5 || cols[..4] != DIAL2MSA_HEADER {
                return Err(bad(format!(
                    "expected header {} followed by translation columns",
                    DIAL2MSA_HEADER.join("\\t")
                )));
            }
            width = cols.len();
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if cols.len() != width {
            return Err(bad(format!("expected {width} columns, found {}", cols.len())));
        }
        let conf = cols[2].trim();
        let confidence = if conf.is_empty() {
            None
        } else {
            Some(
                conf.parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .ok_or_else(|| bad(format!("confidence {conf:?} is not a number")))?,
            )
        };
        out.push(Dial2MsaRecord {
            id: cols[0].to_owned(),
            dialect: cols[1].trim().to_owned(),
            confidence,
            dialect_text: cols[3].to_owned(),
            translations: cols[4..].iter().filter(|t| !t.trim().is_empty()).map(|t| t.to_string()).collect(),
            line: i + 1,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub kept: Vec<Dial2MsaRecord>,
    pub low_confidence: usize,
    pub dialectal_term: usize,
    pub missing_confidence: usize,
    pub warnings: Vec<String>,
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Keeps records whose confidence equals `max_confidence` and none of whose
/// translations contain a distinctive term of the record's dialect. Terms
/// match whole normalized tokens, or contiguous token runs for multi-word
/// terms. Records without a confidence are skipped with a warning.
pub fn filter_dial2msa(records: Vec<Dial2MsaRecord>, cfg: &Dial2MsaConfig) -> FilterOutcome {
    let norm = NormalizationConfig::default();
    let toks = |s: &str| tokenize(&normalize(s, &norm)).into_vec();
    let terms: BTreeMap<String, Vec<Vec<String>>> = cfg
        .terms
        .iter()
        .map(|(d, ts)| (d.to_ascii_uppercase(), ts.iter().map(|t| toks(t)).collect()))
        .collect();
    let mut out = FilterOutcome::default();
    for r in records {
        let Some(c) = r.confidence else {
            out.warnings.push(format!("line {}: record {} has no confidence; skipped", r.line, r.id));
            out.missing_confidence += 1;
            continue;
        };
        if c != cfg.max_confidence {
            out.low_confidence += 1;
            continue;
        }
        let dialect_terms = terms.get(&r.dialect.to_ascii_uppercase());
        let leaked = dialect_terms.is_some_and(|ts| {
            r.translations.iter().any(|t| {
                let tt = toks(t);
                ts.iter().any(|term| contains_run(&tt, term))
            })
        });
        if leaked {
            out.dialectal_term += 1;
        } else {
            out.kept.push(r);
        }
    }
    out
}
