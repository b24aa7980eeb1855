use std::io::BufRead;

use super::{check_aligned, AldiScore, Estimator, EstimatorError};

/// Sentence-level dialect-ID label: MSA or some dialectal variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiLabel {
    Msa,
    Dialect(String),
}

/// Regional and city-level labels emitted by common sentence DI models.
const DIALECT_LABELS: &[&str] = &[
    "EGY", "LEV", "GLF", "MAG", "IRQ", "GEN", "TUN", "MOR", "MGR", "DA", "NOR", "SUD", "YEM",
    // MADAR city codes
    "BEI", "CAI", "DOH", "RAB", "TUN", "ALE", "ALG", "ALX", "AMM", "ASW", "BAG", "BAS", "BEN",
    "DAM", "FES", "JED", "JER", "KHA", "MOS", "MUS", "RIY", "SAL", "SAN", "SFX", "TRI",
];

impl DiLabel {
    pub fn parse(raw: &str) -> Option<Self> {
        let up = raw.trim().to_ascii_uppercase();
        if up == "MSA" {
            Some(DiLabel::Msa)
        } else if DIALECT_LABELS.contains(&up.as_str()) {
            Some(DiLabel::Dialect(up))
        } else {
            None
        }
    }
}

/// 0 for MSA, 1 for any dialect label.
pub fn binary_di_score(label: &str) -> Result<AldiScore, EstimatorError> {
    match DiLabel::parse(label) {
        Some(l) => Ok(score(&l)),
        None => Err(EstimatorError::UnknownLabel {
            line: 1,
            kind: "dialect-ID label",
            value: label.to_owned(),
        }),
    }
}

fn score(label: &DiLabel) -> AldiScore {
    let v = match label {
        DiLabel::Msa => 0.0,
        DiLabel::Dialect(_) => 1.0,
    };
    AldiScore::clipped(v, BinaryDiEstimator::ID)
}

/// One label per line, aligned with the sentences being scored.
pub fn read_label_file<R: BufRead>(reader: R) -> Result<Vec<DiLabel>, EstimatorError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(DiLabel::parse(line).ok_or_else(|| EstimatorError::UnknownLabel {
            line: i + 1,
            kind: "dialect-ID label",
            value: line.to_owned(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BinaryDiEstimator {
    pub labels: Vec<DiLabel>,
}

impl BinaryDiEstimator {
    pub const ID: &'static str = "sentence-di";
}

impl Estimator for BinaryDiEstimator {
    fn id(&self) -> &str {
        Self::ID
    }

    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError> {
        check_aligned("dialect-ID labels", sentences.len(), self.labels.len())?;
        Ok(self.labels.iter().map(score).collect())
    }
}
