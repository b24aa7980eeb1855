//! Score-quality evaluation: RMSE against gold, D′ between two score
//! populations, box-plot summaries, DIAL2MSA filtering and contrastive pairs.

mod contrastive;
mod dial2msa;

use std::collections::HashMap;
use std::io::BufRead;

use serde::Serialize;

use crate::dataset::{DatasetRecord, Split};
use crate::estimators::EstimatorError;
use crate::labels::SentenceKind;

pub use contrastive::{
    contrastive_matrix, read_pairs, ContrastiveCell, ContrastivePair, ContrastiveRow, ContrastiveTable, Gender,
    GenderScores, Variant,
};
pub use dial2msa::{filter_dial2msa, read_dial2msa, Dial2MsaConfig, Dial2MsaRecord, FilterOutcome};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no {what} to evaluate")]
    EmptySelection { what: String },
    #[error("group {group} has {found} values; D' needs at least 2")]
    TooFewValues { group: char, found: usize },
    #[error("D' is undefined: both groups have zero variance and different means")]
    UndefinedDPrime,
    #[error("{what} {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("feature {feature} ({word_order}, {gender}) lacks its {variant} variant")]
    MissingVariant {
        feature: String,
        word_order: String,
        gender: String,
        variant: &'static str,
    },
    #[error("prediction for id {0} has no gold record")]
    UnknownId(String),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Config(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A gold score paired with a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub gold: f64,
    pub predicted: f64,
    pub subset: SentenceKind,
}

impl ScoredPair {
    pub fn new(gold: f64, predicted: f64, subset: SentenceKind) -> Result<Self, EvalError> {
        for (what, value) in [("gold score", gold), ("predicted score", predicted)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EvalError::OutOfRange { what, value });
            }
        }
        Ok(Self {
            gold,
            predicted,
            subset,
        })
    }
}

/// Root-mean-square error over the pairs in `subset` (all when `None`).
///
/// ```
/// use aldi::evaluation::{rmse, ScoredPair};
/// use aldi::labels::SentenceKind::Comment;
///
/// let pairs = [
///     ScoredPair::new(0.0, 1.0, Comment).unwrap(),
///     ScoredPair::new(1.0, 0.0, Comment).unwrap(),
/// ];
/// assert_eq!(rmse(&pairs, None).unwrap(), 1.0);
/// ```
pub fn rmse(pairs: &[ScoredPair], subset: Option<SentenceKind>) -> Result<f64, EvalError> {
    let (sum, n) = pairs
        .iter()
        .filter(|p| subset.is_none_or(|s| p.subset == s))
        .fold((0.0, 0usize), |(s, n), p| (s + (p.gold - p.predicted).powi(2), n + 1));
    if n == 0 {
        return Err(EvalError::EmptySelection {
            what: subset.map_or("pairs".into(), |s| format!("{} pairs", s.as_str())),
        });
    }
    Ok((sum / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmseEntry {
    pub rmse: f64,
    pub n: usize,
}

/// RMSE for controls, comments and both; a subset with no pairs is `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseReport {
    pub control: Option<RmseEntry>,
    pub comment: Option<RmseEntry>,
    pub all: RmseEntry,
}

pub fn rmse_report(pairs: &[ScoredPair]) -> Result<RmseReport, EvalError> {
    let entry = |s: Option<SentenceKind>| -> Result<RmseEntry, EvalError> {
        Ok(RmseEntry {
            rmse: rmse(pairs, s)?,
            n: pairs.iter().filter(|p| s.is_none_or(|k| p.subset == k)).count(),
        })
    };
    Ok(RmseReport {
        control: entry(Some(SentenceKind::Control)).ok(),
        comment: entry(Some(SentenceKind::Comment)).ok(),
        all: entry(None)?,
    })
}

impl RmseReport {
    pub fn to_text(&self, places: usize) -> String {
        let cell = |e: &Option<RmseEntry>| e.map_or("-".to_owned(), |e| format!("{:.places$}", e.rmse));
        let n = |e: &Option<RmseEntry>| e.map_or(0, |e| e.n);
        format!(
            "{:<10}{:>10}{:>10}{:>10}\n{:<10}{:>10}{:>10}{:>10}\n{:<10}{:>10}{:>10}{:>10}\n",
            "",
            "Control",
            "Comment",
            "All",
            "N",
            n(&self.control),
            n(&self.comment),
            self.all.n,
            "RMSE",
            cell(&self.control),
            cell(&self.comment),
            format!("{:.places$}", self.all.rmse),
        )
    }
}

/// `id TAB score` per line, or a bare score (id = line number). An
/// `id TAB score` header line is skipped.
pub fn read_scores<R: BufRead>(reader: R) -> Result<Vec<(String, f64)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, raw) = match line.rsplit_once('\t') {
            Some((id, s)) => (id.to_owned(), s.trim()),
            None => ((i + 1).to_string(), line.trim()),
        };
        if i == 0 && raw == "score" {
            continue;
        }
        let v: f64 = raw.parse().map_err(|_| EvalError::Format {
            line: i + 1,
            message: format!("score {raw:?} is not a number"),
        })?;
        if !v.is_finite() {
            return Err(EvalError::Format {
                line: i + 1,
                message: format!("score {raw:?} is not finite"),
            });
        }
        out.push((id, v));
    }
    Ok(out)
}

/// Joins predictions to gold records by id, keeping records in `split`
/// (all when `None`). Every prediction must name a gold record; gold records
/// without a prediction are left out.
pub fn pair_with_gold(
    gold: &[DatasetRecord],
    predictions: &[(String, f64)],
    split: Option<Split>,
) -> Result<Vec<ScoredPair>, EvalError> {
    let by_id: HashMap<&str, &DatasetRecord> = gold.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut out = Vec::new();
    for (id, pred) in predictions {
        let rec = by_id.get(id.as_str()).ok_or_else(|| EvalError::UnknownId(id.clone()))?;
        if split.is_none_or(|s| rec.split == Some(s)) {
            out.push(ScoredPair::new(rec.aldi, *pred, rec.kind)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Variance {
    /// Divisor n − 1.
    #[default]
    Sample,
    /// Divisor n.
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DPrimeOptions {
    pub variance: Variance,
    /// Drop each group's box-plot outliers first.
    pub trim_outliers: bool,
}

fn mean_var(xs: &[f64], variance: Variance) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let div = match variance {
        Variance::Sample => n - 1.0,
        Variance::Population => n,
    };
    (mean, ss / div)
}

/// |mean_a − mean_b| / sqrt((var_a + var_b) / 2).
///
/// ```
/// use aldi::evaluation::{d_prime, DPrimeOptions};
///
/// let d = d_prime(&[0.8, 1.0], &[0.0, 0.2], DPrimeOptions::default()).unwrap();
/// assert!((d - 5.657).abs() < 1e-3);
/// ```
pub fn d_prime(a: &[f64], b: &[f64], opts: DPrimeOptions) -> Result<f64, EvalError> {
    let trim = |xs: &[f64]| -> Vec<f64> {
        if opts.trim_outliers && !xs.is_empty() {
            let s = summarize_distribution(xs);
            xs.iter()
                .copied()
                .filter(|x| *x >= s.whisker_low && *x <= s.whisker_high)
                .collect()
        } else {
            xs.to_vec()
        }
    };
    let (a, b) = (trim(a), trim(b));
    for (group, xs) in [('A', &a), ('B', &b)] {
        if xs.len() < 2 {
            return Err(EvalError::TooFewValues {
                group,
                found: xs.len(),
            });
        }
    }
    let (ma, va) = mean_var(&a, opts.variance);
    let (mb, vb) = mean_var(&b, opts.variance);
    let pooled = ((va + vb) / 2.0).sqrt();
    let diff = (ma - mb).abs();
    if pooled == 0.0 {
        return if diff == 0.0 {
            Ok(0.0)
        } else {
            Err(EvalError::UndefinedDPrime)
        };
    }
    Ok(diff / pooled)
}

/// Box-plot summary of a score population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Quartiles are medians of the lower and upper halves, the overall median
/// excluded from both halves when n is odd. Whiskers reach the most extreme
/// observations within 1.5·IQR of the box; everything beyond is an outlier.
///
/// # Panics
/// On an empty slice.
pub fn summarize_distribution(scores: &[f64]) -> DistributionSummary {
    assert!(!scores.is_empty(), "summarize_distribution needs at least one score");
    let mut xs = scores.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let median = median_sorted(&xs);
    let (q1, q3) = if n == 1 {
        (xs[0], xs[0])
    } else {
        (median_sorted(&xs[..n / 2]), median_sorted(&xs[n.div_ceil(2)..]))
    };
    let reach = 1.5 * (q3 - q1);
    let (lo, hi) = (q1 - reach, q3 + reach);
    let inside = || xs.iter().copied().filter(|x| *x >= lo && *x <= hi);
    let whisker_low = inside().next().unwrap_or(q1);
    let whisker_high = inside().next_back().unwrap_or(q3);
    DistributionSummary {
        n,
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers: xs.iter().copied().filter(|x| *x < lo || *x > hi).collect(),
    }
}
