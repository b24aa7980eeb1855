//! From annotation rows to the scored, split dataset.
//!
//! The pipeline is: [`group_comments`] → [`discard_junk`] → [`aggregate`] →
//! [`make_splits`] (or [`SplitAssignment::apply`]). [`build_dataset`] runs all
//! of it and collects the numbers worth reporting along the way.

mod discard;
mod io;
mod splits;
mod stats;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::AnnotationRow;
use crate::labels::{Dialect, Level, SentenceKind, Source};
use crate::textnorm::{normalize, NormalizationConfig};

pub use discard::{categorize_discard, DiscardCategory};
pub use io::{
    format_fixed, read_dataset, read_dataset_file, write_dataset, write_discards, DatasetRecord,
    DATASET_HEADER,
};
pub use splits::{make_splits, Split, SplitAssignment, SplitPlan};
pub use stats::{corpus_stats, DialectLevelRow, Histogram, KindLevelRow, StatsReport};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("group {article_id}/{text:?} has no annotations")]
    EmptyGroup { article_id: String, text: String },
    #[error("group {article_id}/{text:?} has no MSA/Little/Mixed/Most annotation to aggregate")]
    NothingToAggregate { article_id: String, text: String },
    #[error("{source_name}: {articles} article(s); at least 3 are needed to split")]
    TooFewArticles { source_name: Source, articles: usize },
    #[error("group {article_id} has no ALDi score; aggregate before splitting")]
    Unscored { article_id: String },
    #[error("split assignment has no entry for {source_name}/{article_id}")]
    UnassignedArticle { source_name: Source, article_id: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which text identifies "identical" comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KeyMode {
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub level: Level,
    pub dialect: Option<Dialect>,
    pub worker_id: String,
}

/// Identical sentences on one article, with every annotation they received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentGroup {
    pub source: Source,
    pub article_id: String,
    /// Grouping key text (normalized unless grouping in raw mode).
    pub canonical_text: String,
    /// First raw spelling seen in input order.
    pub raw_text: String,
    pub kind: SentenceKind,
    pub annotations: Vec<Annotation>,
    pub aldi: Option<f64>,
    pub split: Option<Split>,
}

impl CommentGroup {
    pub fn new(source: Source, article_id: &str, text: &str, kind: SentenceKind, levels: &[Level]) -> Self {
        Self {
            source,
            article_id: article_id.to_owned(),
            canonical_text: text.to_owned(),
            raw_text: text.to_owned(),
            kind,
            annotations: levels
                .iter()
                .enumerate()
                .map(|(i, &level)| Annotation {
                    level,
                    dialect: None,
                    worker_id: format!("w{i}"),
                })
                .collect(),
            aldi: None,
            split: None,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        self.annotations.iter().map(|a| a.level)
    }

    pub fn usable_count(&self) -> usize {
        self.levels().filter(|l| l.is_usable()).count()
    }

    fn sort_key(&self) -> (Source, &str, &str, SentenceKind) {
        (self.source, &self.article_id, &self.canonical_text, self.kind)
    }
}

/// Groups rows by (source, article, text, kind). Output is sorted by that key,
/// so it does not depend on input order or thread count.
pub fn group_comments(rows: &[AnnotationRow], mode: KeyMode) -> Vec<CommentGroup> {
    let cfg = NormalizationConfig::default();
    let keys: Vec<String> = rows
        .par_iter()
        .map(|r| match mode {
            KeyMode::Normalized => normalize(&r.sentence_text, &cfg),
            KeyMode::Raw => r.sentence_text.clone(),
        })
        .collect();

    let mut index: HashMap<(Source, &str, &str, SentenceKind), usize> = HashMap::new();
    let mut groups: Vec<CommentGroup> = Vec::new();
    for (row, key) in rows.iter().zip(&keys) {
        let slot = *index
            .entry((row.source, row.article_id.as_str(), key.as_str(), row.kind))
            .or_insert_with(|| {
                groups.push(CommentGroup {
                    source: row.source,
                    article_id: row.article_id.clone(),
                    canonical_text: key.clone(),
                    raw_text: row.sentence_text.clone(),
                    kind: row.kind,
                    annotations: Vec::new(),
                    aldi: None,
                    split: None,
                });
                groups.len() - 1
            });
        groups[slot].annotations.push(Annotation {
            level: row.level,
            dialect: row.dialect,
            worker_id: row.annotator.worker_id.clone(),
        });
    }
    groups.par_sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    groups
}

/// Whether at least 2/3 of a group's level annotations are NotArabic or Missing.
pub fn is_junk(group: &CommentGroup) -> Result<bool, DatasetError> {
    let total = group.annotations.len();
    if total == 0 {
        return Err(DatasetError::EmptyGroup {
            article_id: group.article_id.clone(),
            text: group.canonical_text.clone(),
        });
    }
    let bad = total - group.usable_count();
    Ok(3 * bad >= 2 * total)
}

/// Partitions groups into (kept, discarded), preserving order in each.
pub fn discard_junk(
    groups: Vec<CommentGroup>,
) -> Result<(Vec<CommentGroup>, Vec<CommentGroup>), DatasetError> {
    let mut kept = Vec::with_capacity(groups.len());
    let mut discarded = Vec::new();
    for g in groups {
        if is_junk(&g)? {
            discarded.push(g);
        } else {
            kept.push(g);
        }
    }
    Ok((kept, discarded))
}

/// Exact ALDi of a group as `sum of ordinals / (3 * usable count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreFraction {
    pub ordinal_sum: u64,
    pub usable: u64,
}

impl ScoreFraction {
    pub fn of(group: &CommentGroup) -> Result<Self, DatasetError> {
        let (sum, n) = group
            .levels()
            .filter_map(Level::ordinal)
            .fold((0u64, 0u64), |(s, n), k| (s + u64::from(k), n + 1));
        if n == 0 {
            return Err(DatasetError::NothingToAggregate {
                article_id: group.article_id.clone(),
                text: group.canonical_text.clone(),
            });
        }
        Ok(Self {
            ordinal_sum: sum,
            usable: n,
        })
    }

    pub fn value(self) -> f64 {
        self.ordinal_sum as f64 / (3 * self.usable) as f64
    }

    /// Six decimals, rounded half to even on the exact rational.
    pub fn to_fixed6(self) -> String {
        format_fraction(self.ordinal_sum, 3 * self.usable, 6)
    }
}

/// Formats `num / den` with `places` decimals, round-half-even, exactly.
pub fn format_fraction(num: u64, den: u64, places: u32) -> String {
    let scale = 10u128.pow(places);
    let scaled = u128::from(num) * scale;
    let den = u128::from(den);
    let (mut q, r) = (scaled / den, scaled % den);
    if 2 * r > den || (2 * r == den && q % 2 == 1) {
        q += 1;
    }
    if places == 0 {
        return q.to_string();
    }
    format!("{}.{:0width$}", q / scale, q % scale, width = places as usize)
}

/// Mean of the numeric level values, NotArabic and Missing left out.
///
/// ```
/// use aldi::dataset::{aggregate, CommentGroup};
/// use aldi::labels::{Level, SentenceKind, Source};
///
/// let g = CommentGroup::new(Source::Youm7, "a1", "برافو", SentenceKind::Comment,
///     &[Level::Msa, Level::Msa, Level::Little]);
/// assert_eq!(format!("{:.2}", aggregate(&g).unwrap()), "0.11");
/// ```
pub fn aggregate(group: &CommentGroup) -> Result<f64, DatasetError> {
    ScoreFraction::of(group).map(ScoreFraction::value)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub key_mode: KeyMode,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscardCount {
    pub category: DiscardCategory,
    pub groups: usize,
}

/// Counts along the build, kept for reports.
#[derive(Debug, Clone, Serialize)]
pub struct BuildSummary {
    pub annotation_rows: usize,
    pub grouped: usize,
    /// Group count under the other key mode, for comparison.
    pub grouped_normalized_key: usize,
    pub grouped_raw_key: usize,
    pub groups_over_three_annotations: usize,
    pub discarded: usize,
    pub kept: usize,
    pub discard_categories: Vec<DiscardCount>,
    pub seed: u64,
    pub splits_from_assignment: bool,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub kept: Vec<CommentGroup>,
    pub discarded: Vec<(CommentGroup, DiscardCategory)>,
    pub summary: BuildSummary,
    /// Annotation-level statistics before the discard step.
    pub stats_all: StatsReport,
    /// Statistics of the kept groups.
    pub stats_kept: StatsReport,
}

/// Runs grouping, discarding, aggregation and splitting.
pub fn build_dataset(
    rows: &[AnnotationRow],
    opts: BuildOptions,
    assignment: Option<&SplitAssignment>,
) -> Result<BuildOutput, DatasetError> {
    let mut groups = group_comments(rows, opts.key_mode);
    // score what can be scored so the pre-discard histogram is meaningful;
    // groups with no usable annotation stay unscored
    groups.par_iter_mut().for_each(|g| g.aldi = aggregate(g).ok());
    let other = match opts.key_mode {
        KeyMode::Normalized => group_comments(rows, KeyMode::Raw).len(),
        KeyMode::Raw => group_comments(rows, KeyMode::Normalized).len(),
    };
    let (grouped_normalized_key, grouped_raw_key) = match opts.key_mode {
        KeyMode::Normalized => (groups.len(), other),
        KeyMode::Raw => (other, groups.len()),
    };
    let stats_all = corpus_stats(&groups);
    let grouped = groups.len();
    let over_three = groups.iter().filter(|g| g.annotations.len() > 3).count();

    let (mut kept, discarded) = discard_junk(groups)?;
    kept.par_iter_mut().try_for_each(|g| {
        g.aldi = Some(aggregate(g)?);
        Ok::<_, DatasetError>(())
    })?;
    match assignment {
        Some(a) => a.apply(&mut kept)?,
        None => make_splits(&mut kept, &SplitPlan::new(opts.seed))?,
    }

    let discarded: Vec<_> = discarded
        .into_iter()
        .map(|g| {
            let c = categorize_discard(&g);
            (g, c)
        })
        .collect();
    let discard_categories = DiscardCategory::ALL
        .iter()
        .map(|&category| DiscardCount {
            category,
            groups: discarded.iter().filter(|(_, c)| *c == category).count(),
        })
        .collect();
    let stats_kept = corpus_stats(&kept);
    Ok(BuildOutput {
        summary: BuildSummary {
            annotation_rows: rows.len(),
            grouped,
            grouped_normalized_key,
            grouped_raw_key,
            groups_over_three_annotations: over_three,
            discarded: discarded.len(),
            kept: kept.len(),
            discard_categories,
            seed: opts.seed,
            splits_from_assignment: assignment.is_some(),
        },
        kept,
        discarded,
        stats_all,
        stats_kept,
    })
}
