use std::fmt::Write as _;

use serde::Serialize;

use super::CommentGroup;
use crate::labels::{Dialect, Level, SentenceKind};
use crate::textnorm::{normalize, tokenize, whitespace_word_count, NormalizationConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCount {
    pub level: Level,
    pub count: usize,
    /// Percentage of the row total, 0 when the row is empty.
    pub percent: f64,
}

/// Annotation counts per level for one sentence kind (or all of them).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindLevelRow {
    pub kind: String,
    pub total: usize,
    pub levels: Vec<LevelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DialectLevelRow {
    pub dialect: Dialect,
    pub total: usize,
    pub levels: Vec<LevelCount>,
}

/// Aggregated scores binned over [0,.25), [.25,.5), [.5,.75), [.75,1].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: [usize; 4],
    pub unscored: usize,
}

impl Histogram {
    pub const LABELS: [&'static str; 4] = ["[0, 0.25)", "[0.25, 0.5)", "[0.5, 0.75)", "[0.75, 1]"];

    pub fn bin(score: f64) -> usize {
        ((score * 4.0).floor() as usize).min(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub groups: usize,
    pub annotations: usize,
    pub by_kind: Vec<KindLevelRow>,
    pub by_dialect: Vec<DialectLevelRow>,
    pub aldi_histogram: Histogram,
    /// Mean words per group before punctuation detachment.
    pub mean_words_whitespace: f64,
    /// Mean tokens per group after punctuation detachment.
    pub mean_tokens_detached: f64,
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

fn level_counts(counts: &[usize; 6], levels: &[Level]) -> (usize, Vec<LevelCount>) {
    let total: usize = levels.iter().map(|l| counts[*l as usize]).sum();
    let rows = levels
        .iter()
        .map(|&level| LevelCount {
            level,
            count: counts[level as usize],
            percent: percent(counts[level as usize], total),
        })
        .collect();
    (total, rows)
}

/// Annotation-level distribution by kind and by dialect, plus the ALDi
/// histogram of whichever groups carry a score.
pub fn corpus_stats(groups: &[CommentGroup]) -> StatsReport {
    let mut by_kind = [[0usize; 6]; 2];
    let mut by_dialect = [[0usize; 6]; 8];
    let mut hist = Histogram::default();
    let (mut words, mut tokens) = (0usize, 0usize);
    let cfg = NormalizationConfig::default();
    for g in groups {
        for a in &g.annotations {
            by_kind[g.kind as usize][a.level as usize] += 1;
            if let Some(d) = a.dialect {
                by_dialect[d as usize][a.level as usize] += 1;
            }
        }
        match g.aldi {
            Some(v) => hist.bins[Histogram::bin(v)] += 1,
            None => hist.unscored += 1,
        }
        let text = normalize(&g.raw_text, &cfg);
        words += whitespace_word_count(&text);
        tokens += tokenize(&text).len();
    }
    let mut all = [0usize; 6];
    for row in &by_kind {
        for (i, c) in row.iter().enumerate() {
            all[i] += c;
        }
    }
    let mut kind_rows = Vec::new();
    for (name, counts) in [
        (SentenceKind::Comment.as_str(), &by_kind[0]),
        (SentenceKind::Control.as_str(), &by_kind[1]),
        ("all", &all),
    ] {
        let (total, levels) = level_counts(counts, &Level::ALL);
        kind_rows.push(KindLevelRow {
            kind: name.to_owned(),
            total,
            levels,
        });
    }
    let dialect_rows = Dialect::ALL
        .iter()
        .map(|&dialect| {
            let (total, levels) = level_counts(&by_dialect[dialect as usize], &Level::ALL);
            DialectLevelRow {
                dialect,
                total,
                levels,
            }
        })
        .collect();
    let n = groups.len();
    let mean = |x: usize| if n == 0 { 0.0 } else { x as f64 / n as f64 };
    StatsReport {
        groups: n,
        annotations: all.iter().sum(),
        by_kind: kind_rows,
        by_dialect: dialect_rows,
        aldi_histogram: hist,
        mean_words_whitespace: mean(words),
        mean_tokens_detached: mean(tokens),
    }
}

impl StatsReport {
    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "groups        {}", self.groups);
        let _ = writeln!(s, "annotations   {}", self.annotations);
        let _ = writeln!(s, "mean words    {:.2} (whitespace) / {:.2} (punctuation detached)", self.mean_words_whitespace, self.mean_tokens_detached);
        let _ = writeln!(s);
        let _ = write!(s, "{:<12}", "type");
        for l in Level::ALL {
            let _ = write!(s, "{:>20}", l.as_str());
        }
        let _ = writeln!(s);
        let row = |s: &mut String, name: &str, levels: &[LevelCount]| {
            let _ = write!(s, "{name:<12}");
            for c in levels {
                let _ = write!(s, "{:>20}", format!("{} ({:.2}%)", c.count, c.percent));
            }
            let _ = writeln!(s);
        };
        for r in &self.by_kind {
            row(&mut s, &r.kind, &r.levels);
        }
        let _ = writeln!(s);
        let _ = write!(s, "{:<12}", "dialect");
        for l in Level::ALL {
            let _ = write!(s, "{:>20}", l.as_str());
        }
        let _ = writeln!(s);
        for r in &self.by_dialect {
            row(&mut s, r.dialect.as_str(), &r.levels);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>10}", "ALDi bin", "groups");
        for (label, count) in Histogram::LABELS.iter().zip(self.aldi_histogram.bins) {
            let _ = writeln!(s, "{label:<14}{count:>10}");
        }
        if self.aldi_histogram.unscored > 0 {
            let _ = writeln!(s, "{:<14}{:>10}", "unscored", self.aldi_histogram.unscored);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Source;
    use Level::*;

    #[test]
    fn empty_is_all_zero() {
        let r = corpus_stats(&[]);
        assert_eq!(r.groups, 0);
        assert_eq!(r.annotations, 0);
        assert!(r.by_kind.iter().all(|k| k.total == 0 && k.levels.iter().all(|c| c.count == 0 && c.percent == 0.0)));
        assert_eq!(r.aldi_histogram, Histogram::default());
        assert_eq!(r.mean_words_whitespace, 0.0);
    }

    #[test]
    fn counts_and_percentages() {
        let mut a = CommentGroup::new(Source::Youm7, "a", "جدا....", SentenceKind::Comment, &[Msa, Msa, Most, NotArabic]);
        a.annotations[2].dialect = Some(Dialect::Egy);
        a.aldi = Some(1.0 / 3.0);
        let mut b = CommentGroup::new(Source::Youm7, "a", "x y", SentenceKind::Control, &[Msa, Msa, Missing]);
        b.aldi = Some(0.0);
        let r = corpus_stats(&[a, b]);
        assert_eq!(r.annotations, 7);
        let comment = &r.by_kind[0];
        assert_eq!(comment.total, 4);
        assert_eq!(comment.levels[0].count, 2);
        assert_eq!(comment.levels[0].percent, 50.0);
        let all = &r.by_kind[2];
        assert_eq!(all.levels[0].count, 4);
        assert_eq!(all.levels[5].count, 1);
        assert_eq!(r.by_dialect[Dialect::Egy as usize].levels[Most as usize].count, 1);
        assert_eq!(r.aldi_histogram.bins, [1, 1, 0, 0]);
        assert_eq!(r.mean_words_whitespace, 1.5);
        assert_eq!(r.mean_tokens_detached, 2.0);
        assert!(r.to_text().contains("50.00%"));
    }

    #[test]
    fn histogram_edges() {
        assert_eq!(Histogram::bin(0.0), 0);
        assert_eq!(Histogram::bin(0.25), 1);
        assert_eq!(Histogram::bin(2.0 / 3.0), 2);
        assert_eq!(Histogram::bin(0.75), 3);
        assert_eq!(Histogram::bin(1.0), 3);
    }
}
