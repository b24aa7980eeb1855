use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CommentGroup, DatasetError};
use crate::labels::Source;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "development" | "valid" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// Article-exclusive 80/10/10 split, per source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    pub seed: u64,
}

impl SplitPlan {
    /// Cumulative boundaries in tenths: train until 8/10, dev until 9/10.
    pub const TRAIN_TENTHS: usize = 8;
    pub const DEV_TENTHS: usize = 9;

    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn ratios(&self) -> (f64, f64, f64) {
        (0.8, 0.1, 0.1)
    }
}

/// Assigns a split to every group.
///
/// Per source, articles (sorted by id, then shuffled with a seeded ChaCha8
/// stream per source) go to train until the cumulative group count reaches
/// 80% of the source, then to dev until 90%, then to test.
pub fn make_splits(groups: &mut [CommentGroup], plan: &SplitPlan) -> Result<(), DatasetError> {
    if let Some(g) = groups.iter().find(|g| g.aldi.is_none()) {
        return Err(DatasetError::Unscored {
            article_id: g.article_id.clone(),
        });
    }
    let mut assignment = SplitAssignment::default();
    for source in Source::ALL {
        let mut per_article: BTreeMap<&str, usize> = BTreeMap::new();
        for g in groups.iter().filter(|g| g.source == source) {
            *per_article.entry(&g.article_id).or_default() += 1;
        }
        if per_article.is_empty() {
            continue;
        }
        if per_article.len() < 3 {
            return Err(DatasetError::TooFewArticles {
                source_name: source,
                articles: per_article.len(),
            });
        }
        let total: usize = per_article.values().sum();
        let mut articles: Vec<(&str, usize)> = per_article.into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(source.index() as u64);
        articles.shuffle(&mut rng);

        let mut split = Split::Train;
        let mut cumulative = 0;
        for (article, n) in articles {
            assignment.insert(source, article, split);
            cumulative += n;
            split = match split {
                Split::Train if 10 * cumulative >= SplitPlan::TRAIN_TENTHS * total => Split::Dev,
                Split::Dev if 10 * cumulative >= SplitPlan::DEV_TENTHS * total => Split::Test,
                s => s,
            };
        }
    }
    assignment.apply(groups)
}

/// Article → split table, for reproducing a released split exactly.
///
/// File format: optional `#` comment lines, then `source TAB article_id TAB
/// split` per line. Two-column lines (`article_id TAB split`) apply to the
/// article in every source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    by_source: BTreeMap<(Source, String), Split>,
    any_source: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub const HEADER: &'static str = "#aldi-splits v1";

    pub fn insert(&mut self, source: Source, article_id: &str, split: Split) {
        self.by_source.insert((source, article_id.to_owned()), split);
    }

    pub fn get(&self, source: Source, article_id: &str) -> Option<Split> {
        self.by_source
            .get(&(source, article_id.to_owned()))
            .or_else(|| self.any_source.get(article_id))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.by_source.len() + self.any_source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, groups: &mut [CommentGroup]) -> Result<(), DatasetError> {
        for g in groups.iter_mut() {
            g.split = Some(self.get(g.source, &g.article_id).ok_or_else(|| {
                DatasetError::UnassignedArticle {
                    source_name: g.source,
                    article_id: g.article_id.clone(),
                }
            })?);
        }
        Ok(())
    }

    pub fn from_groups(groups: &[CommentGroup]) -> Self {
        let mut a = Self::default();
        for g in groups {
            if let Some(s) = g.split {
                a.insert(g.source, &g.article_id, s);
            }
        }
        a
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, DatasetError> {
        let mut a = Self::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| DatasetError::Format {
                line: i + 1,
                message,
            };
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                [source, article, split] => {
                    let source: Source = source.parse().map_err(|e| bad(format!("{e}")))?;
                    a.insert(source, article, split.parse().map_err(bad)?);
                }
                [article, split] => {
                    a.any_source
                        .insert((*article).to_owned(), split.parse().map_err(bad)?);
                }
                _ => return Err(bad(format!("expected 2 or 3 columns, found {}", f.len()))),
            }
        }
        Ok(a)
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for ((source, article), split) in &self.by_source {
            writeln!(out, "{source}\t{article}\t{split}")?;
        }
        for (article, split) in &self.any_source {
            writeln!(out, "{article}\t{split}")?;
        }
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{Level, SentenceKind};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn corpus(articles: &[(Source, usize)]) -> Vec<CommentGroup> {
        let mut out = Vec::new();
        for (i, &(source, n)) in articles.iter().enumerate() {
            for j in 0..n {
                let mut g = CommentGroup::new(
                    source,
                    &format!("art{i:03}"),
                    &format!("comment {j}"),
                    SentenceKind::Comment,
                    &[Level::Msa; 3],
                );
                g.aldi = Some(0.0);
                out.push(g);
            }
        }
        out
    }

    fn sizes(groups: &[CommentGroup]) -> [usize; 3] {
        let mut s = [0; 3];
        for g in groups {
            s[g.split.unwrap() as usize] += 1;
        }
        s
    }

    #[test]
    fn ten_by_ten_is_80_10_10() {
        for seed in [0, 1, 42, u64::MAX] {
            let mut groups = corpus(&[(Source::Youm7, 10); 10]);
            make_splits(&mut groups, &SplitPlan::new(seed)).unwrap();
            assert_eq!(sizes(&groups), [80, 10, 10]);
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mk = || {
            let mut g = corpus(&[(Source::AlGhad, 7), (Source::AlGhad, 3), (Source::AlGhad, 11), (Source::AlGhad, 2), (Source::AlGhad, 5)]);
            make_splits(&mut g, &SplitPlan::new(9)).unwrap();
            g.iter().map(|g| g.split).collect::<Vec<_>>()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn too_few_articles() {
        let mut groups = corpus(&[(Source::Youm7, 5), (Source::Youm7, 5)]);
        assert!(matches!(
            make_splits(&mut groups, &SplitPlan::new(0)),
            Err(DatasetError::TooFewArticles { articles: 2, .. })
        ));
    }

    #[test]
    fn unscored_rejected() {
        let mut groups = corpus(&[(Source::Youm7, 1); 3]);
        groups[1].aldi = None;
        assert!(matches!(
            make_splits(&mut groups, &SplitPlan::new(0)),
            Err(DatasetError::Unscored { .. })
        ));
    }

    #[test]
    fn assignment_file_round_trip() {
        let mut groups = corpus(&[(Source::Youm7, 2), (Source::AlRiyadh, 1), (Source::Youm7, 4), (Source::Youm7, 1), (Source::AlRiyadh, 1), (Source::AlRiyadh, 1)]);
        make_splits(&mut groups, &SplitPlan::new(3)).unwrap();
        let a = SplitAssignment::from_groups(&groups);
        let mut buf = Vec::new();
        a.write(&mut buf).unwrap();
        assert!(buf.starts_with(b"#aldi-splits v1\n"));
        let back = SplitAssignment::read(buf.as_slice()).unwrap();
        assert_eq!(back, a);

        let two_col = SplitAssignment::read("art000\ttest\n".as_bytes()).unwrap();
        assert_eq!(two_col.get(Source::AlGhad, "art000"), Some(Split::Test));
        assert!(SplitAssignment::read("a\tb\tc\td\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn splits_are_article_exclusive(sizes_ in prop::collection::vec((0usize..3, 1usize..15), 9..40), seed in any::<u64>()) {
            let articles: Vec<(Source, usize)> = sizes_.iter().map(|&(s, n)| (Source::ALL[s], n)).collect();
            let mut groups = corpus(&articles);
            let counts: HashMap<Source, usize> = articles.iter().fold(HashMap::new(), |mut m, (s, _)| { *m.entry(*s).or_default() += 1; m });
            let res = make_splits(&mut groups, &SplitPlan::new(seed));
            if counts.values().any(|&c| c < 3) {
                prop_assert!(res.is_err());
                return Ok(());
            }
            res.unwrap();
            let mut seen: HashMap<(Source, &str), Split> = HashMap::new();
            for g in &groups {
                let s = g.split.unwrap();
                let prev = seen.insert((g.source, g.article_id.as_str()), s);
                prop_assert!(prev.is_none() || prev == Some(s));
            }
        }
    }
}
