use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use super::{CommentGroup, DatasetError, DiscardCategory, ScoreFraction, Split};
use crate::labels::{Dialect, Level, SentenceKind, Source};

pub const DATASET_HEADER: [&str; 13] = [
    "id",
    "source",
    "article_id",
    "kind",
    "text",
    "level_1",
    "level_2",
    "level_3",
    "dialect_1",
    "dialect_2",
    "dialect_3",
    "aldi",
    "split",
];

const LEVEL_COLUMNS: usize = 3;

/// Six fixed decimals, or the shortest round-tripping form.
pub fn format_fixed(v: f64, full_precision: bool) -> String {
    if full_precision {
        format!("{v}")
    } else {
        format!("{v:.6}")
    }
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Spreads values over three columns; the third holds the overflow,
/// semicolon-joined, when a group has more than three annotations.
fn spread<T, F: Fn(&T) -> String>(items: &[T], show: F) -> [String; LEVEL_COLUMNS] {
    let mut cols: [String; LEVEL_COLUMNS] = Default::default();
    for (i, item) in items.iter().enumerate() {
        let c = i.min(LEVEL_COLUMNS - 1);
        if i > c {
            cols[c].push(';');
        }
        cols[c].push_str(&show(item));
    }
    cols
}

fn unspread(cols: &[&str]) -> Vec<String> {
    let (last, head) = cols.split_last().expect("at least one column");
    head.iter()
        .map(|c| (*c).to_owned())
        .chain(last.split(';').map(str::to_owned))
        .collect()
}

/// Writes kept groups as the tab-separated dataset file. `id` is the 1-based
/// row number, stable because groups are sorted.
pub fn write_dataset<W: Write>(
    mut out: W,
    groups: &[CommentGroup],
    full_precision: bool,
) -> Result<(), DatasetError> {
    writeln!(out, "{}", DATASET_HEADER.join("\t"))?;
    for (i, g) in groups.iter().enumerate() {
        let levels = spread(&g.annotations, |a| a.level.as_str().to_owned());
        let dialects = spread(&g.annotations, |a| {
            a.dialect.map(Dialect::as_str).unwrap_or("").to_owned()
        });
        let aldi = if full_precision {
            format_fixed(g.aldi.ok_or_else(|| unscored(g))?, true)
        } else {
            ScoreFraction::of(g)?.to_fixed6()
        };
        let split = g.split.map(Split::as_str).unwrap_or("");
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            g.source,
            clean(&g.article_id),
            g.kind,
            clean(&g.raw_text),
            levels.join("\t"),
            dialects.join("\t"),
            aldi,
            split
        )?;
    }
    out.flush()?;
    Ok(())
}

fn unscored(g: &CommentGroup) -> DatasetError {
    DatasetError::Unscored {
        article_id: g.article_id.clone(),
    }
}

/// Discarded groups with their category.
pub fn write_discards<W: Write>(
    mut out: W,
    discarded: &[(CommentGroup, DiscardCategory)],
) -> io::Result<()> {
    writeln!(out, "source\tarticle_id\tkind\tcategory\tlevels\ttext")?;
    for (g, c) in discarded {
        let levels: Vec<&str> = g.levels().map(Level::as_str).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            g.source,
            clean(&g.article_id),
            g.kind,
            c.as_str(),
            levels.join(";"),
            clean(&g.raw_text)
        )?;
    }
    out.flush()
}

/// One line of the dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub source: Source,
    pub article_id: String,
    pub kind: SentenceKind,
    pub text: String,
    pub levels: Vec<Level>,
    pub dialects: Vec<Option<Dialect>>,
    pub aldi: f64,
    pub split: Option<Split>,
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let lineno = i + 1;
        let bad = |message: String| DatasetError::Format {
            line: lineno,
            message,
        };
        if lineno == 1 {
            if line != DATASET_HEADER.join("\t") {
                return Err(bad("not an ALDi dataset file (header mismatch)".into()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != DATASET_HEADER.len() {
            return Err(bad(format!(
                "expected {} columns, found {}",
                DATASET_HEADER.len(),
                f.len()
            )));
        }
        let levels = unspread(&f[5..8])
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Level>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut dialects = unspread(&f[8..11])
            .iter()
            .map(|s| Dialect::parse_cell(s).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        dialects.resize(levels.len(), None);
        let aldi: f64 = f[11]
            .parse()
            .map_err(|_| bad(format!("aldi {:?} is not a number", f[11])))?;
        out.push(DatasetRecord {
            id: f[0].to_owned(),
            source: f[1].parse().map_err(|e| bad(format!("{e}")))?,
            article_id: f[2].to_owned(),
            kind: f[3].parse().map_err(|e| bad(format!("{e}")))?,
            text: f[4].to_owned(),
            levels,
            dialects,
            aldi,
            split: if f[12].is_empty() {
                None
            } else {
                Some(f[12].parse().map_err(bad)?)
            },
        });
    }
    Ok(out)
}

pub fn read_dataset_file(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    read_dataset(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::aggregate;
    use Level::*;

    #[test]
    fn write_then_read() {
        let mut a = CommentGroup::new(Source::Youm7, "a1", "برافو للسيد", SentenceKind::Comment, &[Msa, Msa, Little]);
        a.annotations[2].dialect = Some(Dialect::Egy);
        let mut b = CommentGroup::new(Source::Youm7, "a1", "كلام", SentenceKind::Control, &[Msa, Most, Most, Mixed, NotArabic]);
        for g in [&mut a, &mut b] {
            g.aldi = Some(aggregate(g).unwrap());
            g.split = Some(Split::Dev);
        }
        let mut buf = Vec::new();
        write_dataset(&mut buf, &[a.clone(), b.clone()], false).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "1\tYoum7\ta1\tcomment\tبرافو للسيد\tMSA\tMSA\tLittle\t\t\tEGY\t0.111111\tdev");
        assert!(lines[2].contains("\tMSA\tMost\tMost;Mixed;NotArabic\t\t\t;;\t0.666667\t"));

        let recs = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].levels, [Msa, Msa, Little]);
        assert_eq!(recs[0].dialects, [None, None, Some(Dialect::Egy)]);
        assert_eq!(recs[1].levels, [Msa, Most, Most, Mixed, NotArabic]);
        assert_eq!(recs[1].dialects.len(), 5);
        assert_eq!(recs[1].aldi, 0.666667);
        assert_eq!(recs[1].split, Some(Split::Dev));
    }

    #[test]
    fn short_groups_leave_blank_columns() {
        let mut a = CommentGroup::new(Source::AlGhad, "x", "t", SentenceKind::Comment, &[Most]);
        a.aldi = Some(1.0);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &[a], true).unwrap();
        let recs = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(recs[0].levels, [Most]);
        assert_eq!(recs[0].split, None);
    }

    #[test]
    fn header_checked() {
        assert!(matches!(
            read_dataset("nope\n".as_bytes()),
            Err(DatasetError::Format { line: 1, .. })
        ));
    }
}
