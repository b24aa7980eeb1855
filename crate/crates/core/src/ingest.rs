//! Raw AOC HIT exports to per-sentence annotation rows.
//!
//! A HIT is one line of the export: one worker's labels for 12 sentences
//! (10 comments, 2 controls). Column positions are not hard-coded; they come
//! from a [`ColumnMap`] loaded from a small TOML file:
//!
//! ```toml
//! columns = 66          # exact field count per line
//! header = true         # skip the first line
//! hit_id = 0
//! worker_id = 1
//! residence = 2         # optional
//! native_speaker = 3    # optional
//! best_dialect = 4      # optional
//! source = "Youm7"      # either a fixed source...
//! # source_column = 5   # ...or a column holding it
//! first_block = 6       # column of the first sentence block
//! block_width = 5       # columns per sentence block (12 blocks follow)
//!
//! [block]               # offsets inside a block
//! article_id = 0
//! text = 1
//! level = 2
//! dialect = 3
//! # kind = 4            # needed with control.flag_value
//!
//! [control]             # exactly one of:
//! positions = [6, 12]   # 1-based cell positions of the two controls
//! # flag_value = "control"
//!
//! [level_aliases]       # optional extra spellings
//! "mostly dialectal" = "Most"
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::labels::{Dialect, Level, LevelAliases, SentenceKind, Source, UnknownLabel};

pub const CELLS_PER_HIT: usize = 12;
pub const CONTROLS_PER_HIT: usize = 2;

pub const ROWS_HEADER: [&str; 10] = [
    "source",
    "article_id",
    "kind",
    "level",
    "dialect",
    "worker_id",
    "residence",
    "native_speaker",
    "best_dialect",
    "sentence_text",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("column map: {column}: {reason}")]
    Config { column: String, reason: String },
    #[error("line {line}: {message}")]
    Structural { line: usize, message: String },
    #[error("line {line}: {field}: unknown value {token:?}")]
    Value {
        line: usize,
        field: String,
        token: String,
    },
    #[error("line {line}: invalid UTF-8")]
    Decode { line: usize },
}

impl IngestError {
    fn config(column: &str, reason: impl Into<String>) -> Self {
        IngestError::Config {
            column: column.to_owned(),
            reason: reason.into(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Structural { line, .. }
            | IngestError::Value { line, .. }
            | IngestError::Decode { line } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// First malformed line aborts the parse.
    #[default]
    Strict,
    /// Malformed lines are reported and skipped.
    Lenient,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumnMap {
    columns: Option<usize>,
    #[serde(default)]
    header: bool,
    hit_id: usize,
    worker_id: usize,
    residence: Option<usize>,
    native_speaker: Option<usize>,
    best_dialect: Option<usize>,
    source: Option<String>,
    source_column: Option<usize>,
    first_block: usize,
    block_width: usize,
    block: RawBlock,
    control: Option<RawControl>,
    #[serde(default)]
    level_aliases: BTreeMap<String, String>,
    #[serde(default = "yes")]
    enforce_label_invariants: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    article_id: usize,
    text: usize,
    level: usize,
    dialect: Option<usize>,
    kind: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    positions: Option<Vec<usize>>,
    flag_value: Option<String>,
}

#[derive(Debug, Clone)]
pub enum SourceSpec {
    Fixed(Source),
    Column(usize),
}

/// How control sentences are recognized in the export.
#[derive(Debug, Clone)]
pub enum ControlSpec {
    /// 0-based cell indices.
    Positions([usize; CONTROLS_PER_HIT]),
    /// A per-block kind column equal (case-insensitively) to this value.
    Flag { offset: usize, value: String },
}

#[derive(Debug, Clone, Copy)]
pub struct BlockLayout {
    pub article_id: usize,
    pub text: usize,
    pub level: usize,
    pub dialect: Option<usize>,
}

/// Validated column map.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub columns: usize,
    pub header: bool,
    pub hit_id: usize,
    pub worker_id: usize,
    pub residence: Option<usize>,
    pub native_speaker: Option<usize>,
    pub best_dialect: Option<usize>,
    pub source: SourceSpec,
    pub first_block: usize,
    pub block_width: usize,
    pub block: BlockLayout,
    pub control: ControlSpec,
    pub aliases: LevelAliases,
    pub enforce_label_invariants: bool,
}

impl ColumnMap {
    pub fn from_toml(text: &str) -> Result<Self, IngestError> {
        let raw: RawColumnMap = toml::from_str(text).map_err(|e| {
            let span = e
                .span()
                .map(|s| text[s].trim().to_owned())
                .unwrap_or_default();
            let column = if span.is_empty() { "<file>".into() } else { span };
            IngestError::Config {
                column,
                reason: e.message().to_owned(),
            }
        })?;
        Self::validate(raw)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn validate(raw: RawColumnMap) -> Result<Self, IngestError> {
        if raw.block_width == 0 {
            return Err(IngestError::config("block_width", "must be at least 1"));
        }
        let mut offsets = vec![
            ("block.article_id", raw.block.article_id),
            ("block.text", raw.block.text),
            ("block.level", raw.block.level),
        ];
        offsets.extend(raw.block.dialect.map(|d| ("block.dialect", d)));
        offsets.extend(raw.block.kind.map(|k| ("block.kind", k)));
        for (name, off) in &offsets {
            if *off >= raw.block_width {
                return Err(IngestError::config(
                    name,
                    format!("offset {off} outside block_width {}", raw.block_width),
                ));
            }
        }
        for (i, (a, x)) in offsets.iter().enumerate() {
            if let Some((b, _)) = offsets[i + 1..].iter().find(|(_, y)| y == x) {
                return Err(IngestError::config(a, format!("shares offset {x} with {b}")));
            }
        }

        let source = match (raw.source, raw.source_column) {
            (Some(s), None) => SourceSpec::Fixed(
                s.parse()
                    .map_err(|e: UnknownLabel| IngestError::config("source", e.to_string()))?,
            ),
            (None, Some(c)) => SourceSpec::Column(c),
            _ => {
                return Err(IngestError::config(
                    "source",
                    "exactly one of `source` or `source_column` is required",
                ))
            }
        };

        let control = match raw.control {
            Some(RawControl {
                positions: Some(p),
                flag_value: None,
            }) => {
                if p.len() != CONTROLS_PER_HIT {
                    return Err(IngestError::config(
                        "control.positions",
                        format!("expected {CONTROLS_PER_HIT} positions, got {}", p.len()),
                    ));
                }
                if p.iter().any(|&x| x == 0 || x > CELLS_PER_HIT) || p[0] == p[1] {
                    return Err(IngestError::config(
                        "control.positions",
                        format!("positions must be distinct and within 1..={CELLS_PER_HIT}"),
                    ));
                }
                ControlSpec::Positions([p[0] - 1, p[1] - 1])
            }
            Some(RawControl {
                positions: None,
                flag_value: Some(value),
            }) => {
                let offset = raw.block.kind.ok_or_else(|| {
                    IngestError::config("block.kind", "required by control.flag_value")
                })?;
                ControlSpec::Flag { offset, value }
            }
            _ => {
                return Err(IngestError::config(
                    "control",
                    "exactly one of `positions` or `flag_value` is required",
                ))
            }
        };

        let mut aliases = LevelAliases::default();
        for (alias, canonical) in &raw.level_aliases {
            let level = canonical.parse::<Level>().map_err(|e| {
                IngestError::config(&format!("level_aliases.{alias}"), e.to_string())
            })?;
            aliases.insert(alias, level);
        }

        let needed = raw.first_block + CELLS_PER_HIT * raw.block_width;
        let mut singles = vec![("hit_id", raw.hit_id), ("worker_id", raw.worker_id)];
        singles.extend(raw.residence.map(|c| ("residence", c)));
        singles.extend(raw.native_speaker.map(|c| ("native_speaker", c)));
        singles.extend(raw.best_dialect.map(|c| ("best_dialect", c)));
        if let SourceSpec::Column(c) = source {
            singles.push(("source_column", c));
        }
        let max_single = singles.iter().map(|(_, c)| c + 1).max().unwrap_or(0);
        let columns = raw.columns.unwrap_or(needed.max(max_single));
        if needed > columns {
            return Err(IngestError::config(
                "columns",
                format!("{CELLS_PER_HIT} blocks end at column {needed}, beyond columns = {columns}"),
            ));
        }
        for (name, c) in &singles {
            if *c >= columns {
                return Err(IngestError::config(
                    name,
                    format!("index {c} outside columns = {columns}"),
                ));
            }
            if (raw.first_block..needed).contains(c) {
                return Err(IngestError::config(
                    name,
                    format!("index {c} overlaps the sentence blocks"),
                ));
            }
        }

        Ok(Self {
            columns,
            header: raw.header,
            hit_id: raw.hit_id,
            worker_id: raw.worker_id,
            residence: raw.residence,
            native_speaker: raw.native_speaker,
            best_dialect: raw.best_dialect,
            source,
            first_block: raw.first_block,
            block_width: raw.block_width,
            block: BlockLayout {
                article_id: raw.block.article_id,
                text: raw.block.text,
                level: raw.block.level,
                dialect: raw.block.dialect,
            },
            control,
            aliases,
            enforce_label_invariants: raw.enforce_label_invariants,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatorInfo {
    pub worker_id: String,
    pub residence: Option<String>,
    pub native_speaker: Option<bool>,
    pub best_understood_dialect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceCell {
    pub article_id: String,
    pub text: String,
    pub kind: SentenceKind,
    pub level: Level,
    pub dialect: Option<Dialect>,
}

/// One parsed HIT. Always 12 cells, 2 of them controls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRow {
    pub hit_id: String,
    pub source: Source,
    pub annotator: AnnotatorInfo,
    pub sentences: Vec<SentenceCell>,
    /// 1-based line in the export.
    pub line: usize,
}

/// One annotator's judgment of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub source: Source,
    pub article_id: String,
    pub sentence_text: String,
    pub kind: SentenceKind,
    pub level: Level,
    pub dialect: Option<Dialect>,
    pub annotator: AnnotatorInfo,
}

fn parse_native(raw: &str) -> Option<Option<bool>> {
    match raw.trim().to_lowercase().as_str() {
        "" => Some(None),
        "yes" | "y" | "true" | "1" | "native" => Some(Some(true)),
        "no" | "n" | "false" | "0" | "non-native" | "nonnative" => Some(Some(false)),
        _ => None,
    }
}

fn opt_field(fields: &[&str], col: Option<usize>) -> Option<String> {
    col.map(|c| fields[c].trim())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
}

/// Parses one export line into a [`HitRow`].
pub fn parse_hit_line(line: &str, lineno: usize, map: &ColumnMap) -> Result<HitRow, IngestError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != map.columns {
        let blocks = fields.len().saturating_sub(map.first_block) as f64 / map.block_width as f64;
        return Err(IngestError::Structural {
            line: lineno,
            message: format!(
                "expected {} columns ({CELLS_PER_HIT} sentence blocks), found {} (~{blocks:.1} blocks)",
                map.columns,
                fields.len()
            ),
        });
    }
    let value_err = |field: &str, token: &str| IngestError::Value {
        line: lineno,
        field: field.to_owned(),
        token: token.to_owned(),
    };

    let worker_id = fields[map.worker_id].trim();
    if worker_id.is_empty() {
        return Err(IngestError::Structural {
            line: lineno,
            message: "empty worker_id".into(),
        });
    }
    let native_speaker = match map.native_speaker {
        Some(c) => parse_native(fields[c]).ok_or_else(|| value_err("native_speaker", fields[c]))?,
        None => None,
    };
    let annotator = AnnotatorInfo {
        worker_id: worker_id.to_owned(),
        residence: opt_field(&fields, map.residence),
        native_speaker,
        best_understood_dialect: opt_field(&fields, map.best_dialect),
    };
    let source = match &map.source {
        SourceSpec::Fixed(s) => *s,
        SourceSpec::Column(c) => fields[*c]
            .parse()
            .map_err(|_| value_err("source", fields[*c]))?,
    };

    let mut sentences = Vec::with_capacity(CELLS_PER_HIT);
    for cell in 0..CELLS_PER_HIT {
        let base = map.first_block + cell * map.block_width;
        let block = &fields[base..base + map.block_width];
        let level_raw = block[map.block.level];
        let level = map
            .aliases
            .resolve(level_raw)
            .map_err(|_| value_err(&format!("cell {} level", cell + 1), level_raw))?;
        let dialect = match map.block.dialect {
            Some(off) => Dialect::parse_cell(block[off])
                .map_err(|_| value_err(&format!("cell {} dialect", cell + 1), block[off]))?,
            None => None,
        };
        if map.enforce_label_invariants {
            let bad = match level {
                Level::Msa => dialect.is_some(),
                l if l.is_dialectal() => dialect.is_none() && map.block.dialect.is_some(),
                _ => false,
            };
            if bad {
                let shown = dialect.map(Dialect::as_str).unwrap_or("");
                return Err(value_err(
                    &format!("cell {} dialect (level {level})", cell + 1),
                    shown,
                ));
            }
        }
        let kind = match &map.control {
            ControlSpec::Positions(p) if p.contains(&cell) => SentenceKind::Control,
            ControlSpec::Positions(_) => SentenceKind::Comment,
            ControlSpec::Flag { offset, value } => {
                if block[*offset].trim().eq_ignore_ascii_case(value) {
                    SentenceKind::Control
                } else {
                    SentenceKind::Comment
                }
            }
        };
        sentences.push(SentenceCell {
            article_id: block[map.block.article_id].trim().to_owned(),
            text: block[map.block.text].to_owned(),
            kind,
            level,
            dialect,
        });
    }
    let controls = sentences
        .iter()
        .filter(|s| s.kind == SentenceKind::Control)
        .count();
    if controls != CONTROLS_PER_HIT {
        return Err(IngestError::Structural {
            line: lineno,
            message: format!("expected {CONTROLS_PER_HIT} control sentences, found {controls}"),
        });
    }
    Ok(HitRow {
        hit_id: fields[map.hit_id].trim().to_owned(),
        source,
        annotator,
        sentences,
        line: lineno,
    })
}

/// Streams [`HitRow`]s out of an export, in input order.
pub struct HitReader<'m, R> {
    lines: io::Split<R>,
    map: &'m ColumnMap,
    lineno: usize,
}

impl<'m, R: BufRead> HitReader<'m, R> {
    pub fn new(reader: R, map: &'m ColumnMap) -> Self {
        Self {
            lines: reader.split(b'\n'),
            map,
            lineno: 0,
        }
    }
}

impl<R: BufRead> Iterator for HitReader<'_, R> {
    type Item = Result<HitRow, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let bytes = match self.lines.next()? {
                Ok(b) => b,
                Err(e) => return Some(Err(e.into())),
            };
            self.lineno += 1;
            if self.lineno == 1 && self.map.header {
                continue;
            }
            let Ok(mut line) = String::from_utf8(bytes) else {
                return Some(Err(IngestError::Decode { line: self.lineno }));
            };
            if line.ends_with('\r') {
                line.pop();
            }
            if line.trim().is_empty() {
                continue;
            }
            return Some(parse_hit_line(&line, self.lineno, self.map));
        }
    }
}

#[derive(Debug, Default)]
pub struct ParsedHits {
    pub hits: Vec<HitRow>,
    /// Errors of skipped lines; always empty in strict mode.
    pub skipped: Vec<IngestError>,
}

pub fn parse_hits<R: BufRead>(
    reader: R,
    map: &ColumnMap,
    strictness: Strictness,
) -> Result<ParsedHits, IngestError> {
    let mut out = ParsedHits::default();
    for item in HitReader::new(reader, map) {
        match item {
            Ok(hit) => out.hits.push(hit),
            Err(IngestError::Io(e)) => return Err(IngestError::Io(e)),
            Err(e) if strictness == Strictness::Lenient => out.skipped.push(e),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn parse_hit_file(
    path: &Path,
    map: &ColumnMap,
    strictness: Strictness,
) -> Result<ParsedHits, IngestError> {
    parse_hits(BufReader::new(File::open(path)?), map, strictness)
}

/// Splits a HIT into its 12 annotation rows, sharing the annotator info.
pub fn explode(hit: &HitRow) -> Vec<AnnotationRow> {
    hit.sentences
        .iter()
        .map(|cell| AnnotationRow {
            source: hit.source,
            article_id: cell.article_id.clone(),
            sentence_text: cell.text.clone(),
            kind: cell.kind,
            level: cell.level,
            dialect: cell.dialect,
            annotator: hit.annotator.clone(),
        })
        .collect()
}

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

impl AnnotationRow {
    /// Tab-separated serialization in [`ROWS_HEADER`] order, no newline.
    pub fn to_tsv(&self) -> String {
        let a = &self.annotator;
        let mut s = String::new();
        let native = match a.native_speaker {
            Some(true) => "yes",
            Some(false) => "no",
            None => "",
        };
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.source,
            clean(&self.article_id),
            self.kind,
            self.level,
            self.dialect.map(Dialect::as_str).unwrap_or(""),
            clean(&a.worker_id),
            clean(a.residence.as_deref().unwrap_or("")),
            native,
            clean(a.best_understood_dialect.as_deref().unwrap_or("")),
            clean(&self.sentence_text),
        );
        s
    }

    pub fn from_tsv(line: &str, lineno: usize) -> Result<Self, IngestError> {
        let f: Vec<&str> = line.splitn(ROWS_HEADER.len(), '\t').collect();
        if f.len() != ROWS_HEADER.len() {
            return Err(IngestError::Structural {
                line: lineno,
                message: format!("expected {} columns, found {}", ROWS_HEADER.len(), f.len()),
            });
        }
        let value_err = |field: &str, token: &str| IngestError::Value {
            line: lineno,
            field: field.to_owned(),
            token: token.to_owned(),
        };
        let nonempty = |s: &str| (!s.is_empty()).then(|| s.to_owned());
        Ok(AnnotationRow {
            source: f[0].parse().map_err(|_| value_err("source", f[0]))?,
            article_id: f[1].to_owned(),
            kind: f[2].parse().map_err(|_| value_err("kind", f[2]))?,
            level: f[3].parse().map_err(|_| value_err("level", f[3]))?,
            dialect: Dialect::parse_cell(f[4]).map_err(|_| value_err("dialect", f[4]))?,
            annotator: AnnotatorInfo {
                worker_id: f[5].to_owned(),
                residence: nonempty(f[6]),
                native_speaker: parse_native(f[7]).ok_or_else(|| value_err("native_speaker", f[7]))?,
                best_understood_dialect: nonempty(f[8]),
            },
            sentence_text: f[9].to_owned(),
        })
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[AnnotationRow]) -> io::Result<()> {
    writeln!(out, "{}", ROWS_HEADER.join("\t"))?;
    for r in rows {
        writeln!(out, "{}", r.to_tsv())?;
    }
    out.flush()
}

pub fn read_rows<R: BufRead>(reader: R) -> Result<Vec<AnnotationRow>, IngestError> {
    let mut rows = Vec::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let lineno = i + 1;
        let line = String::from_utf8(line?).map_err(|_| IngestError::Decode { line: lineno })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if lineno == 1 {
            if line.split('\t').next() != Some(ROWS_HEADER[0]) {
                return Err(IngestError::Structural {
                    line: 1,
                    message: "missing annotation-rows header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        rows.push(AnnotationRow::from_tsv(line, lineno)?);
    }
    Ok(rows)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<AnnotationRow>, IngestError> {
    read_rows(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MAP: &str = r#"
columns = 41
header = true
hit_id = 0
worker_id = 1
residence = 2
native_speaker = 3
best_dialect = 4
first_block = 5
block_width = 3
source = "Youm7"

[block]
article_id = 0
text = 1
level = 2

[control]
positions = [6, 12]
"#;

    fn line(hit: &str, labels: &[&str]) -> String {
        let mut f = vec![hit.to_owned(), "w1".into(), "Egypt".into(), "yes".into(), "EGY".into()];
        for (i, l) in labels.iter().enumerate() {
            f.push(format!("art{}", i % 4));
            f.push(format!("جملة رقم {i}"));
            f.push((*l).to_owned());
        }
        f.join("\t")
    }

    fn twelve() -> Vec<&'static str> {
        vec!["MSA"; 12]
    }

    #[test]
    fn two_hits_give_24_cells() {
        let map = ColumnMap::from_toml(MAP).unwrap();
        let text = format!("header\n{}\n{}\n", line("h1", &twelve()), line("h2", &twelve()));
        let parsed = parse_hits(text.as_bytes(), &map, Strictness::Strict).unwrap();
        assert_eq!(parsed.hits.len(), 2);
        let cells: usize = parsed.hits.iter().map(|h| h.sentences.len()).sum();
        assert_eq!(cells, 24);
        assert_eq!(parsed.hits[1].line, 3);
    }

    #[test]
    fn eleven_blocks_is_structural() {
        let map = ColumnMap::from_toml(MAP).unwrap();
        let short = line("h1", &["MSA"; 11]);
        let text = format!("header\n{}\n{short}\n", line("h0", &twelve()));
        let err = parse_hits(text.as_bytes(), &map, Strictness::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Structural { line: 3, .. }), "{err}");

        let parsed = parse_hits(text.as_bytes(), &map, Strictness::Lenient).unwrap();
        assert_eq!(parsed.hits.len(), 1);
        assert_eq!(parsed.skipped[0].line(), Some(3));
    }

    #[test]
    fn unknown_level_names_token() {
        let map = ColumnMap::from_toml(MAP).unwrap();
        let mut labels = twelve();
        labels[4] = "sorta";
        let text = format!("header\n{}\n", line("h1", &labels));
        let err = parse_hits(text.as_bytes(), &map, Strictness::Strict).unwrap_err();
        match err {
            IngestError::Value { line, token, .. } => {
                assert_eq!(line, 2);
                assert_eq!(token, "sorta");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn explode_copies_annotator_and_order() {
        let map = ColumnMap::from_toml(
            &MAP.replace("block_width = 3", "block_width = 4")
                .replace("columns = 41", "columns = 53")
                .replace("level = 2\n", "level = 2\ndialect = 3\n"),
        )
        .unwrap();
        let mut f = vec!["h1", "w9", "", "no", ""].into_iter().map(String::from).collect::<Vec<_>>();
        for i in 0..12 {
            f.push(format!("a{i}"));
            f.push(format!("s{i}"));
            if i == 2 {
                f.push("mostly dialectal".into());
                f.push("EGY".into());
            } else {
                f.push("MSA".into());
                f.push(String::new());
            }
        }
        let hit = parse_hit_line(&f.join("\t"), 1, &map).unwrap();
        let rows = explode(&hit);
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.annotator == hit.annotator));
        assert_eq!(rows[2].level, Level::Most);
        assert_eq!(rows[2].dialect, Some(Dialect::Egy));
        assert_eq!(rows[5].kind, SentenceKind::Control);
        assert_eq!(rows[11].kind, SentenceKind::Control);
        assert_eq!(rows[0].kind, SentenceKind::Comment);
        assert_eq!(rows[0].annotator.native_speaker, Some(false));
        assert_eq!(rows[0].annotator.residence, None);
        let texts: Vec<_> = rows.iter().map(|r| r.sentence_text.as_str()).collect();
        assert_eq!(texts[..3], ["s0", "s1", "s2"]);
    }

    #[test]
    fn blank_level_is_missing() {
        let map = ColumnMap::from_toml(MAP).unwrap();
        let mut labels = twelve();
        labels[0] = "";
        let hit = parse_hit_line(&line("h", &labels), 1, &map).unwrap();
        assert_eq!(hit.sentences[0].level, Level::Missing);
    }

    #[test]
    fn msa_with_dialect_rejected() {
        let text = MAP
            .replace("block_width = 3", "block_width = 4")
            .replace("columns = 41", "columns = 53")
            .replace("level = 2\n", "level = 2\ndialect = 3\n");
        let map = ColumnMap::from_toml(&text).unwrap();
        let mut f = vec!["h1", "w9", "", "", ""].into_iter().map(String::from).collect::<Vec<_>>();
        for i in 0..12 {
            f.extend([format!("a{i}"), format!("s{i}"), "MSA".into(), if i == 0 { "LEV".into() } else { String::new() }]);
        }
        assert!(matches!(
            parse_hit_line(&f.join("\t"), 1, &map),
            Err(IngestError::Value { .. })
        ));
    }

    #[test]
    fn flagged_controls() {
        let text = MAP
            .replace("block_width = 3", "block_width = 4")
            .replace("columns = 41", "columns = 53")
            .replace("level = 2\n", "level = 2\nkind = 3\n")
            .replace("positions = [6, 12]", "flag_value = \"ctrl\"");
        let map = ColumnMap::from_toml(&text).unwrap();
        let mut f = vec!["h1", "w9", "", "", ""].into_iter().map(String::from).collect::<Vec<_>>();
        for i in 0..12 {
            let flag = if i == 0 || i == 7 { "CTRL" } else { "" };
            f.extend([format!("a{i}"), format!("s{i}"), "MSA".into(), flag.into()]);
        }
        let hit = parse_hit_line(&f.join("\t"), 1, &map).unwrap();
        assert_eq!(hit.sentences[0].kind, SentenceKind::Control);
        assert_eq!(hit.sentences[7].kind, SentenceKind::Control);

        // three flagged controls violate the 2-control invariant
        let mut g = f.clone();
        g[5 + 4 * 3 + 3] = "ctrl".into();
        assert!(matches!(
            parse_hit_line(&g.join("\t"), 4, &map),
            Err(IngestError::Structural { line: 4, .. })
        ));
    }

    #[test]
    fn bad_maps_name_the_column() {
        let no_control = MAP.replace("[control]\npositions = [6, 12]\n", "");
        match ColumnMap::from_toml(&no_control).unwrap_err() {
            IngestError::Config { column, .. } => assert_eq!(column, "control"),
            e => panic!("{e}"),
        }
        let wide = MAP.replace("text = 1", "text = 7");
        match ColumnMap::from_toml(&wide).unwrap_err() {
            IngestError::Config { column, .. } => assert_eq!(column, "block.text"),
            e => panic!("{e}"),
        }
        let both = MAP.replace("source = \"Youm7\"", "source = \"Youm7\"\nsource_column = 40");
        assert!(matches!(
            ColumnMap::from_toml(&both).unwrap_err(),
            IngestError::Config { .. }
        ));
    }

    #[test]
    fn rows_file_round_trip_is_byte_stable() {
        let map = ColumnMap::from_toml(MAP).unwrap();
        let text = format!("header\n{}\n", line("h1", &twelve()));
        let rows: Vec<_> = parse_hits(text.as_bytes(), &map, Strictness::Strict)
            .unwrap()
            .hits
            .iter()
            .flat_map(explode)
            .collect();
        let mut a = Vec::new();
        write_rows(&mut a, &rows).unwrap();
        let back = read_rows(a.as_slice()).unwrap();
        assert_eq!(back, rows);
        let mut b = Vec::new();
        write_rows(&mut b, &back).unwrap();
        assert_eq!(a, b);
    }
}
