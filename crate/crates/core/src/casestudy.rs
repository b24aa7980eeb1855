//! Speech transcripts: segment saved HTML into sentences, score each one and
//! plot the series.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::estimators::{DiLabel, Estimator, EstimatorError};
use crate::textnorm::{normalize, tokenize, NormalizationConfig};

#[derive(Debug, thiserror::Error)]
pub enum CaseStudyError {
    #[error("no sentences found in the document")]
    NoSegments,
    #[error("sentence {index} is empty")]
    EmptySentence { index: usize },
    #[error("sentence {index}: {source}")]
    Scoring {
        index: usize,
        #[source]
        source: EstimatorError,
    },
    #[error("{labels} dialect-ID labels for {sentences} sentences")]
    LabelCount { labels: usize, sentences: usize },
    #[error("cannot plot an empty series")]
    EmptySeries,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentMode {
    /// Split on line-break tags (and block-element boundaries).
    Br,
    /// One sentence per `<p>` element.
    P,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segmentation {
    pub sentences: Vec<String>,
    /// Markup that had to be guessed at: unterminated tags or comments,
    /// unmatched closing paragraphs.
    pub warnings: usize,
}

/// Elements whose boundaries also end a sentence in `br` mode.
const BLOCK_TAGS: &[&str] = &[
    "p", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td", "table", "hr", "blockquote",
    "section", "article",
];

enum Token<'a> {
    Text(&'a str),
    Tag { name: String, closing: bool },
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    warnings: usize,
}

impl<'a> Lexer<'a> {
    fn skip_past(&mut self, needle: &str) {
        match find_ci(&self.src[self.pos..], needle) {
            Some(i) => self.pos += i + needle.len(),
            None => {
                self.warnings += 1;
                self.pos = self.src.len();
            }
        }
    }
}

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    let n = needle.len();
    hay.as_bytes()
        .windows(n)
        .position(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

impl<'a> Iterator for Lexer<'a> {
    type Item = Token<'a>;

    fn next(&mut self) -> Option<Token<'a>> {
        loop {
            let rest = &self.src[self.pos..];
            if rest.is_empty() {
                return None;
            }
            if !rest.starts_with('<') {
                let end = rest.find('<').unwrap_or(rest.len());
                self.pos += end;
                return Some(Token::Text(&rest[..end]));
            }
            if rest.starts_with("<!--") {
                self.pos += 4;
                self.skip_past("-->");
                continue;
            }
            let after = &rest[1..];
            let (closing, body) = match after.strip_prefix('/') {
                Some(b) => (true, b),
                None => (false, after),
            };
            let name: String = body
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric())
                .collect::<String>()
                .to_ascii_lowercase();
            if name.is_empty() && !body.starts_with('!') && !body.starts_with('?') {
                // A bare '<' in text.
                self.pos += 1;
                return Some(Token::Text("<"));
            }
            // Find the closing '>' outside quotes.
            let mut quote = None;
            let mut end = None;
            for (i, c) in rest.char_indices().skip(1) {
                match (quote, c) {
                    (Some(q), c) if c == q => quote = None,
                    (Some(_), _) => {}
                    (None, '"' | '\'') => quote = Some(c),
                    (None, '>') => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let Some(end) = end else {
                self.warnings += 1;
                self.pos = self.src.len();
                return None;
            };
            self.pos += end + 1;
            if !closing && (name == "script" || name == "style") {
                self.skip_past(&format!("</{name}"));
                self.skip_past(">");
                continue;
            }
            if name.is_empty() {
                continue;
            }
            return Some(Token::Tag { name, closing });
        }
    }
}

fn clean(raw: &str) -> String {
    let decoded = html_escape::decode_html_entities(raw);
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Extracts sentences from saved HTML. Tags never reach the output, entities
/// are decoded, whitespace is collapsed and empty segments dropped. Only the
/// `<body>` is read when the document has one.
///
/// ```
/// use aldi::casestudy::{segment_html, SegmentMode};
///
/// let s = segment_html("a<br>b<br><br>c", SegmentMode::Br).unwrap();
/// assert_eq!(s.sentences, ["a", "b", "c"]);
/// let s = segment_html("<p>x</p><p>y &amp; z</p>", SegmentMode::P).unwrap();
/// assert_eq!(s.sentences, ["x", "y & z"]);
/// ```
pub fn segment_html(html: &str, mode: SegmentMode) -> Result<Segmentation, CaseStudyError> {
    let body = match find_ci(html, "<body") {
        Some(i) => &html[i..],
        None => html,
    };
    let mut lexer = Lexer {
        src: body,
        pos: 0,
        warnings: 0,
    };
    let mut sentences = Vec::new();
    let mut cur = String::new();
    let mut in_p = false;
    let mut extra_warnings = 0;
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let s = clean(cur);
        if !s.is_empty() {
            out.push(s);
        }
        cur.clear();
    };
    for tok in lexer.by_ref() {
        match (mode, tok) {
            (SegmentMode::Br, Token::Text(t)) => cur.push_str(t),
            (SegmentMode::Br, Token::Tag { name, .. }) => {
                if name == "br" || name == "body" || BLOCK_TAGS.contains(&name.as_str()) {
                    flush(&mut cur, &mut sentences);
                }
            }
            (SegmentMode::P, Token::Text(t)) => {
                if in_p {
                    cur.push_str(t);
                }
            }
            (SegmentMode::P, Token::Tag { name, closing }) => match (name.as_str(), closing) {
                ("p", false) => {
                    if in_p {
                        flush(&mut cur, &mut sentences);
                    }
                    in_p = true;
                }
                ("p", true) => {
                    if in_p {
                        flush(&mut cur, &mut sentences);
                        in_p = false;
                    } else {
                        extra_warnings += 1;
                    }
                }
                ("br", _) if in_p => cur.push(' '),
                _ => {
                    // Inline tags may glue words; block tags separate them.
                    if in_p && BLOCK_TAGS.contains(&name.as_str()) {
                        cur.push(' ');
                    }
                }
            },
        }
    }
    if in_p {
        extra_warnings += 1;
    }
    flush(&mut cur, &mut sentences);
    if sentences.is_empty() {
        return Err(CaseStudyError::NoSegments);
    }
    Ok(Segmentation {
        sentences,
        warnings: lexer.warnings + extra_warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    /// 1-based position in the document.
    pub index: usize,
    pub sentence: String,
    pub aldi: f64,
    pub di_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSeries {
    pub document_id: String,
    pub estimator_id: String,
    pub points: Vec<SeriesPoint>,
}

fn label_name(l: &DiLabel) -> String {
    match l {
        DiLabel::Msa => "MSA".into(),
        DiLabel::Dialect(d) => d.clone(),
    }
}

/// Scores every sentence in one batch; DI labels, when given, align by
/// position.
pub fn score_series(
    document_id: &str,
    sentences: &[String],
    estimator: &dyn Estimator,
    di_labels: Option<&[DiLabel]>,
) -> Result<ScoreSeries, CaseStudyError> {
    let cfg = NormalizationConfig::default();
    if let Some(k) = sentences.iter().position(|s| tokenize(&normalize(s, &cfg)).is_empty()) {
        return Err(CaseStudyError::EmptySentence { index: k + 1 });
    }
    if let Some(l) = di_labels {
        if l.len() != sentences.len() {
            return Err(CaseStudyError::LabelCount {
                labels: l.len(),
                sentences: sentences.len(),
            });
        }
    }
    let scores = estimator.score_batch(sentences).map_err(|e| {
        let index = match &e {
            EstimatorError::EmptySentence { index } => *index,
            EstimatorError::Parse { line, .. } => *line,
            _ => 0,
        };
        CaseStudyError::Scoring { index, source: e }
    })?;
    Ok(ScoreSeries {
        document_id: document_id.to_owned(),
        estimator_id: estimator.id().to_owned(),
        points: sentences
            .iter()
            .zip(scores)
            .enumerate()
            .map(|(i, (s, sc))| SeriesPoint {
                index: i + 1,
                sentence: s.clone(),
                aldi: sc.value,
                di_label: di_labels.map(|l| label_name(&l[i])),
            })
            .collect(),
    })
}

/// `index,score,di_label,sentence` with scores at six decimals.
pub fn write_series_csv<W: Write>(series: &ScoreSeries, out: W) -> Result<(), CaseStudyError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "score", "di_label", "sentence"])?;
    for p in &series.points {
        w.write_record([
            p.index.to_string(),
            format!("{:.6}", p.aldi),
            p.di_label.clone().unwrap_or_default(),
            p.sentence.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot geometry shared with coordinate-checking code.
pub mod geometry {
    pub const WIDTH: f64 = 800.0;
    pub const HEIGHT: f64 = 320.0;
    pub const LEFT: f64 = 56.0;
    pub const RIGHT: f64 = 24.0;
    pub const TOP: f64 = 40.0;
    pub const BOTTOM: f64 = 44.0;
    pub const PLOT_W: f64 = WIDTH - LEFT - RIGHT;
    pub const PLOT_H: f64 = HEIGHT - TOP - BOTTOM;

    pub fn x(index: usize, n: usize) -> f64 {
        if n <= 1 {
            LEFT + PLOT_W / 2.0
        } else {
            LEFT + (index - 1) as f64 / (n - 1) as f64 * PLOT_W
        }
    }

    pub fn y(score: f64) -> f64 {
        TOP + (1.0 - score.clamp(0.0, 1.0)) * PLOT_H
    }

    /// Inverse of [`y`].
    pub fn score_at(y: f64) -> f64 {
        1.0 - (y - TOP) / PLOT_H
    }
}

const MSA_COLOR: &str = "#2e7d32";
const DA_COLOR: &str = "#7b1fa2";
const NO_LABEL_COLOR: &str = "#757575";

/// Self-contained SVG scatter of sentence index against score. Identical
/// series give identical bytes.
pub fn render_svg(series: &ScoreSeries) -> Result<String, CaseStudyError> {
    use geometry::*;
    if series.points.is_empty() {
        return Err(CaseStudyError::EmptySeries);
    }
    let n = series.points.len();
    let mut s = String::new();
    let title = html_escape::encode_text(&series.document_id);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let (x0, x1, y0, y1) = (LEFT, LEFT + PLOT_W, TOP, TOP + PLOT_H);
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y1:.2}" x2="{x1:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(s, "</g>");
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let ty = y(tick);
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{x0:.2}" y1="{ty:.2}" x2="{x1:.2}" y2="{ty:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{tick:.2}</text>"##,
            x0 - 6.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">sentence</text>"#,
        LEFT + PLOT_W / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">ALDi</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0
    );
    let _ = writeln!(s, r#"<g class="points">"#);
    for p in &series.points {
        let color = match p.di_label.as_deref() {
            None => NO_LABEL_COLOR,
            Some("MSA") => MSA_COLOR,
            Some(_) => DA_COLOR,
        };
        let _ = writeln!(
            s,
            r#"<circle class="point" data-index="{}" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
            p.index,
            x(p.index, n),
            y(p.aldi)
        );
    }
    let _ = writeln!(s, "</g>");
    if series.points.iter().any(|p| p.di_label.is_some()) {
        let _ = writeln!(s, r#"<g class="legend">"#);
        for (i, (label, color)) in [("MSA", MSA_COLOR), ("DA", DA_COLOR)].iter().enumerate() {
            let lx = x1 - 120.0 + 60.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<circle cx="{lx:.2}" cy="{:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
                TOP - 12.0,
                lx + 8.0,
                TOP - 8.0
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(series: &ScoreSeries, out: &Path) -> Result<(), CaseStudyError> {
    let svg = render_svg(series)?;
    std::fs::write(out, svg)?;
    Ok(())
}
