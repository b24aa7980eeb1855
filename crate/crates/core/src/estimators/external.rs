use std::io::{Read, Write};
use std::process::{Command, Stdio};

use super::{AldiScore, Estimator, EstimatorError};
use crate::textnorm::{normalize, NormalizationConfig};

/// A scorer program speaking the line protocol: normalized sentences on
/// stdin, one per line; one decimal score per line on stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalScorerConfig {
    pub program: String,
    pub args: Vec<String>,
    /// Sentences per process; `None` sends everything to one process.
    pub batch_size: Option<usize>,
}

impl ExternalScorerConfig {
    pub fn new(program: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            batch_size: None,
        }
    }
}

/// Scores are clipped to [0, 1]. Output line numbers in errors count from
/// the first sentence of the whole call.
pub fn external_score(sentences: &[String], cfg: &ExternalScorerConfig) -> Result<Vec<AldiScore>, EstimatorError> {
    let norm = NormalizationConfig::default();
    let lines: Vec<String> = sentences
        .iter()
        .map(|s| normalize(s, &norm).replace(['\n', '\r'], " "))
        .collect();
    let size = cfg.batch_size.unwrap_or(lines.len()).max(1);
    let mut out = Vec::with_capacity(lines.len());
    for (b, chunk) in lines.chunks(size).enumerate() {
        out.extend(run_batch(chunk, cfg, b * size)?);
    }
    Ok(out)
}

fn run_batch(chunk: &[String], cfg: &ExternalScorerConfig, offset: usize) -> Result<Vec<AldiScore>, EstimatorError> {
    let mut child = Command::new(&cfg.program)
        .args(&cfg.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let payload: String = chunk.iter().flat_map(|l| [l.as_str(), "\n"]).collect();
    // Writer thread so a scorer that streams output cannot deadlock us.
    let writer = std::thread::spawn(move || {
        // A scorer that exits early closes the pipe; the status check reports it.
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = String::new();
    child.stdout.take().expect("piped stdout").read_to_string(&mut stdout)?;
    let mut stderr = String::new();
    child.stderr.take().expect("piped stderr").read_to_string(&mut stderr)?;
    let status = child.wait()?;
    let _ = writer.join();
    if !status.success() {
        return Err(EstimatorError::ScorerFailed {
            status: status.to_string(),
            stderr: stderr.trim().to_owned(),
        });
    }
    let got: Vec<&str> = stdout.lines().collect();
    if got.len() != chunk.len() {
        return Err(EstimatorError::Protocol {
            expected: chunk.len(),
            got: got.len(),
        });
    }
    got.iter()
        .enumerate()
        .map(|(i, l)| {
            let text = l.trim();
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(AldiScore::clipped(v, ExternalEstimator::ID)),
                _ => Err(EstimatorError::Parse {
                    line: offset + i + 1,
                    text: text.to_owned(),
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExternalEstimator {
    pub config: ExternalScorerConfig,
}

impl ExternalEstimator {
    pub const ID: &'static str = "external";
}

impl Estimator for ExternalEstimator {
    fn id(&self) -> &str {
        Self::ID
    }

    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError> {
        external_score(sentences, &self.config)
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str, batch: Option<usize>) -> ExternalScorerConfig {
        ExternalScorerConfig {
            program: "sh".into(),
            args: vec!["-c".into(), script.into()],
            batch_size: batch,
        }
    }

    fn sents(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn echo_scores_clipped() {
        let cfg = sh("while read l; do echo 1.7; done", Some(2));
        let got = external_score(&sents(5), &cfg).unwrap();
        assert_eq!(got.len(), 5);
        assert!(got.iter().all(|s| s.value == 1.0));
        let neg = external_score(&sents(1), &sh("read l; echo -0.5", None)).unwrap();
        assert_eq!(neg[0].value, 0.0);
    }

    #[test]
    fn sentences_arrive_normalized_in_order() {
        // Score is 0.<length>; the diacritic must be gone before the scorer sees it.
        let cfg = sh("while read l; do printf '0.%s\\n' \"${#l}\"; done", None);
        let got = external_score(&["ab".into(), "a\u{064E}bcd".into()], &cfg).unwrap();
        assert_eq!(got.iter().map(|s| s.value).collect::<Vec<_>>(), [0.2, 0.4]);
        let cfg = sh("cat > /dev/null; echo 0.25; echo 0.5", None);
        let got = external_score(&sents(2), &cfg).unwrap();
        assert_eq!(got[1].value, 0.5);
    }

    #[test]
    fn protocol_errors() {
        let short = external_score(&sents(3), &sh("cat > /dev/null; echo 0.1", None));
        assert!(matches!(short, Err(EstimatorError::Protocol { expected: 3, got: 1 })));
        let bad = external_score(&sents(4), &sh("cat > /dev/null; echo 0.1; echo nope", Some(2)));
        assert!(matches!(bad, Err(EstimatorError::Parse { line: 2, .. })));
        let nan = external_score(&sents(1), &sh("cat > /dev/null; echo NaN", None));
        assert!(matches!(nan, Err(EstimatorError::Parse { line: 1, .. })));
        let failed = external_score(&sents(1), &sh("echo boom >&2; exit 4", None));
        match failed {
            Err(EstimatorError::ScorerFailed { stderr, .. }) => assert_eq!(stderr, "boom"),
            other => panic!("{other:?}"),
        }
        let missing = external_score(&sents(1), &ExternalScorerConfig::new("/nonexistent/scorer"));
        assert!(matches!(missing, Err(EstimatorError::Io(_))));
    }
}
