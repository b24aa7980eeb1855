use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use aldi::agreement::corpus_agreement;
use aldi::casestudy::{emit_plot, score_series, segment_html, write_series_csv, SegmentMode};
use aldi::dataset::{
    build_dataset, discard_junk, format_fixed, group_comments, read_dataset, write_dataset, write_discards,
    BuildOptions, Split, SplitAssignment, DATASET_HEADER,
};
use aldi::estimators::{
    read_label_file, read_tag_file, BinaryDiEstimator, CmiEstimator, Estimator, ExternalEstimator,
    ExternalScorerConfig, Lexicon, LexiconBuilder, LexiconEstimator,
};
use aldi::evaluation::{
    contrastive_matrix, d_prime, filter_dial2msa, pair_with_gold, read_dial2msa, read_pairs, read_scores,
    rmse_report, DPrimeOptions, Dial2MsaConfig, Variance,
};
use aldi::ingest::{explode, parse_hits, write_rows, ColumnMap, Strictness};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::{Cmd, EstimatorArgs, EstimatorKind, ModeArg, Settings, SplitArg};

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io_at(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io_at(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io_at(path, e))
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn dispatch(cmd: Cmd, s: &Settings) -> Result<(), CliError> {
    match cmd {
        Cmd::Ingest {
            hit_file,
            column_map,
            output,
            lenient,
        } => ingest(&hit_file, &column_map, &output, lenient, s),
        Cmd::BuildDataset {
            rows_file,
            seed,
            splits,
            key_mode,
            output,
        } => build(&rows_file, s.seed(seed)?, splits.as_deref(), s.key_mode(key_mode), &output, s),
        Cmd::Agreement { rows_file, key_mode } => agreement(&rows_file, s.key_mode(key_mode), s),
        Cmd::BuildLexicon {
            corpus,
            output,
            min_count,
        } => build_lexicon(&corpus, &output, min_count, s),
        Cmd::Score { input, est, output } => score(input.as_deref(), &est, &output, s),
        Cmd::Evaluate { gold, pred, split } => evaluate(&gold, &pred, split, s),
        Cmd::Dprime {
            a,
            b,
            population_variance,
            trim_outliers,
        } => dprime(&a, &b, population_variance, trim_outliers, s),
        Cmd::Contrastive {
            pairs_file,
            est,
            output,
        } => contrastive(&pairs_file, &est, output.as_deref(), s),
        Cmd::Speech {
            html,
            mode,
            est,
            di_labels,
            plot,
            csv,
        } => speech(&html, mode, &est, di_labels.as_deref(), &plot, csv.as_deref(), s),
        Cmd::FilterDial2msa { records, rules, output } => dial2msa(&records, &rules, &output, s),
    }
}

fn ingest(hit_file: &Path, map_path: &Path, output: &Path, lenient: bool, s: &Settings) -> Result<(), CliError> {
    let map = ColumnMap::load(map_path).map_err(|e| CliError::from(e).at(map_path))?;
    let strictness = if lenient { Strictness::Lenient } else { Strictness::Strict };
    let parsed = parse_hits(open(hit_file)?, &map, strictness).map_err(|e| CliError::from(e).at(hit_file))?;
    let rows: Vec<_> = parsed.hits.iter().flat_map(explode).collect();
    let mut out = create(output)?;
    write_rows(&mut out, &rows).map_err(|e| CliError::io_at(output, e))?;
    out.flush().map_err(|e| CliError::io_at(output, e))?;
    RunManifest::new(&[hit_file, map_path], None, s.jobs)?
        .output(output)
        .write(&RunManifest::path_for(output))?;
    for e in &parsed.skipped {
        eprintln!("aldi: skipped: {e}");
    }
    if s.json {
        print_json(&json!({"hits": parsed.hits.len(), "rows": rows.len(), "skipped": parsed.skipped.len()}))
    } else {
        println!("{} HITs, {} rows, {} lines skipped", parsed.hits.len(), rows.len(), parsed.skipped.len());
        Ok(())
    }
}

fn build(
    rows_file: &Path,
    seed: u64,
    splits: Option<&Path>,
    key_mode: aldi::dataset::KeyMode,
    out_dir: &Path,
    s: &Settings,
) -> Result<(), CliError> {
    let rows = aldi::ingest::read_rows(open(rows_file)?).map_err(|e| CliError::from(e).at(rows_file))?;
    let assignment = match splits {
        Some(p) => Some(SplitAssignment::read(open(p)?).map_err(|e| CliError::from(e).at(p))?),
        None => None,
    };
    let built = build_dataset(&rows, BuildOptions { key_mode, seed }, assignment.as_ref())?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io_at(out_dir, e))?;

    let path = |name: &str| out_dir.join(name);
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &mut dyn FnMut(&mut BufWriter<File>) -> Result<(), CliError>| {
        let p = path(name);
        let mut w = create(&p)?;
        f(&mut w)?;
        w.flush().map_err(|e| CliError::io_at(&p, e))?;
        written.push(p);
        Ok::<(), CliError>(())
    };
    emit("dataset.tsv", &mut |w| Ok(write_dataset(w, &built.kept, s.full_precision)?))?;
    emit("discarded.tsv", &mut |w| Ok(write_discards(w, &built.discarded)?))?;
    emit("splits.tsv", &mut |w| Ok(SplitAssignment::from_groups(&built.kept).write(w)?))?;
    let stats = json!({
        "summary": built.summary,
        "all_groups": built.stats_all,
        "kept": built.stats_kept,
    });
    emit("stats.json", &mut |w| {
        serde_json::to_writer_pretty(&mut *w, &stats)?;
        Ok(w.write_all(b"\n")?)
    })?;
    emit("stats.txt", &mut |w| Ok(w.write_all(summary_text(&built).as_bytes())?))?;

    let mut inputs = vec![rows_file];
    inputs.extend(splits);
    let mut manifest = RunManifest::new(&inputs, Some(seed), s.jobs)?;
    for p in &written {
        manifest = manifest.output(p);
    }
    manifest.write(&path("manifest.json"))?;

    if s.json {
        print_json(&built.summary)
    } else {
        println!(
            "{} grouped, {} discarded, {} kept -> {}",
            built.summary.grouped,
            built.summary.discarded,
            built.summary.kept,
            out_dir.display()
        );
        Ok(())
    }
}

fn summary_text(built: &aldi::dataset::BuildOutput) -> String {
    let m = &built.summary;
    let mut s = String::new();
    s += &format!("annotation rows              {}\n", m.annotation_rows);
    s += &format!("grouped (normalized key)     {}\n", m.grouped_normalized_key);
    s += &format!("grouped (raw key)            {}\n", m.grouped_raw_key);
    s += &format!("groups with >3 annotations   {}\n", m.groups_over_three_annotations);
    s += &format!("discarded                    {}\n", m.discarded);
    for c in &m.discard_categories {
        s += &format!("  {:<26} {}\n", c.category.as_str(), c.groups);
    }
    s += &format!("kept                         {}\n", m.kept);
    s += &format!("seed                         {}\n", m.seed);
    s += &format!("splits from assignment file  {}\n", m.splits_from_assignment);
    s += "\n== all groups, before discarding ==\n";
    s += &built.stats_all.to_text();
    s += "\n== kept groups ==\n";
    s += &built.stats_kept.to_text();
    s
}

fn agreement(rows_file: &Path, key_mode: aldi::dataset::KeyMode, s: &Settings) -> Result<(), CliError> {
    let rows = aldi::ingest::read_rows(open(rows_file)?).map_err(|e| CliError::from(e).at(rows_file))?;
    let (kept, _) = discard_junk(group_comments(&rows, key_mode))?;
    let report = corpus_agreement(&kept)?;
    if s.json {
        return print_json(&report);
    }
    let flag = |d: bool| if d { " (degenerate)" } else { "" };
    println!("items with 3 ratings        {}", report.three_rating_items);
    println!(
        "Fleiss kappa                {:.6}{}",
        report.fleiss_kappa.value,
        flag(report.fleiss_kappa.degenerate)
    );
    println!(
        "Krippendorff alpha          {:.6}{}",
        report.krippendorff_alpha.value,
        flag(report.krippendorff_alpha.degenerate)
    );
    println!(
        "Krippendorff alpha (all)    {:.6} over {} items",
        report.krippendorff_alpha_all.value, report.krippendorff_alpha_all.items
    );
    Ok(())
}

const LEXICON_CHUNK: usize = 65_536;

fn build_lexicon(corpus: &Path, output: &Path, min_count: u64, s: &Settings) -> Result<(), CliError> {
    let mut builder = LexiconBuilder::new();
    let mut chunk = Vec::with_capacity(LEXICON_CHUNK);
    for line in open(corpus)?.lines() {
        chunk.push(line.map_err(|e| CliError::io_at(corpus, e))?);
        if chunk.len() == LEXICON_CHUNK {
            builder.add_lines(&chunk);
            chunk.clear();
        }
    }
    builder.add_lines(&chunk);
    let lines = builder.lines();
    let name = corpus.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let lex = builder.finish(min_count, &name);
    if lex.is_empty() {
        eprintln!("aldi: warning: lexicon is empty");
    }
    let mut w = create(output)?;
    lex.write(&mut w).map_err(|e| CliError::io_at(output, e))?;
    RunManifest::new(&[corpus], None, s.jobs)?
        .output(output)
        .write(&RunManifest::path_for(output))?;
    if s.json {
        print_json(&json!({"lines": lines, "tokens": lex.len(), "min_count": lex.min_count()}))
    } else {
        println!("{} tokens from {} lines (min count {})", lex.len(), lines, lex.min_count());
        Ok(())
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str, kind: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::Format(format!("the {kind} estimator needs {flag}")))
}

fn load_estimator(kind: EstimatorKind, a: &EstimatorArgs) -> Result<(Box<dyn Estimator>, Vec<PathBuf>), CliError> {
    Ok(match kind {
        EstimatorKind::Lexicon => {
            let p = need(&a.lexicon, "--lexicon", "lexicon")?;
            let name = p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let lex = Lexicon::read(open(p)?, &name).map_err(|e| CliError::from(e).at(p))?;
            (Box::new(LexiconEstimator::new(lex)), vec![p.to_owned()])
        }
        EstimatorKind::Cmi => {
            let p = need(&a.tags, "--tags", "cmi")?;
            let sequences = read_tag_file(open(p)?).map_err(|e| CliError::from(e).at(p))?;
            (Box::new(CmiEstimator { sequences }), vec![p.to_owned()])
        }
        EstimatorKind::BinaryDi => {
            let p = need(&a.labels, "--labels", "binary-di")?;
            let labels = read_label_file(open(p)?).map_err(|e| CliError::from(e).at(p))?;
            (Box::new(BinaryDiEstimator { labels }), vec![p.to_owned()])
        }
        EstimatorKind::External => {
            let program = a
                .scorer
                .clone()
                .ok_or_else(|| CliError::Format("the external estimator needs --scorer".into()))?;
            let config = ExternalScorerConfig {
                program,
                args: a.scorer_args.clone(),
                batch_size: a.batch_size,
            };
            (Box::new(ExternalEstimator { config }), Vec::new())
        }
    })
}

/// (ids, sentences) from a dataset file or plain lines (ids = line numbers).
fn load_sentences(path: &Path) -> Result<(Vec<String>, Vec<String>), CliError> {
    let text = read_text(path)?;
    let header = DATASET_HEADER.join("\t");
    if text.lines().next().map(|l| l.trim_end_matches('\r')) == Some(header.as_str()) {
        let records = read_dataset(text.as_bytes()).map_err(|e| CliError::from(e).at(path))?;
        Ok(records.into_iter().map(|r| (r.id, r.text)).unzip())
    } else {
        Ok(text
            .lines()
            .enumerate()
            .map(|(i, l)| ((i + 1).to_string(), l.trim_end_matches('\r').to_owned()))
            .unzip())
    }
}

fn write_scores(path: &Path, ids: &[String], scores: &[f64], full: bool) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut go = || -> io::Result<()> {
        writeln!(w, "id\tscore")?;
        for (id, v) in ids.iter().zip(scores) {
            writeln!(w, "{id}\t{}", format_fixed(*v, full))?;
        }
        w.flush()
    };
    go().map_err(|e| CliError::io_at(path, e))
}

fn score(input: Option<&Path>, a: &EstimatorArgs, output: &Path, s: &Settings) -> Result<(), CliError> {
    let kind = a
        .estimator
        .ok_or_else(|| CliError::Format("score needs --estimator".into()))?;
    let (est, mut inputs) = load_estimator(kind, a)?;
    let (ids, sentences) = match (input, kind) {
        (Some(p), _) => {
            inputs.insert(0, p.to_owned());
            load_sentences(p)?
        }
        (None, EstimatorKind::Cmi) => {
            let p = need(&a.tags, "--tags", "cmi")?;
            let seqs = read_tag_file(open(p)?).map_err(|e| CliError::from(e).at(p))?;
            seqs.iter()
                .enumerate()
                .map(|(i, q)| ((i + 1).to_string(), q.sentence()))
                .unzip()
        }
        (None, _) => return Err(CliError::Format("score needs --input".into())),
    };
    let scores: Vec<f64> = est.score_batch(&sentences)?.into_iter().map(|x| x.value).collect();
    write_scores(output, &ids, &scores, s.full_precision)?;
    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    RunManifest::new(&refs, None, s.jobs)?
        .output(output)
        .write(&RunManifest::path_for(output))?;
    if s.json {
        print_json(&json!({"estimator": est.id(), "sentences": scores.len(), "output": output.display().to_string()}))
    } else {
        println!("{} sentences scored with {}", scores.len(), est.id());
        Ok(())
    }
}

fn evaluate(gold: &Path, pred: &Path, split: SplitArg, s: &Settings) -> Result<(), CliError> {
    let records = read_dataset(open(gold)?).map_err(|e| CliError::from(e).at(gold))?;
    let preds = read_scores(open(pred)?).map_err(|e| CliError::from(e).at(pred))?;
    let split = match split {
        SplitArg::Train => Some(Split::Train),
        SplitArg::Dev => Some(Split::Dev),
        SplitArg::Test => Some(Split::Test),
        SplitArg::All => None,
    };
    let pairs = pair_with_gold(&records, &preds, split)?;
    let report = rmse_report(&pairs)?;
    if s.json {
        print_json(&report)
    } else {
        print!("{}", report.to_text(if s.full_precision { 17 } else { 6 }));
        Ok(())
    }
}

fn dprime(a: &Path, b: &Path, population: bool, trim: bool, s: &Settings) -> Result<(), CliError> {
    let load = |p: &Path| -> Result<Vec<f64>, CliError> {
        Ok(read_scores(open(p)?)
            .map_err(|e| CliError::from(e).at(p))?
            .into_iter()
            .map(|(_, v)| v)
            .collect())
    };
    let opts = DPrimeOptions {
        variance: if population { Variance::Population } else { Variance::Sample },
        trim_outliers: trim,
    };
    let (xa, xb) = (load(a)?, load(b)?);
    let d = d_prime(&xa, &xb, opts)?;
    if s.json {
        print_json(&json!({"d_prime": d, "n_a": xa.len(), "n_b": xb.len(), "variance": opts.variance, "trim_outliers": trim}))
    } else {
        println!("{}", format_fixed(d, s.full_precision));
        Ok(())
    }
}

fn contrastive(pairs_file: &Path, a: &EstimatorArgs, output: Option<&Path>, s: &Settings) -> Result<(), CliError> {
    let pairs = read_pairs(open(pairs_file)?).map_err(|e| CliError::from(e).at(pairs_file))?;
    let kinds: Vec<EstimatorKind> = match a.estimator {
        Some(k) => vec![k],
        None => [
            (a.lexicon.is_some(), EstimatorKind::Lexicon),
            (a.tags.is_some(), EstimatorKind::Cmi),
            (a.labels.is_some(), EstimatorKind::BinaryDi),
            (a.scorer.is_some(), EstimatorKind::External),
        ]
        .into_iter()
        .filter_map(|(on, k)| on.then_some(k))
        .collect(),
    };
    if kinds.is_empty() {
        return Err(CliError::Format(
            "contrastive needs at least one of --lexicon, --tags, --labels, --scorer".into(),
        ));
    }
    let mut inputs = vec![pairs_file.to_owned()];
    let mut estimators = Vec::new();
    for k in kinds {
        let (e, files) = load_estimator(k, a)?;
        inputs.extend(files);
        estimators.push(e);
    }
    let refs: Vec<&dyn Estimator> = estimators.iter().map(|e| e.as_ref()).collect();
    let table = contrastive_matrix(&pairs, &refs)?;
    let places = if s.full_precision { 17 } else { 6 };
    let tsv = table.to_tsv(places);
    if let Some(out) = output {
        std::fs::write(out, &tsv).map_err(|e| CliError::io_at(out, e))?;
        let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
        RunManifest::new(&refs, None, s.jobs)?
            .output(out)
            .write(&RunManifest::path_for(out))?;
    }
    let flagged: Vec<String> = table
        .rows
        .iter()
        .filter(|r| r.flagged())
        .map(|r| format!("{} {}", r.feature, r.word_order))
        .collect();
    if s.json {
        print_json(&table)?;
    } else if output.is_none() {
        print!("{tsv}");
    }
    if !flagged.is_empty() {
        eprintln!("aldi: rows scoring MSA at or above EGY: {}", flagged.join(", "));
    }
    Ok(())
}

fn speech(
    html: &Path,
    mode: ModeArg,
    a: &EstimatorArgs,
    di_labels: Option<&Path>,
    plot: &Path,
    csv: Option<&Path>,
    s: &Settings,
) -> Result<(), CliError> {
    let kind = a
        .estimator
        .ok_or_else(|| CliError::Format("speech needs --estimator".into()))?;
    let mode = match mode {
        ModeArg::Br => SegmentMode::Br,
        ModeArg::P => SegmentMode::P,
    };
    let seg = segment_html(&read_text(html)?, mode).map_err(|e| CliError::from(e).at(html))?;
    if seg.warnings > 0 {
        eprintln!("aldi: {}: {} markup problems handled best-effort", html.display(), seg.warnings);
    }
    let (est, mut inputs) = load_estimator(kind, a)?;
    inputs.insert(0, html.to_owned());
    let labels = match di_labels {
        Some(p) => {
            inputs.push(p.to_owned());
            Some(read_label_file(open(p)?).map_err(|e| CliError::from(e).at(p))?)
        }
        None => None,
    };
    let doc = html.file_stem().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let series = score_series(&doc, &seg.sentences, est.as_ref(), labels.as_deref())?;
    emit_plot(&series, plot).map_err(|e| CliError::from(e).at(plot))?;
    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut manifest = RunManifest::new(&refs, None, s.jobs)?.output(plot);
    if let Some(c) = csv {
        write_series_csv(&series, create(c)?).map_err(|e| CliError::from(e).at(c))?;
        manifest = manifest.output(c);
    }
    manifest.write(&RunManifest::path_for(plot))?;
    if s.json {
        print_json(&series)
    } else {
        println!("{} sentences, plot at {}", series.points.len(), plot.display());
        Ok(())
    }
}

fn dial2msa(records: &Path, rules: &Path, output: &Path, s: &Settings) -> Result<(), CliError> {
    let cfg = Dial2MsaConfig::from_toml(&read_text(rules)?).map_err(|e| CliError::from(e).at(rules))?;
    let text = read_text(records)?;
    let header = text.lines().next().unwrap_or_default().to_owned();
    let recs = read_dial2msa(text.as_bytes()).map_err(|e| CliError::from(e).at(records))?;
    let total = recs.len();
    let outcome = filter_dial2msa(recs, &cfg);
    for w in &outcome.warnings {
        eprintln!("aldi: warning: {w}");
    }
    let kept_lines: std::collections::BTreeSet<usize> = outcome.kept.iter().map(|r| r.line).collect();
    let mut w = create(output)?;
    let mut go = || -> io::Result<()> {
        writeln!(w, "{header}")?;
        for (i, line) in text.lines().enumerate() {
            if kept_lines.contains(&(i + 1)) {
                writeln!(w, "{line}")?;
            }
        }
        w.flush()
    };
    go().map_err(|e| CliError::io_at(output, e))?;
    RunManifest::new(&[records, rules], None, s.jobs)?
        .output(output)
        .write(&RunManifest::path_for(output))?;
    let summary = json!({
        "records": total,
        "kept": outcome.kept.len(),
        "low_confidence": outcome.low_confidence,
        "dialectal_term": outcome.dialectal_term,
        "missing_confidence": outcome.missing_confidence,
    });
    if s.json {
        print_json(&summary)
    } else {
        println!(
            "{} of {} records kept ({} low confidence, {} with dialectal terms, {} without confidence)",
            outcome.kept.len(),
            total,
            outcome.low_confidence,
            outcome.dialectal_term,
            outcome.missing_confidence
        );
        Ok(())
    }
}
