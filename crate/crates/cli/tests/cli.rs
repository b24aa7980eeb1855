use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn aldi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aldi"))
        .args(args)
        .env_remove("ALDI_SEED")
        .env_remove("ALDI_JOBS")
        .env_remove("ALDI_CONFIG")
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = aldi(args);
    assert!(
        out.status.success(),
        "aldi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest_all(dir: &Path) -> PathBuf {
    let rows = dir.join("rows.tsv");
    ok(&[
        "ingest",
        s(&fixture("hits.tsv")),
        "--column-map",
        s(&fixture("column_map.toml")),
        "-o",
        s(&rows),
    ]);
    rows
}

#[test]
fn two_hits_give_twenty_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("hits.tsv")).unwrap();
    let two: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    let hits = dir.path().join("two.tsv");
    fs::write(&hits, two).unwrap();
    let rows = dir.path().join("rows.tsv");
    let out = ok(&[
        "--json",
        "ingest",
        s(&hits),
        "--column-map",
        s(&fixture("column_map.toml")),
        "-o",
        s(&rows),
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["hits"], 2);
    assert_eq!(v["rows"], 24);
    // header plus one line per row
    assert_eq!(fs::read_to_string(&rows).unwrap().lines().count(), 25);
    assert!(dir.path().join("rows.tsv.manifest.json").exists());
}

#[test]
fn bad_column_map_exits_2_and_names_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let map = fs::read_to_string(fixture("column_map.toml")).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, map.replace("first_block = 6", "first_block = 60")).unwrap();
    let out = aldi(&[
        "ingest",
        s(&fixture("hits.tsv")),
        "--column-map",
        s(&bad),
        "-o",
        s(&dir.path().join("x.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("columns"), "{err}");
}

#[test]
fn missing_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = aldi(&[
        "ingest",
        s(&dir.path().join("absent.tsv")),
        "--column-map",
        s(&fixture("column_map.toml")),
        "-o",
        s(&dir.path().join("x.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn build_dataset_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let rows = ingest_all(dir.path());
    let out = aldi(&["build-dataset", s(&rows), "-o", s(&dir.path().join("out"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_dataset_is_deterministic_and_honors_split_file() {
    let dir = tempfile::tempdir().unwrap();
    let rows = ingest_all(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["build-dataset", s(&rows), "--seed", "11", "-o", s(&a)]);
    ok(&["build-dataset", s(&rows), "--seed", "11", "-o", s(&b)]);
    for f in ["dataset.tsv", "discarded.tsv", "splits.tsv", "stats.json", "stats.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    // a different seed with the first run's split file reproduces its splits
    let c = dir.path().join("c");
    ok(&[
        "build-dataset",
        s(&rows),
        "--seed",
        "999",
        "--splits",
        s(&a.join("splits.tsv")),
        "-o",
        s(&c),
    ]);
    assert_eq!(
        fs::read(a.join("dataset.tsv")).unwrap(),
        fs::read(c.join("dataset.tsv")).unwrap()
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 999);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["timestamp"], 0);
}

#[test]
fn seed_precedence_flag_env_config() {
    let dir = tempfile::tempdir().unwrap();
    let rows = ingest_all(dir.path());
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "seed = 3\n").unwrap();
    let seed_of = |extra_env: Option<&str>, flag: Option<&str>, name: &str| -> u64 {
        let out_dir = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_aldi"));
        cmd.env_remove("ALDI_SEED").env_remove("ALDI_JOBS").env_remove("ALDI_CONFIG");
        cmd.args(["--config", s(&cfg), "build-dataset", s(&rows), "-o", s(&out_dir)]);
        if let Some(v) = extra_env {
            cmd.env("ALDI_SEED", v);
        }
        if let Some(v) = flag {
            cmd.args(["--seed", v]);
        }
        assert!(cmd.status().unwrap().success());
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(None, None, "cfg"), 3);
    assert_eq!(seed_of(Some("4"), None, "env"), 4);
    assert_eq!(seed_of(Some("4"), Some("5"), "flag"), 5);
}

#[test]
fn unknown_config_key_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "sede = 3\n").unwrap();
    let out = aldi(&["--config", s(&cfg), "dprime", "--a", "x", "--b", "y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluating_gold_against_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let rows = ingest_all(dir.path());
    let out = dir.path().join("out");
    ok(&["build-dataset", s(&rows), "--seed", "1", "-o", s(&out)]);
    let gold = out.join("dataset.tsv");
    let text = fs::read_to_string(&gold).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let col = header.iter().position(|h| *h == "aldi").unwrap();
    let mut pred = String::from("id\tscore\n");
    for l in lines {
        let f: Vec<&str> = l.split('\t').collect();
        pred += &format!("{}\t{}\n", f[0], f[col]);
    }
    let pred_path = dir.path().join("pred.tsv");
    fs::write(&pred_path, pred).unwrap();
    let report = ok(&["--json", "evaluate", "--gold", s(&gold), "--pred", s(&pred_path), "--split", "all"]);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["all"]["rmse"], 0.0);
    assert!(v["all"]["n"].as_u64().unwrap() > 300);
}

#[test]
fn dprime_of_two_tight_groups() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "0.0\n0.2\n").unwrap();
    fs::write(&b, "0.8\n1.0\n").unwrap();
    // means 0.1 and 0.9, sample variances 0.02 each: 0.8 / sqrt(0.02)
    let out = ok(&["dprime", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(out.trim(), "5.656854");
}

#[test]
fn cmi_scores_from_tag_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmi.tsv");
    ok(&["score", "--estimator", "cmi", "--tags", s(&fixture("tags.tsv")), "-o", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let scores: Vec<&str> = text.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap()).collect();
    // tag blocks: 1 EGY of 3 non-NE tokens; EGY only (NE excluded); MSA only
    assert_eq!(scores, ["0.333333", "1.000000", "0.000000"]);
}

#[test]
fn lexicon_round_trip_and_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("lex.txt");
    ok(&["build-lexicon", s(&fixture("msa_corpus.txt")), "-o", s(&lex)]);
    assert!(fs::read_to_string(&lex).unwrap().starts_with("#aldi-lexicon v1 min_count=2"));
    let input = dir.path().join("in.txt");
    fs::write(&input, "العمل جيد\nمش كده\n").unwrap();
    let out = dir.path().join("scores.tsv");
    ok(&["score", "--estimator", "lexicon", "--lexicon", s(&lex), "--input", s(&input), "-o", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text, "id\tscore\n1\t0.000000\n2\t1.000000\n");
}

#[test]
fn misbehaving_external_scorer_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "جملة اولى\nجملة ثانية\n").unwrap();
    let out = dir.path().join("scores.tsv");
    // one line back for two sentences in
    let r = aldi(&[
        "score",
        "--estimator",
        "external",
        "--scorer",
        "sh",
        "--scorer-arg",
        "-c",
        "--scorer-arg",
        "cat >/dev/null; echo 0.5",
        "--input",
        s(&input),
        "-o",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));

    let r = aldi(&[
        "score",
        "--estimator",
        "external",
        "--scorer",
        "sh",
        "--scorer-arg",
        "-c",
        "--scorer-arg",
        "while read l; do echo 1.5; done",
        "--input",
        s(&input),
        "-o",
        s(&out),
    ]);
    assert!(r.status.success());
    // out-of-range scores are clipped
    assert_eq!(fs::read_to_string(&out).unwrap(), "id\tscore\n1\t1.000000\n2\t1.000000\n");
}

#[test]
fn speech_writes_plot_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("lex.txt");
    ok(&["build-lexicon", s(&fixture("msa_corpus.txt")), "-o", s(&lex)]);
    let plot = dir.path().join("p.svg");
    let csv = dir.path().join("p.csv");
    ok(&[
        "speech",
        s(&fixture("speech_br.html")),
        "--estimator",
        "lexicon",
        "--lexicon",
        s(&lex),
        "--plot",
        s(&plot),
        "--csv",
        s(&csv),
    ]);
    let svg = fs::read_to_string(&plot).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let points = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("point"))
        .count();
    assert!(points > 0);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), points + 1);
    assert!(dir.path().join("p.svg.manifest.json").exists());
}

#[test]
fn filter_dial2msa_keeps_clean_confident_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kept.tsv");
    let json = ok(&[
        "--json",
        "filter-dial2msa",
        s(&fixture("dial2msa.tsv")),
        "--rules",
        s(&fixture("dial2msa.toml")),
        "-o",
        s(&out),
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kept"], 2);
    let kept = fs::read_to_string(&out).unwrap();
    let ids: Vec<&str> = kept.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ids, ["1", "5"]);
}

#[test]
fn zero_jobs_is_rejected() {
    let out = aldi(&["--jobs", "0", "dprime", "--a", "x", "--b", "y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn version_lists_formats() {
    let out = ok(&["--version"]);
    assert!(out.contains("dataset v1"), "{out}");
}
