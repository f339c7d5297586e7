//! End-to-end checks of the `newsphrase` binary: exit codes, output
//! formats, config-file precedence, and the JSON escape hatches.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use newsphrase_core::corpus::SplitKind;
use newsphrase_core::preprocess::{Language, LanguageResources};
use newsphrase_core::synthetic::shaped_corpus;

fn newsphrase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsphrase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_corpus(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let res = LanguageResources::builtin(Language::Portuguese);
    let corpus = shaped_corpus(6, 1500, 4, seed, SplitKind::Train, &res).unwrap();
    let path = dir.join(name);
    corpus.save(&path).unwrap();
    path
}

fn train(dir: &Path, corpus: &Path, extra: &[&str]) -> (PathBuf, Output) {
    let model = dir.join(format!("model-{}.npkm", extra.join("_").replace('/', "-")));
    let mut args = vec![
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = newsphrase(&args);
    (model, out)
}

/// Four hand-written news items, two per topic, with obvious repeated
/// phrases as gold so a tiny model trains in milliseconds.
fn topical_corpus(dir: &Path) -> PathBuf {
    let doc = |id: &str, topic: &str, minute: u32, text: &str, gold: &[&str]| {
        json!({
            "id": id,
            "channel": "TV1",
            "program": "Jornal",
            "broadcast_time": format!("2012-06-18T10:{minute:02}:00+00:00"),
            "position_in_program": minute,
            "topic": topic,
            "text": text,
            "gold_keyphrases": gold,
        })
    };
    let econ = "O banco central subiu os juros outra vez. A subida dos juros penaliza o \
                mercado segundo o banco central. Os analistas do mercado esperam novas \
                medidas do banco central sobre os juros.";
    let sport = "O clube venceu o campeonato de futebol. A festa do campeonato juntou os \
                 adeptos do futebol na cidade. O treinador dedicou o campeonato aos \
                 adeptos do clube.";
    let corpus = json!({
        "documents": [
            doc("e1", "economia", 0, econ, &["banco central", "juros"]),
            doc("e2", "economia", 5, econ, &["banco central", "mercado"]),
            doc("d1", "desporto", 10, sport, &["campeonato", "futebol"]),
            doc("d2", "desporto", 15, sport, &["campeonato", "clube"]),
        ],
        "split": "train",
    });
    let path = dir.join("topical.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&corpus).unwrap()).unwrap();
    path
}

#[test]
fn help_exits_zero_and_names_the_subcommands() {
    let out = newsphrase(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for cmd in ["train", "extract", "evaluate", "compress-lm", "cloud"] {
        assert!(text.contains(cmd), "--help does not mention {cmd}");
    }

    for (cmd, flags) in [
        ("train", vec!["--corpus", "--model-out", "--algorithm", "--bags", "--seed", "--lm"]),
        ("extract", vec!["--input", "--model", "--json", "--config", "--lm"]),
        ("evaluate", vec!["--corpus", "--model", "--sweep"]),
        ("compress-lm", vec!["--arpa", "--out", "--fingerprint-bits", "--quant-bits"]),
        ("cloud", vec!["--now", "--topic", "--window-hours", "--max-phrases"]),
    ] {
        let out = newsphrase(&[cmd, "--help"]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        for flag in flags {
            assert!(text.contains(flag), "{cmd} --help does not mention {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&newsphrase(&["--bogus"])), 2);
    assert_eq!(code(&newsphrase(&["extract", "--bogus"])), 2);
    assert_eq!(code(&newsphrase(&["train"])), 2, "missing required --corpus");
    let out = newsphrase(&["compress-lm", "--arpa", "x", "--out", "y", "--fingerprint-bits", "20"]);
    assert_eq!(code(&out), 2, "fingerprint bits outside 8..=16");
    let out = newsphrase(&["compress-lm", "--arpa", "x", "--out", "y", "--quant-bits", "3"]);
    assert_eq!(code(&out), 2, "quantizer bits outside 4..=8");
}

#[test]
fn missing_input_files_are_named_in_the_error() {
    let out = newsphrase(&[
        "extract",
        "--input",
        "/no/such/input.json",
        "--model",
        "/no/such/model.npkm",
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("/no/such/"),
        "stderr does not name the missing path: {}",
        stderr(&out)
    );

    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 10);
    let (_, out) = train(
        dir.path(),
        &corpus,
        &["--stopwords", "/no/such/stopwords.txt"],
    );
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("/no/such/stopwords.txt"),
        "stderr does not name the missing resource: {}",
        stderr(&out)
    );
}

#[test]
fn compressed_models_stay_small_and_feed_the_extractor() {
    let dir = tempfile::tempdir().unwrap();
    let arpa = dir.path().join("news.arpa");
    std::fs::write(&arpa, newsphrase_core::synthetic::large_arpa(7, 20_000, 10_000, 5_000, 2_000))
        .unwrap();

    let cnlm = dir.path().join("news.cnlm");
    let out = newsphrase(&[
        "compress-lm",
        "--arpa",
        arpa.to_str().unwrap(),
        "--out",
        cnlm.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("ratio: "))
        .expect("ratio line printed")
        .trim()
        .parse()
        .unwrap();
    assert!(ratio <= 0.20, "printed ratio {ratio} above the size budget");

    // the artifact must plug straight back in as the phrase-probability source
    let corpus = write_corpus(dir.path(), "train.json", 16);
    let lm_flag = ["--lm", cnlm.to_str().unwrap()];
    let (model, out) = train(dir.path(), &corpus, &lm_flag);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = newsphrase(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--lm",
        cnlm.to_str().unwrap(),
        "-n",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("1\t")));
}

#[test]
fn train_reports_counts_and_a_verifiable_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 11);
    let (model, out) = train(dir.path(), &corpus, &["--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("instances:"), "missing instance count: {text}");
    assert!(text.contains("positives:"), "missing positive count: {text}");

    let line = text
        .lines()
        .find(|l| l.starts_with("sha256:"))
        .expect("sha256 line printed");
    let printed = line.trim_start_matches("sha256:").trim();
    let bytes = std::fs::read(&model).unwrap();
    let actual: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(printed, actual, "printed checksum does not match the file");

    let (_, out) = train(dir.path(), &corpus, &["--seed", "3", "--json"]);
    assert_eq!(code(&out), 0);
    let parsed: Value = serde_json::from_str(&stdout(&out)).expect("train --json is JSON");
    assert_eq!(parsed["sha256"].as_str().unwrap(), actual);
    assert!(parsed["instances"].as_u64().unwrap() > 0);
}

#[test]
fn extract_formats_single_and_multi_document_output() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 12);
    let (model, out) = train(dir.path(), &corpus, &["--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // multi-document input: one `# id` header per document
    let out = newsphrase(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "-n",
        "5",
        "--threads",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let headers = text.lines().filter(|l| l.starts_with("# ")).count();
    assert_eq!(headers, 6, "one header per document:\n{text}");
    let ranked = text.lines().filter(|l| l.starts_with("1\t")).count();
    assert_eq!(ranked, 6, "each document starts at rank 1");

    // single bare document: no headers, just ranked lines
    let corpus_json: Value =
        serde_json::from_str(&std::fs::read_to_string(&corpus).unwrap()).unwrap();
    let single = dir.path().join("single.json");
    std::fs::write(&single, corpus_json["documents"][0].to_string()).unwrap();
    let out = newsphrase(&[
        "extract",
        "--input",
        single.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "-n",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("# "), "single document must not print headers:\n{text}");
    assert_eq!(text.lines().count(), 5);
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split('\t');
        assert_eq!(parts.next().unwrap(), (i + 1).to_string(), "rank column");
        let score: f64 = parts.next().unwrap().parse().expect("score column");
        assert!((0.0..=1.0).contains(&score));
        assert!(!parts.next().unwrap().is_empty(), "phrase column");
    }
}

#[test]
fn an_empty_document_extracts_nothing_and_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 13);
    let (model, out) = train(dir.path(), &corpus, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let empty = dir.path().join("empty.json");
    let doc = json!({
        "id": "vazio",
        "channel": "TV1",
        "program": "Jornal",
        "broadcast_time": "2012-06-18T10:00:00+00:00",
        "position_in_program": 0,
        "text": "",
    });
    std::fs::write(&empty, doc.to_string()).unwrap();
    let out = newsphrase(&[
        "extract",
        "--input",
        empty.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).trim().is_empty(), "no phrases from an empty text");
}

#[test]
fn evaluate_prints_the_table_and_sweeps_the_cutoffs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 14);
    let (model, out) = train(dir.path(), &corpus, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = newsphrase(&[
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--sweep",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("#Keyphrases"), "table header: {}", lines[0]);
    for (i, n) in [10, 20, 30, 35, 40].iter().enumerate() {
        assert!(
            lines[i + 1].starts_with(&format!("n={n}")),
            "row {i} should be n={n}: {}",
            lines[i + 1]
        );
    }
    assert_eq!(lines.len(), 6);

    let out = newsphrase(&[
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let parsed: Value = serde_json::from_str(&stdout(&out)).expect("evaluate --json is JSON");
    let runs = parsed["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 1, "one run without --sweep");
    assert_eq!(runs[0]["n"].as_u64().unwrap(), 30, "default cutoff");
    assert!(runs[0]["report"]["f1"].is_number());
}

#[test]
fn config_file_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), "train.json", 15);

    let (by_flag, out) = train(dir.path(), &corpus, &["--seed", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("effective config"), "effective config is logged");

    let config = dir.path().join("train.conf");
    std::fs::write(&config, "# training defaults\nseed = 5\n").unwrap();
    let (by_config, out) =
        train(dir.path(), &corpus, &["--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        std::fs::read(&by_flag).unwrap(),
        std::fs::read(&by_config).unwrap(),
        "seed from the config file must match the same seed by flag"
    );

    let noisy = dir.path().join("noisy.conf");
    std::fs::write(&noisy, "seed = 9\n").unwrap();
    let (flag_wins, out) = train(
        dir.path(),
        &corpus,
        &["--config", noisy.to_str().unwrap(), "--seed", "5"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        std::fs::read(&by_flag).unwrap(),
        std::fs::read(&flag_wins).unwrap(),
        "a flag must override the config file"
    );

    let broken = dir.path().join("broken.conf");
    std::fs::write(&broken, "seed five\n").unwrap();
    let (_, out) = train(dir.path(), &corpus, &["--config", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "malformed config lines are errors");
}

#[test]
fn cloud_filters_by_topic_and_exports_json() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = topical_corpus(dir.path());
    let (model, out) = train(dir.path(), &corpus, &["--bags", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let html = dir.path().join("cloud.html");
    let base = [
        "cloud",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        html.to_str().unwrap(),
    ];
    let same_day = ["--now", "2012-06-18T12:00:00+00:00"];

    let mut args = base.to_vec();
    args.extend_from_slice(&same_day);
    let out = newsphrase(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(
        summary.contains("from 4 news items"),
        "all four documents are in the window: {summary}"
    );
    let page = std::fs::read_to_string(&html).unwrap();
    assert!(page.contains("<svg"), "cloud page renders an SVG");

    let mut args = base.to_vec();
    args.extend_from_slice(&same_day);
    args.extend_from_slice(&["--topic", "economia", "--json"]);
    let out = newsphrase(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let parsed: Value = serde_json::from_str(&stdout(&out)).expect("cloud --json is JSON");
    assert_eq!(parsed["topic"].as_str(), Some("economia"));
    let entries = parsed["entries"].as_array().unwrap();
    assert!(!entries.is_empty(), "economy documents produce entries");
    for entry in entries {
        assert!(entry["phrase"].is_string());
        assert!(entry["count"].as_u64().unwrap() >= 1);
        for id in entry["doc_ids"].as_array().unwrap() {
            let id = id.as_str().unwrap();
            assert!(
                id == "e1" || id == "e2",
                "topic filter leaked document {id} into the cloud"
            );
        }
    }

    let mut args = base.to_vec();
    args.extend_from_slice(&["--now", "2012-06-19T12:00:00+00:00"]);
    let out = newsphrase(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("from 0 news items"),
        "a day later the window is empty: {}",
        stdout(&out)
    );
    let page = std::fs::read_to_string(&html).unwrap();
    assert!(!page.contains("<svg"), "empty cloud renders no SVG");
}
