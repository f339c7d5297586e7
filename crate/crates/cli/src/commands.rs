//! Subcommand implementations. Every command resolves its settings as
//! flag > config file > default, logs the effective configuration to
//! stderr, and writes results to stdout (or the requested output file).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, FixedOffset, Local};
use serde_json::json;
use sha2::{Digest, Sha256};

use newsphrase_core::cloud::{
    build_cloud, render_cloud, select_top_news, CloudConfig, CloudDocument, TagCloud,
};
use newsphrase_core::corpus::{Corpus, NewsDocument, SplitKind};
use newsphrase_core::ensemble::{Algorithm, BaggingParams, TrainParams};
use newsphrase_core::lm::{ArpaModel, CompressOptions, CompressedNGramModel, PhraseScorer};
use newsphrase_core::pipeline::{
    evaluate_corpus, extract_doc, train_model_with_summary, ExtractionModel,
};
use newsphrase_core::preprocess::{Language, LanguageResources};
use newsphrase_core::rank::format_report_table;

use crate::config::{resolve, FileConfig};
use crate::{CloudArgs, CompressLmArgs, EvaluateArgs, ExtractArgs, ResourceArgs, TrainArgs};

const SWEEP_NS: [usize; 5] = [10, 20, 30, 35, 40];

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn resolve_resources(args: &ResourceArgs, cfg: &FileConfig) -> Result<(LanguageResources, String)> {
    let language: String =
        resolve(args.language.clone(), Ok(cfg.get("language").map(String::from)), "pt".into())?;
    let language: Language =
        language.parse().map_err(|e| anyhow!("{e}")).context("invalid --language")?;
    let mut resources = LanguageResources::builtin(language);
    let path_of = |flag: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
        flag.clone().or_else(|| cfg.get(key).map(PathBuf::from))
    };
    if let Some(p) = path_of(&args.stopwords, "stopwords") {
        resources = resources.with_stopwords_file(&p)?;
    }
    if let Some(p) = path_of(&args.ne_lexicon, "ne_lexicon") {
        resources = resources.with_ne_lexicon_file(&p)?;
    }
    if let Some(p) = path_of(&args.pos_lexicon, "pos_lexicon") {
        resources = resources.with_pos_lexicon_file(&p)?;
    }
    Ok((resources, language.code().to_string()))
}

/// A phrase scorer from either a compressed store (`CNLM` magic) or ARPA
/// text, decided by content.
fn load_scorer(path: &Path) -> Result<Box<dyn PhraseScorer>> {
    let head = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    if head.starts_with(b"CNLM") {
        Ok(Box::new(CompressedNGramModel::from_bytes(&head, path)?))
    } else {
        Ok(Box::new(ArpaModel::load(path)?))
    }
}

fn resolve_scorer(
    args: &ResourceArgs,
    cfg: &FileConfig,
) -> Result<(Option<Box<dyn PhraseScorer>>, Option<PathBuf>)> {
    let path = args.lm.clone().or_else(|| cfg.get("lm").map(PathBuf::from));
    match path {
        Some(p) => Ok((Some(load_scorer(&p)?), Some(p))),
        None => Ok((None, None)),
    }
}

fn warn_on_lm_mismatch(model: &ExtractionModel, scorer_present: bool) {
    if model.lm_used() && !scorer_present {
        eprintln!(
            "warning: model was trained with a language model but none was given; \
             the phrase-probability feature is zeroed"
        );
    }
    if !model.lm_used() && scorer_present {
        eprintln!(
            "warning: model was trained without a language model; \
             the given one changes a feature the trees never saw"
        );
    }
}

/// Accepts either a whole corpus file or a single document object.
fn load_documents(path: &Path, split: SplitKind, resources: &LanguageResources) -> Result<Corpus> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    let docs: Vec<NewsDocument> = if value.get("documents").is_some() {
        serde_json::from_value(value["documents"].clone())
            .with_context(|| format!("{}: malformed documents array", path.display()))?
    } else {
        vec![serde_json::from_value(value)
            .with_context(|| format!("{}: malformed document object", path.display()))?]
    };
    Ok(Corpus::from_documents(docs, split, resources)?)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn log_effective_config(command: &str, settings: &serde_json::Value) {
    eprintln!("effective config [{command}]: {settings}");
}

pub fn cmd_train(args: &TrainArgs, config_path: Option<&Path>, json: bool) -> Result<()> {
    let cfg = load_file_config(config_path)?;
    let (resources, language) = resolve_resources(&args.resources, &cfg)?;
    let (scorer, lm_path) = resolve_scorer(&args.resources, &cfg)?;

    let algorithm_name: String =
        resolve(args.algorithm.clone(), Ok(cfg.get("algorithm").map(String::from)), "c45".into())?;
    let algorithm = parse_algorithm(&algorithm_name)?;
    let mut tree = TrainParams::for_algorithm(algorithm);
    tree.min_leaf = resolve(args.min_leaf, cfg.get_parse("min_leaf"), tree.min_leaf)?;
    tree.prune = resolve(args.prune, cfg.get_parse("prune"), tree.prune)?;
    let params = BaggingParams {
        n_bags: resolve(args.bags, cfg.get_parse("bags"), 10)?,
        seed: resolve(args.seed, cfg.get_parse("seed"), 1)?,
        tree,
    };

    log_effective_config(
        "train",
        &json!({
            "corpus": args.corpus.display().to_string(),
            "model_out": args.model_out.display().to_string(),
            "language": language,
            "algorithm": algorithm_name,
            "bags": params.n_bags,
            "seed": params.seed,
            "min_leaf": params.tree.min_leaf,
            "prune": params.tree.prune,
            "lm": lm_path.as_ref().map(|p| p.display().to_string()),
        }),
    );

    let corpus = load_documents(&args.corpus, SplitKind::Train, &resources)?;
    let (model, summary) =
        train_model_with_summary(&corpus, &resources, scorer.as_deref(), &params)?;
    model.save(&args.model_out)?;
    let hash = sha256_hex(&fs::read(&args.model_out)?);

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "model": args.model_out.display().to_string(),
                "sha256": hash,
                "instances": summary.instances,
                "positives": summary.positives,
                "positive_rate": summary.positive_rate(),
            }))?
        );
    } else {
        println!("instances: {}", summary.instances);
        println!(
            "positives: {} ({:.2}%)",
            summary.positives,
            summary.positive_rate() * 100.0
        );
        println!("model: {}", args.model_out.display());
        println!("sha256: {hash}");
    }
    Ok(())
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    match name.to_ascii_lowercase().as_str() {
        "c45" | "c4.5" => Ok(Algorithm::C45),
        "cart" => Ok(Algorithm::Cart),
        other => bail!("unknown algorithm {other:?}; expected c45 or cart"),
    }
}

pub fn cmd_extract(args: &ExtractArgs, config_path: Option<&Path>, json: bool) -> Result<()> {
    let cfg = load_file_config(config_path)?;
    let (resources, language) = resolve_resources(&args.resources, &cfg)?;
    let (scorer, lm_path) = resolve_scorer(&args.resources, &cfg)?;
    let n = resolve(args.n, cfg.get_parse("n"), 10)?;

    log_effective_config(
        "extract",
        &json!({
            "input": args.input.display().to_string(),
            "model": args.model.display().to_string(),
            "language": language,
            "n": n,
            "lm": lm_path.as_ref().map(|p| p.display().to_string()),
        }),
    );

    let model = ExtractionModel::load(&args.model)?;
    warn_on_lm_mismatch(&model, scorer.is_some());
    let corpus = load_documents(&args.input, SplitKind::Unlabeled, &resources)?;

    let mut results = Vec::new();
    for doc in &corpus.documents {
        let ranked = extract_doc(&model, &resources, scorer.as_deref(), doc, n)?;
        results.push((doc.id.clone(), ranked));
    }

    if json {
        let docs: Vec<serde_json::Value> = results
            .iter()
            .map(|(id, ranked)| json!({ "doc": id, "keyphrases": ranked }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&docs)?);
    } else {
        let multi = results.len() > 1;
        for (i, (id, ranked)) in results.iter().enumerate() {
            if multi {
                if i > 0 {
                    println!();
                }
                println!("# {id}");
            }
            for (rank, phrase) in ranked.iter().enumerate() {
                println!("{}\t{:.6}\t{}", rank + 1, phrase.score, phrase.surface);
            }
        }
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs, config_path: Option<&Path>, json: bool) -> Result<()> {
    let cfg = load_file_config(config_path)?;
    let (resources, language) = resolve_resources(&args.resources, &cfg)?;
    let (scorer, lm_path) = resolve_scorer(&args.resources, &cfg)?;
    let single_n = resolve(args.n, cfg.get_parse("n"), 30)?;
    let ns: Vec<usize> = if args.sweep { SWEEP_NS.to_vec() } else { vec![single_n] };

    log_effective_config(
        "evaluate",
        &json!({
            "corpus": args.corpus.display().to_string(),
            "model": args.model.display().to_string(),
            "language": language,
            "n": ns,
            "lm": lm_path.as_ref().map(|p| p.display().to_string()),
        }),
    );

    let model = ExtractionModel::load(&args.model)?;
    warn_on_lm_mismatch(&model, scorer.is_some());
    let corpus = load_documents(&args.corpus, SplitKind::Test, &resources)?;

    let mut reports = Vec::new();
    for &n in &ns {
        let report = evaluate_corpus(&model, &resources, scorer.as_deref(), &corpus, n)?;
        reports.push((n, report));
    }

    if json {
        let runs: Vec<serde_json::Value> =
            reports.iter().map(|(n, r)| json!({ "n": n, "report": r })).collect();
        println!("{}", serde_json::to_string_pretty(&json!({ "runs": runs }))?);
    } else {
        let rows: Vec<(String, &newsphrase_core::rank::EvaluationReport)> =
            reports.iter().map(|(n, r)| (format!("n={n}"), r)).collect();
        print!("{}", format_report_table(&rows));
    }
    Ok(())
}

pub fn cmd_compress_lm(args: &CompressLmArgs, config_path: Option<&Path>, json: bool) -> Result<()> {
    let cfg = load_file_config(config_path)?;
    let defaults = CompressOptions::default();
    let options = CompressOptions {
        fingerprint_bits: resolve(
            args.fingerprint_bits,
            cfg.get_parse("fingerprint_bits"),
            defaults.fingerprint_bits,
        )?,
        quant_bits: resolve(args.quant_bits, cfg.get_parse("quant_bits"), defaults.quant_bits)?,
        backoff_penalty: resolve(
            args.penalty,
            cfg.get_parse("backoff_penalty"),
            defaults.backoff_penalty,
        )?,
        seed: resolve(args.seed, cfg.get_parse("seed"), defaults.seed)?,
    };

    log_effective_config(
        "compress-lm",
        &json!({
            "arpa": args.arpa.display().to_string(),
            "out": args.out.display().to_string(),
            "fingerprint_bits": options.fingerprint_bits,
            "quant_bits": options.quant_bits,
            "backoff_penalty": options.backoff_penalty,
            "seed": options.seed,
        }),
    );

    let original = fs::metadata(&args.arpa)
        .with_context(|| format!("cannot read {}", args.arpa.display()))?
        .len();
    let arpa = ArpaModel::load(&args.arpa)?;
    let compressed = CompressedNGramModel::from_arpa(&arpa, options)?;
    compressed.save(&args.out)?;
    let size = fs::metadata(&args.out)?.len();
    let ratio = size as f64 / original as f64;

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "out": args.out.display().to_string(),
                "original_bytes": original,
                "compressed_bytes": size,
                "ratio": ratio,
            }))?
        );
    } else {
        println!("original: {original} bytes");
        println!("compressed: {size} bytes");
        println!("ratio: {ratio:.3}");
    }
    Ok(())
}

pub fn cmd_cloud(args: &CloudArgs, config_path: Option<&Path>, json: bool) -> Result<()> {
    let cfg = load_file_config(config_path)?;
    let (resources, language) = resolve_resources(&args.resources, &cfg)?;
    let (scorer, lm_path) = resolve_scorer(&args.resources, &cfg)?;

    let defaults = CloudConfig::default();
    let cloud_config = CloudConfig {
        window_hours: resolve(args.window_hours, cfg.get_parse("window_hours"), defaults.window_hours)?,
        recency_weight: resolve(None, cfg.get_parse("recency_weight"), defaults.recency_weight)?,
        position_weight: resolve(None, cfg.get_parse("position_weight"), defaults.position_weight)?,
        duplication_weight: resolve(
            None,
            cfg.get_parse("duplication_weight"),
            defaults.duplication_weight,
        )?,
        min_shared_keyphrases: resolve(
            None,
            cfg.get_parse("min_shared_keyphrases"),
            defaults.min_shared_keyphrases,
        )?,
        n_news: resolve(args.n_news, cfg.get_parse("n_news"), defaults.n_news)?,
        phrases_per_doc: resolve(
            args.phrases_per_doc,
            cfg.get_parse("phrases_per_doc"),
            defaults.phrases_per_doc,
        )?,
        max_phrases: resolve(args.max_phrases, cfg.get_parse("max_phrases"), defaults.max_phrases)?,
        font_min: resolve(None, cfg.get_parse("font_min"), defaults.font_min)?,
        font_max: resolve(None, cfg.get_parse("font_max"), defaults.font_max)?,
    };
    cloud_config.validate()?;

    let now: DateTime<FixedOffset> = match &args.now {
        Some(raw) => DateTime::parse_from_rfc3339(raw)
            .map_err(|e| anyhow!("--now must be RFC 3339 ({e})"))?,
        None => Local::now().fixed_offset(),
    };
    let topic = args.topic.clone().or_else(|| cfg.get("topic").map(String::from));

    log_effective_config(
        "cloud",
        &json!({
            "corpus": args.corpus.display().to_string(),
            "model": args.model.display().to_string(),
            "out": args.out.display().to_string(),
            "language": language,
            "now": now.to_rfc3339(),
            "topic": topic,
            "window_hours": cloud_config.window_hours,
            "n_news": cloud_config.n_news,
            "phrases_per_doc": cloud_config.phrases_per_doc,
            "max_phrases": cloud_config.max_phrases,
            "lm": lm_path.as_ref().map(|p| p.display().to_string()),
        }),
    );

    let model = ExtractionModel::load(&args.model)?;
    warn_on_lm_mismatch(&model, scorer.is_some());
    let corpus = load_documents(&args.corpus, SplitKind::Unlabeled, &resources)?;

    let mut cloud_docs = Vec::with_capacity(corpus.documents.len());
    for doc in &corpus.documents {
        let ranked =
            extract_doc(&model, &resources, scorer.as_deref(), doc, cloud_config.phrases_per_doc)?;
        cloud_docs.push(CloudDocument::from_news(doc, ranked));
    }

    let selected = select_top_news(&cloud_docs, now, topic.as_deref(), &cloud_config);
    let entries = build_cloud(&cloud_docs, &selected, &cloud_config);
    let cloud = TagCloud { generated_at: now, topic, entries };

    let html = render_cloud(&cloud, &cloud_config);
    fs::write(&args.out, html).with_context(|| format!("cannot write {}", args.out.display()))?;

    if json {
        println!("{}", cloud.to_json());
    } else {
        println!(
            "cloud: {} ({} entries from {} news items)",
            args.out.display(),
            cloud.entries.len(),
            selected.len()
        );
    }
    Ok(())
}
