//! End-to-end: train on a planted corpus, persist, reload, and confirm the
//! pipeline recovers essentially all planted keyphrases on held-out docs.

use newsphrase_core::ensemble::{Algorithm, BaggingParams, TrainParams};
use newsphrase_core::pipeline::{evaluate_corpus, extract_doc, train_model, ExtractionModel};
use newsphrase_core::preprocess::{Language, LanguageResources};
use newsphrase_core::synthetic::planted_training_pair;

fn params(algorithm: Algorithm) -> BaggingParams {
    BaggingParams { n_bags: 10, seed: 17, tree: TrainParams::for_algorithm(algorithm) }
}

#[test]
fn planted_keyphrases_are_recovered_after_a_save_load_cycle() {
    let resources = LanguageResources::builtin(Language::Portuguese);
    let (train, test) = planted_training_pair(101, &resources).unwrap();

    let model = train_model(&train, &resources, None, &params(Algorithm::C45)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planted.npkm");
    model.save(&path).unwrap();
    let reloaded = ExtractionModel::load(&path).unwrap();

    let report = evaluate_corpus(&reloaded, &resources, None, &test, 10).unwrap();
    assert!(
        report.f1 >= 0.95,
        "planted recovery should be nearly perfect, got F1 {:.3}",
        report.f1
    );

    // extraction on one held-out doc finds its own gold set
    let doc = &test.documents[0];
    let gold = doc.gold_normalized(&resources);
    let ranked = extract_doc(&reloaded, &resources, None, doc, 10).unwrap();
    let hits = ranked.iter().filter(|k| gold.contains(&k.normalized)).count();
    assert!(hits >= 9, "top 10 should be nearly all planted words, got {hits}");
}

#[test]
fn both_tree_families_learn_the_planted_signal() {
    let resources = LanguageResources::builtin(Language::Portuguese);
    let (train, test) = planted_training_pair(202, &resources).unwrap();

    let cart = train_model(&train, &resources, None, &params(Algorithm::Cart)).unwrap();
    let report = evaluate_corpus(&cart, &resources, None, &test, 10).unwrap();
    assert!(report.f1 >= 0.90, "CART planted F1 {:.3}", report.f1);

    let c45 = train_model(&train, &resources, None, &params(Algorithm::C45)).unwrap();
    let report = evaluate_corpus(&c45, &resources, None, &test, 10).unwrap();
    assert!(report.f1 >= 0.85, "C4.5 planted F1 {:.3}", report.f1);
}
