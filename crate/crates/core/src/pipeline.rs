//! End-to-end assembly: corpora become feature datasets, datasets become
//! trained extraction bundles, bundles extract and get evaluated.
//!
//! An extraction bundle carries everything scoring needs besides the
//! language resources and the optional phrase-probability model: the tree
//! ensemble plus the training corpus's document-frequency table, keyed by
//! the same normalized phrase forms extraction produces.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::binio::{Reader, Writer};
use crate::candidates::generate_candidates;
use crate::corpus::{Corpus, NewsDocument};
use crate::ensemble::{
    train_bagging, BaggedTreeModel, BaggingParams, Dataset, FeatureKind, FeatureValue, Schema,
};
use crate::error::{Error, Result};
use crate::features::{compute_features, FeatureVector, IdfTable, PosPattern};
use crate::lm::PhraseScorer;
use crate::preprocess::{Language, LanguageResources};
use crate::rank::{evaluate_doc, extract_top_n, EvaluationReport, RankedKeyphrase};

/// Classifier feature order; the categorical phrase-shape pattern sits
/// last, after the twelve numeric features.
pub const FEATURE_NAMES: [&str; 13] = [
    "tf",
    "idf",
    "tfidf",
    "first_pos",
    "last_pos",
    "spread",
    "n_words",
    "char_len",
    "named_entities",
    "capital_letters",
    "noun_fraction",
    "lm_log_prob",
    "pos_pattern",
];

pub fn feature_schema() -> Schema {
    let mut kinds = vec![FeatureKind::Numeric; FEATURE_NAMES.len() - 1];
    kinds.push(FeatureKind::Categorical { arity: PosPattern::ARITY as u8 });
    Schema::new(kinds).expect("fixed feature schema is valid")
}

/// Flattens a feature vector into a classifier row, in [`FEATURE_NAMES`]
/// order.
pub fn feature_row(fv: &FeatureVector) -> Vec<FeatureValue> {
    vec![
        FeatureValue::Numeric(fv.tf),
        FeatureValue::Numeric(fv.idf),
        FeatureValue::Numeric(fv.tfidf),
        FeatureValue::Numeric(fv.first_pos),
        FeatureValue::Numeric(fv.last_pos),
        FeatureValue::Numeric(fv.spread),
        FeatureValue::Numeric(fv.n_words),
        FeatureValue::Numeric(fv.char_len),
        FeatureValue::Numeric(fv.named_entities),
        FeatureValue::Numeric(fv.capital_letters),
        FeatureValue::Numeric(fv.noun_fraction),
        FeatureValue::Numeric(fv.lm_log_prob),
        FeatureValue::Categorical(fv.pos_pattern.index()),
    ]
}

/// One row per candidate phrase of every document, labeled by whether its
/// normalized form is a gold keyphrase of that document.
pub fn build_training_set(
    corpus: &Corpus,
    resources: &LanguageResources,
    idf: &IdfTable,
    scorer: Option<&dyn PhraseScorer>,
) -> Result<Dataset> {
    let per_doc: Vec<Vec<(Vec<FeatureValue>, bool)>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let gold = doc.gold_normalized(resources);
            generate_candidates(&doc.tokens)
                .iter()
                .map(|cand| {
                    let fv = compute_features(cand, doc, resources, idf, scorer);
                    (feature_row(&fv), gold.contains(&cand.normalized))
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for doc_rows in per_doc {
        for (row, label) in doc_rows {
            rows.push(row);
            labels.push(label);
        }
    }
    if rows.is_empty() {
        return Err(Error::Corpus("no candidate phrases in the corpus".into()));
    }
    Dataset::new(feature_schema(), rows, labels)
}

/// A trained extraction bundle: tree ensemble plus the supporting tables
/// extraction needs at scoring time.
#[derive(Debug, Clone)]
pub struct ExtractionModel {
    pub(crate) language: Language,
    /// Whether the phrase-probability feature was live during training.
    pub(crate) lm_used: bool,
    pub(crate) idf: IdfTable,
    pub(crate) classifier: BaggedTreeModel,
}

// Container layout ("NPKM", little-endian): magic, version, language code,
// lm flag, document count, sorted idf entries, then the embedded BGTM blob.
const MAGIC: &[u8; 4] = b"NPKM";
const VERSION: u16 = 1;

impl ExtractionModel {
    pub fn language(&self) -> Language {
        self.language
    }

    pub fn lm_used(&self) -> bool {
        self.lm_used
    }

    pub fn idf(&self) -> &IdfTable {
        &self.idf
    }

    pub fn classifier(&self) -> &BaggedTreeModel {
        &self.classifier
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.str(self.language.code());
        w.u8(self.lm_used as u8);
        w.u64(self.idf.doc_count() as u64);
        let entries = self.idf.sorted_entries();
        w.u64(entries.len() as u64);
        for (normalized, df) in entries {
            w.str(normalized);
            w.u32(df);
        }
        let blob = self.classifier.to_bytes();
        w.u64(blob.len() as u64);
        w.bytes(&blob);
        w.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn from_bytes(data: &[u8], origin: &Path) -> Result<Self> {
        let fail = |message: String| Error::ModelFormat { path: origin.to_path_buf(), message };
        let mut r = Reader::new(data, origin);
        r.expect_magic(MAGIC, "extraction model")?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(fail(format!("unsupported version {version} (expected {VERSION})")));
        }
        let language: Language = r.str()?.parse().map_err(|e: Error| fail(e.to_string()))?;
        let lm_used = r.u8()? != 0;
        let doc_count = r.u64()? as usize;
        let n_entries = r.u64()? as usize;
        let mut doc_freq = HashMap::with_capacity(n_entries);
        for _ in 0..n_entries {
            let normalized = r.str()?;
            let df = r.u32()?;
            if df == 0 || df as usize > doc_count {
                return Err(fail(format!(
                    "document frequency {df} of \"{normalized}\" outside 1..={doc_count}"
                )));
            }
            doc_freq.insert(normalized, df);
        }
        let blob_len = r.u64()? as usize;
        let blob = r.take(blob_len)?;
        let classifier = BaggedTreeModel::from_bytes(blob, origin)?;
        if !r.done() {
            return Err(fail("trailing bytes after classifier blob".into()));
        }
        let expected = feature_schema();
        if *classifier.schema() != expected {
            return Err(Error::SchemaMismatch {
                expected: expected.describe(),
                found: classifier.schema().describe(),
            });
        }
        Ok(ExtractionModel {
            language,
            lm_used,
            idf: IdfTable::from_parts(doc_count, doc_freq),
            classifier,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&data, path)
    }
}

/// What the trainer saw: candidate instances and how many carried a
/// gold label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainSummary {
    pub instances: usize,
    pub positives: usize,
}

impl TrainSummary {
    pub fn positive_rate(&self) -> f64 {
        if self.instances == 0 {
            0.0
        } else {
            self.positives as f64 / self.instances as f64
        }
    }
}

/// Trains an extraction bundle on a labeled corpus. The scorer, when
/// given, feeds the phrase-probability feature; its absence zeroes that
/// feature and is recorded in the bundle.
pub fn train_model(
    corpus: &Corpus,
    resources: &LanguageResources,
    scorer: Option<&dyn PhraseScorer>,
    params: &BaggingParams,
) -> Result<ExtractionModel> {
    train_model_with_summary(corpus, resources, scorer, params).map(|(model, _)| model)
}

/// `train_model`, also reporting the training-set shape.
pub fn train_model_with_summary(
    corpus: &Corpus,
    resources: &LanguageResources,
    scorer: Option<&dyn PhraseScorer>,
    params: &BaggingParams,
) -> Result<(ExtractionModel, TrainSummary)> {
    let idf = IdfTable::build(corpus);
    let dataset = build_training_set(corpus, resources, &idf, scorer)?;
    let summary = TrainSummary {
        instances: dataset.len(),
        positives: (0..dataset.len()).filter(|&i| dataset.label(i)).count(),
    };
    let classifier = train_bagging(&dataset, params)?;
    let model = ExtractionModel {
        language: resources.language(),
        lm_used: scorer.is_some(),
        idf,
        classifier,
    };
    Ok((model, summary))
}

fn check_language(model: &ExtractionModel, resources: &LanguageResources) -> Result<()> {
    if model.language != resources.language() {
        return Err(Error::Config(format!(
            "model is for {} but resources are for {}",
            model.language,
            resources.language()
        )));
    }
    Ok(())
}

/// Scores a tokenized document's candidates and keeps the top `n`.
pub fn extract_doc(
    model: &ExtractionModel,
    resources: &LanguageResources,
    scorer: Option<&dyn PhraseScorer>,
    doc: &NewsDocument,
    n: usize,
) -> Result<Vec<RankedKeyphrase>> {
    check_language(model, resources)?;
    let ranked = generate_candidates(&doc.tokens)
        .iter()
        .map(|cand| {
            let fv = compute_features(cand, doc, resources, &model.idf, scorer);
            RankedKeyphrase {
                surface: cand.surface.clone(),
                normalized: cand.normalized.clone(),
                score: model.classifier.predict_proba(&feature_row(&fv)),
                tfidf: fv.tfidf,
                first_pos: fv.first_pos,
                tf: cand.tf() as u32,
            }
        })
        .collect();
    extract_top_n(ranked, n)
}

/// Extracts from every document and macro-averages against the gold labels.
pub fn evaluate_corpus(
    model: &ExtractionModel,
    resources: &LanguageResources,
    scorer: Option<&dyn PhraseScorer>,
    corpus: &Corpus,
    n: usize,
) -> Result<EvaluationReport> {
    check_language(model, resources)?;
    let per_doc: Result<Vec<_>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let extracted = extract_doc(model, resources, scorer, doc, n)?;
            Ok(evaluate_doc(&doc.id, &extracted, &doc.gold_normalized(resources)))
        })
        .collect();
    Ok(EvaluationReport::from_per_doc(per_doc?))
}
