//! Transcript corpus: the JSON document collection every pipeline stage
//! reads from.
//!
//! On-disk shape:
//!
//! ```json
//! {
//!   "documents": [
//!     {
//!       "id": "rtp1-20110107-003",
//!       "channel": "RTP1",
//!       "program": "Telejornal",
//!       "broadcast_time": "2011-01-07T20:03:00+00:00",
//!       "position_in_program": 2,
//!       "topic": "economia",
//!       "text": "O FMI avisa ...",
//!       "gold_keyphrases": ["dívida pública", "FMI"]
//!     }
//!   ]
//! }
//! ```
//!
//! `topic` and `gold_keyphrases` are optional; train and test splits insist
//! on gold keyphrases. Token lists are derived from `text` at load time and
//! never serialized.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{LanguageResources, Token};

/// How a corpus is used; train and test require labeled documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Train,
    Test,
    /// Documents to extract from; gold labels not required.
    Unlabeled,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SplitKind::Train => "train",
            SplitKind::Test => "test",
            SplitKind::Unlabeled => "unlabeled",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsDocument {
    pub id: String,
    pub channel: String,
    pub program: String,
    pub broadcast_time: DateTime<FixedOffset>,
    /// Zero-based slot of this story within its program.
    pub position_in_program: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_keyphrases: Option<Vec<String>>,
    /// Derived from `text`; populated at load time.
    #[serde(skip)]
    pub tokens: Vec<Token>,
}

impl NewsDocument {
    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }

    /// Distinct stem-normalized forms of the gold keyphrases; empty when
    /// the document is unlabeled.
    pub fn gold_normalized(&self, resources: &LanguageResources) -> HashSet<String> {
        self.gold_keyphrases
            .iter()
            .flatten()
            .map(|phrase| normalize_phrase(phrase, resources))
            .collect()
    }
}

/// Stem-normalized form of a free-standing phrase string: tokenize, stem,
/// join with single spaces.
pub fn normalize_phrase(phrase: &str, resources: &LanguageResources) -> String {
    resources
        .tokenize(phrase)
        .iter()
        .map(|t| t.stem.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusFile {
    documents: Vec<NewsDocument>,
}

#[derive(Debug)]
pub struct Corpus {
    pub documents: Vec<NewsDocument>,
    pub split: SplitKind,
}

impl Corpus {
    /// Reads, validates, and tokenizes a corpus file.
    pub fn load(path: &Path, split: SplitKind, resources: &LanguageResources) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: CorpusFile =
            serde_json::from_str(&raw).map_err(|e| Error::json(path, &e))?;
        Corpus::from_documents(file.documents, split, resources)
    }

    /// Validates and tokenizes documents already in memory.
    pub fn from_documents(
        mut documents: Vec<NewsDocument>,
        split: SplitKind,
        resources: &LanguageResources,
    ) -> Result<Self> {
        documents
            .par_iter_mut()
            .for_each(|doc| doc.tokens = resources.tokenize(&doc.text));
        let corpus = Corpus { documents, split };
        corpus.validate(resources)?;
        Ok(corpus)
    }

    fn validate(&self, resources: &LanguageResources) -> Result<()> {
        let mut seen = HashSet::new();
        for doc in &self.documents {
            if doc.id.is_empty() {
                return Err(Error::Corpus("document with empty id".into()));
            }
            if !seen.insert(&doc.id) {
                return Err(Error::Corpus(format!("duplicate document id {:?}", doc.id)));
            }
            if matches!(self.split, SplitKind::Train | SplitKind::Test)
                && doc.gold_keyphrases.is_none()
            {
                return Err(Error::Document {
                    doc_id: doc.id.clone(),
                    message: format!("{} split requires gold_keyphrases", self.split),
                });
            }
            for phrase in doc.gold_keyphrases.iter().flatten() {
                let words = resources.tokenize(phrase).len();
                if !(1..=5).contains(&words) {
                    return Err(Error::Document {
                        doc_id: doc.id.clone(),
                        message: format!(
                            "gold keyphrase {phrase:?} has {words} words, expected 1 to 5"
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CorpusFile { documents: self.documents.clone() };
        let json = serde_json::to_string_pretty(&file).expect("corpus serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn stats(&self) -> CorpusStats {
        let words = self.documents.iter().map(|d| d.word_count()).sum();
        let labeled: Vec<usize> = self
            .documents
            .iter()
            .filter_map(|d| d.gold_keyphrases.as_ref().map(|g| g.len()))
            .collect();
        let mean_keyphrases = if labeled.is_empty() {
            0.0
        } else {
            labeled.iter().sum::<usize>() as f64 / labeled.len() as f64
        };
        CorpusStats { documents: self.len(), words, mean_keyphrases }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub words: usize,
    pub mean_keyphrases: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::Language;

    fn resources() -> LanguageResources {
        LanguageResources::builtin(Language::Portuguese)
    }

    fn doc(id: &str, text: &str, gold: Option<Vec<&str>>) -> NewsDocument {
        NewsDocument {
            id: id.into(),
            channel: "RTP1".into(),
            program: "Telejornal".into(),
            broadcast_time: DateTime::parse_from_rfc3339("2011-01-07T20:00:00+00:00").unwrap(),
            position_in_program: 0,
            topic: None,
            text: text.into(),
            gold_keyphrases: gold.map(|g| g.into_iter().map(String::from).collect()),
            tokens: Vec::new(),
        }
    }

    #[test]
    fn empty_corpus_is_valid() {
        let c = Corpus::from_documents(vec![], SplitKind::Train, &resources()).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.stats(), CorpusStats { documents: 0, words: 0, mean_keyphrases: 0.0 });
    }

    #[test]
    fn train_split_requires_gold() {
        let err =
            Corpus::from_documents(vec![doc("d1", "texto", None)], SplitKind::Train, &resources())
                .unwrap_err();
        assert!(err.to_string().contains("gold_keyphrases"), "{err}");
        // the same document is fine unlabeled
        Corpus::from_documents(vec![doc("d1", "texto", None)], SplitKind::Unlabeled, &resources())
            .unwrap();
    }

    #[test]
    fn gold_keyphrases_are_capped_at_five_words() {
        let long = "um dois três quatro cinco seis";
        let err = Corpus::from_documents(
            vec![doc("d1", "texto", Some(vec![long]))],
            SplitKind::Train,
            &resources(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("6 words"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let docs = vec![doc("d1", "um", None), doc("d1", "dois", None)];
        let err = Corpus::from_documents(docs, SplitKind::Unlabeled, &resources()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn tokens_are_populated_on_load() {
        let c = Corpus::from_documents(
            vec![doc("d1", "O FMI avisa.", Some(vec!["FMI"]))],
            SplitKind::Train,
            &resources(),
        )
        .unwrap();
        assert_eq!(c.documents[0].word_count(), 3);
        assert_eq!(c.documents[0].tokens[1].surface, "FMI");
    }

    #[test]
    fn roundtrip_preserves_documents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.json");
        let mut d = doc("d1", "O défice orçamental subiu.", Some(vec!["défice orçamental"]));
        d.topic = Some("economia".into());
        let original =
            Corpus::from_documents(vec![d], SplitKind::Test, &resources()).unwrap();
        original.save(&path).unwrap();
        let reloaded = Corpus::load(&path, SplitKind::Test, &resources()).unwrap();
        assert_eq!(original.documents, reloaded.documents);
    }

    #[test]
    fn malformed_json_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"documents\": [ {\"id\": }\n]}").unwrap();
        let err = Corpus::load(&path, SplitKind::Train, &resources()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn gold_normalization_merges_variants() {
        let d = doc("d1", "texto", Some(vec!["Governo", "governos"]));
        let c = Corpus::from_documents(vec![d], SplitKind::Train, &resources()).unwrap();
        let norm = c.documents[0].gold_normalized(&resources());
        assert_eq!(norm.len(), 1);
        assert!(norm.contains("govern"));
    }
}
