//! Candidate features.
//!
//! Frequency and position features come first: term frequency, inverse
//! document frequency, their normalized product, where the phrase first and
//! last appears, how far apart those are, and the word count. On top of
//! those sit shape features: surface length in characters, named-entity
//! word count, capital-letter count, the noun fraction plus a categorical
//! phrase shape, and a language-model score (mean per-word conditional
//! log10 probability).

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::candidates::{generate_candidates, CandidatePhrase};
use crate::corpus::{Corpus, NewsDocument};
use crate::lm::PhraseScorer;
use crate::preprocess::{is_sentence_initial, LanguageResources, PosTag, Token};

/// Document frequencies of normalized candidate forms over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfTable {
    doc_count: usize,
    doc_freq: HashMap<String, u32>,
}

impl IdfTable {
    /// Counts, per normalized form, the documents whose candidate set
    /// contains it.
    pub fn build(corpus: &Corpus) -> Self {
        let per_doc: Vec<HashSet<String>> = corpus
            .documents
            .par_iter()
            .map(|doc| {
                generate_candidates(&doc.tokens)
                    .into_iter()
                    .map(|c| c.normalized)
                    .collect()
            })
            .collect();
        let mut doc_freq = HashMap::new();
        for forms in per_doc {
            for form in forms {
                *doc_freq.entry(form).or_insert(0) += 1;
            }
        }
        IdfTable { doc_count: corpus.len(), doc_freq }
    }

    pub fn from_parts(doc_count: usize, doc_freq: HashMap<String, u32>) -> Self {
        IdfTable { doc_count, doc_freq }
    }

    /// log10(N / df). Phrases never seen at build time count as df = 1, so
    /// unseen phrases get the largest idf and the value stays finite.
    pub fn idf(&self, normalized: &str) -> f64 {
        let df = self.doc_freq.get(normalized).copied().unwrap_or(1).max(1);
        (self.doc_count.max(1) as f64 / df as f64).log10()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn len(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_freq.is_empty()
    }

    /// Entries sorted by phrase, for deterministic serialization.
    pub fn sorted_entries(&self) -> Vec<(&str, u32)> {
        let mut entries: Vec<(&str, u32)> =
            self.doc_freq.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        entries.sort_unstable();
        entries
    }
}

/// Shape of a phrase under the coarse POS tagging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosPattern {
    NounOnly,
    NounPhrase,
    ContainsVerb,
    Other,
}

impl PosPattern {
    pub const ARITY: usize = 4;

    pub fn index(self) -> u8 {
        match self {
            PosPattern::NounOnly => 0,
            PosPattern::NounPhrase => 1,
            PosPattern::ContainsVerb => 2,
            PosPattern::Other => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    /// Occurrence count in the document.
    pub tf: f64,
    pub idf: f64,
    /// (tf / document word count) * idf.
    pub tfidf: f64,
    /// First occurrence start index / document word count.
    pub first_pos: f64,
    /// Last occurrence start index / document word count.
    pub last_pos: f64,
    pub spread: f64,
    pub n_words: f64,
    /// Characters in the surface form, spaces included.
    pub char_len: f64,
    /// Words recognized as named entities.
    pub named_entities: f64,
    /// Uppercase letters in the surface form.
    pub capital_letters: f64,
    /// Nouns / words.
    pub noun_fraction: f64,
    pub pos_pattern: PosPattern,
    /// Mean per-word conditional log10 probability; 0 when no model given.
    pub lm_log_prob: f64,
}

/// Frequency and position features; shape features zeroed.
pub fn base_features(cand: &CandidatePhrase, doc: &NewsDocument, idf: &IdfTable) -> FeatureVector {
    let words = doc.word_count().max(1) as f64;
    let tf = cand.tf() as f64;
    let idf_value = idf.idf(&cand.normalized);
    let first_pos = cand.first_occurrence().0 as f64 / words;
    let last_pos = cand.last_occurrence().0 as f64 / words;
    FeatureVector {
        tf,
        idf: idf_value,
        tfidf: tf / words * idf_value,
        first_pos,
        last_pos,
        spread: last_pos - first_pos,
        n_words: cand.n_words() as f64,
        char_len: 0.0,
        named_entities: 0.0,
        capital_letters: 0.0,
        noun_fraction: 0.0,
        pos_pattern: PosPattern::Other,
        lm_log_prob: 0.0,
    }
}

/// Fills the shape features in, reading the first occurrence's tokens.
pub fn extended_features(
    fv: &mut FeatureVector,
    cand: &CandidatePhrase,
    doc: &NewsDocument,
    resources: &LanguageResources,
    scorer: Option<&dyn PhraseScorer>,
) {
    let (start, end) = cand.first_occurrence();
    let span = &doc.tokens[start..end];

    fv.char_len = cand.surface.chars().count() as f64;
    fv.named_entities = tag_named_entities(&doc.tokens, start, end, resources) as f64;
    fv.capital_letters = cand.surface.chars().filter(|c| c.is_uppercase()).count() as f64;

    let lowers: Vec<&str> = span.iter().map(|t| t.lower.as_str()).collect();
    let (noun_fraction, pattern) = tag_pos(&lowers, resources);
    fv.noun_fraction = noun_fraction;
    fv.pos_pattern = pattern;

    fv.lm_log_prob = scorer.map_or(0.0, |s| s.phrase_score(&lowers));
}

/// Base and shape features together.
pub fn compute_features(
    cand: &CandidatePhrase,
    doc: &NewsDocument,
    resources: &LanguageResources,
    idf: &IdfTable,
    scorer: Option<&dyn PhraseScorer>,
) -> FeatureVector {
    let mut fv = base_features(cand, doc, idf);
    extended_features(&mut fv, cand, doc, resources, scorer);
    fv
}

/// Counts named-entity words in the token span `[start, end)`.
///
/// A word counts when the lexicon lists it, or as a fallback when its
/// surface is capitalized somewhere other than sentence-initial position
/// and it is not a stopword.
pub fn tag_named_entities(
    tokens: &[Token],
    start: usize,
    end: usize,
    resources: &LanguageResources,
) -> usize {
    (start..end)
        .filter(|&i| {
            let t = &tokens[i];
            if resources.in_ne_lexicon(&t.lower) {
                return true;
            }
            let capitalized = t.surface.chars().next().is_some_and(|c| c.is_uppercase());
            capitalized && !is_sentence_initial(tokens, i) && !t.is_stopword
        })
        .count()
}

/// Noun fraction and categorical shape of a word sequence.
pub fn tag_pos(lowers: &[&str], resources: &LanguageResources) -> (f64, PosPattern) {
    if lowers.is_empty() {
        return (0.0, PosPattern::Other);
    }
    let tags: Vec<PosTag> = lowers.iter().map(|w| resources.pos_tag(w)).collect();
    let nouns = tags.iter().filter(|t| **t == PosTag::Noun).count();
    let has_verb = tags.contains(&PosTag::Verb);
    let fraction = nouns as f64 / lowers.len() as f64;
    let pattern = if nouns == lowers.len() {
        PosPattern::NounOnly
    } else if has_verb {
        PosPattern::ContainsVerb
    } else if nouns > 0 {
        PosPattern::NounPhrase
    } else {
        PosPattern::Other
    };
    (fraction, pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SplitKind;
    use crate::preprocess::Language;
    use chrono::DateTime;

    fn resources() -> LanguageResources {
        LanguageResources::builtin(Language::Portuguese)
    }

    fn make_doc(text: &str, resources: &LanguageResources) -> NewsDocument {
        NewsDocument {
            id: "d".into(),
            channel: "c".into(),
            program: "p".into(),
            broadcast_time: DateTime::parse_from_rfc3339("2011-01-07T20:00:00+00:00").unwrap(),
            position_in_program: 0,
            topic: None,
            text: text.into(),
            gold_keyphrases: None,
            tokens: resources.tokenize(text),
        }
    }

    fn corpus_of(texts: &[&str], resources: &LanguageResources) -> Corpus {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut d = make_doc(t, resources);
                d.id = format!("d{i}");
                d
            })
            .collect();
        Corpus::from_documents(docs, SplitKind::Unlabeled, resources).unwrap()
    }

    fn candidate<'a>(cands: &'a [CandidatePhrase], norm: &str) -> &'a CandidatePhrase {
        cands.iter().find(|c| c.normalized == norm).unwrap_or_else(|| {
            panic!("no candidate {norm:?} in {:?}", cands.iter().map(|c| &c.normalized))
        })
    }

    #[test]
    fn idf_extremes() {
        let r = resources();
        let mut texts = vec!["euro sobe"; 9];
        texts.push("euro sobe raro");
        let corpus = corpus_of(&texts, &r);
        let idf = IdfTable::build(&corpus);
        // in all 10 documents
        assert!(idf.idf("eur").abs() < 1e-12, "{}", idf.idf("eur"));
        // in exactly 1 of 10
        assert!((idf.idf("rar") - 1.0).abs() < 1e-12);
        // never seen: treated as df = 1
        assert!((idf.idf("fantasma") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn base_feature_arithmetic() {
        let r = resources();
        // 10 tokens; "euro" at positions 0 and 8
        let doc = make_doc("euro w1 w2 w3 w4 w5 w6 w7 euro w9", &r);
        assert_eq!(doc.word_count(), 10);
        let cands = generate_candidates(&doc.tokens);
        let c = candidate(&cands, "eur");
        let corpus = corpus_of(&["euro aqui", "outro tema"], &r);
        let idf = IdfTable::build(&corpus);
        let fv = base_features(c, &doc, &idf);

        assert_eq!(fv.tf, 2.0);
        let want_idf = (2.0f64 / 1.0).log10();
        assert!((fv.idf - want_idf).abs() < 1e-12);
        assert!((fv.tfidf - 0.2 * want_idf).abs() < 1e-12);
        assert!((fv.first_pos - 0.0).abs() < 1e-12);
        assert!((fv.last_pos - 0.8).abs() < 1e-12);
        assert!((fv.spread - 0.8).abs() < 1e-12);
        assert_eq!(fv.n_words, 1.0);
    }

    #[test]
    fn char_and_capital_counts() {
        let r = LanguageResources::custom(Language::Portuguese, &["de"], &[], &[]);
        let doc = make_doc("ontem o Banco de Portugal decidiu: FMI", &r);
        let cands = generate_candidates(&doc.tokens);

        let banco = candidate(&cands, "banc de portug");
        let fv = compute_features(banco, &doc, &r, &IdfTable::from_parts(1, HashMap::new()), None);
        assert_eq!(banco.surface, "Banco de Portugal");
        assert_eq!(fv.char_len, 17.0);
        assert_eq!(fv.capital_letters, 2.0);

        let fmi = candidate(&cands, "fmi");
        let fv = compute_features(fmi, &doc, &r, &IdfTable::from_parts(1, HashMap::new()), None);
        assert_eq!(fv.char_len, 3.0);
        assert_eq!(fv.capital_letters, 3.0);
    }

    #[test]
    fn named_entities_from_lexicon_and_capitalization() {
        let r = LanguageResources::custom(Language::Portuguese, &["de", "o"], &["banco", "portugal"], &[]);
        let doc = make_doc("o Banco de Portugal avisa. Lisboa reage. Ontem choveu", &r);
        let toks = &doc.tokens;

        // lexicon entries count regardless of position; "de" is neither
        let banco_span = (1, 4);
        assert_eq!(tag_named_entities(toks, banco_span.0, banco_span.1, &r), 2);

        // capitalized mid-sentence... "Lisboa" opens its sentence here, so
        // only the lexicon could catch it, and this lexicon does not
        let lisboa = toks.iter().position(|t| t.surface == "Lisboa").unwrap();
        assert_eq!(tag_named_entities(toks, lisboa, lisboa + 1, &r), 0);

        // sentence-initial capitalization alone never counts
        let ontem = toks.iter().position(|t| t.surface == "Ontem").unwrap();
        assert_eq!(tag_named_entities(toks, ontem, ontem + 1, &r), 0);
    }

    #[test]
    fn capitalized_mid_sentence_counts_as_name() {
        let r = LanguageResources::custom(Language::Portuguese, &["o"], &[], &[]);
        let doc = make_doc("o ministro visitou Coimbra ontem", &r);
        let i = doc.tokens.iter().position(|t| t.surface == "Coimbra").unwrap();
        assert_eq!(tag_named_entities(&doc.tokens, i, i + 1, &r), 1);
    }

    #[test]
    fn pos_fraction_and_pattern() {
        let r = LanguageResources::custom(
            Language::Portuguese,
            &[],
            &[],
            &[
                ("crise", PosTag::Noun),
                ("económica", PosTag::Adjective),
                ("governo", PosTag::Noun),
                ("subiu", PosTag::Verb),
            ],
        );
        assert_eq!(tag_pos(&["crise", "económica"], &r), (0.5, PosPattern::NounPhrase));
        assert_eq!(tag_pos(&["governo"], &r), (1.0, PosPattern::NounOnly));
        assert_eq!(tag_pos(&["governo", "subiu"], &r), (0.5, PosPattern::ContainsVerb));
        assert_eq!(tag_pos(&["económica"], &r), (0.0, PosPattern::Other));
    }

    #[test]
    fn lm_score_passthrough() {
        struct Fixed(f64);
        impl PhraseScorer for Fixed {
            fn phrase_score(&self, _words: &[&str]) -> f64 {
                self.0
            }
        }
        let r = resources();
        let doc = make_doc("défice orçamental", &r);
        let cands = generate_candidates(&doc.tokens);
        let fv = compute_features(
            &cands[0],
            &doc,
            &r,
            &IdfTable::from_parts(1, HashMap::new()),
            Some(&Fixed(-2.25)),
        );
        assert_eq!(fv.lm_log_prob, -2.25);
        let fv_none =
            compute_features(&cands[0], &doc, &r, &IdfTable::from_parts(1, HashMap::new()), None);
        assert_eq!(fv_none.lm_log_prob, 0.0);
    }
}
