//! Language profiles: stopword list, named-entity lexicon, POS lexicon,
//! and the stemmer. A profile ships with builtin resources and any piece
//! can be replaced from a file.
//!
//! File formats:
//! - stopwords: one word per line; blank lines and `#` comments ignored
//! - NE lexicon: one name per line, optionally `name<TAB>type`; the type is
//!   informational only
//! - POS lexicon: `word<TAB>tag` per line, tags `noun`/`n`, `verb`/`v`,
//!   `adj`/`a`, anything else `other`
//!
//! Words looked up in any of the three are matched on the case-folded form.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::stem::{EnglishStemmer, PortugueseStemmer, Stemmer};
use crate::preprocess::{tokenizer, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Portuguese,
    English,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::Portuguese => "pt",
            Language::English => "en",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "pt" | "por" | "portuguese" => Ok(Language::Portuguese),
            "en" | "eng" | "english" => Ok(Language::English),
            other => Err(Error::Config(format!("unknown language {other:?} (try pt or en)"))),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Coarse part-of-speech classes; everything the phrase-shape feature needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Other,
}

/// Suffix fallback for words missing from the POS lexicon, checked
/// adjective > noun > verb, longest suffix first; unmatched words default
/// to noun, the dominant open class in news text.
struct SuffixTable {
    adjective: &'static [&'static str],
    noun: &'static [&'static str],
    verb: &'static [&'static str],
}

const PT_SUFFIXES: SuffixTable = SuffixTable {
    adjective: &["ável", "ível", "oso", "osa", "ivo", "iva", "ico", "ica", "ária", "ário"],
    noun: &[
        "ância", "ência", "mento", "agem", "ação", "ição", "ção", "são", "dade", "ismo", "ista",
        "eza", "ura", "dor", "tor", "or",
    ],
    verb: &["ando", "endo", "indo", "aram", "eram", "asse", "ava", "ou", "ei", "ar", "er", "ir", "em", "am"],
};

const EN_SUFFIXES: SuffixTable = SuffixTable {
    adjective: &["ous", "ful", "ive", "able", "ible", "ical", "ic", "al"],
    noun: &["tion", "sion", "ment", "ness", "ity", "ism", "ist", "ance", "ence", "ship", "er", "or"],
    verb: &["ize", "ise", "ify", "ed", "ing"],
};

pub struct LanguageResources {
    language: Language,
    stopwords: HashSet<String>,
    ne_lexicon: HashSet<String>,
    pos_lexicon: HashMap<String, PosTag>,
    stemmer: Box<dyn Stemmer>,
}

impl LanguageResources {
    /// Profile backed by the resources compiled into the crate.
    pub fn builtin(language: Language) -> Self {
        let (stop, ne, pos) = match language {
            Language::Portuguese => (
                include_str!("../../resources/stopwords_pt.txt"),
                include_str!("../../resources/ne_lexicon_pt.tsv"),
                include_str!("../../resources/pos_lexicon_pt.tsv"),
            ),
            Language::English => (
                include_str!("../../resources/stopwords_en.txt"),
                include_str!("../../resources/ne_lexicon_en.tsv"),
                include_str!("../../resources/pos_lexicon_en.tsv"),
            ),
        };
        LanguageResources {
            language,
            stopwords: parse_word_list(stop),
            ne_lexicon: parse_ne_lexicon(ne),
            pos_lexicon: parse_pos_lexicon(pos, Path::new("builtin"))
                .expect("builtin POS lexicon is well-formed"),
            stemmer: stemmer_for(language),
        }
    }

    pub fn with_stopwords_file(mut self, path: &Path) -> Result<Self> {
        self.stopwords = parse_word_list(&read(path)?);
        Ok(self)
    }

    pub fn with_ne_lexicon_file(mut self, path: &Path) -> Result<Self> {
        self.ne_lexicon = parse_ne_lexicon(&read(path)?);
        Ok(self)
    }

    pub fn with_pos_lexicon_file(mut self, path: &Path) -> Result<Self> {
        self.pos_lexicon = parse_pos_lexicon(&read(path)?, path)?;
        Ok(self)
    }

    /// Test profile with explicit word lists and the language's stemmer.
    pub fn custom(
        language: Language,
        stopwords: &[&str],
        ne_lexicon: &[&str],
        pos_lexicon: &[(&str, PosTag)],
    ) -> Self {
        LanguageResources {
            language,
            stopwords: stopwords.iter().map(|w| w.to_lowercase()).collect(),
            ne_lexicon: ne_lexicon.iter().map(|w| w.to_lowercase()).collect(),
            pos_lexicon: pos_lexicon.iter().map(|(w, t)| (w.to_lowercase(), *t)).collect(),
            stemmer: stemmer_for(language),
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn is_stopword(&self, lower: &str) -> bool {
        self.stopwords.contains(lower)
    }

    pub fn in_ne_lexicon(&self, lower: &str) -> bool {
        self.ne_lexicon.contains(lower)
    }

    pub fn stem(&self, lower: &str) -> String {
        self.stemmer.stem(lower)
    }

    /// Lexicon lookup with the documented suffix fallback.
    pub fn pos_tag(&self, lower: &str) -> PosTag {
        if let Some(tag) = self.pos_lexicon.get(lower) {
            return *tag;
        }
        let table = match self.language {
            Language::Portuguese => &PT_SUFFIXES,
            Language::English => &EN_SUFFIXES,
        };
        for s in table.adjective {
            if lower.ends_with(s) && lower.chars().count() > s.chars().count() + 1 {
                return PosTag::Adjective;
            }
        }
        for s in table.noun {
            if lower.ends_with(s) && lower.chars().count() > s.chars().count() + 1 {
                return PosTag::Noun;
            }
        }
        for s in table.verb {
            if lower.ends_with(s) && lower.chars().count() > s.chars().count() + 1 {
                return PosTag::Verb;
            }
        }
        PosTag::Noun
    }

    /// Splits `text` into annotated word tokens. Whitespace separates
    /// tokens, edge punctuation is stripped, and sentence-ending marks set
    /// the boundary flag on the preceding token; see [`Token`].
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        tokenizer::scan(text)
            .into_iter()
            .map(|raw| {
                let surface = text[raw.start..raw.end].to_string();
                let lower = surface.to_lowercase();
                let stem = self.stemmer.stem(&lower);
                let is_stopword = self.stopwords.contains(&lower);
                Token {
                    surface,
                    lower,
                    stem,
                    offset: raw.start,
                    is_stopword,
                    sentence_boundary_after: raw.boundary_after,
                }
            })
            .collect()
    }
}

impl fmt::Debug for LanguageResources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LanguageResources")
            .field("language", &self.language)
            .field("stopwords", &self.stopwords.len())
            .field("ne_lexicon", &self.ne_lexicon.len())
            .field("pos_lexicon", &self.pos_lexicon.len())
            .finish()
    }
}

fn stemmer_for(language: Language) -> Box<dyn Stemmer> {
    match language {
        Language::Portuguese => Box::new(PortugueseStemmer),
        Language::English => Box::new(EnglishStemmer),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_word_list(text: &str) -> HashSet<String> {
    content_lines(text).map(|(_, l)| l.to_lowercase()).collect()
}

fn parse_ne_lexicon(text: &str) -> HashSet<String> {
    content_lines(text)
        .map(|(_, l)| l.split('\t').next().unwrap_or(l).trim().to_lowercase())
        .collect()
}

fn parse_pos_lexicon(text: &str, path: &Path) -> Result<HashMap<String, PosTag>> {
    let mut map = HashMap::new();
    for (line, l) in content_lines(text) {
        let (word, tag) = l.split_once('\t').ok_or_else(|| Error::Resource {
            path: path.to_path_buf(),
            message: format!("line {line}: expected word<TAB>tag"),
        })?;
        let tag = match tag.trim().to_lowercase().as_str() {
            "n" | "noun" => PosTag::Noun,
            "v" | "verb" => PosTag::Verb,
            "a" | "adj" | "adjective" => PosTag::Adjective,
            _ => PosTag::Other,
        };
        map.insert(word.trim().to_lowercase(), tag);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_fold_case() {
        let r = LanguageResources::builtin(Language::Portuguese);
        assert!(r.is_stopword("de"));
        assert!(r.is_stopword(&"DE".to_lowercase()));
        assert!(!r.is_stopword("portugal"));
    }

    #[test]
    fn tokenize_annotates_everything() {
        let r = LanguageResources::builtin(Language::Portuguese);
        let toks = r.tokenize("O FMI avisa.");
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[0].surface, "O");
        assert_eq!(toks[0].lower, "o");
        assert!(toks[0].is_stopword);
        assert_eq!(toks[1].surface, "FMI");
        assert_eq!(toks[1].stem, "fmi");
        assert!(!toks[1].is_stopword);
        assert!(!toks[1].sentence_boundary_after);
        assert!(toks[2].sentence_boundary_after);
    }

    #[test]
    fn empty_text_tokenizes_to_nothing() {
        let r = LanguageResources::builtin(Language::Portuguese);
        assert!(r.tokenize("").is_empty());
    }

    #[test]
    fn pos_lexicon_and_fallback() {
        let r = LanguageResources::custom(
            Language::Portuguese,
            &[],
            &[],
            &[("crise", PosTag::Noun), ("económica", PosTag::Adjective)],
        );
        assert_eq!(r.pos_tag("crise"), PosTag::Noun);
        assert_eq!(r.pos_tag("económica"), PosTag::Adjective);
        // suffix fallback: -ção nouns, -ar verbs, unknowns default to noun
        assert_eq!(r.pos_tag("especulação"), PosTag::Noun);
        assert_eq!(r.pos_tag("negociar"), PosTag::Verb);
        assert_eq!(r.pos_tag("xpto"), PosTag::Noun);
    }

    #[test]
    fn ne_lexicon_membership() {
        let r = LanguageResources::custom(Language::Portuguese, &[], &["banco", "portugal"], &[]);
        assert!(r.in_ne_lexicon("banco"));
        assert!(r.in_ne_lexicon("portugal"));
        assert!(!r.in_ne_lexicon("avisa"));
    }

    #[test]
    fn tokenizer_never_panics_and_offsets_hold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pool: Vec<char> =
            "abcõç ÁÉ12.!?:;«»\"'()-\n\t\u{1F600}\u{0301}mX ".chars().collect();
        let r = LanguageResources::builtin(Language::Portuguese);
        for _ in 0..500 {
            let len = rng.random_range(0..60);
            let text: String =
                (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            for t in r.tokenize(&text) {
                assert!(text.is_char_boundary(t.offset));
                assert_eq!(&text[t.offset..t.offset + t.surface.len()], t.surface);
                assert!(!t.stem.is_empty() || !t.surface.chars().any(|c| c.is_alphabetic()));
            }
        }
    }
}
