//! Text normalization: tokenization, stemming, stopwords, and the small
//! lexicons the feature extractors consult.

mod resources;
pub mod stem;
mod tokenizer;

pub use resources::{Language, LanguageResources, PosTag};
pub use stem::{EnglishStemmer, PortugueseStemmer, Stemmer};

/// One word token of a transcript.
///
/// Punctuation never becomes a token: sentence-ending characters
/// (`.` `!` `?` `:` `;` and newlines) instead set
/// [`sentence_boundary_after`](Token::sentence_boundary_after) on the word
/// before them, and remaining edge punctuation is dropped. Intra-word
/// hyphens and digits survive (`euro-2012` is one token).
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    /// Original spelling, casing preserved.
    pub surface: String,
    /// Case-folded form; stopword checks and stemming run on this.
    pub lower: String,
    /// Stem of `lower` under the language profile's stemmer.
    pub stem: String,
    /// Byte offset of `surface` in the source text (always a char boundary).
    pub offset: usize,
    pub is_stopword: bool,
    pub sentence_boundary_after: bool,
}

/// Whether `tokens[i]` opens a sentence: it is the first token, or the
/// previous token carries a boundary flag.
pub fn is_sentence_initial(tokens: &[Token], i: usize) -> bool {
    i == 0 || tokens[i - 1].sentence_boundary_after
}
