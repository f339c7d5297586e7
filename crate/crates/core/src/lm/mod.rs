//! N-gram language models: a text-format back-off model and a compressed
//! perfect-hash store that answers the same phrase queries in a fraction
//! of the space.

mod arpa;
mod compressed;
pub(crate) mod mph;

pub use arpa::ArpaModel;
pub use compressed::{CompressOptions, CompressedNGramModel};

/// Highest n-gram order the models handle.
pub const MAX_ORDER: usize = 4;

/// Log10 probability assigned when a word is unknown and the model has no
/// unk entry to fall back on.
pub const LOG_PROB_FLOOR: f64 = -99.0;

/// Vocabulary entry that absorbs out-of-vocabulary words.
pub const UNK: &str = "<unk>";

/// Anything that can score a phrase as a mean per-word conditional log10
/// probability, each word conditioned on up to three phrase-internal
/// predecessors.
pub trait PhraseScorer: Send + Sync {
    fn phrase_score(&self, words: &[&str]) -> f64;
}
