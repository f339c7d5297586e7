//! Keyphrase extraction for broadcast-news transcripts: candidate phrase
//! generation, per-phrase features, bagged decision-tree ranking, evaluation,
//! and tag-cloud rendering, with a compressed n-gram language model feeding
//! the phrase-probability feature.

pub mod binio;
pub mod candidates;
pub mod cloud;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod features;
mod hashing;
pub mod lm;
pub mod pipeline;
pub mod preprocess;
pub mod rank;
pub mod synthetic;

pub use error::{Error, Result};
