//! Candidate phrase generation.
//!
//! Candidates are every contiguous run of 1 to 5 tokens that stays inside
//! one sentence and neither starts nor ends on a stopword; interior
//! stopwords are fine. A single occurrence is enough to qualify. Spans with
//! the same stem-normalized form merge into one candidate that keeps every
//! occurrence.

use std::collections::HashMap;

use crate::preprocess::Token;

pub const MAX_PHRASE_WORDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePhrase {
    /// Surface of the first occurrence, tokens joined with single spaces.
    pub surface: String,
    /// Space-joined stems; the dedup and gold-matching key.
    pub normalized: String,
    /// Token index spans `[start, end)`, in document order.
    pub occurrences: Vec<(usize, usize)>,
}

impl CandidatePhrase {
    pub fn tf(&self) -> usize {
        self.occurrences.len()
    }

    pub fn n_words(&self) -> usize {
        let (start, end) = self.occurrences[0];
        end - start
    }

    pub fn first_occurrence(&self) -> (usize, usize) {
        self.occurrences[0]
    }

    pub fn last_occurrence(&self) -> (usize, usize) {
        *self.occurrences.last().expect("candidates have at least one occurrence")
    }
}

/// Enumerates candidate spans over `tokens` and merges them by normalized
/// form. Output order is first-occurrence order (position, then length).
pub fn generate_candidates(tokens: &[Token]) -> Vec<CandidatePhrase> {
    let mut spans = Vec::new();
    for start in 0..tokens.len() {
        if tokens[start].is_stopword {
            continue;
        }
        let max_end = (start + MAX_PHRASE_WORDS).min(tokens.len());
        for end in start + 1..=max_end {
            // extending past a boundary flag would leave the sentence, and
            // so would every longer span from this start
            if end > start + 1 && tokens[end - 2].sentence_boundary_after {
                break;
            }
            if tokens[end - 1].is_stopword {
                continue;
            }
            spans.push((start, end));
        }
    }
    merge_occurrences(tokens, spans)
}

/// Groups spans sharing a normalized form into single candidates. The first
/// span (in input order) donates the surface form.
pub fn merge_occurrences(tokens: &[Token], spans: Vec<(usize, usize)>) -> Vec<CandidatePhrase> {
    let mut merged: Vec<CandidatePhrase> = Vec::new();
    let mut by_norm: HashMap<String, usize> = HashMap::new();
    for (start, end) in spans {
        let normalized = join(tokens, start, end, |t| t.stem.as_str());
        match by_norm.get(&normalized) {
            Some(&i) => merged[i].occurrences.push((start, end)),
            None => {
                by_norm.insert(normalized.clone(), merged.len());
                merged.push(CandidatePhrase {
                    surface: join(tokens, start, end, |t| t.surface.as_str()),
                    normalized,
                    occurrences: vec![(start, end)],
                });
            }
        }
    }
    merged
}

fn join(tokens: &[Token], start: usize, end: usize, f: impl Fn(&Token) -> &str) -> String {
    tokens[start..end].iter().map(f).collect::<Vec<_>>().join(" ")
}
