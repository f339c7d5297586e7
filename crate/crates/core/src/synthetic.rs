//! Deterministic synthetic inputs for tests, demos, and benches.
//!
//! Three families:
//!
//! * planted corpora — pseudo-word transcripts where the gold keyphrases
//!   are frequent, rare across documents, early, and capitalized, so a
//!   working pipeline should recover essentially all of them;
//! * shaped corpora — same machinery, but sized to an exact document
//!   count, total word count, and keyphrases per document;
//! * ARPA model text — a small exactly-normalized 4-gram model (every
//!   conditional distribution sums to 1) and an arbitrarily large
//!   unnormalized one for storage/stress tests.
//!
//! Everything is a pure function of its seed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use chrono::{DateTime, Duration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, NewsDocument, SplitKind};
use crate::error::Result;
use crate::preprocess::LanguageResources;

const BASE_TIME: &str = "2012-06-18T08:00:00+00:00";

/// Nonsense but pronounceable, and — because every word ends in a coda
/// consonant no suffix-stripping rule touches — stem-stable, so document
/// frequencies behave exactly as planted.
fn pseudo_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    const ONSETS: [&str; 14] =
        ["b", "d", "f", "g", "j", "k", "l", "m", "n", "p", "r", "t", "v", "z"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    const CODAS: [&str; 4] = ["k", "p", "t", "x"];
    loop {
        let mut w = String::new();
        for _ in 0..2 + rng.random_range(0..2) {
            w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        if used.insert(w.clone()) {
            return w;
        }
    }
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Builds corpora of pseudo-word documents with planted keyphrases.
///
/// A period closes every 12th word, so token index 0 mod 12 is sentence
/// initial; planted words avoid those slots to keep their capitalization
/// reading as a named entity.
struct PlantedGenerator {
    rng: ChaCha8Rng,
    used: HashSet<String>,
    filler: Vec<String>,
}

impl PlantedGenerator {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = HashSet::new();
        let filler: Vec<String> = (0..150).map(|_| pseudo_word(&mut rng, &mut used)).collect();
        PlantedGenerator { rng, used, filler }
    }

    fn document(
        &mut self,
        id: String,
        minutes: i64,
        words: usize,
        gold_per_doc: usize,
        occurrences: usize,
    ) -> NewsDocument {
        assert!(
            2 + 3 * gold_per_doc + gold_per_doc * occurrences < words,
            "planted material must fit the word budget"
        );
        let gold: Vec<String> = (0..gold_per_doc)
            .map(|_| capitalize(&pseudo_word(&mut self.rng, &mut self.used)))
            .collect();

        let mut slots: Vec<Option<usize>> = vec![None; words];
        let place = |slots: &mut Vec<Option<usize>>, from: usize, k: usize| {
            let mut p = from % words;
            loop {
                if !p.is_multiple_of(12) && slots[p].is_none() {
                    slots[p] = Some(k);
                    return;
                }
                p = (p + 1) % words;
            }
        };
        // One early occurrence per planted word, the rest spaced through
        // the tail: high frequency, early first position, wide spread.
        let tail_start = (2 + 3 * gold_per_doc).max(40).min(words / 2);
        let extra = gold_per_doc * (occurrences - 1);
        for k in 0..gold_per_doc {
            place(&mut slots, 2 + 3 * k, k);
            for j in 1..occurrences {
                // round-robin over the planted words so each one's
                // occurrences span the whole tail
                let slot_index = (j - 1) * gold_per_doc + k;
                let from = tail_start + slot_index * (words - tail_start) / extra.max(1);
                place(&mut slots, from, k);
            }
        }

        let mut text = String::new();
        for (i, slot) in slots.iter().enumerate() {
            let word = match slot {
                Some(k) => gold[*k].clone(),
                None => self.filler[self.rng.random_range(0..self.filler.len())].clone(),
            };
            text.push_str(&word);
            if i % 12 == 11 || i + 1 == words {
                text.push('.');
            }
            if i + 1 < words {
                text.push(' ');
            }
        }

        let base = DateTime::parse_from_rfc3339(BASE_TIME).unwrap();
        NewsDocument {
            id,
            channel: "TV1".to_string(),
            program: "Jornal".to_string(),
            broadcast_time: base + Duration::minutes(minutes),
            position_in_program: (minutes % 10) as u32,
            topic: None,
            text,
            gold_keyphrases: Some(gold),
            tokens: Vec::new(),
        }
    }

    fn corpus(
        &mut self,
        prefix: &str,
        word_counts: &[usize],
        gold_per_doc: usize,
        occurrences: usize,
        split: SplitKind,
        resources: &LanguageResources,
    ) -> Result<Corpus> {
        let docs: Vec<NewsDocument> = word_counts
            .iter()
            .enumerate()
            .map(|(i, &words)| {
                self.document(format!("{prefix}-{i:03}"), i as i64, words, gold_per_doc, occurrences)
            })
            .collect();
        Corpus::from_documents(docs, split, resources)
    }
}

/// A 100-document training corpus and a 10-document test corpus of
/// 300-word transcripts, each carrying exactly ten planted keyphrases.
/// The planted words are unique across the pair, so their rarity survives
/// into the test split.
pub fn planted_training_pair(
    seed: u64,
    resources: &LanguageResources,
) -> Result<(Corpus, Corpus)> {
    let mut generator = PlantedGenerator::new(seed);
    let train =
        generator.corpus("planted-train", &[300; 100], 10, 4, SplitKind::Train, resources)?;
    let test = generator.corpus("planted-test", &[300; 10], 10, 4, SplitKind::Test, resources)?;
    Ok((train, test))
}

/// A planted corpus with an exact shape: `n_docs` documents totalling
/// `total_words` words (spread as evenly as possible) with
/// `gold_per_doc` keyphrases each.
pub fn shaped_corpus(
    n_docs: usize,
    total_words: usize,
    gold_per_doc: usize,
    seed: u64,
    split: SplitKind,
    resources: &LanguageResources,
) -> Result<Corpus> {
    assert!(n_docs > 0, "shaped corpus needs at least one document");
    let base = total_words / n_docs;
    let extra = total_words % n_docs;
    let counts: Vec<usize> =
        (0..n_docs).map(|i| if i < extra { base + 1 } else { base }).collect();
    PlantedGenerator::new(seed).corpus("shaped", &counts, gold_per_doc, 3, split, resources)
}

struct Gram {
    p: f64,
    alpha: f64,
    has_backoff: bool,
}

/// Katz conditional over partially built tables; only used while the
/// lower orders are already complete.
fn cond(orders: &[BTreeMap<Vec<String>, Gram>], hist: &[String], w: &str) -> f64 {
    if hist.is_empty() {
        return orders[0].get(std::slice::from_ref(&w.to_string())).expect("closed vocabulary").p;
    }
    let mut key = hist.to_vec();
    key.push(w.to_string());
    if let Some(g) = orders[key.len() - 1].get(key.as_slice()) {
        return g.p;
    }
    let alpha = orders[hist.len() - 1].get(hist).map_or(1.0, |g| g.alpha);
    alpha * cond(orders, &hist[1..], w)
}

/// A small 4-gram ARPA model over a closed six-word vocabulary whose
/// conditional distributions all sum to exactly 1: stored continuations
/// of a history take a fixed share of the mass and the back-off weight
/// is solved as `(1 - stored mass) / (1 - lower-order mass of the same
/// words)`, which makes the escape mass land precisely on the remainder.
/// Under 50 entries, so exhaustive checks stay cheap.
pub fn tiny_normalized_arpa(seed: u64) -> String {
    const VOCAB: [&str; 6] = ["ana", "bola", "casa", "dia", "eco", "fim"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders: Vec<BTreeMap<Vec<String>, Gram>> = (0..4).map(|_| BTreeMap::new()).collect();

    let weights: Vec<f64> = VOCAB.iter().map(|_| rng.random_range(1.0..10.0)).collect();
    let total: f64 = weights.iter().sum();
    for (w, weight) in VOCAB.iter().zip(&weights) {
        orders[0].insert(
            vec![w.to_string()],
            Gram { p: weight / total, alpha: 1.0, has_backoff: false },
        );
    }

    for order in 2..=4usize {
        let candidates: Vec<Vec<String>> = orders[order - 2].keys().cloned().collect();
        let max_histories = [4, 5, 4][order - 2];
        let mut histories: Vec<Vec<String>> = candidates
            .iter()
            .filter(|_| rng.random::<f64>() < 0.75)
            .take(max_histories)
            .cloned()
            .collect();
        if histories.is_empty() {
            histories.push(candidates[0].clone());
        }
        for hist in histories {
            let k = 2 + rng.random_range(0..2);
            let mut chosen: Vec<usize> = Vec::new();
            while chosen.len() < k {
                let c = rng.random_range(0..VOCAB.len());
                if !chosen.contains(&c) {
                    chosen.push(c);
                }
            }
            chosen.sort_unstable();
            let mass: f64 = rng.random_range(0.35..0.65);
            let weights: Vec<f64> = chosen.iter().map(|_| rng.random_range(1.0..10.0)).collect();
            let wsum: f64 = weights.iter().sum();
            let mut stored_lower = 0.0;
            for (&c, weight) in chosen.iter().zip(&weights) {
                let mut key = hist.clone();
                key.push(VOCAB[c].to_string());
                stored_lower += cond(&orders, &hist[1..], VOCAB[c]);
                orders[order - 1]
                    .insert(key, Gram { p: mass * weight / wsum, alpha: 1.0, has_backoff: false });
            }
            // stored_lower < 1 strictly: the chosen words are a proper
            // subset of a distribution that sums to 1 with no zeros
            let alpha = (1.0 - mass) / (1.0 - stored_lower);
            let entry = orders[order - 2].get_mut(&hist).expect("history is a stored gram");
            entry.alpha = alpha;
            entry.has_backoff = true;
        }
    }

    let mut out = String::from("\\data\\\n");
    for (i, grams) in orders.iter().enumerate() {
        writeln!(out, "ngram {}={}", i + 1, grams.len()).unwrap();
    }
    for (i, grams) in orders.iter().enumerate() {
        writeln!(out, "\n\\{}-grams:", i + 1).unwrap();
        for (key, gram) in grams {
            write!(out, "{:.8}\t{}", gram.p.log10(), key.join(" ")).unwrap();
            if gram.has_backoff {
                write!(out, "\t{:.8}", gram.alpha.log10()).unwrap();
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

/// Large unnormalized ARPA text for storage and collision tests: the
/// requested number of distinct grams per order with arbitrary scores.
pub fn large_arpa(
    seed: u64,
    unigrams: usize,
    bigrams: usize,
    trigrams: usize,
    fourgrams: usize,
) -> String {
    assert!(unigrams >= 2, "need a vocabulary to sample grams from");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |order: usize, count: usize| -> BTreeSet<Vec<u32>> {
        let mut set = BTreeSet::new();
        while set.len() < count {
            set.insert((0..order).map(|_| rng.random_range(0..unigrams as u32)).collect());
        }
        set
    };
    let higher: Vec<BTreeSet<Vec<u32>>> =
        [bigrams, trigrams, fourgrams].iter().enumerate().map(|(i, &c)| sample(i + 2, c)).collect();

    let mut out = String::from("\\data\\\n");
    writeln!(out, "ngram 1={unigrams}").unwrap();
    for (i, set) in higher.iter().enumerate() {
        writeln!(out, "ngram {}={}", i + 2, set.len()).unwrap();
    }
    out.push_str("\n\\1-grams:\n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for i in 0..unigrams {
        writeln!(
            out,
            "{:.4}\tw{i:05}\t{:.4}",
            -rng.random_range(1.0..6.0),
            -rng.random_range(0.1..0.9)
        )
        .unwrap();
    }
    for (i, set) in higher.iter().enumerate() {
        writeln!(out, "\n\\{}-grams:", i + 2).unwrap();
        for key in set {
            let words: Vec<String> = key.iter().map(|w| format!("w{w:05}")).collect();
            writeln!(out, "{:.4}\t{}", -rng.random_range(1.0..6.0), words.join(" ")).unwrap();
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::ArpaModel;
    use crate::preprocess::Language;

    fn resources() -> LanguageResources {
        LanguageResources::builtin(Language::Portuguese)
    }

    #[test]
    fn pseudo_words_are_stem_stable() {
        let res = resources();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut used = HashSet::new();
        for _ in 0..200 {
            let w = pseudo_word(&mut rng, &mut used);
            assert_eq!(res.stem(&w), w, "stemming must not alter planted words");
        }
    }

    #[test]
    fn planted_pair_has_the_promised_shape() {
        let res = resources();
        let (train, test) = planted_training_pair(7, &res).unwrap();
        assert_eq!(train.stats().documents, 100);
        assert_eq!(test.stats().documents, 10);
        for doc in train.documents.iter().chain(&test.documents) {
            assert_eq!(doc.word_count(), 300);
            assert_eq!(doc.gold_keyphrases.as_ref().unwrap().len(), 10);
        }
    }

    #[test]
    fn planted_gold_words_occur_four_times_and_early() {
        let res = resources();
        let (train, _) = planted_training_pair(7, &res).unwrap();
        let doc = &train.documents[0];
        for gold in doc.gold_keyphrases.as_ref().unwrap() {
            let lower = gold.to_lowercase();
            let hits: Vec<usize> = doc
                .tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.lower == lower)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(hits.len(), 4, "{gold}");
            assert!(hits[0] < 40, "first occurrence of {gold} at {}", hits[0]);
            assert!(hits[3] > 100, "last occurrence of {gold} at {}", hits[3]);
        }
    }

    #[test]
    fn same_seed_reproduces_the_corpus() {
        let res = resources();
        let (a, _) = planted_training_pair(42, &res).unwrap();
        let (b, _) = planted_training_pair(42, &res).unwrap();
        assert_eq!(a.documents[0].text, b.documents[0].text);
        assert_eq!(a.documents[99].gold_keyphrases, b.documents[99].gold_keyphrases);
    }

    #[test]
    fn shaped_corpus_matches_the_requested_shape() {
        let res = resources();
        let c = shaped_corpus(100, 29225, 24, 3, SplitKind::Train, &res).unwrap();
        let stats = c.stats();
        assert_eq!(stats.documents, 100);
        assert_eq!(stats.words, 29225);
        assert_eq!(stats.mean_keyphrases, 24.0);

        let c = shaped_corpus(10, 3896, 29, 3, SplitKind::Test, &res).unwrap();
        let stats = c.stats();
        assert_eq!(stats.documents, 10);
        assert_eq!(stats.words, 3896);
        assert_eq!(stats.mean_keyphrases, 29.0);
    }

    #[test]
    fn tiny_arpa_parses_small_and_normalized() {
        let text = tiny_normalized_arpa(11);
        assert_eq!(text, tiny_normalized_arpa(11));
        let model = ArpaModel::parse(&text).unwrap();
        assert_eq!(model.max_order(), 4);
        let entries: usize = (1..=4).map(|o| model.count(o)).sum();
        assert!(entries <= 100, "{entries} entries");

        let vocab = ["ana", "bola", "casa", "dia", "eco", "fim"];
        let unigram_sum: f64 = vocab.iter().map(|w| 10f64.powf(model.log_prob(w, &[]))).sum();
        assert!((unigram_sum - 1.0).abs() < 1e-6, "unigram sum {unigram_sum}");
        let bigram_sum: f64 = vocab.iter().map(|w| 10f64.powf(model.log_prob(w, &["ana"]))).sum();
        assert!((bigram_sum - 1.0).abs() < 1e-6, "bigram sum {bigram_sum}");
    }

    #[test]
    fn large_arpa_has_the_requested_gram_counts() {
        let text = large_arpa(5, 200, 100, 50, 20);
        let model = ArpaModel::parse(&text).unwrap();
        assert_eq!(model.max_order(), 4);
        assert_eq!(model.count(1), 200);
        assert_eq!(model.count(2), 100);
        assert_eq!(model.count(3), 50);
        assert_eq!(model.count(4), 20);
    }
}
