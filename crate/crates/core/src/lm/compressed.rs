//! Lossy compressed n-gram store: minimal perfect hashing plus quantized
//! probabilities.
//!
//! Each order keeps its n-grams (key = words joined by single spaces) in a
//! minimal perfect hash table. A slot stores only a `fingerprint_bits`-wide
//! key fingerprint and a `quant_bits`-wide index into a uniform codebook of
//! that order's log-probability range — the keys themselves are discarded.
//! A query hashes to a slot, compares fingerprints, and reads the codebook
//! entry. Keys that were never stored either fail the fingerprint test or
//! (with probability 2^-fingerprint_bits) alias some stored slot.
//!
//! Back-off weights are dropped entirely: a query that misses at order k
//! retries at order k-1 with a fixed additive log-penalty per dropped
//! history word.

use std::fs;
use std::path::Path;

use crate::binio::{BitVec, Reader, Writer};
use crate::error::{Error, Result};
use crate::lm::mph::{hash_bytes, splitmix64, Mph};
use crate::lm::{ArpaModel, PhraseScorer, LOG_PROB_FLOOR, MAX_ORDER, UNK};

const MAGIC: &[u8; 4] = b"CNLM";
const VERSION: u16 = 1;

/// Salt folded into an order's seed to derive its fingerprint seed, so the
/// fingerprint hash is independent of the slot hashes.
const FP_SALT: u64 = 0xa076_1d64_78bd_642f;

#[derive(Debug, Clone, Copy)]
pub struct CompressOptions {
    /// Stored key fingerprint width; false accepts happen at ~2^-bits. 8..=16.
    pub fingerprint_bits: u32,
    /// Codebook index width; each order gets 2^bits centroids. 4..=8.
    pub quant_bits: u32,
    /// Additive log10 penalty per history word dropped during back-off.
    pub backoff_penalty: f64,
    /// Global build seed; per-order hash seeds derive from it.
    pub seed: u64,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions { fingerprint_bits: 12, quant_bits: 8, backoff_penalty: -0.7, seed: 1 }
    }
}

impl CompressOptions {
    fn validate(&self) -> Result<()> {
        if !(8..=16).contains(&self.fingerprint_bits) {
            return Err(Error::InvalidArgument(format!(
                "fingerprint bits must be in 8..=16, got {}",
                self.fingerprint_bits
            )));
        }
        if !(4..=8).contains(&self.quant_bits) {
            return Err(Error::InvalidArgument(format!(
                "quantizer bits must be in 4..=8, got {}",
                self.quant_bits
            )));
        }
        if !self.backoff_penalty.is_finite() || self.backoff_penalty > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "back-off penalty must be a finite non-positive log10 value, got {}",
                self.backoff_penalty
            )));
        }
        Ok(())
    }
}

#[derive(Debug)]
struct OrderStore {
    mph: Mph,
    fp_seed: u64,
    fingerprints: BitVec,
    values: BitVec,
    codebook: Vec<f64>,
}

impl OrderStore {
    fn empty() -> Self {
        OrderStore {
            mph: Mph::from_parts(0, Vec::new(), 0),
            fp_seed: 0,
            fingerprints: BitVec::new(1, 0),
            values: BitVec::new(1, 0),
            codebook: Vec::new(),
        }
    }

    fn lookup(&self, key: &str, fp_mask: u64) -> Option<f64> {
        let slot = self.mph.slot(key.as_bytes())?;
        let fp = hash_bytes(self.fp_seed, key.as_bytes()) & fp_mask;
        if self.fingerprints.get(slot) as u64 != fp {
            return None;
        }
        Some(self.codebook[self.values.get(slot) as usize])
    }
}

/// Uniform quantizer over `[min, max]`: 2^bits bins of width `step`, each
/// represented by its centroid `min + (i + 0.5) * step`. Absolute error is
/// at most `step / 2`. A degenerate range (`max == min`) quantizes to a
/// single exact centroid.
fn build_codebook(values: &[f64], bits: u32) -> (f64, f64, Vec<f64>) {
    let levels = 1usize << bits;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (min, step) = if values.is_empty() || max == min {
        (if values.is_empty() { 0.0 } else { min }, 0.0)
    } else {
        (min, (max - min) / levels as f64)
    };
    let codebook = (0..levels).map(|i| min + (i as f64 + 0.5) * step).collect();
    (min, step, codebook)
}

fn quantize(v: f64, min: f64, step: f64, bits: u32) -> u32 {
    if step == 0.0 {
        return 0;
    }
    let max_index = (1u32 << bits) - 1;
    (((v - min) / step) as u32).min(max_index)
}

#[derive(Debug)]
pub struct CompressedNGramModel {
    options: CompressOptions,
    max_order: usize,
    orders: Vec<OrderStore>,
}

impl CompressedNGramModel {
    /// Compresses a parsed text-format model. Deterministic for a fixed
    /// input and seed: keys enter the hash build in sorted order and all
    /// per-order seeds derive from `options.seed`.
    pub fn from_arpa(model: &ArpaModel, options: CompressOptions) -> Result<Self> {
        options.validate()?;
        let max_order = model.max_order();
        let mut orders = Vec::with_capacity(max_order);
        for order in 1..=max_order {
            let grams = model.grams_of_order(order);
            if grams.is_empty() {
                orders.push(OrderStore::empty());
                continue;
            }
            let keys: Vec<String> = grams.iter().map(|(words, _)| words.join(" ")).collect();
            let values: Vec<f64> = grams.iter().map(|&(_, p)| p).collect();

            let order_seed = splitmix64(options.seed.wrapping_add(order as u64));
            let mph = Mph::build(&keys, order_seed)?;
            let fp_seed = splitmix64(order_seed ^ FP_SALT);

            let (min, step, codebook) = build_codebook(&values, options.quant_bits);
            let fp_mask = (1u64 << options.fingerprint_bits) - 1;
            let mut fingerprints = BitVec::new(options.fingerprint_bits, keys.len());
            let mut packed = BitVec::new(options.quant_bits, keys.len());
            for (key, &v) in keys.iter().zip(&values) {
                let slot = mph.slot(key.as_bytes()).expect("build key must resolve");
                fingerprints.set(slot, (hash_bytes(fp_seed, key.as_bytes()) & fp_mask) as u32);
                packed.set(slot, quantize(v, min, step, options.quant_bits));
            }
            orders.push(OrderStore { mph, fp_seed, fingerprints, values: packed, codebook });
        }
        Ok(CompressedNGramModel { options, max_order, orders })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn options(&self) -> &CompressOptions {
        &self.options
    }

    pub fn stored_count(&self, order: usize) -> usize {
        self.orders.get(order.wrapping_sub(1)).map_or(0, |s| s.mph.len())
    }

    fn fp_mask(&self) -> u64 {
        (1u64 << self.options.fingerprint_bits) - 1
    }

    /// Raw single-order probe: the quantized log10 probability stored for
    /// `key` (words joined by single spaces), or None when the slot's
    /// fingerprint rejects it. Exposed for diagnostics — false-accept
    /// measurement and table audits; scoring goes through
    /// [`conditional_log_prob`](Self::conditional_log_prob).
    pub fn probe(&self, order: usize, key: &str) -> Option<f64> {
        let store = self.orders.get(order.wrapping_sub(1))?;
        store.lookup(key, self.fp_mask())
    }

    /// Hash slot of `key` at `order`, in `[0, stored_count)`. Diagnostic
    /// companion to [`probe`](Self::probe): over the build keys the mapping
    /// is a bijection.
    pub fn slot_of(&self, order: usize, key: &str) -> Option<usize> {
        self.orders.get(order.wrapping_sub(1))?.mph.slot(key.as_bytes())
    }

    /// Log10 probability of `word` after `history`, longest stored n-gram
    /// first. Each history word dropped to find a match adds
    /// `backoff_penalty`. A word absent even as a unigram falls back to the
    /// stored unknown-word entry if present, else the fixed floor.
    pub fn conditional_log_prob(&self, word: &str, history: &[&str]) -> f64 {
        let keep = history.len().min(self.max_order.saturating_sub(1)).min(MAX_ORDER - 1);
        let hist = &history[history.len() - keep..];
        let fp_mask = self.fp_mask();

        let mut key = String::new();
        for drop in 0..=hist.len() {
            let used = &hist[drop..];
            key.clear();
            for w in used {
                key.push_str(w);
                key.push(' ');
            }
            key.push_str(word);
            if let Some(p) = self.orders[used.len()].lookup(&key, fp_mask) {
                return p + drop as f64 * self.options.backoff_penalty;
            }
        }
        match self.orders[0].lookup(UNK, fp_mask) {
            Some(p) => p + hist.len() as f64 * self.options.backoff_penalty,
            None => LOG_PROB_FLOOR,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(self.max_order as u8);
        w.u8(self.options.fingerprint_bits as u8);
        w.u8(self.options.quant_bits as u8);
        w.f64(self.options.backoff_penalty);
        w.u64(self.options.seed);
        for store in &self.orders {
            w.u64(store.mph.len() as u64);
            w.u64(store.mph.seed());
            w.u32(store.mph.bucket_seeds().len() as u32);
            for &s in store.mph.bucket_seeds() {
                w.u32(s);
            }
            w.u64(store.fp_seed);
            w.u32(store.codebook.len() as u32);
            for &c in &store.codebook {
                w.f64(c);
            }
            w.u64(store.fingerprints.raw().len() as u64);
            w.bytes(store.fingerprints.raw());
            w.u64(store.values.raw().len() as u64);
            w.bytes(store.values.raw());
        }
        w.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn from_bytes(data: &[u8], origin: &Path) -> Result<Self> {
        let fail = |message: String| Error::ModelFormat { path: origin.to_path_buf(), message };
        let mut r = Reader::new(data, origin);
        r.expect_magic(MAGIC, "compressed language model")?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(fail(format!("unsupported version {version} (expected {VERSION})")));
        }
        let max_order = r.u8()? as usize;
        if max_order == 0 || max_order > MAX_ORDER {
            return Err(fail(format!("order {max_order} outside 1..={MAX_ORDER}")));
        }
        let options = CompressOptions {
            fingerprint_bits: r.u8()? as u32,
            quant_bits: r.u8()? as u32,
            backoff_penalty: r.f64()?,
            seed: r.u64()?,
        };
        options.validate().map_err(|e| fail(e.to_string()))?;

        let mut orders = Vec::with_capacity(max_order);
        for order in 1..=max_order {
            let n = r.u64()? as usize;
            let mph_seed = r.u64()?;
            let m = r.u32()? as usize;
            let mut bucket_seeds = Vec::with_capacity(m);
            for _ in 0..m {
                bucket_seeds.push(r.u32()?);
            }
            let fp_seed = r.u64()?;
            let levels = r.u32()? as usize;
            if n > 0 && levels != 1 << options.quant_bits {
                return Err(fail(format!("order {order} codebook has {levels} entries")));
            }
            let mut codebook = Vec::with_capacity(levels);
            for _ in 0..levels {
                codebook.push(r.f64()?);
            }
            let fp_len = r.u64()? as usize;
            if fp_len != (options.fingerprint_bits as usize * n).div_ceil(8) {
                return Err(fail(format!("order {order} fingerprint block length mismatch")));
            }
            let fingerprints =
                BitVec::from_raw(r.take(fp_len)?.to_vec(), options.fingerprint_bits.max(1), n);
            let val_len = r.u64()? as usize;
            if val_len != (options.quant_bits as usize * n).div_ceil(8) {
                return Err(fail(format!("order {order} value block length mismatch")));
            }
            let values = BitVec::from_raw(r.take(val_len)?.to_vec(), options.quant_bits.max(1), n);
            orders.push(OrderStore {
                mph: Mph::from_parts(mph_seed, bucket_seeds, n),
                fp_seed,
                fingerprints,
                values,
                codebook,
            });
        }
        if !r.done() {
            return Err(fail("trailing bytes after final order section".into()));
        }
        Ok(CompressedNGramModel { options, max_order, orders })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&data, path)
    }
}

impl PhraseScorer for CompressedNGramModel {
    /// Mean per-word conditional log10 probability with up to three words
    /// of history; empty input scores 0.
    fn phrase_score(&self, words: &[&str]) -> f64 {
        if words.is_empty() {
            return 0.0;
        }
        let total: f64 = (0..words.len())
            .map(|i| self.conditional_log_prob(words[i], &words[i.saturating_sub(3)..i]))
            .sum();
        total / words.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
\\data\\
ngram 1=3
ngram 2=2

\\1-grams:
-0.5\ta\t-0.3
-0.6\tb\t-0.2
-0.9\tc

\\2-grams:
-0.4\ta b
-0.7\tb c

\\end\\
";

    fn tiny_compressed() -> (ArpaModel, CompressedNGramModel) {
        let arpa = ArpaModel::parse(TINY).unwrap();
        let comp = CompressedNGramModel::from_arpa(&arpa, CompressOptions::default()).unwrap();
        (arpa, comp)
    }

    #[test]
    fn stored_grams_probe_within_quantizer_error() {
        let (arpa, comp) = tiny_compressed();
        for order in 1..=2 {
            // Range [-0.9, -0.4] over 256 bins: half-step is well under 1e-3.
            for (words, p) in arpa.grams_of_order(order) {
                let key = words.join(" ");
                let got = comp.probe(order, &key).expect("stored gram must probe");
                assert!((got - p).abs() <= 0.5 / 256.0 + 1e-12, "{key}: {got} vs {p}");
            }
        }
    }

    #[test]
    fn quantizer_error_bound_holds_at_extremes() {
        let values = [-3.0, -1.0, 0.0];
        let (min, step, codebook) = build_codebook(&values, 4);
        assert_eq!(codebook.len(), 16);
        for &v in &values {
            let i = quantize(v, min, step, 4);
            assert!((codebook[i as usize] - v).abs() <= step / 2.0 + 1e-12);
        }
    }

    #[test]
    fn degenerate_range_is_exact() {
        let (min, step, codebook) = build_codebook(&[-2.5, -2.5], 8);
        assert_eq!(step, 0.0);
        assert_eq!(quantize(-2.5, min, step, 8), 0);
        assert_eq!(codebook[0], -2.5);
    }

    const TINY3: &str = "\
\\data\\
ngram 1=3
ngram 2=2
ngram 3=1

\\1-grams:
-0.5\ta\t-0.3
-0.6\tb\t-0.2
-0.9\tc

\\2-grams:
-0.4\ta b\t-0.1
-0.7\tb c

\\3-grams:
-0.2\ta b c

\\end\\
";

    #[test]
    fn backoff_penalty_accumulates_per_dropped_word() {
        let arpa = ArpaModel::parse(TINY3).unwrap();
        let comp = CompressedNGramModel::from_arpa(&arpa, CompressOptions::default()).unwrap();
        let direct = comp.probe(1, "b").unwrap();
        // "c b" is not stored at order 2; unigram b is, one drop.
        let one_drop = comp.conditional_log_prob("b", &["c"]);
        assert!((one_drop - (direct - 0.7)).abs() < 1e-9);
        // "c c b" and "c b" both miss: two drops to reach unigram b.
        let two_drops = comp.conditional_log_prob("b", &["c", "c"]);
        assert!((two_drops - (direct - 1.4)).abs() < 1e-9);
        // Stored trigram: full history used, no penalty.
        let trigram = comp.conditional_log_prob("c", &["a", "b"]);
        assert!((trigram - -0.2).abs() <= 0.5 / 256.0 + 1e-12);
    }

    #[test]
    fn history_beyond_model_order_truncates_without_penalty() {
        let (_, comp) = tiny_compressed(); // bigram model
        let against_one = comp.conditional_log_prob("b", &["a"]);
        let against_three = comp.conditional_log_prob("b", &["c", "c", "a"]);
        assert_eq!(against_one, against_three);
    }

    #[test]
    fn stored_bigram_needs_no_penalty() {
        let (arpa, comp) = tiny_compressed();
        let got = comp.conditional_log_prob("b", &["a"]);
        assert!((got - arpa.log_prob("b", &["a"])).abs() <= 0.5 / 256.0 + 1e-12);
    }

    #[test]
    fn unknown_word_hits_floor_without_unk_entry() {
        let (_, comp) = tiny_compressed();
        assert_eq!(comp.conditional_log_prob("zzz", &[]), LOG_PROB_FLOOR);
    }

    #[test]
    fn unknown_word_uses_unk_entry_when_stored() {
        let text = TINY.replace("-0.9\tc", "-0.9\tc\n-1.5\t<unk>").replace("ngram 1=3", "ngram 1=4");
        let arpa = ArpaModel::parse(&text).unwrap();
        let comp = CompressedNGramModel::from_arpa(&arpa, CompressOptions::default()).unwrap();
        let got = comp.conditional_log_prob("zzz", &[]);
        assert!((got - -1.5).abs() <= 0.5 / 256.0 + 1e-12, "{got}");
    }

    #[test]
    fn roundtrip_preserves_every_probe() {
        let (arpa, comp) = tiny_compressed();
        let bytes = comp.to_bytes();
        let back = CompressedNGramModel::from_bytes(&bytes, Path::new("mem")).unwrap();
        for order in 1..=2 {
            for (words, _) in arpa.grams_of_order(order) {
                let key = words.join(" ");
                assert_eq!(comp.probe(order, &key), back.probe(order, &key), "{key}");
            }
        }
        assert_eq!(bytes, back.to_bytes());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let (_, comp) = tiny_compressed();
        let mut bytes = comp.to_bytes();
        bytes[0] = b'X';
        let err = CompressedNGramModel::from_bytes(&bytes, Path::new("mem")).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn truncated_file_is_rejected() {
        let (_, comp) = tiny_compressed();
        let bytes = comp.to_bytes();
        let err =
            CompressedNGramModel::from_bytes(&bytes[..bytes.len() - 3], Path::new("mem")).unwrap_err();
        assert!(err.to_string().contains("truncated") || err.to_string().contains("length"), "{err}");
    }

    #[test]
    fn option_bounds_are_enforced() {
        let arpa = ArpaModel::parse(TINY).unwrap();
        let too_wide = CompressOptions { fingerprint_bits: 17, ..Default::default() };
        assert!(CompressedNGramModel::from_arpa(&arpa, too_wide).is_err());
        let too_coarse = CompressOptions { quant_bits: 3, ..Default::default() };
        assert!(CompressedNGramModel::from_arpa(&arpa, too_coarse).is_err());
        let positive_penalty = CompressOptions { backoff_penalty: 0.1, ..Default::default() };
        assert!(CompressedNGramModel::from_arpa(&arpa, positive_penalty).is_err());
    }

    #[test]
    fn phrase_score_matches_manual_chain() {
        let (_, comp) = tiny_compressed();
        let expected =
            (comp.conditional_log_prob("a", &[]) + comp.conditional_log_prob("b", &["a"])) / 2.0;
        assert_eq!(comp.phrase_score(&["a", "b"]), expected);
        assert_eq!(comp.phrase_score(&[]), 0.0);
    }
}
