//! ARPA text-format back-off model: parsing and conditional probability
//! queries.
//!
//! Query semantics are the usual back-off recursion: use the longest stored
//! n-gram ending in the queried word; otherwise add the back-off weight of
//! the history (0 when the history itself is not stored) and retry with the
//! history shortened from the left. Out-of-vocabulary words map to the unk
//! entry when the model has one, else the query floors at
//! [`LOG_PROB_FLOOR`](super::LOG_PROB_FLOOR).

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lm::{PhraseScorer, LOG_PROB_FLOOR, MAX_ORDER, UNK};

#[derive(Debug, Clone, Copy)]
struct GramEntry {
    log_prob: f64,
    backoff: f64,
}

#[derive(Debug)]
pub struct ArpaModel {
    vocab: HashMap<String, u32>,
    words: Vec<String>,
    /// grams[o - 1]: entries of order o, keyed by word-id sequences.
    grams: Vec<HashMap<Box<[u32]>, GramEntry>>,
    unk: Option<u32>,
}

impl ArpaModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses ARPA text: a `\data\` header with `ngram N=count` lines, one
    /// `\N-grams:` section per order holding `logprob w1..wN [backoff]`
    /// lines, and a closing `\end\`.
    pub fn parse(text: &str) -> Result<Self> {
        let fail = |line: usize, message: String| Error::ArpaParse { line, message };

        let mut declared: Vec<(usize, usize)> = Vec::new();
        let mut model = ArpaModel {
            vocab: HashMap::new(),
            words: Vec::new(),
            grams: Vec::new(),
            unk: None,
        };
        let mut loaded: Vec<usize> = Vec::new();

        enum State {
            Preamble,
            Header,
            Section(usize),
            Done,
        }
        let mut state = State::Preamble;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            match state {
                State::Preamble => {
                    if line == "\\data\\" {
                        state = State::Header;
                    }
                    // anything before \data\ is comment territory
                }
                State::Header => {
                    if line.is_empty() {
                        continue;
                    }
                    if let Some(rest) = line.strip_prefix("ngram ") {
                        let (order, count) = rest
                            .split_once('=')
                            .ok_or_else(|| fail(lineno, format!("bad ngram line {line:?}")))?;
                        let order: usize = order
                            .trim()
                            .parse()
                            .map_err(|_| fail(lineno, format!("bad order in {line:?}")))?;
                        let count: usize = count
                            .trim()
                            .parse()
                            .map_err(|_| fail(lineno, format!("bad count in {line:?}")))?;
                        if order == 0 || order > MAX_ORDER {
                            return Err(fail(
                                lineno,
                                format!("order {order} outside the supported 1..={MAX_ORDER}"),
                            ));
                        }
                        declared.push((order, count));
                    } else if let Some(order) = section_order(line) {
                        start_section(&mut model, &mut loaded, &declared, order, lineno)?;
                        state = State::Section(order);
                    } else {
                        return Err(fail(lineno, format!("unexpected line {line:?} in header")));
                    }
                }
                State::Section(order) => {
                    if line.is_empty() {
                        continue;
                    }
                    if line == "\\end\\" {
                        state = State::Done;
                    } else if let Some(next) = section_order(line) {
                        start_section(&mut model, &mut loaded, &declared, next, lineno)?;
                        state = State::Section(next);
                    } else {
                        parse_entry(&mut model, order, line, lineno)?;
                        loaded[order - 1] += 1;
                    }
                }
                State::Done => {
                    if !line.is_empty() {
                        return Err(fail(lineno, format!("content after \\end\\: {line:?}")));
                    }
                }
            }
        }

        match state {
            State::Done => {}
            State::Preamble => return Err(fail(0, "missing \\data\\ header".into())),
            _ => return Err(fail(0, "missing \\end\\ marker".into())),
        }

        for (order, count) in &declared {
            let got = model.grams.get(order - 1).map_or(0, |g| g.len());
            if got != *count {
                return Err(fail(
                    0,
                    format!("header declares {count} {order}-grams, section has {got}"),
                ));
            }
        }

        model.unk = model.vocab.get(UNK).copied();
        Ok(model)
    }

    pub fn max_order(&self) -> usize {
        self.grams.len()
    }

    pub fn count(&self, order: usize) -> usize {
        self.grams.get(order - 1).map_or(0, |g| g.len())
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn vocab_words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|w| w.as_str())
    }

    /// All stored n-grams of one order, as (words, log10 prob), sorted by
    /// the word sequence for deterministic iteration.
    pub fn grams_of_order(&self, order: usize) -> Vec<(Vec<&str>, f64)> {
        let Some(grams) = self.grams.get(order - 1) else {
            return Vec::new();
        };
        let mut out: Vec<(Vec<&str>, f64)> = grams
            .iter()
            .map(|(ids, e)| {
                (ids.iter().map(|&id| self.words[id as usize].as_str()).collect(), e.log_prob)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.vocab.get(word).copied()
    }

    fn entry(&self, ids: &[u32]) -> Option<&GramEntry> {
        self.grams.get(ids.len() - 1)?.get(ids)
    }

    /// Conditional log10 probability of `word` after `history` (most recent
    /// word last). History beyond what a 4-gram can use is ignored.
    pub fn log_prob(&self, word: &str, history: &[&str]) -> f64 {
        let Some(wid) = self.id(word).or(self.unk) else {
            return LOG_PROB_FLOOR;
        };
        let keep = history.len().min(self.max_order().saturating_sub(1)).min(MAX_ORDER - 1);
        let hist: Vec<Option<u32>> = history[history.len() - keep..]
            .iter()
            .map(|w| self.id(w).or(self.unk))
            .collect();
        self.backed_off(wid, &hist)
    }

    fn backed_off(&self, word: u32, hist: &[Option<u32>]) -> f64 {
        if hist.is_empty() {
            return match self.entry(&[word]) {
                Some(e) => e.log_prob,
                None => LOG_PROB_FLOOR,
            };
        }
        if let Some(ids) = materialize(hist) {
            let mut key = ids.clone();
            key.push(word);
            if let Some(e) = self.entry(&key) {
                return e.log_prob;
            }
            let backoff = self.entry(&ids).map_or(0.0, |e| e.backoff);
            return backoff + self.backed_off(word, &hist[1..]);
        }
        // an unmatchable history word: no such n-gram or back-off weight
        // can be stored, so drop through with weight 0
        self.backed_off(word, &hist[1..])
    }
}

fn materialize(hist: &[Option<u32>]) -> Option<Vec<u32>> {
    hist.iter().copied().collect()
}

impl PhraseScorer for ArpaModel {
    /// Mean conditional log10 probability over the phrase, each word
    /// conditioned on up to three preceding phrase words.
    fn phrase_score(&self, words: &[&str]) -> f64 {
        if words.is_empty() {
            return 0.0;
        }
        let total: f64 = (0..words.len())
            .map(|i| self.log_prob(words[i], &words[i.saturating_sub(MAX_ORDER - 1)..i]))
            .sum();
        total / words.len() as f64
    }
}

fn section_order(line: &str) -> Option<usize> {
    let rest = line.strip_prefix('\\')?.strip_suffix("-grams:")?;
    rest.parse().ok()
}

fn start_section(
    model: &mut ArpaModel,
    loaded: &mut Vec<usize>,
    declared: &[(usize, usize)],
    order: usize,
    lineno: usize,
) -> Result<()> {
    let fail = |message: String| Error::ArpaParse { line: lineno, message };
    if order == 0 || order > MAX_ORDER {
        return Err(fail(format!("order {order} outside the supported 1..={MAX_ORDER}")));
    }
    if !declared.iter().any(|(o, _)| *o == order) {
        return Err(fail(format!("section for undeclared order {order}")));
    }
    while model.grams.len() < order {
        model.grams.push(HashMap::new());
        loaded.push(0);
    }
    Ok(())
}

fn parse_entry(model: &mut ArpaModel, order: usize, line: &str, lineno: usize) -> Result<()> {
    let fail = |message: String| Error::ArpaParse { line: lineno, message };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != order + 1 && fields.len() != order + 2 {
        return Err(fail(format!(
            "expected logprob + {order} words [+ backoff], got {} fields",
            fields.len()
        )));
    }
    let log_prob: f64 =
        fields[0].parse().map_err(|_| fail(format!("bad log prob {:?}", fields[0])))?;
    let backoff: f64 = if fields.len() == order + 2 {
        fields[order + 1].parse().map_err(|_| fail(format!("bad backoff {:?}", fields[order + 1])))?
    } else {
        0.0
    };

    let mut ids = Vec::with_capacity(order);
    for word in &fields[1..=order] {
        let next = model.words.len() as u32;
        let id = *model.vocab.entry(word.to_string()).or_insert_with(|| {
            model.words.push(word.to_string());
            next
        });
        ids.push(id);
    }
    if order > 1 {
        for &id in &ids {
            if !model.grams[0].contains_key(&[id][..]) {
                return Err(fail(format!(
                    "word {:?} appears in a {order}-gram but has no unigram",
                    model.words[id as usize]
                )));
            }
        }
    }
    model.grams[order - 1].insert(ids.into_boxed_slice(), GramEntry { log_prob, backoff });
    Ok(())
}
