//! Suffix-stripping stemmers.
//!
//! Both stemmers run their rule cascade repeatedly until the word stops
//! changing. Every rewrite either shortens the word or removes a diacritic,
//! so the loop terminates, and a fixed point makes stemming idempotent:
//! `stem(stem(w)) == stem(w)` holds for any input, which keyphrase
//! normalization relies on.
//!
//! # Portuguese cascade
//!
//! One pass applies, in order:
//!
//! 1. **Plural reduction** (only when the word ends in `s`):
//!    `ões→ão`, `ães→ão`, `ais→al`, `éis/eis→el`, `óis→ol`, `ns→m`,
//!    `les→l`, `res→r`, and finally bare `s` is dropped when preceded by a
//!    vowel. Each rule requires a minimum prefix length (see the tables).
//! 2. **Adverb**: `mente` is dropped.
//! 3. **Diminutive**: `zinho/zinha/inho/inha` are dropped.
//! 4. **Noun/adjective suffixes**: the first matching entry of
//!    [`PT_NOUN_RULES`] fires; when one fires, verb and vowel steps are
//!    skipped for the pass.
//! 5. **Verb suffixes**: likewise from [`PT_VERB_RULES`].
//! 6. **Final vowel removal**: a trailing `a`, `e`, or `o` is dropped when
//!    at least three characters remain.
//! 7. **Diacritic folding**: `á→a`, `ç→c`, and so on.
//!
//! The English stemmer is the classic Porter algorithm (steps 1a through
//! 5b), wrapped in the same fixed-point loop.

/// A stemming algorithm keyed by the language profile.
pub trait Stemmer: Send + Sync {
    /// Stems one case-folded word. Never panics; unknown shapes come back
    /// unchanged.
    fn stem(&self, word: &str) -> String;

    fn name(&self) -> &'static str;
}

/// suffix, minimum number of chars that must remain before it, replacement
struct Rule(&'static str, usize, &'static str);

const PT_PLURAL_RULES: &[Rule] = &[
    Rule("ões", 3, "ão"),
    Rule("ães", 2, "ão"),
    Rule("ais", 2, "al"),
    Rule("éis", 2, "el"),
    Rule("eis", 2, "el"),
    Rule("óis", 2, "ol"),
    Rule("les", 3, "l"),
    Rule("res", 3, "r"),
    Rule("ns", 2, "m"),
];

const PT_ADVERB_RULES: &[Rule] = &[Rule("mente", 4, "")];

const PT_DIMINUTIVE_RULES: &[Rule] = &[
    Rule("zinho", 2, ""),
    Rule("zinha", 2, ""),
    Rule("inho", 3, ""),
    Rule("inha", 3, ""),
];

const PT_NOUN_RULES: &[Rule] = &[
    Rule("amento", 3, ""),
    Rule("imento", 3, ""),
    Rule("ância", 4, ""),
    Rule("ência", 4, ""),
    Rule("idade", 4, ""),
    Rule("mento", 4, ""),
    Rule("ação", 2, ""),
    Rule("ição", 3, ""),
    Rule("agem", 3, ""),
    Rule("ismo", 4, ""),
    Rule("ista", 4, ""),
    Rule("eiro", 3, ""),
    Rule("eira", 3, ""),
    Rule("ador", 2, ""),
    Rule("edor", 2, ""),
    Rule("idor", 3, ""),
    Rule("dade", 5, ""),
    Rule("ção", 4, ""),
    Rule("são", 4, ""),
    Rule("oso", 3, ""),
    Rule("osa", 3, ""),
    Rule("ivo", 4, ""),
    Rule("iva", 4, ""),
    Rule("eza", 3, ""),
    Rule("ura", 4, ""),
    Rule("al", 4, ""),
    Rule("or", 4, ""),
];

const PT_VERB_RULES: &[Rule] = &[
    Rule("ando", 2, ""),
    Rule("endo", 2, ""),
    Rule("indo", 2, ""),
    Rule("aram", 2, ""),
    Rule("eram", 2, ""),
    Rule("iram", 2, ""),
    Rule("avam", 2, ""),
    Rule("amos", 2, ""),
    Rule("emos", 2, ""),
    Rule("imos", 2, ""),
    Rule("asse", 2, ""),
    Rule("esse", 2, ""),
    Rule("isse", 2, ""),
    Rule("aria", 2, ""),
    Rule("eria", 2, ""),
    Rule("iria", 2, ""),
    Rule("ado", 2, ""),
    Rule("ido", 2, ""),
    Rule("ava", 2, ""),
    Rule("ou", 2, ""),
    Rule("ei", 2, ""),
    Rule("ar", 2, ""),
    Rule("er", 2, ""),
    Rule("ir", 2, ""),
    Rule("am", 2, ""),
    Rule("em", 3, ""),
];

const PT_VOWELS: &str = "aeiouáéíóúâêôãõà";

fn fold_diacritics(word: &str) -> String {
    word.chars()
        .map(|c| match c {
            'á' | 'à' | 'â' | 'ã' | 'ä' => 'a',
            'é' | 'è' | 'ê' | 'ë' => 'e',
            'í' | 'ì' | 'î' | 'ï' => 'i',
            'ó' | 'ò' | 'ô' | 'õ' | 'ö' => 'o',
            'ú' | 'ù' | 'û' | 'ü' => 'u',
            'ç' => 'c',
            'ñ' => 'n',
            other => other,
        })
        .collect()
}

/// First rule whose suffix matches with enough prefix left wins.
fn apply_rules(word: &str, rules: &[Rule]) -> Option<String> {
    for Rule(suffix, min_prefix, replace) in rules {
        if let Some(prefix) = word.strip_suffix(suffix) {
            if prefix.chars().count() >= *min_prefix {
                return Some(format!("{prefix}{replace}"));
            }
        }
    }
    None
}

fn pt_pass(word: &str) -> String {
    let mut w = word.to_string();

    if w.ends_with('s') {
        if let Some(next) = apply_rules(&w, PT_PLURAL_RULES) {
            w = next;
        } else {
            let chars: Vec<char> = w.chars().collect();
            if chars.len() >= 3 && PT_VOWELS.contains(chars[chars.len() - 2]) {
                w.pop();
            }
        }
    }

    if let Some(next) = apply_rules(&w, PT_ADVERB_RULES) {
        w = next;
    }
    if let Some(next) = apply_rules(&w, PT_DIMINUTIVE_RULES) {
        w = next;
    }

    if let Some(next) = apply_rules(&w, PT_NOUN_RULES) {
        w = next;
    } else if let Some(next) = apply_rules(&w, PT_VERB_RULES) {
        w = next;
    } else {
        let chars: Vec<char> = w.chars().collect();
        if chars.len() >= 4 && matches!(chars[chars.len() - 1], 'a' | 'e' | 'o') {
            w.pop();
        }
    }

    fold_diacritics(&w)
}

/// Runs one pass function to its fixed point. Rules only shrink the word
/// or fold diacritics, so this always terminates; the cap is a backstop.
fn fixpoint(word: &str, pass: impl Fn(&str) -> String) -> String {
    let mut w = word.to_string();
    for _ in 0..32 {
        let next = pass(&w);
        if next == w {
            break;
        }
        w = next;
    }
    w
}

pub struct PortugueseStemmer;

impl Stemmer for PortugueseStemmer {
    fn stem(&self, word: &str) -> String {
        fixpoint(word, pt_pass)
    }

    fn name(&self) -> &'static str {
        "portuguese"
    }
}

// --- English: Porter's algorithm ---

fn is_cons(w: &[char], i: usize) -> bool {
    match w[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_cons(w, i - 1),
        _ => true,
    }
}

/// Porter's m: the number of vowel-consonant sequences in `w[..len]`.
fn measure(w: &[char], len: usize) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..len {
        let cons = is_cons(w, i);
        if cons && prev_vowel {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

fn has_vowel(w: &[char], len: usize) -> bool {
    (0..len).any(|i| !is_cons(w, i))
}

fn ends_double_cons(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_cons(w, n - 1)
}

/// consonant-vowel-consonant ending where the last consonant is not w, x, y
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && is_cons(w, n - 3)
        && !is_cons(w, n - 2)
        && is_cons(w, n - 1)
        && !matches!(w[n - 1], 'w' | 'x' | 'y')
}

struct PorterWord(Vec<char>);

impl PorterWord {
    fn ends(&self, suffix: &str) -> bool {
        let s: Vec<char> = suffix.chars().collect();
        self.0.len() >= s.len() && self.0[self.0.len() - s.len()..] == s[..]
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.0.len() - suffix.chars().count()
    }

    /// Replaces `suffix` (assumed to match) with `rep`.
    fn set(&mut self, suffix: &str, rep: &str) {
        let keep = self.stem_len(suffix);
        self.0.truncate(keep);
        self.0.extend(rep.chars());
    }

    /// The (m > threshold) rule form shared by steps 2 to 4.
    fn replace_if(&mut self, suffix: &str, rep: &str, min_m: usize) -> bool {
        if self.ends(suffix) && measure(&self.0, self.stem_len(suffix)) > min_m {
            self.set(suffix, rep);
            true
        } else {
            false
        }
    }
}

fn porter_pass(word: &str) -> String {
    let mut w = PorterWord(word.chars().collect());
    if w.0.len() <= 2 {
        return word.to_string();
    }

    // step 1a
    if w.ends("sses") {
        w.set("sses", "ss");
    } else if w.ends("ies") {
        w.set("ies", "i");
    } else if !w.ends("ss") && w.ends("s") {
        w.set("s", "");
    }

    // step 1b
    if w.ends("eed") {
        if measure(&w.0, w.stem_len("eed")) > 0 {
            w.set("eed", "ee");
        }
    } else {
        let hit = if w.ends("ed") && has_vowel(&w.0, w.stem_len("ed")) {
            w.set("ed", "");
            true
        } else if w.ends("ing") && has_vowel(&w.0, w.stem_len("ing")) {
            w.set("ing", "");
            true
        } else {
            false
        };
        if hit {
            if w.ends("at") {
                w.set("at", "ate");
            } else if w.ends("bl") {
                w.set("bl", "ble");
            } else if w.ends("iz") {
                w.set("iz", "ize");
            } else if ends_double_cons(&w.0) && !matches!(w.0[w.0.len() - 1], 'l' | 's' | 'z') {
                w.0.pop();
            } else if measure(&w.0, w.0.len()) == 1 && ends_cvc(&w.0) {
                w.0.push('e');
            }
        }
    }

    // step 1c
    if w.ends("y") && has_vowel(&w.0, w.stem_len("y")) {
        w.set("y", "i");
    }

    // step 2, longest suffixes first
    const STEP2: &[(&str, &str)] = &[
        ("ization", "ize"),
        ("iveness", "ive"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("ational", "ate"),
        ("tional", "tion"),
        ("biliti", "ble"),
        ("ation", "ate"),
        ("alism", "al"),
        ("ousli", "ous"),
        ("entli", "ent"),
        ("aliti", "al"),
        ("iviti", "ive"),
        ("enci", "ence"),
        ("anci", "ance"),
        ("izer", "ize"),
        ("abli", "able"),
        ("ator", "ate"),
        ("alli", "al"),
        ("eli", "e"),
    ];
    for (suffix, rep) in STEP2 {
        if w.ends(suffix) {
            w.replace_if(suffix, rep, 0);
            break;
        }
    }

    // step 3
    const STEP3: &[(&str, &str)] = &[
        ("icate", "ic"),
        ("ative", ""),
        ("alize", "al"),
        ("iciti", "ic"),
        ("ical", "ic"),
        ("ness", ""),
        ("ful", ""),
    ];
    for (suffix, rep) in STEP3 {
        if w.ends(suffix) {
            w.replace_if(suffix, rep, 0);
            break;
        }
    }

    // step 4; "ion" additionally needs the stem to end in s or t
    const STEP4: &[&str] = &[
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti", "ous",
        "ive", "ize", "ion", "al", "er", "ic", "ou",
    ];
    for suffix in STEP4 {
        if w.ends(suffix) {
            let keep = w.stem_len(suffix);
            let ion_ok = *suffix != "ion" || (keep >= 1 && matches!(w.0[keep - 1], 's' | 't'));
            if ion_ok && measure(&w.0, keep) > 1 {
                w.set(suffix, "");
            }
            break;
        }
    }

    // step 5a
    if w.ends("e") {
        let m = measure(&w.0, w.stem_len("e"));
        if m > 1 {
            w.set("e", "");
        } else if m == 1 {
            let stem: Vec<char> = w.0[..w.0.len() - 1].to_vec();
            if !ends_cvc(&stem) {
                w.set("e", "");
            }
        }
    }

    // step 5b
    if measure(&w.0, w.0.len()) > 1 && ends_double_cons(&w.0) && w.0[w.0.len() - 1] == 'l' {
        w.0.pop();
    }

    w.0.into_iter().collect()
}

pub struct EnglishStemmer;

impl Stemmer for EnglishStemmer {
    fn stem(&self, word: &str) -> String {
        fixpoint(word, porter_pass)
    }

    fn name(&self) -> &'static str {
        "english"
    }
}
