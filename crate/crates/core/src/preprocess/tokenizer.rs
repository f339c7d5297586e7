//! Span scanner behind tokenization. Finds word cores (maximal
//! alphanumeric-bounded slices of whitespace-separated chunks) and marks
//! sentence boundaries from the punctuation between them.

pub(crate) struct RawToken {
    pub start: usize,
    pub end: usize,
    pub boundary_after: bool,
}

fn is_boundary_char(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | ':' | ';' | '\n')
}

pub(crate) fn scan(text: &str) -> Vec<RawToken> {
    // whitespace-separated chunks, as byte ranges
    let mut chunks: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                chunks.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        chunks.push((s, text.len()));
    }

    // trim each chunk to its alphanumeric core; chunks of pure punctuation
    // vanish and only contribute to the boundary gap
    let mut cores: Vec<(usize, usize)> = Vec::new();
    for (s, e) in chunks {
        let chunk = &text[s..e];
        let Some(first) = chunk.char_indices().find(|(_, c)| c.is_alphanumeric()) else {
            continue;
        };
        let last = chunk
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .expect("a chunk with a first alphanumeric char has a last one");
        cores.push((s + first.0, s + last.0 + last.1.len_utf8()));
    }

    // a token ends a sentence when any boundary char sits between its core
    // and the next core (or the end of the text)
    cores
        .iter()
        .enumerate()
        .map(|(i, &(start, end))| {
            let gap_end = cores.get(i + 1).map_or(text.len(), |&(next, _)| next);
            let boundary_after = text[end..gap_end].chars().any(is_boundary_char);
            RawToken { start, end, boundary_after }
        })
        .collect()
}
