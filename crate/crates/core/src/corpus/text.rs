//! Tokenization, sentence splitting and the term extractors shared by the
//! vocabulary builder, the phrase module and ROUGE.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

/// A token and the byte range it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits `text` into lowercased word tokens.
///
/// A token is a maximal run of alphanumeric characters; an apostrophe is
/// kept when it sits between two alphanumerics ("that's"). Everything else
/// is a separator. Curly apostrophes are normalized to `'`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i].1) {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut word = String::new();
        let mut j = i;
        while j < chars.len() {
            let c = chars[j].1;
            if is_word_char(c) {
                word.extend(c.to_lowercase());
            } else if is_apostrophe(c)
                && j + 1 < chars.len()
                && is_word_char(chars[j + 1].1)
                && !word.is_empty()
            {
                word.push('\'');
            } else {
                break;
            }
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        tokens.push(Token {
            text: word,
            start,
            end,
        });
        i = j;
    }
    tokens
}

/// Lowercased token strings only.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        include_str!("stopwords.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopword_set().contains(word)
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "inc", "ltd", "co", "corp", "vs", "etc",
    "mt", "gen", "gov", "sen", "rep", "lt", "col", "sgt", "capt", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "no", "fig", "u.s", "u.k", "u.n",
    "e.g", "i.e",
];

/// Splits a paragraph into sentences at `.`, `?` or `!` followed by
/// whitespace and an uppercase letter. A period that ends a known
/// abbreviation or a single-letter initial does not split.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut begin = 0usize;
    for (k, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        // need whitespace then an uppercase letter (optionally after quotes)
        let mut j = k + 1;
        if j >= chars.len() || !chars[j].1.is_whitespace() {
            continue;
        }
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        while j < chars.len() && matches!(chars[j].1, '"' | '\'' | '\u{201c}' | '(') {
            j += 1;
        }
        if j >= chars.len() || !chars[j].1.is_uppercase() {
            continue;
        }
        if c == '.' && ends_with_abbreviation(&text[begin..pos]) {
            continue;
        }
        let end = pos + c.len_utf8();
        let s = text[begin..end].trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
        begin = end;
    }
    let rest = text[begin..].trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

fn ends_with_abbreviation(before: &str) -> bool {
    let last = before
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"')
        .next()
        .unwrap_or("");
    let lower = last.to_lowercase();
    if lower.chars().count() == 1 && lower.chars().all(char::is_alphabetic) {
        return true;
    }
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Named-entity terms: maximal runs of capitalized tokens, lowercased and
/// joined with `_`. A sentence-initial stopword ("The") is not part of a
/// run. A run made of the sentence-initial token alone is skipped, as is a
/// run made only of stopwords.
pub fn named_entities(raw: &str, tokens: &[Token]) -> Vec<String> {
    let capitalized = |t: &Token| {
        raw[t.start..t.end]
            .chars()
            .next()
            .is_some_and(char::is_uppercase)
    };
    let mut out = Vec::new();
    let mut i = usize::from(tokens.first().is_some_and(|t| is_stopword(&t.text)));
    while i < tokens.len() {
        if !capitalized(&tokens[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < tokens.len() && capitalized(&tokens[j]) {
            j += 1;
        }
        let run = &tokens[i..j];
        let sentence_initial_single = i == 0 && run.len() == 1;
        let all_stop = run.iter().all(|t| is_stopword(&t.text));
        if !sentence_initial_single && !all_stop {
            let joined: Vec<&str> = run.iter().map(|t| t.text.as_str()).collect();
            out.push(joined.join("_"));
        }
        i = j;
    }
    out
}

/// The set of candidate vocabulary terms of one text unit: non-stopword
/// unigrams, bigrams of adjacent non-stopword tokens (space-joined) and
/// named-entity terms.
pub fn unit_terms(raw: &str, tokens: &[Token]) -> BTreeSet<String> {
    let mut terms = BTreeSet::new();
    for t in tokens {
        if !is_stopword(&t.text) {
            terms.insert(t.text.clone());
        }
    }
    for pair in tokens.windows(2) {
        if !is_stopword(&pair[0].text) && !is_stopword(&pair[1].text) {
            terms.insert(format!("{} {}", pair[0].text, pair[1].text));
        }
    }
    terms.extend(named_entities(raw, tokens));
    terms
}
