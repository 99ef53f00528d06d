//! Lexicon-driven NP/VP chunker used when no parse tree is available.

use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Det,
    Pronoun,
    Prep,
    Conj,
    To,
    Aux,
    Verb,
    Adj,
    Adv,
    Noun,
}

fn lexicon() -> &'static HashMap<&'static str, Tag> {
    static LEX: OnceLock<HashMap<&'static str, Tag>> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut m = HashMap::new();
        for line in include_str!("lexicon.txt").lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = match parts.next() {
                Some("D") => Tag::Det,
                Some("P") => Tag::Pronoun,
                Some("I") => Tag::Prep,
                Some("C") => Tag::Conj,
                Some("T") => Tag::To,
                Some("M") => Tag::Aux,
                Some("V") => Tag::Verb,
                Some("A") => Tag::Adj,
                Some("R") => Tag::Adv,
                _ => continue,
            };
            for w in parts {
                m.entry(w).or_insert(tag);
            }
        }
        m
    })
}

/// Tag of a lowercased token: lexicon, then suffix rules, then noun.
pub fn tag(word: &str) -> Tag {
    if let Some(&t) = lexicon().get(word) {
        return t;
    }
    let long = word.chars().count() > 4;
    if long && word.ends_with("ly") {
        Tag::Adv
    } else if long && (word.ends_with("ing") || word.ends_with("ed")) {
        Tag::Verb
    } else if long
        && ["ous", "ful", "ive", "able", "ible", "less", "ical"]
            .iter()
            .any(|s| word.ends_with(s))
    {
        Tag::Adj
    } else {
        Tag::Noun
    }
}

fn nominal(t: Tag) -> bool {
    matches!(t, Tag::Det | Tag::Adj | Tag::Noun)
}

fn verbal(t: Tag) -> bool {
    matches!(t, Tag::Verb | Tag::Aux)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkKind {
    Np,
    Vp,
}

/// End of the noun phrase starting at `i`, if one starts there.
fn np_end(tags: &[Tag], i: usize) -> Option<usize> {
    if tags.get(i) == Some(&Tag::Pronoun) {
        return Some(i + 1);
    }
    let mut j = i;
    while j < tags.len() && nominal(tags[j]) {
        j += 1;
    }
    tags[i..j].contains(&Tag::Noun).then_some(j)
}

/// Chunks a token sequence into `(kind, start, end)` spans.
///
/// A verb phrase is a verb group (verbs, auxiliaries, adverbs, "to") that
/// starts with a verb or auxiliary, followed by at most one complement: a
/// noun phrase, optionally introduced by a preposition. Noun phrases are
/// runs of determiners, adjectives and nouns containing a noun, or a lone
/// pronoun.
pub fn chunk(tokens: &[String]) -> Vec<(ChunkKind, usize, usize)> {
    let tags: Vec<Tag> = tokens.iter().map(|t| tag(t)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        if verbal(tags[i]) {
            let start = i;
            let mut j = i;
            while j < tags.len() && (verbal(tags[j]) || matches!(tags[j], Tag::Adv | Tag::To)) {
                j += 1;
            }
            // trailing adverbs/"to" without a following verb stay outside
            while j > start + 1 && matches!(tags[j - 1], Tag::Adv | Tag::To) {
                j -= 1;
            }
            let comp_start = if tags.get(j) == Some(&Tag::Prep) { j + 1 } else { j };
            if let Some(e) = np_end(&tags, comp_start) {
                j = e;
            }
            out.push((ChunkKind::Vp, start, j));
            i = j;
        } else if let Some(e) = np_end(&tags, i) {
            out.push((ChunkKind::Np, i, e));
            i = e;
        } else {
            i += 1;
        }
    }
    out
}
