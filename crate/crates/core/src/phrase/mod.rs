//! Noun- and verb-phrase candidates for compressive summaries.

pub mod chunker;
pub mod tree;

use std::collections::{BTreeSet, HashSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::text::{is_stopword, tokenize};
use crate::corpus::{Sentence, TextUnit};
use crate::error::{Error, Result};
use crate::salience::SalienceResult;
use chunker::ChunkKind;
use tree::{parse_tree, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhraseKind {
    #[serde(rename = "NP")]
    Np,
    #[serde(rename = "VP")]
    Vp,
}

/// Where a phrase came from: token range `[start, end)` of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseSource {
    pub doc_id: String,
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseCandidate {
    pub id: usize,
    pub kind: PhraseKind,
    pub tokens: Vec<String>,
    /// Tokens as written in the source text, for rendering.
    pub surface: Vec<String>,
    pub source: PhraseSource,
    pub salience: f64,
    pub word_count: usize,
}

impl PhraseCandidate {
    fn from_span(sentence: &Sentence, kind: PhraseKind, start: usize, end: usize) -> Self {
        PhraseCandidate {
            id: 0,
            kind,
            tokens: sentence.tokens[start..end].to_vec(),
            surface: (start..end).map(|i| sentence.surface(i).to_string()).collect(),
            source: PhraseSource {
                doc_id: sentence.doc_id.clone(),
                sentence: sentence.index,
                start,
                end,
            },
            salience: 0.0,
            word_count: end - start,
        }
    }

    /// Surface tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.surface.join(" ")
    }

    /// Lowercased non-stopword tokens.
    pub fn content_tokens(&self) -> BTreeSet<&str> {
        self.tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !is_stopword(t))
            .collect()
    }
}

const CLAUSE_LABELS: &[&str] = &["S", "SINV", "SQ", "SBARQ"];

/// Token ranges of the NP/VP children of clause nodes, with leaf offsets
/// converted to token offsets through `leaf_tokens` (token count per leaf).
fn clause_phrases(
    node: &Tree,
    parent_is_clause: bool,
    leaf_pos: &mut usize,
    leaf_tokens: &[usize],
    out: &mut Vec<(PhraseKind, usize, usize)>,
) {
    if node.is_trace() {
        return;
    }
    let label = node.base_label();
    let kind = match label {
        "NP" => Some(PhraseKind::Np),
        "VP" => Some(PhraseKind::Vp),
        _ => None,
    };
    if let (true, Some(kind)) = (parent_is_clause, kind) {
        let first = *leaf_pos;
        let n = node.leaf_count();
        *leaf_pos += n;
        let start: usize = leaf_tokens[..first].iter().sum();
        let end: usize = leaf_tokens[..first + n].iter().sum();
        if end > start {
            out.push((kind, start, end));
        }
        return;
    }
    if node.word.is_some() {
        *leaf_pos += 1;
        return;
    }
    let is_clause = CLAUSE_LABELS.contains(&label);
    for c in &node.children {
        clause_phrases(c, is_clause, leaf_pos, leaf_tokens, out);
    }
}

fn phrases_from_tree(sentence: &Sentence, tree: &Tree) -> Option<Vec<(PhraseKind, usize, usize)>> {
    let leaves = tree.leaves();
    let mut leaf_tokens = Vec::with_capacity(leaves.len());
    let mut flat = Vec::new();
    for leaf in &leaves {
        let toks = tokenize(leaf);
        leaf_tokens.push(toks.len());
        flat.extend(toks.into_iter().map(|t| t.text));
    }
    if flat != sentence.tokens {
        return None;
    }
    let mut out = Vec::new();
    clause_phrases(tree, false, &mut 0, &leaf_tokens, &mut out);
    Some(out)
}

/// NP and VP candidates of one sentence.
///
/// With a parse tree, the NP and VP children of clause nodes (S, SINV, SQ,
/// SBARQ) are taken whole, without their nested sub-phrases. Without one,
/// or when the tree's leaves do not tokenize to the sentence's tokens, the
/// lexicon chunker is used if `fallback` is set.
pub fn extract_phrases(sentence: &Sentence, fallback: bool) -> Result<Vec<PhraseCandidate>> {
    let spans = match &sentence.parse {
        Some(src) => {
            let tree = parse_tree(src)?;
            match phrases_from_tree(sentence, &tree) {
                Some(spans) => spans,
                None if fallback => {
                    warn!(
                        "{}#{}: parse leaves differ from sentence tokens; using chunker",
                        sentence.doc_id, sentence.index
                    );
                    chunk_spans(sentence)
                }
                None => {
                    return Err(Error::invalid(format!(
                        "{}#{}: parse leaves differ from sentence tokens",
                        sentence.doc_id, sentence.index
                    )))
                }
            }
        }
        None if fallback => chunk_spans(sentence),
        None => {
            return Err(Error::invalid(format!(
                "{}#{}: no parse tree and chunker disabled",
                sentence.doc_id, sentence.index
            )))
        }
    };
    Ok(spans
        .into_iter()
        .map(|(k, s, e)| PhraseCandidate::from_span(sentence, k, s, e))
        .collect())
}

fn chunk_spans(sentence: &Sentence) -> Vec<(PhraseKind, usize, usize)> {
    chunker::chunk(&sentence.tokens)
        .into_iter()
        .map(|(k, s, e)| {
            let kind = match k {
                ChunkKind::Np => PhraseKind::Np,
                ChunkKind::Vp => PhraseKind::Vp,
            };
            (kind, s, e)
        })
        .collect()
}

/// Extracts candidates from every sentence and numbers them 0.. in order.
pub fn extract_all<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    fallback: bool,
) -> Result<Vec<PhraseCandidate>> {
    let mut out = Vec::new();
    for s in sentences {
        out.extend(extract_phrases(s, fallback)?);
    }
    for (i, p) in out.iter_mut().enumerate() {
        p.id = i;
    }
    Ok(out)
}

/// Sets `salience` on every candidate: the score of its sentence times one
/// plus the number of its distinct tokens found among the top-`k` terms of
/// any aspect.
pub fn score_phrases(
    candidates: &mut [PhraseCandidate],
    salience: &SalienceResult,
    k: usize,
) -> Result<()> {
    let aspect_terms: HashSet<&str> = salience
        .aspect_terms
        .iter()
        .flat_map(|terms| terms.iter().take(k).map(String::as_str))
        .collect();
    for c in candidates.iter_mut() {
        let score = salience
            .score_of(&c.source.doc_id, c.source.sentence)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "no salience score for sentence {}#{}",
                    c.source.doc_id, c.source.sentence
                ))
            })?;
        let distinct: BTreeSet<&str> = c.tokens.iter().map(String::as_str).collect();
        let hits = distinct.iter().filter(|t| aspect_terms.contains(*t)).count();
        c.salience = score * (hits as f64 + 1.0);
    }
    Ok(())
}

/// Jaccard index of the content-token sets; 0 when both are empty.
pub fn jaccard(a: &PhraseCandidate, b: &PhraseCandidate) -> f64 {
    let sa = a.content_tokens();
    let sb = b.content_tokens();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

#[cfg(test)]
mod tests;
