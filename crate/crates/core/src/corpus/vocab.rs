use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{TextUnit, Topic};
use crate::error::{Error, Result};

/// Term dictionary shared by the news and comment matrices of a topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Fails on duplicate terms.
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    /// SHA-256 over the newline-joined term list, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.terms {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        // duplicates keep the first id; serialized vocabularies never have any
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            index.entry(t.clone()).or_insert(i);
        }
        Vocabulary { terms, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

/// Builds the vocabulary over all news and comment sentences of `topic`.
///
/// Keeps terms whose sentence frequency is at least `min_df`, ordered by
/// frequency (descending) and then lexicographically.
pub fn build_vocabulary(topic: &Topic, min_df: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let news = topic.news_sentences().map(|s| s.terms());
    let comments = topic.comments.iter().map(|c| c.terms());
    for terms in news.chain(comments) {
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|&(_, n)| n >= min_df).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if kept.is_empty() {
        return Err(Error::invalid(format!(
            "vocabulary is empty at min_df={min_df}"
        )));
    }
    Vocabulary::from_terms(kept.into_iter().map(|(t, _)| t).collect())
}
