//! ROUGE-1, ROUGE-2 and ROUGE-SU4 with multi-reference micro-averaging.
//!
//! Counts are clipped per reference and summed over references before
//! precision and recall are formed, so a longer reference weighs more.
//! Skip-bigrams allow up to four words between the pair; SU4 also counts
//! unigrams. F is the balanced harmonic mean.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::corpus::text::words;
use crate::corpus::Topic;
use crate::error::{Error, Result};
use crate::stem::stem;

/// Largest number of words allowed between the two halves of a skip-bigram.
pub const MAX_SKIP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ROUGE-1")]
    R1,
    #[serde(rename = "ROUGE-2")]
    R2,
    #[serde(rename = "ROUGE-SU4")]
    Su4,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::R1, Metric::R2, Metric::Su4];

    pub fn name(self) -> &'static str {
        match self {
            Metric::R1 => "ROUGE-1",
            Metric::R2 => "ROUGE-2",
            Metric::Su4 => "ROUGE-SU4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub metric: Metric,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Raw counts behind a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Overlap {
    pub hits: usize,
    /// Candidate units, once per reference.
    pub candidate: usize,
    pub reference: usize,
}

impl Overlap {
    pub fn score(self, metric: Metric) -> RougeScore {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.hits, self.candidate);
        let recall = ratio(self.hits, self.reference);
        let f = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            metric,
            precision,
            recall,
            f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeOptions {
    /// Porter-stem tokens before counting.
    pub stem: bool,
}

impl Default for RougeOptions {
    fn default() -> Self {
        RougeOptions { stem: true }
    }
}

/// Tokenizes like the corpus and optionally stems.
pub fn tokens(text: &str, stem_words: bool) -> Vec<String> {
    prepare(words(text), stem_words)
}

fn prepare(tokens: Vec<String>, stem_words: bool) -> Vec<String> {
    if stem_words {
        tokens.iter().map(|t| stem(t)).collect()
    } else {
        tokens
    }
}

fn multiset<K: Eq + Hash>(items: impl IntoIterator<Item = K>) -> HashMap<K, usize> {
    let mut m = HashMap::new();
    for k in items {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

pub fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    if n == 0 {
        return HashMap::new();
    }
    multiset(tokens.windows(n))
}

/// Ordered pairs `(t_i, t_j)` with `i < j ≤ i + MAX_SKIP + 1`.
pub fn skip_bigram_counts(tokens: &[String]) -> HashMap<(&str, &str), usize> {
    multiset((0..tokens.len()).flat_map(|i| {
        let end = (i + MAX_SKIP + 2).min(tokens.len());
        (i + 1..end).map(move |j| (tokens[i].as_str(), tokens[j].as_str()))
    }))
}

fn clipped<K: Eq + Hash>(cand: &HashMap<K, usize>, reference: &HashMap<K, usize>) -> usize {
    cand.iter()
        .map(|(k, &c)| c.min(reference.get(k).copied().unwrap_or(0)))
        .sum()
}

fn total<K>(m: &HashMap<K, usize>) -> usize {
    m.values().sum()
}

pub fn ngram_overlap(candidate: &[String], references: &[Vec<String>], n: usize) -> Overlap {
    let cand = ngram_counts(candidate, n);
    let mut o = Overlap::default();
    for r in references {
        let refs = ngram_counts(r, n);
        o.hits += clipped(&cand, &refs);
        o.candidate += total(&cand);
        o.reference += total(&refs);
    }
    o
}

/// Skip-bigram plus unigram counts.
pub fn su4_overlap(candidate: &[String], references: &[Vec<String>]) -> Overlap {
    let cand = skip_bigram_counts(candidate);
    let mut o = ngram_overlap(candidate, references, 1);
    for r in references {
        let refs = skip_bigram_counts(r);
        o.hits += clipped(&cand, &refs);
        o.candidate += total(&cand);
        o.reference += total(&refs);
    }
    o
}

fn stem_all(candidate: &[String], references: &[Vec<String>], stem_words: bool) -> (Vec<String>, Vec<Vec<String>>) {
    (
        prepare(candidate.to_vec(), stem_words),
        references.iter().map(|r| prepare(r.clone(), stem_words)).collect(),
    )
}

pub fn rouge_n(candidate: &[String], references: &[Vec<String>], n: usize, stem_words: bool) -> Result<RougeScore> {
    let metric = match n {
        1 => Metric::R1,
        2 => Metric::R2,
        _ => return Err(Error::invalid(format!("ROUGE-{n} is not supported"))),
    };
    let (c, r) = stem_all(candidate, references, stem_words);
    Ok(ngram_overlap(&c, &r, n).score(metric))
}

pub fn rouge_su4(candidate: &[String], references: &[Vec<String>], stem_words: bool) -> RougeScore {
    let (c, r) = stem_all(candidate, references, stem_words);
    su4_overlap(&c, &r).score(Metric::Su4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeTable {
    pub rouge_1: RougeScore,
    pub rouge_2: RougeScore,
    pub rouge_su4: RougeScore,
}

impl RougeTable {
    pub fn scores(&self) -> [RougeScore; 3] {
        [self.rouge_1, self.rouge_2, self.rouge_su4]
    }

    /// Per-metric mean of precision, recall and F.
    pub fn mean(tables: &[RougeTable]) -> Result<RougeTable> {
        if tables.is_empty() {
            return Err(Error::invalid("no scores to average"));
        }
        let n = tables.len() as f64;
        let avg = |pick: fn(&RougeTable) -> RougeScore| {
            let s: Vec<RougeScore> = tables.iter().map(pick).collect();
            RougeScore {
                metric: s[0].metric,
                precision: s.iter().map(|x| x.precision).sum::<f64>() / n,
                recall: s.iter().map(|x| x.recall).sum::<f64>() / n,
                f: s.iter().map(|x| x.f).sum::<f64>() / n,
            }
        };
        Ok(RougeTable {
            rouge_1: avg(|t| t.rouge_1),
            rouge_2: avg(|t| t.rouge_2),
            rouge_su4: avg(|t| t.rouge_su4),
        })
    }
}

/// Scores `summary` against every reference of `topic` after cutting it to
/// the topic's word limit.
pub fn evaluate_topic(summary: &str, topic: &Topic, options: &RougeOptions) -> Result<RougeTable> {
    if topic.model_summaries.is_empty() {
        return Err(Error::invalid(format!("topic {} has no reference summaries", topic.id)));
    }
    let mut cand = words(summary);
    cand.truncate(topic.summary_word_limit);
    let refs = &topic.model_summaries;
    Ok(RougeTable {
        rouge_1: rouge_n(&cand, refs, 1, options.stem)?,
        rouge_2: rouge_n(&cand, refs, 2, options.stem)?,
        rouge_su4: rouge_su4(&cand, refs, options.stem),
    })
}
