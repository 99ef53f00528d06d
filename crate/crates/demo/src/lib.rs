//! In-browser operations: ROUGE between two texts, a small summarize run
//! with per-sentence salience, and re-blending comment gates for a new λ_p.
//!
//! Each export returns JSON. The plain functions are usable natively.

use ndarray::Array1;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use rasum::corpus::Topic;
use rasum::pipeline::summarize;
use rasum::rouge::{rouge_n, rouge_su4, tokens, RougeScore};
use rasum::weights::merge_weights;
use rasum::{Error, Result, RunConfig};

/// Settings for in-browser training: small enough to finish in about a
/// second.
pub fn demo_config(word_limit: usize, seed: u64, use_comments: bool) -> RunConfig {
    RunConfig {
        aspects: 3,
        hidden: 32,
        latent: 8,
        epochs: 150,
        learning_rate: 0.01,
        min_df: 1,
        word_limit,
        seed,
        no_comments: !use_comments,
        ..RunConfig::default()
    }
}

/// Paragraphs separated by blank lines.
fn blocks(text: &str) -> Vec<String> {
    text.split("\n\n")
        .map(|b| b.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|b| !b.is_empty())
        .collect()
}

/// Non-empty lines.
fn lines(text: &str) -> Vec<&str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// ROUGE-1, ROUGE-2 and ROUGE-SU4 of `candidate` against references
/// separated by blank lines.
pub fn rouge_scores(candidate: &str, references: &str, stem: bool) -> Result<Vec<RougeScore>> {
    let refs: Vec<Vec<String>> = blocks(references).iter().map(|r| tokens(r, stem)).collect();
    if refs.is_empty() {
        return Err(Error::InvalidInput("no reference text".into()));
    }
    let cand = tokens(candidate, stem);
    Ok(vec![
        rouge_n(&cand, &refs, 1, stem)?,
        rouge_n(&cand, &refs, 2, stem)?,
        rouge_su4(&cand, &refs, stem),
    ])
}

#[derive(Debug, Serialize)]
pub struct ScoredSentence {
    pub doc: String,
    pub index: usize,
    pub text: String,
    pub score: f64,
    /// Whether a phrase of this sentence made it into the summary.
    pub in_summary: bool,
}

#[derive(Debug, Serialize)]
pub struct Gate {
    pub text: String,
    pub rho: f64,
    pub rho_x: f64,
    pub rho_z: f64,
}

#[derive(Debug, Serialize)]
pub struct DemoRun {
    pub summary: String,
    pub sentences: Vec<ScoredSentence>,
    pub aspects: Vec<Vec<String>>,
    pub gates: Vec<Gate>,
    pub lambda_p: f64,
}

/// Documents separated by blank lines, one comment per line.
pub fn run_demo(news: &str, comments: &str, word_limit: usize, seed: u64, use_comments: bool) -> Result<DemoRun> {
    let docs = blocks(news);
    let docs: Vec<&str> = docs.iter().map(String::as_str).collect();
    let topic = Topic::from_texts("demo", &docs, &lines(comments))?;
    let config = demo_config(word_limit, seed, use_comments);
    let run = summarize(&topic, &config)?;
    let topic = &run.prepared.topic;
    let sal = &run.scored.salience;
    let chosen: Vec<(String, usize)> = run
        .sidecar(&config)
        .phrases
        .into_iter()
        .map(|p| (p.doc_id, p.sentence))
        .collect();
    let sentences = sal
        .scores
        .iter()
        .map(|s| ScoredSentence {
            doc: s.doc_id.clone(),
            index: s.index,
            text: topic.document(&s.doc_id).map_or(String::new(), |d| d.sentences[s.index].raw.clone()),
            score: s.score,
            in_summary: chosen.iter().any(|(d, i)| *d == s.doc_id && *i == s.index),
        })
        .collect();
    let gates = run
        .prepared
        .matrices
        .comment_keys
        .iter()
        .enumerate()
        .map(|(j, key)| Gate {
            text: topic.comments.iter().find(|c| &c.key() == key).map_or(String::new(), |c| c.raw.clone()),
            rho: sal.weights.rho[j],
            rho_x: sal.weights.rho_x[j],
            rho_z: sal.weights.rho_z[j],
        })
        .collect();
    Ok(DemoRun {
        summary: run.selection.text.clone(),
        sentences,
        aspects: sal.aspect_terms.clone(),
        gates,
        lambda_p: sal.weights.lambda_p,
    })
}

/// `λ_p ρ_z + (1 − λ_p) ρ_x` for every comment sentence.
pub fn blend_gates(rho_z: &[f64], rho_x: &[f64], lambda_p: f64) -> Result<Vec<f64>> {
    let z = Array1::from(rho_z.to_vec());
    let x = Array1::from(rho_x.to_vec());
    Ok(merge_weights(&z, &x, lambda_p)?.to_vec())
}

fn js<T: Serialize>(r: Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn rouge(candidate: &str, references: &str, stem: bool) -> Result<String, JsError> {
    js(rouge_scores(candidate, references, stem))
}

#[wasm_bindgen]
pub fn summarize_texts(
    news: &str,
    comments: &str,
    word_limit: usize,
    seed: u32,
    use_comments: bool,
) -> Result<String, JsError> {
    js(run_demo(news, comments, word_limit, u64::from(seed), use_comments))
}

#[wasm_bindgen]
pub fn gates(rho_z: &[f64], rho_x: &[f64], lambda_p: f64) -> Result<Vec<f64>, JsError> {
    blend_gates(rho_z, rho_x, lambda_p).map_err(|e| JsError::new(&e.to_string()))
}
