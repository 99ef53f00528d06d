//! End-to-end runs: vectorize, train, extract and score phrases, select,
//! render. Also the JSON reports behind the CLI's dump commands.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::corpus::{Topic, TopicMatrices};
use crate::error::{Error, Result};
use crate::ilp::{build_instance, render_summary, solve, Audit, IlpSolution, SolveStatus};
use crate::phrase::{extract_all, score_phrases, PhraseCandidate, PhraseKind};
use crate::salience::{finalize, train, EpochStats, LatentModel, SalienceResult, TrainOptions};
use crate::vae::AdamState;

/// A topic ready for training. With `no_comments` the comments are removed
/// before anything else, vocabulary included.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub topic: Topic,
    pub matrices: TopicMatrices,
}

pub fn prepare(topic: &Topic, config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let topic = if config.no_comments {
        topic.without_comments()
    } else {
        topic.clone()
    };
    let matrices = TopicMatrices::build(&topic, config.min_df)?;
    Ok(Prepared { topic, matrices })
}

/// Trained (or loaded) model with its final scores.
#[derive(Debug, Clone)]
pub struct Scored {
    pub model: LatentModel,
    pub adam: AdamState,
    pub salience: SalienceResult,
    pub s_x: Array2<f64>,
    /// Empty when the model came from a checkpoint.
    pub history: Vec<EpochStats>,
}

impl Scored {
    pub fn checkpoint(&self, prepared: &Prepared, config: &RunConfig) -> Checkpoint {
        Checkpoint::new(&prepared.matrices.vocab, config, &self.model, &self.adam)
    }
}

/// Trains from scratch, or rescores a checkpoint when one is given.
pub fn score(prepared: &Prepared, config: &RunConfig, checkpoint: Option<Checkpoint>) -> Result<Scored> {
    match checkpoint {
        None => {
            let t = train(&prepared.matrices, config)?;
            Ok(Scored {
                model: t.model,
                adam: t.adam,
                salience: t.result,
                s_x: t.s_x,
                history: t.history,
            })
        }
        Some(ck) => {
            let mut model = ck.model;
            let (salience, s_x) = finalize(&prepared.matrices, config, &mut model, &TrainOptions::default())?;
            Ok(Scored {
                model,
                adam: ck.adam,
                salience,
                s_x,
                history: Vec::new(),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub candidates: Vec<PhraseCandidate>,
    pub solution: IlpSolution,
    pub audit: Audit,
    pub text: String,
}

/// Phrase extraction, scoring, selection and rendering.
pub fn select(prepared: &Prepared, config: &RunConfig, salience: &SalienceResult) -> Result<Selection> {
    let sentences = prepared
        .topic
        .news_sentences()
        .filter(|s| salience.score_of(&s.doc_id, s.index).is_some());
    let mut candidates = extract_all(sentences, config.chunker_fallback)?;
    if candidates.is_empty() {
        return Err(Error::Infeasible("no phrase candidates in the topic".into()));
    }
    score_phrases(&mut candidates, salience, config.top_k)?;
    let instance = build_instance(&candidates, config.word_limit, config.cooccur)?;
    let solution = solve(&instance, config.exact_cap)?;
    if solution.status == SolveStatus::Infeasible {
        return Err(Error::Infeasible(format!(
            "no sentence fits an NP and a VP within {} words",
            config.word_limit
        )));
    }
    let audit = instance.audit(&solution.selected);
    if !audit.ok() {
        return Err(Error::Infeasible(format!("selection violates constraints: {audit:?}")));
    }
    let text = render_summary(&solution, &instance, &prepared.topic);
    Ok(Selection {
        candidates,
        solution,
        audit,
        text,
    })
}

#[derive(Debug, Clone)]
pub struct SummaryRun {
    pub prepared: Prepared,
    pub scored: Scored,
    pub selection: Selection,
}

/// The whole pipeline with a freshly trained model.
pub fn summarize(topic: &Topic, config: &RunConfig) -> Result<SummaryRun> {
    let prepared = prepare(topic, config)?;
    let scored = score(&prepared, config, None)?;
    let selection = select(&prepared, config, &scored.salience)?;
    Ok(SummaryRun {
        prepared,
        scored,
        selection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPhrase {
    pub id: usize,
    pub kind: PhraseKind,
    pub text: String,
    pub doc_id: String,
    pub sentence: usize,
    pub salience: f64,
}

/// JSON written next to a summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub topic: String,
    pub selected: Vec<usize>,
    pub phrases: Vec<SelectedPhrase>,
    pub objective: f64,
    pub status: SolveStatus,
    pub audit: Audit,
    pub candidates: usize,
    pub seed: u64,
}

impl SummaryRun {
    pub fn sidecar(&self, config: &RunConfig) -> Sidecar {
        let sel = &self.selection;
        let phrases = sel
            .solution
            .selected
            .iter()
            .filter_map(|id| sel.candidates.iter().find(|c| c.id == *id))
            .map(|c| SelectedPhrase {
                id: c.id,
                kind: c.kind,
                text: c.text(),
                doc_id: c.source.doc_id.clone(),
                sentence: c.source.sentence,
                salience: c.salience,
            })
            .collect();
        Sidecar {
            topic: self.prepared.topic.id.clone(),
            selected: sel.solution.selected.clone(),
            phrases,
            objective: sel.solution.objective,
            status: sel.solution.status,
            audit: sel.audit.clone(),
            candidates: sel.candidates.len(),
            seed: config.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentGate {
    pub comment: String,
    pub rho: f64,
    pub rho_x: f64,
    pub rho_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSummary {
    pub count: usize,
    pub lambda_p: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub topic: String,
    pub summary: GateSummary,
    pub comments: Vec<CommentGate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceReport {
    pub topic: String,
    pub sentences: Vec<crate::salience::SentenceScore>,
    pub aspects: Vec<Vec<String>>,
    pub gates: GateSummary,
}

pub fn weights_report(prepared: &Prepared, salience: &SalienceResult) -> WeightsReport {
    let w = &salience.weights;
    let comments = prepared
        .matrices
        .comment_keys
        .iter()
        .enumerate()
        .map(|(j, key)| CommentGate {
            comment: key.clone(),
            rho: w.rho[j],
            rho_x: w.rho_x[j],
            rho_z: w.rho_z[j],
        })
        .collect();
    WeightsReport {
        topic: prepared.topic.id.clone(),
        summary: gate_summary(salience),
        comments,
    }
}

pub fn salience_report(prepared: &Prepared, salience: &SalienceResult) -> SalienceReport {
    SalienceReport {
        topic: prepared.topic.id.clone(),
        sentences: salience.scores.clone(),
        aspects: salience.aspect_terms.clone(),
        gates: gate_summary(salience),
    }
}

fn gate_summary(salience: &SalienceResult) -> GateSummary {
    let rho = &salience.weights.rho;
    let n = rho.len();
    GateSummary {
        count: n,
        lambda_p: salience.weights.lambda_p,
        min: rho.iter().cloned().reduce(f64::min),
        max: rho.iter().cloned().reduce(f64::max),
        mean: (n > 0).then(|| rho.sum() / n as f64),
    }
}
