use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rasum::checkpoint::Checkpoint;
use rasum::corpus::{load_topic, Topic};
use rasum::ilp::CooccurMode;
use rasum::pipeline::{prepare, salience_report, score, select, weights_report, Prepared, Scored, SummaryRun};
use rasum::rouge::{evaluate_topic, RougeOptions, RougeTable};
use rasum::{Error, Result, RunConfig};

/// Reader-aware multi-document summarization.
///
/// Exit codes: 0 ok, 1 invalid input, 2 numeric failure, 3 infeasible
/// phrase selection.
#[derive(Parser)]
#[command(name = "rasum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a topic and print counts and format diagnostics.
    Ingest {
        topic: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train on a topic and write a summary.
    Summarize {
        topic: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Summary file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON file describing the selected phrases.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        save_checkpoint: Option<PathBuf>,
        /// Skip training and score with a saved model.
        #[arg(long)]
        load_checkpoint: Option<PathBuf>,
    },
    /// Score a summary against a topic's reference summaries.
    Evaluate {
        /// Candidate summary (plain text).
        candidate: Option<PathBuf>,
        topic: Option<PathBuf>,
        /// File of `candidate topic-dir` lines; prints per-topic and mean scores.
        #[arg(long, conflicts_with_all = ["candidate", "topic"])]
        batch: Option<PathBuf>,
        #[arg(long)]
        no_stem: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print per-sentence salience and aspect terms as JSON.
    DumpSalience {
        topic: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        load_checkpoint: Option<PathBuf>,
    },
    /// Print the comment gates as JSON.
    DumpWeights {
        topic: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        load_checkpoint: Option<PathBuf>,
    },
}

/// Run configuration: a `key = value` file, then `--desk`, then flags.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Desk-scale sizes (hidden 64, latent 16).
    #[arg(long)]
    desk: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    aspects: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long)]
    lambda_p: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    min_df: Option<usize>,
    #[arg(long)]
    word_limit: Option<usize>,
    #[arg(long)]
    exact_cap: Option<usize>,
    /// same-sentence or all-pairs
    #[arg(long)]
    cooccur: Option<String>,
    /// Drop comments before anything else (comment-free ablation).
    #[arg(long)]
    no_comments: bool,
    #[arg(long)]
    literal_alignment: bool,
    #[arg(long)]
    cosine_weights: bool,
    #[arg(long)]
    no_chunker_fallback: bool,
    #[arg(long)]
    no_stem: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if self.desk {
            let d = RunConfig::desk();
            c.hidden = d.hidden;
            c.latent = d.latent;
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field {
                    c.$field = v;
                })*
            };
        }
        set!(seed, epochs, aspects, hidden, latent, lambda_p, learning_rate, min_df, word_limit, exact_cap);
        if let Some(mode) = &self.cooccur {
            c.cooccur = match mode.as_str() {
                "same-sentence" => CooccurMode::SameSentence,
                "all-pairs" => CooccurMode::AllPairs,
                other => return Err(Error::InvalidInput(format!("unknown cooccur mode {other:?}"))),
            };
        }
        c.no_comments |= self.no_comments;
        c.literal_alignment |= self.literal_alignment;
        c.cosine_weights |= self.cosine_weights;
        c.chunker_fallback &= !self.no_chunker_fallback;
        c.stem &= !self.no_stem;
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rasum: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { topic, run } => ingest(&topic, &run.config()?),
        Command::Summarize {
            topic,
            run,
            output,
            sidecar,
            save_checkpoint,
            load_checkpoint,
        } => {
            let config = run.config()?;
            let topic = load_topic(&topic)?;
            let (prepared, scored) = train_or_load(&topic, &config, load_checkpoint.as_deref())?;
            if let Some(path) = save_checkpoint {
                scored.checkpoint(&prepared, &config).save(path)?;
            }
            let selection = select(&prepared, &config, &scored.salience)?;
            let summary = SummaryRun {
                prepared,
                scored,
                selection,
            };
            if let Some(path) = sidecar {
                fs::write(path, serde_json::to_vec_pretty(&summary.sidecar(&config))?)?;
            }
            write_out(output.as_deref(), &format!("{}\n", summary.selection.text))
        }
        Command::Evaluate {
            candidate,
            topic,
            batch,
            no_stem,
            json,
        } => {
            let options = RougeOptions { stem: !no_stem };
            let pairs = match (batch, candidate, topic) {
                (Some(list), _, _) => read_batch(&list)?,
                (None, Some(c), Some(t)) => vec![(c, t)],
                _ => return Err(Error::InvalidInput("evaluate needs CANDIDATE TOPIC or --batch FILE".into())),
            };
            evaluate(&pairs, &options, json)
        }
        Command::DumpSalience {
            topic,
            run,
            load_checkpoint,
        } => {
            let config = run.config()?;
            let (prepared, scored) = train_or_load(&load_topic(&topic)?, &config, load_checkpoint.as_deref())?;
            print_json(&salience_report(&prepared, &scored.salience))
        }
        Command::DumpWeights {
            topic,
            run,
            load_checkpoint,
        } => {
            let config = run.config()?;
            let (prepared, scored) = train_or_load(&load_topic(&topic)?, &config, load_checkpoint.as_deref())?;
            print_json(&weights_report(&prepared, &scored.salience))
        }
    }
}

fn train_or_load(topic: &Topic, config: &RunConfig, checkpoint: Option<&Path>) -> Result<(Prepared, Scored)> {
    let prepared = prepare(topic, config)?;
    let checkpoint = checkpoint
        .map(|p| Checkpoint::load(p, &prepared.matrices.vocab))
        .transpose()?;
    let scored = score(&prepared, config, checkpoint)?;
    Ok((prepared, scored))
}

fn ingest(path: &Path, config: &RunConfig) -> Result<()> {
    let topic = load_topic(path)?;
    let prepared = prepare(&topic, config)?;
    let m = &prepared.matrices;
    let news = topic.news_sentence_count();
    let parsed = topic.news_sentences().filter(|s| s.parse.is_some()).count();
    let mut out = String::new();
    let category = topic.category.map_or("none".to_string(), |c| c.number().to_string());
    out += &format!("topic {} (category {category}, word limit {})\n", topic.id, topic.summary_word_limit);
    out += &format!(
        "{} docs, {news} news sentences, {} comment sentences\n",
        topic.documents.len(),
        topic.comments.len()
    );
    out += &format!("vocabulary: {} terms (min_df {}), hash {}\n", m.vocab.len(), config.min_df, m.vocab.hash());
    out += &format!(
        "rows: {} of {news} news sentences, {} of {} comment sentences\n",
        m.news_ids.len(),
        m.comment_keys.len(),
        prepared.topic.comments.len()
    );
    out += &format!("parse trees: {parsed} of {news} news sentences\n");
    out += &format!("reference summaries: {}\n", topic.model_summaries.len());
    write_out(None, &out)
}

/// Reads `candidate topic-dir` lines; paths are relative to the list file.
fn read_batch(list: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let base = list.parent().unwrap_or(Path::new("."));
    let mut pairs = Vec::new();
    for (n, line) in fs::read_to_string(list)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(c), Some(t), None) => pairs.push((base.join(c), base.join(t))),
            _ => {
                return Err(Error::Parse {
                    file: list.to_path_buf(),
                    line: n as u32 + 1,
                    message: "expected `candidate topic-dir`".into(),
                })
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no entries", list.display())));
    }
    Ok(pairs)
}

fn evaluate(pairs: &[(PathBuf, PathBuf)], options: &RougeOptions, json: bool) -> Result<()> {
    let mut rows = Vec::new();
    for (candidate, topic_dir) in pairs {
        let topic = load_topic(topic_dir)?;
        let text = fs::read_to_string(candidate)?;
        rows.push((topic.id.clone(), evaluate_topic(&text, &topic, options)?));
    }
    let tables: Vec<RougeTable> = rows.iter().map(|r| r.1).collect();
    let mean = RougeTable::mean(&tables)?;
    if json {
        let topics: Vec<_> = rows
            .iter()
            .map(|(id, t)| serde_json::json!({ "topic": id, "scores": t }))
            .collect();
        return print_json(&serde_json::json!({ "topics": topics, "mean": mean }));
    }
    let mut out = String::new();
    let mut table = |label: &str, t: &RougeTable| {
        for s in t.scores() {
            out += &format!(
                "{label}\t{}\tP {:.5}\tR {:.5}\tF {:.5}\n",
                s.metric.name(),
                s.precision,
                s.recall,
                s.f
            );
        }
    };
    if rows.len() == 1 {
        table(&rows[0].0, &rows[0].1);
    } else {
        for (id, t) in &rows {
            table(id, t);
        }
        table("mean", &mean);
    }
    write_out(None, &out)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_out(None, &s)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
