use std::path::PathBuf;

use rasum::corpus::load_topic;
use rasum::pipeline::{prepare, score, select, summarize};
use rasum::rouge::{evaluate_topic, RougeOptions};
use rasum::RunConfig;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/playstation-vr")
}

#[test]
fn fixture_topic_loads() {
    let topic = load_topic(fixture()).unwrap();
    assert_eq!(topic.documents.len(), 2);
    assert_eq!(topic.news_sentence_count(), 30);
    assert_eq!(topic.comments.len(), 12);
    assert_eq!(topic.model_summaries.len(), 2);
    assert!(topic.documents[0].sentences[0].parse.is_some());
    assert!(topic.documents[0].sentences[3].parse.is_none());
}

#[test]
fn desk_run_summarizes_and_evaluates() {
    let topic = load_topic(fixture()).unwrap();
    let config = RunConfig::desk();
    let run = summarize(&topic, &config).unwrap();
    let text = &run.selection.text;
    let words = rasum::corpus::text::words(text).len();
    assert!(words > 0 && words <= 100, "{words} words: {text}");
    assert!(run.selection.audit.ok());
    let table = evaluate_topic(text, &topic, &RougeOptions::default()).unwrap();
    assert!(table.rouge_1.f > 0.0);
    eprintln!("{text}\n{table:?}");
}

#[test]
fn tight_word_limit_is_respected() {
    let topic = load_topic(fixture()).unwrap();
    let config = RunConfig {
        word_limit: 10,
        epochs: 20,
        ..RunConfig::desk()
    };
    let prepared = prepare(&topic, &config).unwrap();
    let scored = score(&prepared, &config, None).unwrap();
    let sel = select(&prepared, &config, &scored.salience).unwrap();
    assert!(rasum::corpus::text::words(&sel.text).len() <= 10, "{}", sel.text);
}
