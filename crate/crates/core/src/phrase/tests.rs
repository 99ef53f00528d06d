use proptest::prelude::*;

use super::*;
use crate::salience::{SalienceResult, SentenceScore};
use crate::weights::CommentWeights;

fn sentence(doc: &str, index: usize, raw: &str, parse: Option<&str>) -> Sentence {
    let mut s = Sentence::new(doc, index, raw).unwrap();
    s.parse = parse.map(str::to_string);
    s
}

fn summary(c: &PhraseCandidate) -> (PhraseKind, String) {
    (c.kind, c.tokens.join(" "))
}

#[test]
fn direct_tree_read() {
    let s = sentence(
        "d",
        0,
        "the headset works",
        Some("(S (NP (DT the) (NN headset)) (VP (VBZ works)))"),
    );
    let c = extract_phrases(&s, false).unwrap();
    assert_eq!(
        c.iter().map(summary).collect::<Vec<_>>(),
        [
            (PhraseKind::Np, "the headset".to_string()),
            (PhraseKind::Vp, "works".to_string())
        ]
    );
    assert_eq!(c[1].source.start, 2);
    assert_eq!(c[1].word_count, 1);
}

#[test]
fn five_sentence_fixture() {
    // Each tree hand-read for clause-level NP/VP children.
    let fixtures = [
        (
            "Sony showed off a prototype.",
            "(ROOT (S (NP (NNP Sony)) (VP (VBD showed) (PRT (RP off)) (NP (DT a) (NN prototype))) (. .)))",
            vec![(PhraseKind::Np, "sony"), (PhraseKind::Vp, "showed off a prototype")],
        ),
        (
            "The device, called Morpheus, tracks heads.",
            "(ROOT (S (NP (NP (DT The) (NN device)) (, ,) (VP (VBN called) (S (NP (NNP Morpheus)))) (, ,)) (VP (VBZ tracks) (NP (NNS heads))) (. .)))",
            vec![
                (PhraseKind::Np, "the device called morpheus"),
                (PhraseKind::Vp, "tracks heads"),
            ],
        ),
        (
            "Gamers cheered and critics scoffed.",
            "(ROOT (S (S (NP (NNS Gamers)) (VP (VBD cheered))) (CC and) (S (NP (NNS critics)) (VP (VBD scoffed))) (. .)))",
            vec![
                (PhraseKind::Np, "gamers"),
                (PhraseKind::Vp, "cheered"),
                (PhraseKind::Np, "critics"),
                (PhraseKind::Vp, "scoffed"),
            ],
        ),
        (
            "On Tuesday, Yoshida revealed it.",
            "(ROOT (S (PP (IN On) (NP (NNP Tuesday))) (, ,) (NP (NNP Yoshida)) (VP (VBD revealed) (NP (PRP it))) (. .)))",
            vec![(PhraseKind::Np, "yoshida"), (PhraseKind::Vp, "revealed it")],
        ),
        (
            "Will it ship soon?",
            "(ROOT (SQ (MD Will) (NP (PRP it)) (VP (VB ship) (ADVP (RB soon))) (. ?)))",
            vec![(PhraseKind::Np, "it"), (PhraseKind::Vp, "ship soon")],
        ),
    ];
    let sentences: Vec<Sentence> = fixtures
        .iter()
        .enumerate()
        .map(|(i, (raw, tree, _))| sentence("d", i, raw, Some(tree)))
        .collect();
    let all = extract_all(&sentences, false).unwrap();
    let expected: Vec<(PhraseKind, String)> = fixtures
        .iter()
        .flat_map(|(_, _, e)| e.iter().map(|(k, s)| (*k, s.to_string())))
        .collect();
    assert_eq!(all.iter().map(summary).collect::<Vec<_>>(), expected);
    assert!(all.iter().enumerate().all(|(i, c)| c.id == i));
}

#[test]
fn fallback_rules() {
    let s = sentence("d", 0, "a virtual reality headset for the console", None);
    let c = extract_phrases(&s, true).unwrap();
    assert!(c.iter().all(|p| p.kind == PhraseKind::Np));
    assert!(matches!(extract_phrases(&s, false), Err(Error::InvalidInput(_))));

    // tree that does not match the tokens falls back to the chunker
    let s = sentence("d", 0, "the headset works", Some("(S (NP (DT a) (NN cat)))"));
    assert_eq!(extract_phrases(&s, true).unwrap().len(), 2);
    assert!(extract_phrases(&s, false).is_err());

    let s = sentence("d", 0, "the headset works", Some("(S (NP (DT the)"));
    assert!(matches!(extract_phrases(&s, true), Err(Error::Tree { .. })));
}

#[test]
fn span_fidelity_and_surface() {
    let s = sentence("d", 0, "Mr. Yoshida said Sony's VR-headset launches soon.", None);
    for c in extract_phrases(&s, true).unwrap() {
        let rendered = c.text();
        let back: Vec<String> = crate::corpus::text::words(&rendered);
        assert_eq!(back, c.tokens);
        assert_eq!(&s.tokens[c.source.start..c.source.end], c.tokens.as_slice());
    }
}

fn phrase(tokens: &[&str]) -> PhraseCandidate {
    let raw = tokens.join(" ");
    let s = Sentence::new("d", 0, &raw).unwrap();
    PhraseCandidate::from_span(&s, PhraseKind::Np, 0, s.tokens.len())
}

#[test]
fn jaccard_examples() {
    let a = phrase(&["virtual", "reality", "headset"]);
    let b = phrase(&["reality", "headset", "maker"]);
    assert_eq!(jaccard(&a, &b), 0.5);
    assert_eq!(jaccard(&a, &a), 1.0);
    assert_eq!(jaccard(&a, &phrase(&["bitcoin"])), 0.0);
    // stopwords ignored; both empty -> 0
    assert_eq!(jaccard(&phrase(&["the", "it"]), &phrase(&["the"])), 0.0);
    assert_eq!(jaccard(&phrase(&["the", "headset"]), &phrase(&["headset"])), 1.0);
}

fn salience(scores: &[(&str, usize, f64)], terms: &[&[&str]]) -> SalienceResult {
    SalienceResult {
        scores: scores
            .iter()
            .map(|&(d, i, s)| SentenceScore {
                doc_id: d.to_string(),
                index: i,
                score: s,
            })
            .collect(),
        weights: CommentWeights::term_only(ndarray::Array1::zeros(0), 0.2),
        aspect_terms: terms
            .iter()
            .map(|t| t.iter().map(|s| s.to_string()).collect())
            .collect(),
    }
}

#[test]
fn scoring_examples() {
    let s0 = sentence("d", 0, "the headset works", None);
    let s1 = sentence("d", 1, "Sony sells the headset", None);
    let mut c = extract_all([&s0, &s1], true).unwrap();
    let sal = salience(&[("d", 0, 0.0), ("d", 1, 2.0)], &[&["headset", "sony"], &["game"]]);
    score_phrases(&mut c, &sal, 10).unwrap();
    // s0: "the headset" (1 hit) and "works" (0): both times 0
    // s1: "sony" (1 hit) -> 4, "sells the headset" (1 hit) -> 4
    let got: Vec<f64> = c.iter().map(|p| p.salience).collect();
    assert_eq!(got, [0.0, 0.0, 4.0, 4.0]);

    // k = 1 keeps only "headset" and "game"
    score_phrases(&mut c, &sal, 1).unwrap();
    assert_eq!(c.iter().map(|p| p.salience).collect::<Vec<_>>(), [0.0, 0.0, 2.0, 4.0]);

    // same sentence, no aspect terms -> equal scores
    let sal = salience(&[("d", 0, 1.5), ("d", 1, 2.0)], &[]);
    score_phrases(&mut c, &sal, 10).unwrap();
    assert_eq!(c[0].salience, c[1].salience);

    let missing = salience(&[("d", 0, 1.0)], &[]);
    assert!(score_phrases(&mut c, &missing, 10).is_err());
}

proptest! {
    #[test]
    fn jaccard_symmetric_bounded(a in proptest::collection::vec("[a-e]{1,3}", 1..5),
                                 b in proptest::collection::vec("[a-e]{1,3}", 1..5)) {
        let pa = phrase(&a.iter().map(String::as_str).collect::<Vec<_>>());
        let pb = phrase(&b.iter().map(String::as_str).collect::<Vec<_>>());
        let j = jaccard(&pa, &pb);
        prop_assert_eq!(j, jaccard(&pb, &pa));
        prop_assert!((0.0..=1.0).contains(&j));
        if !pa.content_tokens().is_empty() {
            prop_assert_eq!(jaccard(&pa, &pa), 1.0);
        }
    }

    #[test]
    fn chunker_is_deterministic(words in proptest::collection::vec("[a-z]{1,8}", 1..12)) {
        let s = Sentence::new("d", 0, &words.join(" ")).unwrap();
        let a = extract_phrases(&s, true).unwrap();
        let b = extract_phrases(&s, true).unwrap();
        prop_assert_eq!(&a, &b);
        for c in &a {
            prop_assert!(c.source.end <= s.tokens.len() && c.source.start < c.source.end);
        }
    }
}
