use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{NewsDocument, Topic};
use crate::phrase::PhraseSource;

fn phrase(id: usize, doc: &str, sentence: usize, np: bool, text: &str, start: usize, salience: f64) -> PhraseCandidate {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let n = tokens.len();
    PhraseCandidate {
        id,
        kind: if np { PhraseKind::Np } else { PhraseKind::Vp },
        surface: tokens.clone(),
        tokens,
        source: PhraseSource {
            doc_id: doc.to_string(),
            sentence,
            start,
            end: start + n,
        },
        salience,
        word_count: n,
    }
}

fn table(rows: &[(usize, bool, &str, f64)]) -> Vec<PhraseCandidate> {
    rows.iter()
        .enumerate()
        .map(|(i, &(s, np, text, sal))| phrase(i, "d", s, np, text, i * 10, sal))
        .collect()
}

/// Exhaustive search over all 2^n selections with its own constraint check
/// and objective.
fn brute_force(cands: &[PhraseCandidate], limit: usize, all_pairs: bool) -> Option<f64> {
    let n = cands.len();
    let jac = |a: &PhraseCandidate, b: &PhraseCandidate| {
        let sa: std::collections::BTreeSet<&String> =
            a.tokens.iter().filter(|t| !crate::corpus::text::is_stopword(t)).collect();
        let sb: std::collections::BTreeSet<&String> =
            b.tokens.iter().filter(|t| !crate::corpus::text::is_stopword(t)).collect();
        let u = sa.union(&sb).count();
        if u == 0 { 0.0 } else { sa.intersection(&sb).count() as f64 / u as f64 }
    };
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let sel: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let words: usize = sel.iter().map(|&i| cands[i].word_count).sum();
        if words > limit {
            continue;
        }
        let ok = sel.iter().all(|&i| {
            let same = |k: PhraseKind| {
                sel.iter().any(|&j| cands[j].kind == k && cands[j].source.sentence == cands[i].source.sentence)
            };
            same(PhraseKind::Np) && same(PhraseKind::Vp)
        });
        if !ok || sel.is_empty() {
            continue;
        }
        let gain: f64 = sel.iter().map(|&i| cands[i].salience).sum();
        let mut pen = 0.0;
        for a in 0..sel.len() {
            for b in a + 1..sel.len() {
                let (i, j) = (sel[a], sel[b]);
                if all_pairs || cands[i].source.sentence == cands[j].source.sentence {
                    pen += (cands[i].salience + cands[j].salience) * jac(&cands[i], &cands[j]);
                }
            }
        }
        let v = gain - pen;
        if best.is_none_or(|b| v > b) {
            best = Some(v);
        }
    }
    best
}

const WORDS: [&str; 8] = ["sony", "headset", "price", "launch", "oculus", "the", "games", "virtual"];

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<PhraseCandidate>, usize, CooccurMode) {
    let n = rng.random_range(1..=12);
    let sentences = rng.random_range(1..=4);
    let cands = (0..n)
        .map(|i| {
            let len = rng.random_range(1..=4);
            let text: Vec<&str> = (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            let sal = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..5.0) };
            phrase(i, "d", rng.random_range(0..sentences), rng.random_bool(0.5), &text.join(" "), i, sal)
        })
        .collect();
    let mode = if rng.random_bool(0.3) { CooccurMode::AllPairs } else { CooccurMode::SameSentence };
    (cands, rng.random_range(2..=20), mode)
}

#[test]
fn cooccurrence_and_similarity_tables() {
    let c = vec![
        phrase(0, "d", 0, true, "the sony headset", 0, 1.0),
        phrase(1, "d", 0, false, "costs a lot", 3, 1.0),
        phrase(2, "d", 1, true, "sony", 0, 1.0),
        phrase(3, "d", 1, false, "delays the headset launch", 1, 1.0),
    ];
    let inst = build_instance(&c, 100, CooccurMode::SameSentence).unwrap();
    assert!(inst.cooccur[[0, 1]] && inst.cooccur[[2, 3]]);
    assert!(!inst.cooccur[[0, 2]] && !inst.cooccur[[1, 3]] && !inst.cooccur[[0, 0]]);
    // content sets: {sony, headset}, {costs, lot}, {sony}, {delays, headset, launch}
    let expect = [
        [1.0, 0.0, 0.5, 0.25],
        [0.0, 1.0, 0.0, 0.0],
        [0.5, 0.0, 1.0, 0.0],
        [0.25, 0.0, 0.0, 1.0],
    ];
    for (i, row) in expect.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            assert_eq!(inst.similarity[[i, j]], v, "R[{i}][{j}]");
        }
    }
    let all = build_instance(&c, 100, CooccurMode::AllPairs).unwrap();
    assert!(all.cooccur[[0, 2]]);
    assert_eq!(inst.groups[1].nps, [2]);
    assert_eq!(inst.groups[1].vps, [3]);
    assert!(build_instance(&[], 100, CooccurMode::SameSentence).is_err());
}

#[test]
fn smallest_compatible_selection() {
    let c = vec![phrase(0, "d", 0, true, "sony", 0, 2.0), phrase(1, "d", 0, false, "wins", 1, 1.0)];
    let inst = build_instance(&c, 10, CooccurMode::SameSentence).unwrap();
    let s = solve_exact(&inst, 25).unwrap();
    assert_eq!(s.selected, [0, 1]);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.objective, 3.0);

    // an NP alone can never satisfy compatibility
    let lone = build_instance(&c[..1], 10, CooccurMode::SameSentence).unwrap();
    assert_eq!(solve_exact(&lone, 25).unwrap().status, SolveStatus::Infeasible);
    // limit below the only NP + VP pair
    let tight = build_instance(&c, 1, CooccurMode::SameSentence).unwrap();
    let s = solve_exact(&tight, 25).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(s.selected.is_empty());
    assert_eq!(solve_greedy(&tight).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn identical_phrases_selected_once() {
    let c = vec![
        phrase(0, "d", 0, true, "the headset", 0, 2.0),
        phrase(1, "d", 0, false, "ships today", 2, 1.0),
        phrase(2, "d", 0, true, "the headset", 4, 2.0),
    ];
    let inst = build_instance(&c, 20, CooccurMode::SameSentence).unwrap();
    let s = solve_exact(&inst, 25).unwrap();
    assert_eq!(s.selected, [0, 1]);
    assert_eq!(s.objective, 3.0);
}

#[test]
fn exact_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let (cands, limit, mode) = random_instance(&mut rng);
        let inst = build_instance(&cands, limit, mode).unwrap();
        let sol = solve_exact(&inst, 25).unwrap();
        let audit = inst.audit(&sol.selected);
        assert!(audit.ok(), "case {case}: {audit:?}");
        assert!((inst.objective(&sol.selected).unwrap() - sol.objective).abs() <= 1e-9);
        match brute_force(&cands, limit, mode == CooccurMode::AllPairs) {
            None => assert_eq!(sol.status, SolveStatus::Infeasible, "case {case}"),
            Some(best) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
                assert_eq!(sol.objective, best.max(0.0), "case {case}");
            }
        }
        let greedy = solve_greedy(&inst).unwrap();
        assert!(inst.audit(&greedy.selected).ok());
        assert!(greedy.objective <= sol.objective + 1e-12);
    }
}

#[test]
fn greedy_stops_without_positive_gain() {
    let c = vec![phrase(0, "d", 0, true, "sony", 0, 0.0), phrase(1, "d", 0, false, "wins", 1, 0.0)];
    let inst = build_instance(&c, 10, CooccurMode::SameSentence).unwrap();
    let s = solve_greedy(&inst).unwrap();
    assert!(s.selected.is_empty());
    assert_eq!(s.status, SolveStatus::Heuristic);
}

/// Thirty phrases in ten NP-VP-NP sentences, word limit 40. The optimum
/// was found by enumerating every compatible selection.
const THIRTY: [(usize, bool, &str, f64); 30] = [
    (0, true, "price reality gamers", 0.335),
    (0, false, "virtual", 1.832),
    (0, true, "sony headset", 1.414),
    (1, true, "launch", 0.454),
    (1, false, "sony market battery headset", 2.853),
    (1, true, "battery", 1.84),
    (2, true, "launch", 0.33),
    (2, false, "games reality", 0.604),
    (2, true, "battery", 1.064),
    (3, true, "headset battery", 1.799),
    (3, false, "virtual headset", 1.734),
    (3, true, "battery", 0.367),
    (4, true, "oculus gamers", 1.689),
    (4, false, "oculus battery rival", 1.469),
    (4, true, "launch studio price", 2.157),
    (5, true, "headset battery", 1.041),
    (5, false, "rival virtual console oculus", 1.006),
    (5, true, "headset", 1.633),
    (6, true, "studio virtual", 0.626),
    (6, false, "reality sony gamers headset", 2.341),
    (6, true, "virtual console virtual", 1.864),
    (7, true, "headset market headset games", 1.527),
    (7, false, "sony", 2.247),
    (7, true, "gamers battery gamers", 2.501),
    (8, true, "console reality rival", 2.072),
    (8, false, "oculus", 1.195),
    (8, true, "oculus", 0.365),
    (9, true, "price console launch", 1.314),
    (9, false, "headset price oculus reality", 1.738),
    (9, true, "market reality", 2.619),
];
const THIRTY_OPTIMUM: f64 = 29.09785;

#[test]
fn thirty_phrase_fixture() {
    let inst = build_instance(&table(&THIRTY), 40, CooccurMode::SameSentence).unwrap();
    let exact = solve_exact(&inst, 30).unwrap();
    assert!((exact.objective - THIRTY_OPTIMUM).abs() < 1e-9, "{}", exact.objective);
    assert_eq!(exact.selected, [1, 2, 4, 5, 10, 11, 12, 13, 14, 19, 20, 22, 23, 24, 25, 28, 29]);
    let greedy = solve_greedy(&inst).unwrap();
    assert!(inst.audit(&greedy.selected).ok());
    assert!(greedy.objective >= 0.9 * THIRTY_OPTIMUM, "{}", greedy.objective);
    assert!(solve_exact(&inst, 25).is_err());
    assert_eq!(solve(&inst, 25).unwrap().status, SolveStatus::Heuristic);
}

#[test]
fn render_orders_phrases_and_sentences() {
    let topic = Topic {
        id: "t".into(),
        category: None,
        documents: vec![
            NewsDocument {
                id: "a".into(),
                source: String::new(),
                timestamp: Some("2016-03-02".into()),
                sentences: Vec::new(),
            },
            NewsDocument {
                id: "b".into(),
                source: String::new(),
                timestamp: Some("2016-03-01".into()),
                sentences: Vec::new(),
            },
        ],
        comments: Vec::new(),
        model_summaries: Vec::new(),
        summary_word_limit: 100,
    };
    let c = vec![
        phrase(0, "a", 0, false, "ships in October", 3, 1.0),
        phrase(1, "a", 0, true, "The PlayStation VR", 0, 2.0),
        phrase(2, "b", 4, true, "Sony", 0, 2.0),
        phrase(3, "b", 4, false, "cut prices", 1, 0.5),
        phrase(4, "a", 2, true, "Gamers", 0, 3.0),
        phrase(5, "a", 2, false, "cheered", 1, 0.1),
    ];
    let inst = build_instance(&c, 100, CooccurMode::SameSentence).unwrap();
    let all = IlpSolution {
        selected: (0..6).collect(),
        objective: 0.0,
        status: SolveStatus::Optimal,
    };
    // max saliences 3.0 (a#2), then 2.0 tie: b is earlier than a
    assert_eq!(
        render_summary(&all, &inst, &topic),
        "Gamers cheered. Sony cut prices. The PlayStation VR ships in October."
    );
    let one = IlpSolution {
        selected: vec![1, 0],
        ..all.clone()
    };
    assert_eq!(render_summary(&one, &inst, &topic), "The PlayStation VR ships in October.");
    let none = IlpSolution {
        selected: Vec::new(),
        ..all
    };
    assert_eq!(render_summary(&none, &inst, &topic), "");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_limit_never_hurts(seed in any::<u64>(), extra in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cands, limit, mode) = random_instance(&mut rng);
        let lo = solve_exact(&build_instance(&cands, limit, mode).unwrap(), 25).unwrap();
        let hi = solve_exact(&build_instance(&cands, limit + extra, mode).unwrap(), 25).unwrap();
        prop_assert!(hi.objective >= lo.objective);
        prop_assert!(hi.status != SolveStatus::Infeasible || lo.status == SolveStatus::Infeasible);
    }

    #[test]
    fn audit_rejects_broken_selections(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cands, limit, mode) = random_instance(&mut rng);
        let inst = build_instance(&cands, limit, mode).unwrap();
        let sol = solve_exact(&inst, 25).unwrap();
        let mut dup = sol.selected.clone();
        if let Some(&first) = dup.first() {
            dup.push(first);
            prop_assert!(!inst.audit(&dup).unique);
        }
        prop_assert!(!inst.audit(&[usize::MAX]).known_ids);
    }
}
