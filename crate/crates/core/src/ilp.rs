//! Phrase selection as a binary quadratic program:
//!
//! ```text
//! max  Σ_i α_i S_i − Σ_{i<j} α_i α_j c_ij (S_i + S_j) R_ij
//! s.t. Σ_i α_i w_i ≤ L
//!      a sentence that contributes anything contributes ≥ 1 NP and ≥ 1 VP
//! ```
//!
//! `R` is the Jaccard similarity of phrases and `c_ij` a co-occurrence
//! indicator. Small instances are solved exactly by best-first branch and
//! bound over per-sentence choices; larger ones greedily.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::Topic;
use crate::error::{Error, Result};
use crate::phrase::{jaccard, PhraseCandidate, PhraseKind};

/// Which phrase pairs pay the redundancy penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CooccurMode {
    /// Only phrases from the same sentence.
    #[default]
    SameSentence,
    AllPairs,
}

/// Phrase positions (indices into [`IlpInstance::phrases`]) of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceGroup {
    pub doc_id: String,
    pub sentence: usize,
    pub nps: Vec<usize>,
    pub vps: Vec<usize>,
}

impl SentenceGroup {
    fn members(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.nps.iter().chain(&self.vps).copied().collect();
        m.sort_unstable();
        m
    }
}

#[derive(Debug, Clone)]
pub struct IlpInstance {
    pub phrases: Vec<PhraseCandidate>,
    /// Symmetric Jaccard similarities.
    pub similarity: Array2<f64>,
    pub cooccur: Array2<bool>,
    pub word_limit: usize,
    /// Sentences in order of first appearance.
    pub groups: Vec<SentenceGroup>,
    /// Group index of every phrase.
    pub group_of: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Heuristic,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    /// Phrase ids, ascending.
    pub selected: Vec<usize>,
    pub objective: f64,
    pub status: SolveStatus,
}

/// Post-hoc constraint check of a selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub word_count: usize,
    pub word_limit: usize,
    pub within_limit: bool,
    pub compatible: bool,
    pub unique: bool,
    pub known_ids: bool,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.within_limit && self.compatible && self.unique && self.known_ids
    }
}

pub fn build_instance(candidates: &[PhraseCandidate], word_limit: usize, mode: CooccurMode) -> Result<IlpInstance> {
    if candidates.is_empty() {
        return Err(Error::invalid("no phrase candidates"));
    }
    if word_limit == 0 {
        return Err(Error::invalid("word limit must be positive"));
    }
    let mut seen = std::collections::HashSet::new();
    if !candidates.iter().all(|c| seen.insert(c.id)) {
        return Err(Error::invalid("duplicate phrase ids"));
    }
    if candidates.iter().any(|c| !c.salience.is_finite() || c.salience < 0.0) {
        return Err(Error::invalid("phrase salience must be finite and non-negative"));
    }
    let n = candidates.len();
    let mut groups: Vec<SentenceGroup> = Vec::new();
    let mut index: HashMap<(&str, usize), usize> = HashMap::new();
    let mut group_of = Vec::with_capacity(n);
    for (i, c) in candidates.iter().enumerate() {
        let key = (c.source.doc_id.as_str(), c.source.sentence);
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(SentenceGroup {
                doc_id: c.source.doc_id.clone(),
                sentence: c.source.sentence,
                nps: Vec::new(),
                vps: Vec::new(),
            });
            groups.len() - 1
        });
        match c.kind {
            PhraseKind::Np => groups[g].nps.push(i),
            PhraseKind::Vp => groups[g].vps.push(i),
        }
        group_of.push(g);
    }
    let similarity = Array2::from_shape_fn((n, n), |(i, j)| jaccard(&candidates[i], &candidates[j]));
    let cooccur = Array2::from_shape_fn((n, n), |(i, j)| {
        i != j
            && match mode {
                CooccurMode::SameSentence => group_of[i] == group_of[j],
                CooccurMode::AllPairs => true,
            }
    });
    Ok(IlpInstance {
        phrases: candidates.to_vec(),
        similarity,
        cooccur,
        word_limit,
        groups,
        group_of,
    })
}

impl IlpInstance {
    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    fn penalty(&self, i: usize, j: usize) -> f64 {
        if self.cooccur[[i, j]] {
            (self.phrases[i].salience + self.phrases[j].salience) * self.similarity[[i, j]]
        } else {
            0.0
        }
    }

    fn positions(&self, ids: &[usize]) -> Option<Vec<usize>> {
        let by_id: HashMap<usize, usize> = self.phrases.iter().enumerate().map(|(p, c)| (c.id, p)).collect();
        let mut pos: Vec<usize> = ids.iter().map(|id| by_id.get(id).copied()).collect::<Option<_>>()?;
        pos.sort_unstable();
        Some(pos)
    }

    fn ids(&self, positions: &[usize]) -> Vec<usize> {
        let mut ids: Vec<usize> = positions.iter().map(|&p| self.phrases[p].id).collect();
        ids.sort_unstable();
        ids
    }

    /// Objective of a selection given by phrase ids; unknown ids are an error.
    pub fn objective(&self, ids: &[usize]) -> Result<f64> {
        let pos = self.positions(ids).ok_or_else(|| Error::invalid("unknown phrase id"))?;
        Ok(self.objective_at(&pos))
    }

    /// Objective over sorted positions: gains in order, then pair penalties
    /// in lexicographic pair order.
    fn objective_at(&self, pos: &[usize]) -> f64 {
        let gain: f64 = pos.iter().map(|&i| self.phrases[i].salience).sum();
        let mut penalty = 0.0;
        for (a, &i) in pos.iter().enumerate() {
            for &j in &pos[a + 1..] {
                penalty += self.penalty(i, j);
            }
        }
        gain - penalty
    }

    pub fn audit(&self, ids: &[usize]) -> Audit {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        let unique = sorted.windows(2).all(|w| w[0] != w[1]);
        let pos = self.positions(&sorted);
        let known_ids = pos.is_some();
        let pos = pos.unwrap_or_default();
        let word_count = pos.iter().map(|&p| self.phrases[p].word_count).sum();
        let mut per_group: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
        for &p in &pos {
            let e = per_group.entry(self.group_of[p]).or_default();
            match self.phrases[p].kind {
                PhraseKind::Np => e.0 = true,
                PhraseKind::Vp => e.1 = true,
            }
        }
        Audit {
            word_count,
            word_limit: self.word_limit,
            within_limit: word_count <= self.word_limit,
            compatible: per_group.values().all(|&(np, vp)| np && vp),
            unique,
            known_ids,
        }
    }

    fn solution(&self, positions: &[usize], status: SolveStatus) -> IlpSolution {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        IlpSolution {
            selected: self.ids(&pos),
            objective: self.objective_at(&pos),
            status,
        }
    }

    /// Whether any sentence can contribute an NP + VP pair within the limit.
    fn has_feasible_pair(&self) -> bool {
        self.groups.iter().any(|g| {
            let np = g.nps.iter().map(|&p| self.phrases[p].word_count).min();
            let vp = g.vps.iter().map(|&p| self.phrases[p].word_count).min();
            matches!((np, vp), (Some(a), Some(b)) if a + b <= self.word_limit)
        })
    }

    fn infeasible(&self) -> IlpSolution {
        IlpSolution {
            selected: Vec::new(),
            objective: 0.0,
            status: SolveStatus::Infeasible,
        }
    }
}

/// Compatible non-empty subsets of one sentence, plus their word counts.
fn group_options(inst: &IlpInstance, g: &SentenceGroup) -> Vec<(Vec<usize>, usize)> {
    let members = g.members();
    let k = members.len();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << k) {
        let subset: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| members[b]).collect();
        let np = subset.iter().any(|&p| inst.phrases[p].kind == PhraseKind::Np);
        let vp = subset.iter().any(|&p| inst.phrases[p].kind == PhraseKind::Vp);
        let words: usize = subset.iter().map(|&p| inst.phrases[p].word_count).sum();
        if np && vp && words <= inst.word_limit {
            out.push((subset, words));
        }
    }
    out
}

struct Node {
    bound: f64,
    seq: u64,
    next: usize,
    selected: Vec<usize>,
    value: f64,
    words: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Highest bound first, then earliest created.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Fractional-knapsack bound on what groups `next..` can still add.
fn completion_bound(inst: &IlpInstance, ratio_order: &[usize], next: usize, capacity: usize) -> f64 {
    let mut cap = capacity as f64;
    let mut total = 0.0;
    for &p in ratio_order {
        if inst.group_of[p] < next {
            continue;
        }
        let c = &inst.phrases[p];
        let w = c.word_count as f64;
        if w <= cap {
            total += c.salience;
            cap -= w;
        } else {
            total += c.salience * cap / w;
            break;
        }
    }
    total
}

/// Exact optimum by best-first branch and bound over per-sentence choices.
pub fn solve_exact(inst: &IlpInstance, cap: usize) -> Result<IlpSolution> {
    if inst.len() > cap {
        return Err(Error::invalid(format!(
            "{} phrases exceed the exact-solver cap of {cap}",
            inst.len()
        )));
    }
    if !inst.has_feasible_pair() {
        return Ok(inst.infeasible());
    }
    let options: Vec<Vec<(Vec<usize>, usize)>> = inst.groups.iter().map(|g| group_options(inst, g)).collect();
    let mut ratio_order: Vec<usize> = (0..inst.len())
        .filter(|&p| inst.phrases[p].salience > 0.0 && inst.phrases[p].word_count > 0)
        .collect();
    ratio_order.sort_by(|&a, &b| {
        let ra = inst.phrases[a].salience / inst.phrases[a].word_count as f64;
        let rb = inst.phrases[b].salience / inst.phrases[b].word_count as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });

    let mut best: Vec<usize> = Vec::new();
    let mut best_value = 0.0;
    let slack = |v: f64| 1e-9 * (1.0 + v.abs());
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: completion_bound(inst, &ratio_order, 0, inst.word_limit),
        seq,
        next: 0,
        selected: Vec::new(),
        value: 0.0,
        words: 0,
    });
    while let Some(node) = heap.pop() {
        if node.bound < best_value - slack(best_value) {
            break;
        }
        if node.next == inst.groups.len() {
            continue;
        }
        // skipping the sentence, then each compatible subset in order
        let mut children = vec![(node.selected.clone(), node.value, node.words)];
        for (subset, words) in &options[node.next] {
            if node.words + words > inst.word_limit {
                continue;
            }
            let mut value = node.value;
            for (a, &i) in subset.iter().enumerate() {
                value += inst.phrases[i].salience;
                for &j in node.selected.iter().chain(&subset[..a]) {
                    value -= inst.penalty(i, j);
                }
            }
            let mut selected = node.selected.clone();
            selected.extend(subset);
            children.push((selected, value, node.words + words));
        }
        for (selected, value, words) in children {
            if !selected.is_empty() && selected.len() != node.selected.len() {
                let mut sorted = selected.clone();
                sorted.sort_unstable();
                let exact = inst.objective_at(&sorted);
                if exact > best_value {
                    best_value = exact;
                    best = sorted;
                }
            }
            let bound = value + completion_bound(inst, &ratio_order, node.next + 1, inst.word_limit - words);
            if bound < best_value - slack(best_value) {
                continue;
            }
            seq += 1;
            heap.push(Node {
                bound,
                seq,
                next: node.next + 1,
                selected,
                value,
                words,
            });
        }
    }
    Ok(inst.solution(&best, SolveStatus::Optimal))
}

/// Repeatedly takes the best positive-gain move: one more phrase for a
/// sentence already in the summary, or an NP + VP pair opening a new one.
pub fn solve_greedy(inst: &IlpInstance) -> Result<IlpSolution> {
    if !inst.has_feasible_pair() {
        return Ok(inst.infeasible());
    }
    let n = inst.len();
    let mut chosen = vec![false; n];
    let mut active = vec![false; inst.groups.len()];
    let mut selected: Vec<usize> = Vec::new();
    let mut words = 0;
    let gain_of = |selected: &[usize], adds: &[usize]| -> f64 {
        let mut g = 0.0;
        for (a, &i) in adds.iter().enumerate() {
            g += inst.phrases[i].salience;
            for &j in selected.iter().chain(&adds[..a]) {
                g -= inst.penalty(i, j);
            }
        }
        g
    };
    loop {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut consider = |adds: Vec<usize>, gain: f64| {
            let better = match &best {
                None => true,
                Some((g, prev)) => gain > *g || (gain == *g && adds < *prev),
            };
            if better {
                best = Some((gain, adds));
            }
        };
        for (gi, g) in inst.groups.iter().enumerate() {
            if active[gi] {
                for p in g.members() {
                    if !chosen[p] && words + inst.phrases[p].word_count <= inst.word_limit {
                        consider(vec![p], gain_of(&selected, &[p]));
                    }
                }
            } else {
                for &np in &g.nps {
                    for &vp in &g.vps {
                        let w = inst.phrases[np].word_count + inst.phrases[vp].word_count;
                        if words + w <= inst.word_limit {
                            let pair = if np < vp { vec![np, vp] } else { vec![vp, np] };
                            let gain = gain_of(&selected, &pair);
                            consider(pair, gain);
                        }
                    }
                }
            }
        }
        match best {
            Some((gain, adds)) if gain > 0.0 => {
                for p in adds {
                    chosen[p] = true;
                    active[inst.group_of[p]] = true;
                    words += inst.phrases[p].word_count;
                    selected.push(p);
                }
            }
            _ => break,
        }
    }
    Ok(inst.solution(&selected, SolveStatus::Heuristic))
}

/// Exact when the instance is within `cap`, greedy otherwise.
pub fn solve(inst: &IlpInstance, cap: usize) -> Result<IlpSolution> {
    if inst.len() <= cap {
        solve_exact(inst, cap)
    } else {
        solve_greedy(inst)
    }
}

/// Selected phrases as text: one sentence per source sentence, phrases in
/// source order, sentences by decreasing best phrase salience (ties: doc
/// timestamp, doc id, sentence index), each ending with a period.
pub fn render_summary(solution: &IlpSolution, inst: &IlpInstance, topic: &Topic) -> String {
    let Some(pos) = inst.positions(&solution.selected) else {
        return String::new();
    };
    let mut by_group: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in pos {
        by_group.entry(inst.group_of[p]).or_default().push(p);
    }
    let timestamp = |doc: &str| topic.document(doc).and_then(|d| d.timestamp.clone());
    let mut sentences: Vec<(f64, Option<String>, &SentenceGroup, Vec<usize>)> = by_group
        .into_iter()
        .map(|(g, mut ps)| {
            ps.sort_by_key(|&p| (inst.phrases[p].source.start, inst.phrases[p].source.end));
            let max = ps.iter().map(|&p| inst.phrases[p].salience).fold(f64::MIN, f64::max);
            let group = &inst.groups[g];
            (max, timestamp(&group.doc_id), group, ps)
        })
        .collect();
    sentences.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| match (&a.1, &b.1) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| a.2.doc_id.cmp(&b.2.doc_id))
            .then_with(|| a.2.sentence.cmp(&b.2.sentence))
    });
    sentences
        .iter()
        .map(|(_, _, _, ps)| {
            let words: Vec<String> = ps.iter().map(|&p| inst.phrases[p].text()).collect();
            format!("{}.", words.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests;
