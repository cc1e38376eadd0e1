//! Weighted voting over three parses and first-order projective decoding.

use std::collections::BTreeMap;
use std::ops::Add;

use crate::direction::{Direction, DirectionStats};
use crate::error::{Error, Result};
use crate::par;
use crate::treebank::DepTree;

/// Label used when the decoder picks an edge no system proposed.
pub const FALLBACK_LABEL: &str = "dep";

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub european: bool,
    /// Dominant directions of the target language.
    pub target: DirectionStats,
    /// Vote weight of systems 1..3.
    pub coefficients: [f64; 3],
    pub z_agree: f64,
    pub z_disagree: f64,
    pub z_none: f64,
}

impl EnsembleConfig {
    /// The baseline (system 1) counts double for European targets, the two
    /// reordered systems count double otherwise.
    pub fn new(european: bool, target: DirectionStats) -> Self {
        let coefficients = if european { [2.0, 1.0, 1.0] } else { [1.0, 2.0, 2.0] };
        EnsembleConfig {
            european,
            target,
            coefficients,
            z_agree: 3.0,
            z_disagree: 1.0,
            z_none: 2.0,
        }
    }

    /// Weight from the target's dominant direction of `label`.
    pub fn z(&self, modifier: usize, head: usize, label: &str) -> f64 {
        if head == 0 {
            return self.z_none;
        }
        match self.target.lambda(label) {
            None => self.z_none,
            Some(d) if d == Direction::of_edge(modifier, head) => self.z_agree,
            Some(_) => self.z_disagree,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Vote {
    weight: f64,
    /// Lowest-numbered system proposing the label (0-based).
    first_system: usize,
}

/// Weights of every proposed labeled edge of one sentence.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EdgeWeightGrid {
    pub n: usize,
    votes: BTreeMap<(usize, usize), BTreeMap<String, Vote>>,
}

impl EdgeWeightGrid {
    pub fn new(n: usize) -> Self {
        EdgeWeightGrid { n, votes: BTreeMap::new() }
    }

    /// Add `weight` to `(modifier, head, label)` on behalf of `system`.
    pub fn add(&mut self, modifier: usize, head: usize, label: &str, weight: f64, system: usize) {
        let vote = self
            .votes
            .entry((modifier, head))
            .or_default()
            .entry(label.to_string())
            .or_insert(Vote { weight: 0.0, first_system: system });
        vote.weight += weight;
        vote.first_system = vote.first_system.min(system);
    }

    pub fn weight(&self, modifier: usize, head: usize, label: &str) -> f64 {
        self.votes
            .get(&(modifier, head))
            .and_then(|labels| labels.get(label))
            .map_or(0.0, |v| v.weight)
    }

    /// Highest-weight label of an edge: ties go to the lower system, then
    /// the lexicographically smaller label.
    pub fn best(&self, modifier: usize, head: usize) -> Option<(&str, f64)> {
        let labels = self.votes.get(&(modifier, head))?;
        let mut best: Option<(&str, &Vote)> = None;
        for (label, vote) in labels {
            let better = match best {
                None => true,
                Some((_, b)) => {
                    vote.weight > b.weight
                        || (vote.weight == b.weight && vote.first_system < b.first_system)
                }
            };
            if better {
                best = Some((label, vote));
            }
        }
        best.map(|(l, v)| (l, v.weight))
    }

    /// Best-label weight of an edge, 0 when unproposed.
    pub fn edge_weight(&self, modifier: usize, head: usize) -> f64 {
        self.best(modifier, head).map_or(0.0, |(_, w)| w)
    }

    pub fn is_proposed(&self, modifier: usize, head: usize) -> bool {
        self.votes.contains_key(&(modifier, head))
    }

    /// Proposed `(modifier, head, label, weight)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &str, f64)> {
        self.votes.iter().flat_map(|(&(m, h), labels)| {
            labels.iter().map(move |(l, v)| (m, h, l.as_str(), v.weight))
        })
    }
}

fn check_outputs(outputs: &[DepTree]) -> Result<()> {
    if outputs.len() != 3 {
        return Err(Error::SizeMismatch(format!(
            "ensembling needs exactly 3 parses, got {}",
            outputs.len()
        )));
    }
    let first = &outputs[0];
    for (j, other) in outputs.iter().enumerate().skip(1) {
        if other.len() != first.len() || other.forms() != first.forms() {
            return Err(Error::SizeMismatch(format!(
                "sentence {}: parse {} has different tokens from parse 1",
                first.sentence_id,
                j + 1
            )));
        }
    }
    for tree in outputs {
        tree.require_full()?;
    }
    Ok(())
}

/// Vote weights of all labeled edges in the three parses (baseline, rule
/// reordering, classifier reordering).
pub fn weight_edges(outputs: &[DepTree], config: &EnsembleConfig) -> Result<EdgeWeightGrid> {
    check_outputs(outputs)?;
    let mut grid = EdgeWeightGrid::new(outputs[0].len());
    for (j, tree) in outputs.iter().enumerate() {
        for t in &tree.tokens {
            let h = t.head.expect("full tree");
            let label = t.deprel.as_deref().unwrap_or(FALLBACK_LABEL);
            let z = config.z(t.index, h, label);
            grid.add(t.index, h, label, z * config.coefficients[j], j);
        }
    }
    Ok(grid)
}

/// Arc scores the decoder can add and compare.
pub trait Score: Copy + PartialOrd + Add<Output = Self> {
    fn zero() -> Self;
}

impl Score for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Score for i64 {
    fn zero() -> Self {
        0
    }
}

/// Vote weight first; among equal totals prefer short unproposed
/// attachments, then unproposed heads to the left of their modifier.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TieBroken(pub f64, pub i64, pub i64);

impl Add for TieBroken {
    type Output = TieBroken;
    fn add(self, o: TieBroken) -> TieBroken {
        TieBroken(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

impl Score for TieBroken {
    fn zero() -> Self {
        TieBroken(0.0, 0, 0)
    }
}

/// Best single-rooted projective tree over tokens 1..=n for arc scores
/// `score(head, modifier)` (head 0 is the root). Returns heads indexed by
/// position - 1.
pub fn eisner<S: Score>(n: usize, score: impl Fn(usize, usize) -> S) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // [s][t] over 1..=n; index 0 unused. dir 0: head at t (left-pointing),
    // dir 1: head at s.
    let size = n + 1;
    let idx = |s: usize, t: usize| s * size + t;
    let mut complete = vec![[S::zero(); 2]; size * size];
    let mut incomplete = vec![[S::zero(); 2]; size * size];
    let mut c_split = vec![[0usize; 2]; size * size];
    let mut i_split = vec![[0usize; 2]; size * size];

    for len in 1..n {
        for s in 1..=n - len {
            let t = s + len;
            let mut best: Option<(S, usize)> = None;
            for r in s..t {
                let v = complete[idx(s, r)][1] + complete[idx(r + 1, t)][0];
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, r));
                }
            }
            let (inner, r) = best.expect("non-empty span");
            incomplete[idx(s, t)][0] = inner + score(t, s);
            incomplete[idx(s, t)][1] = inner + score(s, t);
            i_split[idx(s, t)] = [r, r];

            let mut left: Option<(S, usize)> = None;
            for r in s..t {
                let v = complete[idx(s, r)][0] + incomplete[idx(r, t)][0];
                if left.is_none_or(|(b, _)| v > b) {
                    left = Some((v, r));
                }
            }
            let mut right: Option<(S, usize)> = None;
            for r in s + 1..=t {
                let v = incomplete[idx(s, r)][1] + complete[idx(r, t)][1];
                if right.is_none_or(|(b, _)| v > b) {
                    right = Some((v, r));
                }
            }
            let (lv, lr) = left.expect("non-empty span");
            let (rv, rr) = right.expect("non-empty span");
            complete[idx(s, t)] = [lv, rv];
            c_split[idx(s, t)] = [lr, rr];
        }
    }

    let mut best: Option<(S, usize)> = None;
    for r in 1..=n {
        let v = complete[idx(1, r)][0] + complete[idx(r, n)][1] + score(0, r);
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, r));
        }
    }
    let root = best.expect("n >= 1").1;

    let mut heads = vec![0usize; n];
    heads[root - 1] = 0;
    let mut stack = vec![(1, root, 0u8, true), (root, n, 1u8, true)];
    while let Some((s, t, dir, is_complete)) = stack.pop() {
        if s == t {
            continue;
        }
        let d = dir as usize;
        if is_complete {
            let r = c_split[idx(s, t)][d];
            if d == 0 {
                stack.push((s, r, 0, true));
                stack.push((r, t, 0, false));
            } else {
                stack.push((s, r, 1, false));
                stack.push((r, t, 1, true));
            }
        } else {
            if d == 0 {
                heads[s - 1] = t;
            } else {
                heads[t - 1] = s;
            }
            let r = i_split[idx(s, t)][d];
            stack.push((s, r, 1, true));
            stack.push((r + 1, t, 0, true));
        }
    }
    heads
}

/// Decoded heads and labels with the tree's total vote weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
    pub total: f64,
}

/// Maximum-weight projective tree over the grid.
pub fn eisner_decode(grid: &EdgeWeightGrid) -> Decoded {
    let heads = eisner(grid.n, |h, m| {
        if grid.is_proposed(m, h) {
            TieBroken(grid.edge_weight(m, h), 0, 0)
        } else {
            let dist = h.abs_diff(m) as i64;
            TieBroken(0.0, -dist, i64::from(h != 0 && h < m))
        }
    });
    let mut total = 0.0;
    let labels = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| match grid.best(i + 1, h) {
            Some((l, w)) => {
                total += w;
                l.to_string()
            }
            None => if h == 0 { "root" } else { FALLBACK_LABEL }.to_string(),
        })
        .collect();
    Decoded { heads, labels, total }
}

/// Combine three parses of one sentence. Token attributes and comments
/// come from the first parse.
pub fn ensemble_combine(outputs: &[DepTree], config: &EnsembleConfig) -> Result<DepTree> {
    let grid = weight_edges(outputs, config)?;
    let decoded = eisner_decode(&grid);
    let mut tree = outputs[0].clone();
    for (t, (h, l)) in tree.tokens.iter_mut().zip(decoded.heads.into_iter().zip(decoded.labels)) {
        t.head = Some(h);
        t.deprel = Some(l);
    }
    Ok(tree)
}

/// Sentence-by-sentence combination of three parsed corpora.
pub fn ensemble_corpus(
    base: &[DepTree],
    rule: &[DepTree],
    classifier: &[DepTree],
    config: &EnsembleConfig,
) -> Result<Vec<DepTree>> {
    if base.len() != rule.len() || base.len() != classifier.len() {
        return Err(Error::SizeMismatch(format!(
            "parsed corpora have {}, {} and {} sentences",
            base.len(),
            rule.len(),
            classifier.len()
        )));
    }
    let triples: Vec<[&DepTree; 3]> = (0..base.len())
        .map(|i| [&base[i], &rule[i], &classifier[i]])
        .collect();
    par::map(&triples, |t| {
        ensemble_combine(&[t[0].clone(), t[1].clone(), t[2].clone()], config)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::DirectionCounts;
    use crate::treebank::Token;

    fn tree(edges: &[(usize, &str)]) -> DepTree {
        DepTree::new(
            "s",
            edges
                .iter()
                .enumerate()
                .map(|(i, &(h, r))| Token::new(i + 1, format!("w{}", i + 1), "X").with_head(h, r))
                .collect(),
        )
    }

    fn stats(entries: &[(&str, u64, u64)]) -> DirectionStats {
        let mut s = DirectionStats::default();
        for &(label, right, left) in entries {
            s.add_counts(label, DirectionCounts { head_right: right, head_left: left });
        }
        s
    }

    /// All single-rooted projective head vectors of length n.
    fn projective_trees(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut heads = vec![0usize; n];
        loop {
            let t = DepTree::new(
                "b",
                heads
                    .iter()
                    .enumerate()
                    .map(|(i, &h)| Token::new(i + 1, "x", "X").with_head(h, "dep"))
                    .collect(),
            );
            let roots = heads.iter().filter(|&&h| h == 0).count();
            if roots == 1
                && heads.iter().enumerate().all(|(i, &h)| h != i + 1)
                && !t.has_cycle()
                && t.is_projective()
            {
                out.push(heads.clone());
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                heads[k] += 1;
                if heads[k] <= n {
                    break;
                }
                heads[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn european_single_system_agreeing() {
        // obj with head before modifier dominant in the target
        let config = EnsembleConfig::new(true, stats(&[("obj", 0, 10)]));
        let a = tree(&[(0, "root"), (1, "obj")]);
        let b = tree(&[(0, "root"), (1, "nmod")]);
        let grid = weight_edges(&[a, b.clone(), b], &config).unwrap();
        assert_eq!(grid.weight(2, 1, "obj"), 6.0);
    }

    #[test]
    fn non_european_two_systems_neutral() {
        let config = EnsembleConfig::new(false, stats(&[]));
        let a = tree(&[(0, "root"), (1, "conj")]);
        let b = tree(&[(0, "root"), (1, "obj")]);
        let grid = weight_edges(&[a, b.clone(), b], &config).unwrap();
        assert_eq!(grid.weight(2, 1, "obj"), 8.0);
        assert_eq!(grid.weight(2, 1, "conj"), 2.0);
        // root: z = 2 for all three systems
        assert_eq!(grid.weight(1, 0, "root"), 2.0 * 5.0);
    }

    #[test]
    fn european_unanimous_opposing() {
        // amod dominant head-after in the target; here the head precedes
        let config = EnsembleConfig::new(true, stats(&[("amod", 10, 0)]));
        let a = tree(&[(0, "root"), (1, "amod")]);
        let grid = weight_edges(&[a.clone(), a.clone(), a], &config).unwrap();
        assert_eq!(grid.weight(2, 1, "amod"), 4.0);
    }

    #[test]
    fn rejects_mismatched_tokens() {
        let config = EnsembleConfig::new(true, stats(&[]));
        let a = tree(&[(0, "root"), (1, "obj")]);
        let b = tree(&[(0, "root")]);
        assert!(weight_edges(&[a.clone(), a.clone(), b], &config).is_err());
        assert!(weight_edges(&[a.clone(), a], &config).is_err());
    }

    #[test]
    fn single_token() {
        let grid = EdgeWeightGrid::new(1);
        let d = eisner_decode(&grid);
        assert_eq!(d.heads, vec![0]);
        assert_eq!(d.labels, vec!["root"]);
    }

    #[test]
    fn chain_is_recovered() {
        // 1 <- 2 -> 3
        let mut grid = EdgeWeightGrid::new(3);
        grid.add(2, 0, "root", 5.0, 0);
        grid.add(1, 2, "nsubj", 5.0, 0);
        grid.add(3, 2, "obj", 5.0, 0);
        grid.add(3, 1, "obj", 4.0, 1);
        grid.add(1, 0, "root", 4.0, 1);
        let d = eisner_decode(&grid);
        assert_eq!(d.heads, vec![2, 0, 2]);
        assert_eq!(d.total, 15.0);
    }

    #[test]
    fn unanimous_input_is_reproduced() {
        let config = EnsembleConfig::new(false, stats(&[("obj", 0, 10)]));
        let t = tree(&[(2, "nsubj"), (0, "root"), (4, "det"), (2, "obj"), (2, "punct")]);
        let out = ensemble_combine(&[t.clone(), t.clone(), t.clone()], &config).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn two_reordered_systems_outvote_baseline_outside_europe() {
        let config = EnsembleConfig::new(false, stats(&[]));
        let base = tree(&[(0, "root"), (1, "obj"), (1, "obj")]);
        let other = tree(&[(0, "root"), (1, "obj"), (2, "obj")]);
        let out = ensemble_combine(&[base, other.clone(), other.clone()], &config).unwrap();
        assert_eq!(out.heads(), other.heads());
    }

    #[test]
    fn agreeing_direction_lets_baseline_win_in_europe() {
        // target prefers obj heads after the modifier
        let config = EnsembleConfig::new(true, stats(&[("obj", 10, 0)]));
        // token 2 -> 3 (head after: agrees, 3 * 2 = 6) vs 2 -> 1 (opposes, 1 * (1 + 1) = 2)
        let base = tree(&[(3, "obj"), (3, "obj"), (0, "root")]);
        let other = tree(&[(3, "obj"), (1, "obj"), (0, "root")]);
        let grid = weight_edges(&[base.clone(), other.clone(), other.clone()], &config).unwrap();
        assert_eq!(grid.weight(2, 3, "obj"), 6.0);
        assert_eq!(grid.weight(2, 1, "obj"), 2.0);
        let out = ensemble_combine(&[base.clone(), other.clone(), other], &config).unwrap();
        assert_eq!(out.heads(), base.heads());
    }

    #[test]
    fn label_ties_prefer_lower_system_then_label() {
        let mut grid = EdgeWeightGrid::new(2);
        grid.add(2, 1, "obj", 2.0, 1);
        grid.add(2, 1, "nmod", 2.0, 0);
        assert_eq!(grid.best(2, 1), Some(("nmod", 2.0)));
        let mut grid = EdgeWeightGrid::new(2);
        grid.add(2, 1, "obj", 2.0, 0);
        grid.add(2, 1, "iobj", 2.0, 0);
        assert_eq!(grid.best(2, 1), Some(("iobj", 2.0)));
    }

    #[test]
    fn decoder_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let trees: Vec<Vec<Vec<usize>>> = (0..=5).map(projective_trees).collect();
        assert_eq!(trees[3].len(), 7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let w: Vec<Vec<i64>> = (0..=n)
                .map(|_| (0..=n).map(|_| rng.gen_range(0..10)).collect())
                .collect();
            let score = |h: usize, m: usize| w[h][m];
            let heads = eisner(n, score);
            let total: i64 = heads.iter().enumerate().map(|(i, &h)| score(h, i + 1)).sum();
            let best = trees[n]
                .iter()
                .map(|t| t.iter().enumerate().map(|(i, &h)| score(h, i + 1)).sum::<i64>())
                .max()
                .unwrap();
            assert_eq!(total, best);
            assert!(trees[n].contains(&heads));
        }
    }

    #[test]
    fn unproposed_ties_prefer_short_arcs() {
        let grid = EdgeWeightGrid::new(4);
        let d = eisner_decode(&grid);
        // chain rooted at 1, every head immediately to the left
        assert_eq!(d.heads, vec![0, 1, 2, 3]);
        assert_eq!(d.labels[1], FALLBACK_LABEL);
    }

    #[test]
    fn corpus_length_mismatch() {
        let config = EnsembleConfig::new(true, stats(&[]));
        let t = tree(&[(0, "root")]);
        assert!(ensemble_corpus(&[t.clone()], &[t.clone()], &[], &config).is_err());
        let out = ensemble_corpus(&[t.clone()], &[t.clone()], &[t.clone()], &config).unwrap();
        assert_eq!(out, vec![t]);
    }
}
