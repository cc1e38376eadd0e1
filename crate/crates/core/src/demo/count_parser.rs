//! A small arc-factored parser: relative-frequency arc scores over POS
//! pairs, direction and distance, decoded with the projective decoder.
//! Stands in for a neural parser in the demo.

use std::collections::{BTreeMap, HashMap};

use crate::ensemble::eisner;
use crate::treebank::DepTree;

const ROOT: &str = "<root>";
const SMOOTHING: f64 = 0.1;
const OUTCOMES: f64 = 200.0;

fn bucket(m: usize, h: usize) -> u8 {
    match h.abs_diff(m) {
        0 | 1 => 0,
        2 => 1,
        3 | 4 => 2,
        _ => 3,
    }
}

fn direction(m: usize, h: usize) -> i8 {
    if h == 0 {
        0
    } else if h > m {
        1
    } else {
        -1
    }
}

type ArcKey = (String, String, i8, u8);

#[derive(Clone, Debug, Default)]
pub struct CountParser {
    arcs: HashMap<ArcKey, f64>,
    modifiers: HashMap<String, f64>,
    labels: HashMap<(String, String, i8), BTreeMap<String, u64>>,
}

impl CountParser {
    /// Count every assigned edge; partial trees contribute what they have.
    pub fn train<'a>(trees: impl IntoIterator<Item = &'a DepTree>) -> Self {
        let mut p = CountParser::default();
        for tree in trees {
            for t in &tree.tokens {
                let Some(h) = t.head else { continue };
                let hpos = if h == 0 { ROOT } else { tree.tokens[h - 1].upos.as_str() };
                let dir = direction(t.index, h);
                let b = if h == 0 { 0 } else { bucket(t.index, h) };
                *p.arcs
                    .entry((hpos.to_string(), t.upos.clone(), dir, b))
                    .or_insert(0.0) += 1.0;
                *p.modifiers.entry(t.upos.clone()).or_insert(0.0) += 1.0;
                if let Some(label) = &t.deprel {
                    *p.labels
                        .entry((hpos.to_string(), t.upos.clone(), dir))
                        .or_default()
                        .entry(label.clone())
                        .or_insert(0) += 1;
                }
            }
        }
        p
    }

    fn score(&self, tree: &DepTree, h: usize, m: usize) -> f64 {
        let mpos = &tree.tokens[m - 1].upos;
        let hpos = if h == 0 { ROOT } else { tree.tokens[h - 1].upos.as_str() };
        let b = if h == 0 { 0 } else { bucket(m, h) };
        let key = (hpos.to_string(), mpos.clone(), direction(m, h), b);
        let c = self.arcs.get(&key).copied().unwrap_or(0.0);
        let total = self.modifiers.get(mpos).copied().unwrap_or(0.0);
        ((c + SMOOTHING) / (total + SMOOTHING * OUTCOMES)).ln()
    }

    fn label(&self, tree: &DepTree, h: usize, m: usize) -> String {
        if h == 0 {
            return "root".to_string();
        }
        let key = (
            tree.tokens[h - 1].upos.clone(),
            tree.tokens[m - 1].upos.clone(),
            direction(m, h),
        );
        self.labels
            .get(&key)
            .and_then(|counts| {
                counts
                    .iter()
                    .filter(|(l, _)| l.as_str() != "root")
                    .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            })
            .map_or_else(|| "dep".to_string(), |(l, _)| l.clone())
    }

    /// Heads and labels for `tree`'s tokens; other columns are kept.
    pub fn parse(&self, tree: &DepTree) -> DepTree {
        let heads = eisner(tree.len(), |h, m| self.score(tree, h, m));
        let mut out = tree.clone();
        for (i, (t, &h)) in out.tokens.iter_mut().zip(&heads).enumerate() {
            t.head = Some(h);
            t.deprel = Some(self.label(tree, h, i + 1));
        }
        out
    }
}
