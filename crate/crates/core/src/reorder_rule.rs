//! Rule-based reordering from dominant dependency directions, and the
//! re-linearization shared with the classifier.

use crate::direction::{Direction, DirectionStats};
use crate::error::Result;
use crate::par;
use crate::treebank::{DepTree, Token};

/// Requested direction of each token's incoming edge after reordering,
/// indexed by position - 1. The root has no side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sides(pub Vec<Option<Direction>>);

impl Sides {
    /// Sides that reproduce the current directions.
    pub fn original(tree: &DepTree) -> Sides {
        Sides(
            tree.tokens
                .iter()
                .map(|t| match t.head {
                    Some(h) if h != 0 => Some(Direction::of_edge(t.index, h)),
                    _ => None,
                })
                .collect(),
        )
    }
}

/// An edge changes direction when the two languages disagree on the label's
/// dominant direction and the target's dominant direction is the opposite
/// of the current one.
pub fn should_flip(label: &str, d: Direction, src: &DirectionStats, tgt: &DirectionStats) -> bool {
    let target = tgt.lambda(label);
    src.lambda(label) != target && target == Some(d.flip())
}

pub fn plan_sides(tree: &DepTree, src: &DirectionStats, tgt: &DirectionStats) -> Result<Sides> {
    tree.require_full()?;
    Ok(Sides(
        tree.tokens
            .iter()
            .map(|t| {
                let h = t.head.expect("full tree");
                if h == 0 {
                    return None;
                }
                let d = Direction::of_edge(t.index, h);
                let label = t.deprel.as_deref().unwrap_or("_");
                Some(if should_flip(label, d, src, tgt) { d.flip() } else { d })
            })
            .collect(),
    ))
}

/// Rebuild the word order: every head is preceded by the subtrees of its
/// modifiers placed on its left and followed by those placed on its right,
/// each group in original order. Indices and heads are rewritten.
pub fn linearize(tree: &DepTree, sides: &Sides) -> DepTree {
    let n = tree.len();
    if n == 0 {
        return tree.clone();
    }
    let children = tree.children();
    let mut order = Vec::with_capacity(n);
    for &root in &children[0] {
        emit(root, &children, sides, &mut order);
    }

    let mut new_index = vec![0usize; n + 1];
    for (pos, &old) in order.iter().enumerate() {
        new_index[old] = pos + 1;
    }

    let tokens: Vec<Token> = order
        .iter()
        .enumerate()
        .map(|(pos, &old)| {
            let mut token = tree.tokens[old - 1].clone();
            token.index = pos + 1;
            token.head = token.head.map(|h| new_index[h]);
            token
        })
        .collect();

    let mut out = DepTree {
        tokens,
        ..tree.clone()
    };
    out.refresh_text_comment();
    out
}

fn emit(node: usize, children: &[Vec<usize>], sides: &Sides, order: &mut Vec<usize>) {
    let placed_left = |c: &usize| sides.0[c - 1] == Some(Direction::HeadRight);
    for &c in children[node].iter().filter(|c| placed_left(c)) {
        emit(c, children, sides, order);
    }
    order.push(node);
    for &c in children[node].iter().filter(|c| !placed_left(c)) {
        emit(c, children, sides, order);
    }
}

/// A sentence that a corpus-level transform passed through unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub sentence_id: String,
    pub reason: String,
}

/// Plan and re-linearize one tree.
pub fn reorder_tree(
    tree: &DepTree,
    src: &DirectionStats,
    tgt: &DirectionStats,
) -> Result<DepTree> {
    let sides = plan_sides(tree, src, tgt)?;
    Ok(linearize(tree, &sides))
}

/// Reorder a treebank. Partial trees are returned unchanged and reported.
pub fn reorder_corpus(
    trees: &[DepTree],
    src: &DirectionStats,
    tgt: &DirectionStats,
) -> (Vec<DepTree>, Vec<Skipped>) {
    let results = par::map(trees, |t| reorder_tree(t, src, tgt));
    let mut out = Vec::with_capacity(trees.len());
    let mut skipped = Vec::new();
    for (tree, result) in trees.iter().zip(results) {
        match result {
            Ok(reordered) => out.push(reordered),
            Err(e) => {
                skipped.push(Skipped {
                    sentence_id: tree.sentence_id.clone(),
                    reason: e.to_string(),
                });
                out.push(tree.clone());
            }
        }
    }
    (out, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::DirectionCounts;

    pub(crate) fn surgery() -> DepTree {
        let rows = [
            ("I", 2, "nsubj"),
            ("had", 0, "root"),
            ("a", 5, "det"),
            ("routine", 5, "amod"),
            ("surgery", 2, "obj"),
            ("for", 9, "case"),
            ("an", 9, "det"),
            ("ingrown", 9, "amod"),
            ("toenail", 5, "nmod"),
            (".", 2, "punct"),
        ];
        DepTree::new(
            "fig1",
            rows.iter()
                .enumerate()
                .map(|(i, (f, h, r))| Token::new(i + 1, *f, "X").with_head(*h, *r))
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

    fn english() -> DirectionStats {
        stats(&[("obj", 0, 10), ("amod", 10, 0), ("nsubj", 10, 0), ("nmod", 0, 10)])
    }

    fn persian() -> DirectionStats {
        stats(&[("obj", 10, 0), ("amod", 0, 10)])
    }

    #[test]
    fn surgery_plan_flips_obj_and_amod() {
        let sides = plan_sides(&surgery(), &english(), &persian()).unwrap();
        assert_eq!(sides.0[4], Some(Direction::HeadRight)); // obj surgery
        assert_eq!(sides.0[3], Some(Direction::HeadLeft)); // amod routine
        assert_eq!(sides.0[7], Some(Direction::HeadLeft)); // amod ingrown
        assert_eq!(sides.0[1], None);
    }

    #[test]
    fn surgery_linearization() {
        let out = reorder_tree(&surgery(), &english(), &persian()).unwrap();
        assert_eq!(
            out.forms().join(" "),
            "I a surgery routine for an toenail ingrown had ."
        );
        let edges: Vec<(usize, usize, &str)> = out
            .tokens
            .iter()
            .map(|t| (t.index, t.head.unwrap(), t.deprel.as_deref().unwrap()))
            .collect();
        assert_eq!(
            edges,
            vec![
                (1, 9, "nsubj"),
                (2, 3, "det"),
                (3, 9, "obj"),
                (4, 3, "amod"),
                (5, 7, "case"),
                (6, 7, "det"),
                (7, 3, "nmod"),
                (8, 7, "amod"),
                (9, 0, "root"),
                (10, 9, "punct"),
            ]
        );
    }

    #[test]
    fn identical_stats_give_identity() {
        let tree = surgery();
        let sides = plan_sides(&tree, &english(), &english()).unwrap();
        assert_eq!(sides, Sides::original(&tree));
        assert_eq!(linearize(&tree, &sides), tree);
    }

    #[test]
    fn neutral_target_never_flips() {
        let neutral = DirectionStats::default();
        for d in [Direction::HeadLeft, Direction::HeadRight] {
            assert!(!should_flip("obj", d, &english(), &neutral));
        }
        // neutral source with a dominant target direction does flip
        assert!(should_flip("obj", Direction::HeadLeft, &neutral, &persian()));
    }

    #[test]
    fn single_token() {
        let tree = DepTree::new("one", vec![Token::new(1, "go", "VERB").with_head(0, "root")]);
        assert_eq!(reorder_tree(&tree, &english(), &persian()).unwrap(), tree);
    }

    #[test]
    fn corpus_passes_partial_trees_through() {
        let partial = DepTree::new("p", vec![Token::new(1, "x", "X")]);
        let (out, skipped) = reorder_corpus(&[surgery(), partial.clone()], &english(), &persian());
        assert_eq!(out[1], partial);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].sentence_id, "p");
        assert!(reorder_corpus(&[], &english(), &persian()).0.is_empty());
    }

    #[test]
    fn text_comment_follows_new_order() {
        let mut tree = surgery();
        tree.comments.push(" text = I had a routine surgery for an ingrown toenail .".into());
        let out = reorder_tree(&tree, &english(), &persian()).unwrap();
        assert_eq!(out.comments[0], " text = I a surgery routine for an toenail ingrown had .");
    }
}
