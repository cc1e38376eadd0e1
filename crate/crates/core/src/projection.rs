//! Annotation projection over one-to-one alignments and the dense-structure
//! filter.

use crate::align_lex::AlignmentSet;
use crate::error::{Error, Result};
use crate::treebank::DepTree;

/// Copy source dependencies onto the target sentence `target`.
///
/// Target token `t` aligned to source `m` receives the image of `m`'s head
/// when that head is the root or is itself aligned. Existing heads and labels
/// of `target` are discarded. Edges are admitted in target order and an edge
/// that would close a cycle is left out.
pub fn project_tree(src: &DepTree, target: &DepTree, align: &AlignmentSet) -> Result<DepTree> {
    if !align.is_one_to_one() {
        return Err(Error::NotOneToOne);
    }
    if align.src_len != src.len() || align.tgt_len != target.len() {
        return Err(Error::SizeMismatch(format!(
            "alignment {}x{} for sentences of length {} and {}",
            align.src_len,
            align.tgt_len,
            src.len(),
            target.len()
        )));
    }

    let src_to_tgt = align.source_to_target();
    let tgt_to_src = align.target_to_source();

    let mut out = target.clone();
    for token in &mut out.tokens {
        token.head = None;
        token.deprel = None;
    }

    for t in 1..=out.len() {
        let Some(m) = tgt_to_src[t - 1] else { continue };
        let source = &src.tokens[m - 1];
        let Some(h) = source.head else { continue };
        let head = if h == 0 {
            0
        } else {
            match src_to_tgt[h - 1] {
                Some(tgt_head) => tgt_head,
                None => continue,
            }
        };
        if head != 0 && reaches(&out, head, t) {
            continue;
        }
        let token = &mut out.tokens[t - 1];
        token.head = Some(head);
        token.deprel = if h == 0 {
            Some("root".to_string())
        } else {
            source.deprel.clone()
        };
    }
    Ok(out)
}

/// Whether following assigned heads from `from` arrives at `target`.
fn reaches(tree: &DepTree, from: usize, target: usize) -> bool {
    let mut node = from;
    for _ in 0..=tree.len() {
        if node == target {
            return true;
        }
        match tree.tokens[node - 1].head {
            Some(h) if h != 0 => node = h,
            _ => return false,
        }
    }
    false
}

/// Coverage of a partial tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityStats {
    pub n: usize,
    pub assigned: usize,
    /// Longest run of consecutive tokens that all have a head.
    pub max_full_span: usize,
}

impl DensityStats {
    pub fn of(tree: &DepTree) -> Self {
        let mut assigned = 0;
        let mut run = 0;
        let mut max_full_span = 0;
        for token in &tree.tokens {
            if token.head.is_some() {
                assigned += 1;
                run += 1;
                max_full_span = max_full_span.max(run);
            } else {
                run = 0;
            }
        }
        DensityStats {
            n: tree.len(),
            assigned,
            max_full_span,
        }
    }

    pub fn is_dense(&self, min_ratio: f64, min_span: usize) -> bool {
        if self.n == 0 {
            return false;
        }
        self.assigned as f64 / self.n as f64 >= min_ratio || self.max_full_span >= min_span
    }
}

pub const DEFAULT_MIN_RATIO: f64 = 0.8;
pub const DEFAULT_MIN_SPAN: usize = 5;

/// Keep trees where at least `min_ratio` of the words are headed or some
/// fully headed span is at least `min_span` long.
pub fn dense_filter(partials: Vec<DepTree>, min_ratio: f64, min_span: usize) -> Vec<DepTree> {
    partials
        .into_iter()
        .filter(|t| DensityStats::of(t).is_dense(min_ratio, min_span))
        .collect()
}
