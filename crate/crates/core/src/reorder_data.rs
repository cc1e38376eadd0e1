//! Training data for the reordering classifier: permutations induced by
//! target word order, the projectivity filter and per-edge instances.

use std::fmt::Write as _;

use crate::align_lex::AlignmentSet;
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::treebank::{count_nonprojective_arcs, DepTree, Token};

/// Permutation of source positions: `positions[j - 1]` is the reordered
/// position of source word `j`. Both are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReorderMapping {
    positions: Vec<usize>,
}

impl ReorderMapping {
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        let n = positions.len();
        let mut seen = vec![false; n + 1];
        for &p in &positions {
            if p == 0 || p > n || seen[p] {
                return Err(Error::SizeMismatch(format!(
                    "{:?} is not a permutation of 1..={}",
                    positions, n
                )));
            }
            seen[p] = true;
        }
        Ok(ReorderMapping { positions })
    }

    pub fn identity(n: usize) -> Self {
        ReorderMapping {
            positions: (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Reordered position of source word `j`.
    pub fn get(&self, j: usize) -> usize {
        self.positions[j - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.positions
    }

    /// Source words in reordered order.
    pub fn apply_to<'a, T>(&self, items: &'a [T]) -> Vec<&'a T> {
        let mut slots: Vec<Option<&T>> = vec![None; items.len()];
        for (j, item) in items.iter().enumerate() {
            slots[self.positions[j] - 1] = Some(item);
        }
        slots.into_iter().map(|s| s.expect("bijection")).collect()
    }
}

/// Whether enough source words are aligned: at least half, rounded up.
pub fn enough_aligned(src_len: usize, aligned: usize) -> bool {
    aligned >= src_len.div_ceil(2)
}

/// Order source words by the target position they align to. An unaligned
/// word takes the target position of the closest aligned word before it
/// (or 0 when there is none); ties keep source order. Returns `None` when
/// fewer than half of the source words are aligned.
pub fn derive_mapping(src_len: usize, align: &AlignmentSet) -> Result<Option<ReorderMapping>> {
    if !align.is_one_to_one() {
        return Err(Error::NotOneToOne);
    }
    if align.src_len != src_len {
        return Err(Error::SizeMismatch(format!(
            "alignment for {} source words, sentence has {}",
            align.src_len, src_len
        )));
    }
    let targets = align.source_to_target();
    let aligned = targets.iter().filter(|t| t.is_some()).count();
    if !enough_aligned(src_len, aligned) {
        return Ok(None);
    }

    let mut anchor = 0;
    let mut keys: Vec<(usize, usize)> = Vec::with_capacity(src_len);
    for (j, target) in targets.iter().enumerate() {
        if let Some(t) = target {
            anchor = *t;
        }
        keys.push((anchor, j + 1));
    }
    keys.sort_unstable();

    let mut positions = vec![0; src_len];
    for (pos, &(_, j)) in keys.iter().enumerate() {
        positions[j - 1] = pos + 1;
    }
    Ok(Some(ReorderMapping { positions }))
}

/// Permute `tree` by `mu`. Returns `None` when the permutation increases
/// the number of non-projective arcs.
pub fn apply_mapping(tree: &DepTree, mu: &ReorderMapping) -> Result<Option<DepTree>> {
    if tree.len() != mu.len() {
        return Err(Error::SizeMismatch(format!(
            "mapping of length {} for a tree of length {}",
            mu.len(),
            tree.len()
        )));
    }
    let before = count_nonprojective_arcs(tree)?;

    let tokens: Vec<Token> = mu
        .apply_to(&tree.tokens)
        .into_iter()
        .enumerate()
        .map(|(pos, token)| {
            let mut token = token.clone();
            token.index = pos + 1;
            token.head = token.head.map(|h| if h == 0 { 0 } else { mu.get(h) });
            token
        })
        .collect();
    let mut permuted = DepTree {
        tokens,
        ..tree.clone()
    };
    permuted.refresh_text_comment();

    let after = count_nonprojective_arcs(&permuted)?;
    Ok((after <= before).then_some(permuted))
}

/// One classifier example: the direction of edge `m -> h` before and after
/// reordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReorderInstance {
    pub sentence_id: String,
    pub language: String,
    pub modifier: usize,
    pub head: usize,
    pub label: String,
    pub original: Direction,
    pub gold: Direction,
}

/// One instance per non-root token of `tree` (source order), with the gold
/// direction read off `mu`.
pub fn extract_instances(tree: &DepTree, mu: &ReorderMapping, language: &str) -> Vec<ReorderInstance> {
    tree.tokens
        .iter()
        .filter_map(|t| {
            let h = t.head.filter(|&h| h != 0)?;
            let m = t.index;
            let gold = if mu.get(h) > mu.get(m) {
                Direction::HeadRight
            } else {
                Direction::HeadLeft
            };
            Some(ReorderInstance {
                sentence_id: tree.sentence_id.clone(),
                language: language.to_string(),
                modifier: m,
                head: h,
                label: t.deprel.clone().unwrap_or_else(|| "_".to_string()),
                original: Direction::of_edge(m, h),
                gold,
            })
        })
        .collect()
}

/// TSV columns: language, sentence id, m, h, label, original direction, gold direction.
pub fn instances_to_tsv(instances: &[ReorderInstance]) -> String {
    let mut out = String::new();
    for i in instances {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i.language, i.sentence_id, i.modifier, i.head, i.label, i.original, i.gold
        );
    }
    out
}

pub fn instances_from_tsv(text: &str) -> Result<Vec<ReorderInstance>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Table { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(bad(format!("expected 7 columns, found {}", cols.len())));
        }
        let index = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad index {:?}", s)));
        let dir = |s: &str| {
            s.parse::<i8>()
                .ok()
                .and_then(Direction::from_sign)
                .ok_or_else(|| bad(format!("bad direction {:?}", s)))
        };
        out.push(ReorderInstance {
            language: cols[0].to_string(),
            sentence_id: cols[1].to_string(),
            modifier: index(cols[2])?,
            head: index(cols[3])?,
            label: cols[4].to_string(),
            original: dir(cols[5])?,
            gold: dir(cols[6])?,
        });
    }
    Ok(out)
}
