//! Dependency directions, per-label direction proportions and dominant
//! directions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::treebank::{universal_label, DepTree};

/// Side of the head relative to its modifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Head precedes the modifier (`-1`).
    HeadLeft,
    /// Head follows the modifier (`1`).
    HeadRight,
}

impl Direction {
    pub fn sign(self) -> i8 {
        match self {
            Direction::HeadLeft => -1,
            Direction::HeadRight => 1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Direction> {
        match sign {
            -1 => Some(Direction::HeadLeft),
            1 => Some(Direction::HeadRight),
            _ => None,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::HeadLeft => Direction::HeadRight,
            Direction::HeadRight => Direction::HeadLeft,
        }
    }

    /// Direction of modifier `m` attached to head `h`, both >= 1.
    pub fn of_edge(m: usize, h: usize) -> Direction {
        if h > m {
            Direction::HeadRight
        } else {
            Direction::HeadLeft
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// Direction of a non-root edge; root attachments and self-loops are errors.
pub fn edge_direction(m: usize, h: usize) -> Result<Direction> {
    if h == 0 || h == m {
        return Err(Error::InvalidEdge { modifier: m, head: h });
    }
    Ok(Direction::of_edge(m, h))
}

/// Labels whose direction statistics are collected.
pub const DEFAULT_WHITELIST: &[&str] = &[
    "nsubj", "obj", "iobj", "csubj", "ccomp", "xcomp", "obl", "vocative", "expl", "dislocated",
    "advcl", "advmod", "aux", "cop", "nmod", "appos", "nummod", "acl", "amod",
];

pub const DEFAULT_THRESHOLD: f64 = 0.75;

/// Counts of head-right / head-left edges per label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DirectionCounts {
    pub head_right: u64,
    pub head_left: u64,
}

impl DirectionCounts {
    pub fn total(&self) -> u64 {
        self.head_right + self.head_left
    }

    fn get(&self, d: Direction) -> u64 {
        match d {
            Direction::HeadRight => self.head_right,
            Direction::HeadLeft => self.head_left,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionStats {
    counts: BTreeMap<String, DirectionCounts>,
    pub threshold: f64,
    pub whitelist: BTreeSet<String>,
}

impl Default for DirectionStats {
    fn default() -> Self {
        DirectionStats {
            counts: BTreeMap::new(),
            threshold: DEFAULT_THRESHOLD,
            whitelist: DEFAULT_WHITELIST.iter().map(|l| l.to_string()).collect(),
        }
    }
}

impl DirectionStats {
    pub fn new(threshold: f64, whitelist: impl IntoIterator<Item = String>) -> Self {
        DirectionStats {
            counts: BTreeMap::new(),
            threshold,
            whitelist: whitelist.into_iter().collect(),
        }
    }

    /// Record one edge with label `label`; ignored unless whitelisted.
    pub fn observe(&mut self, label: &str, d: Direction) {
        self.add_counts(label, DirectionCounts {
            head_right: u64::from(d == Direction::HeadRight),
            head_left: u64::from(d == Direction::HeadLeft),
        });
    }

    pub fn add_counts(&mut self, label: &str, counts: DirectionCounts) {
        let label = universal_label(label);
        if !self.whitelist.contains(label) {
            return;
        }
        let entry = self.counts.entry(label.to_string()).or_default();
        entry.head_right += counts.head_right;
        entry.head_left += counts.head_left;
    }

    /// Count all assigned non-root edges of `tree`.
    pub fn observe_tree(&mut self, tree: &DepTree) {
        for token in &tree.tokens {
            if let (Some(h), Some(label)) = (token.head, token.deprel.as_deref()) {
                if h != 0 {
                    self.observe(label, Direction::of_edge(token.index, h));
                }
            }
        }
    }

    pub fn merge(&mut self, other: &DirectionStats) {
        for (label, &counts) in &other.counts {
            self.add_counts(label, counts);
        }
    }

    pub fn counts(&self, label: &str) -> DirectionCounts {
        self.counts
            .get(universal_label(label))
            .copied()
            .unwrap_or_default()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// Proportion of `label` edges with direction `d`; `None` when unobserved.
    pub fn alpha(&self, label: &str, d: Direction) -> Option<f64> {
        let counts = self.counts.get(universal_label(label))?;
        let total = counts.total();
        if total == 0 {
            return None;
        }
        Some(counts.get(d) as f64 / total as f64)
    }

    /// Dominant direction, `None` when no direction exceeds the threshold.
    pub fn lambda(&self, label: &str) -> Option<Direction> {
        [Direction::HeadRight, Direction::HeadLeft]
            .into_iter()
            .find(|&d| self.alpha(label, d).is_some_and(|a| a > self.threshold))
    }

    /// `lambda` as -1, 0 or 1.
    pub fn lambda_sign(&self, label: &str) -> i8 {
        self.lambda(label).map_or(0, Direction::sign)
    }

    /// TSV rows: label, count_right, count_left, lambda.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (label, c) in &self.counts {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                label,
                c.head_right,
                c.head_left,
                self.lambda_sign(label)
            );
        }
        out
    }

    /// `to_tsv` plus alpha_right and alpha_left columns.
    pub fn to_tsv_with_alpha(&self) -> String {
        let mut out = String::new();
        for (label, c) in &self.counts {
            let alpha = |d| self.alpha(label, d).unwrap_or(0.0);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}",
                label,
                c.head_right,
                c.head_left,
                self.lambda_sign(label),
                alpha(Direction::HeadRight),
                alpha(Direction::HeadLeft)
            );
        }
        out
    }

    /// Read counts back (trailing alpha columns are ignored); lambda is recomputed from the counts with
    /// `threshold`, and labels outside `whitelist` are dropped.
    pub fn from_tsv(
        text: &str,
        threshold: f64,
        whitelist: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut stats = DirectionStats::new(threshold, whitelist);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |message: String| Error::Table { line: i + 1, message };
            if cols.len() != 4 && cols.len() != 6 {
                return Err(bad(format!("expected 4 or 6 columns, found {}", cols.len())));
            }
            let right = cols[1]
                .parse()
                .map_err(|_| bad(format!("bad count {:?}", cols[1])))?;
            let left = cols[2]
                .parse()
                .map_err(|_| bad(format!("bad count {:?}", cols[2])))?;
            if !matches!(cols[3], "-1" | "0" | "1") {
                return Err(bad(format!("bad lambda {:?}", cols[3])));
            }
            stats.add_counts(cols[0], DirectionCounts { head_right: right, head_left: left });
        }
        Ok(stats)
    }

    pub fn default_whitelist() -> Vec<String> {
        DEFAULT_WHITELIST.iter().map(|l| l.to_string()).collect()
    }
}

/// Direction statistics of a corpus of (possibly partial) trees.
pub fn direction_proportions<'a>(
    corpus: impl IntoIterator<Item = &'a DepTree>,
    threshold: f64,
    whitelist: impl IntoIterator<Item = String>,
) -> DirectionStats {
    let mut stats = DirectionStats::new(threshold, whitelist);
    for tree in corpus {
        stats.observe_tree(tree);
    }
    stats
}
