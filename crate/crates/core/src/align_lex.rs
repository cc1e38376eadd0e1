//! Word alignments, translation lexicons and code-switching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::treebank::{DepTree, Token};

/// Links between two sentences, 1-based on both sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlignmentSet {
    pub src_len: usize,
    pub tgt_len: usize,
    pub links: BTreeSet<(usize, usize)>,
}

impl AlignmentSet {
    pub fn new(src_len: usize, tgt_len: usize) -> Self {
        AlignmentSet {
            src_len,
            tgt_len,
            links: BTreeSet::new(),
        }
    }

    pub fn from_links(
        src_len: usize,
        tgt_len: usize,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = AlignmentSet::new(src_len, tgt_len);
        for (s, t) in links {
            if s == 0 || s > src_len || t == 0 || t > tgt_len {
                return Err(Error::SizeMismatch(format!(
                    "link ({}, {}) outside {}x{}",
                    s, t, src_len, tgt_len
                )));
            }
            set.links.insert((s, t));
        }
        Ok(set)
    }

    /// Swap the two sides.
    pub fn transpose(&self) -> AlignmentSet {
        AlignmentSet {
            src_len: self.tgt_len,
            tgt_len: self.src_len,
            links: self.links.iter().map(|&(s, t)| (t, s)).collect(),
        }
    }

    /// No index occurs in two links on either side.
    pub fn is_one_to_one(&self) -> bool {
        let mut src = BTreeSet::new();
        let mut tgt = BTreeSet::new();
        self.links
            .iter()
            .all(|&(s, t)| src.insert(s) && tgt.insert(t))
    }

    /// Target position of every source position (`None` when unaligned).
    /// Only meaningful for one-to-one sets.
    pub fn source_to_target(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.src_len];
        for &(s, t) in &self.links {
            map[s - 1] = Some(t);
        }
        map
    }

    pub fn target_to_source(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.tgt_len];
        for &(s, t) in &self.links {
            map[t - 1] = Some(s);
        }
        map
    }

    /// Pharaoh line, 0-based.
    pub fn to_pharaoh(&self) -> String {
        let pairs: Vec<String> = self
            .links
            .iter()
            .map(|&(s, t)| format!("{}-{}", s - 1, t - 1))
            .collect();
        pairs.join(" ")
    }
}

/// Parse Pharaoh alignments, one line per sentence pair, with the
/// `(src_len, tgt_len)` of each pair given in `sizes`.
pub fn parse_alignments(text: &str, sizes: &[(usize, usize)]) -> Result<Vec<AlignmentSet>> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != sizes.len() {
        return Err(Error::SizeMismatch(format!(
            "{} alignment lines for {} sentence pairs",
            lines.len(),
            sizes.len()
        )));
    }
    lines
        .iter()
        .zip(sizes)
        .enumerate()
        .map(|(i, (line, &(src_len, tgt_len)))| parse_alignment_line(line, i + 1, src_len, tgt_len))
        .collect()
}

fn parse_alignment_line(
    line: &str,
    line_no: usize,
    src_len: usize,
    tgt_len: usize,
) -> Result<AlignmentSet> {
    let mut set = AlignmentSet::new(src_len, tgt_len);
    for item in line.split_whitespace() {
        let bad = || Error::Alignment {
            line: line_no,
            message: format!("malformed pair {:?}", item),
        };
        let (s, t) = item.split_once('-').ok_or_else(bad)?;
        let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
        if !digits(s) || !digits(t) {
            return Err(bad());
        }
        let s: usize = s.parse().map_err(|_| bad())?;
        let t: usize = t.parse().map_err(|_| bad())?;
        if s >= src_len || t >= tgt_len {
            return Err(Error::Alignment {
                line: line_no,
                message: format!("pair {} outside {}x{}", item, src_len, tgt_len),
            });
        }
        set.links.insert((s + 1, t + 1));
    }
    Ok(set)
}

/// Links present in both the source-to-target set `forward` and the
/// target-to-source set `backward`.
pub fn intersect(forward: &AlignmentSet, backward: &AlignmentSet) -> Result<AlignmentSet> {
    if forward.src_len != backward.tgt_len || forward.tgt_len != backward.src_len {
        return Err(Error::SizeMismatch(format!(
            "forward {}x{} vs backward {}x{}",
            forward.src_len, forward.tgt_len, backward.src_len, backward.tgt_len
        )));
    }
    let transposed = backward.transpose();
    Ok(AlignmentSet {
        src_len: forward.src_len,
        tgt_len: forward.tgt_len,
        links: forward.links.intersection(&transposed.links).copied().collect(),
    })
}

/// Which POS pairs count as consistent for an alignment link.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosConsistency {
    pub groups: Vec<BTreeSet<String>>,
    pub wildcards: BTreeSet<String>,
}

impl Default for PosConsistency {
    fn default() -> Self {
        let set = |tags: &[&str]| tags.iter().map(|t| t.to_string()).collect::<BTreeSet<_>>();
        PosConsistency {
            groups: vec![set(&["NOUN", "PROPN", "PRON"]), set(&["VERB", "AUX"])],
            wildcards: set(&["X"]),
        }
    }
}

impl PosConsistency {
    /// Reads a table where each line is either `group TAG TAG ...` or
    /// `wildcard TAG ...`. `#` starts a comment.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut table = PosConsistency {
            groups: Vec::new(),
            wildcards: BTreeSet::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let kind = fields.next().unwrap_or_default();
            let tags: BTreeSet<String> = fields.map(str::to_string).collect();
            match kind {
                "group" => table.groups.push(tags),
                "wildcard" => table.wildcards.extend(tags),
                other => {
                    return Err(Error::Table {
                        line: i + 1,
                        message: format!("unknown entry kind {:?}", other),
                    })
                }
            }
        }
        Ok(table)
    }

    pub fn compatible(&self, a: &str, b: &str) -> bool {
        a == b
            || self.wildcards.contains(a)
            || self.wildcards.contains(b)
            || self.groups.iter().any(|g| g.contains(a) && g.contains(b))
    }
}

/// Drop links whose endpoints have incompatible universal POS tags.
pub fn soft_pos_filter(
    align: &AlignmentSet,
    src_upos: &[&str],
    tgt_upos: &[&str],
    table: &PosConsistency,
) -> AlignmentSet {
    AlignmentSet {
        src_len: align.src_len,
        tgt_len: align.tgt_len,
        links: align
            .links
            .iter()
            .copied()
            .filter(|&(s, t)| table.compatible(src_upos[s - 1], tgt_upos[t - 1]))
            .collect(),
    }
}

/// Aligned translation counts per `(language, lowercased source form)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TranslationLexicon {
    counts: BTreeMap<(String, String), BTreeMap<String, u64>>,
}

impl TranslationLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, language: &str, source: &str, target: &str, count: u64) {
        *self
            .counts
            .entry((language.to_string(), source.to_lowercase()))
            .or_default()
            .entry(target.to_lowercase())
            .or_insert(0) += count;
    }

    /// Add the counts of `other`; merging partial tables equals building
    /// from the concatenated input.
    pub fn merge(&mut self, other: &TranslationLexicon) {
        for ((lang, src), targets) in &other.counts {
            for (tgt, &count) in targets {
                self.add(lang, src, tgt, count);
            }
        }
    }

    /// Most frequent target form; ties go to the lexicographically smaller form.
    pub fn best(&self, language: &str, source: &str) -> Option<(&str, u64)> {
        let targets = self
            .counts
            .get(&(language.to_string(), source.to_lowercase()))?;
        // BTreeMap iterates in ascending order, so the first maximum wins
        let mut best: Option<(&str, u64)> = None;
        for (tgt, &count) in targets {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((tgt.as_str(), count));
            }
        }
        best
    }

    /// Count of a specific candidate.
    pub fn count(&self, language: &str, source: &str, target: &str) -> u64 {
        self.counts
            .get(&(language.to_string(), source.to_lowercase()))
            .and_then(|t| t.get(&target.to_lowercase()))
            .copied()
            .unwrap_or(0)
    }

    /// TSV with one row per source entry: language, source, target, count.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (lang, src) in self.counts.keys() {
            if let Some((tgt, count)) = self.best(lang, src) {
                let _ = writeln!(out, "{}\t{}\t{}\t{}", lang, src, tgt, count);
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lex = TranslationLexicon::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::Table {
                    line: i + 1,
                    message: format!("expected 4 columns, found {}", cols.len()),
                });
            }
            let count: u64 = cols[3].parse().map_err(|_| Error::Table {
                line: i + 1,
                message: format!("bad count {:?}", cols[3]),
            })?;
            if count == 0 {
                return Err(Error::Table {
                    line: i + 1,
                    message: "count must be at least 1".to_string(),
                });
            }
            lex.add(cols[0], cols[1], cols[2], count);
        }
        Ok(lex)
    }
}

/// One aligned sentence pair for lexicon construction.
pub struct AlignedPair<'a> {
    pub language: &'a str,
    pub source: &'a [Token],
    pub target: &'a [Token],
    pub alignment: &'a AlignmentSet,
}

/// Count aligned form pairs over intersected, POS-filtered alignments.
pub fn build_lexicon<'a>(pairs: impl IntoIterator<Item = AlignedPair<'a>>) -> TranslationLexicon {
    let mut lex = TranslationLexicon::new();
    for pair in pairs {
        for &(s, t) in &pair.alignment.links {
            lex.add(
                pair.language,
                &pair.source[s - 1].form,
                &pair.target[t - 1].form,
                1,
            );
        }
    }
    lex
}

/// Replace each form by its most frequent aligned translation, keeping the
/// original word when the lexicon has no entry.
pub fn code_switch(tree: &DepTree, lex: &TranslationLexicon) -> DepTree {
    let mut out = tree.clone();
    for token in &mut out.tokens {
        if let Some((target, _)) = lex.best(&tree.language, &token.form) {
            token.form = target.to_string();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(src: usize, tgt: usize, links: &[(usize, usize)]) -> AlignmentSet {
        AlignmentSet::from_links(src, tgt, links.iter().copied()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let sets = parse_alignments("\n0-0 1-2\n0-0 0-1\n", &[(1, 1), (2, 3), (1, 2)]).unwrap();
        assert!(sets[0].links.is_empty());
        assert_eq!(sets[1], set(2, 3, &[(1, 1), (2, 3)]));
        assert_eq!(sets[2], set(1, 2, &[(1, 1), (1, 2)]));
        assert!(!sets[2].is_one_to_one());
    }

    #[test]
    fn parse_errors_carry_line() {
        match parse_alignments("0-0\n0_1\n", &[(1, 1), (2, 2)]) {
            Err(Error::Alignment { line: 2, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
        match parse_alignments("0-+1\n", &[(2, 2)]) {
            Err(Error::Alignment { line: 1, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
        match parse_alignments("3-0\n", &[(2, 2)]) {
            Err(Error::Alignment { line: 1, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn intersection_examples() {
        let a = set(3, 2, &[(1, 1), (2, 2), (3, 2)]);
        assert_eq!(intersect(&a, &a.transpose()).unwrap(), a);

        let disjoint = set(3, 2, &[(1, 2)]);
        assert!(intersect(&a, &disjoint.transpose()).unwrap().links.is_empty());

        let b = set(3, 2, &[(1, 1), (3, 2)]).transpose();
        assert_eq!(intersect(&a, &b).unwrap(), set(3, 2, &[(1, 1), (3, 2)]));
    }

    #[test]
    fn intersection_size_mismatch() {
        let a = set(3, 2, &[]);
        let b = set(3, 2, &[]);
        assert!(matches!(intersect(&a, &b), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn soft_pos_examples() {
        let table = PosConsistency::default();
        let a = set(4, 4, &[(1, 1), (2, 2), (3, 3), (4, 4)]);
        let src = ["NOUN", "PROPN", "NOUN", "X"];
        let tgt = ["NOUN", "PRON", "VERB", "ADP"];
        let kept = soft_pos_filter(&a, &src, &tgt, &table);
        assert_eq!(kept, set(4, 4, &[(1, 1), (2, 2), (4, 4)]));
        assert!(table.compatible("AUX", "VERB"));
        assert!(!table.compatible("NOUN", "VERB"));
    }

    #[test]
    fn pos_table_file() {
        let table = PosConsistency::from_table("# custom\ngroup ADJ NOUN\nwildcard SYM\n").unwrap();
        assert!(table.compatible("ADJ", "NOUN"));
        assert!(table.compatible("SYM", "VERB"));
        assert!(!table.compatible("PRON", "NOUN"));
        assert!(PosConsistency::from_table("bogus A\n").is_err());
    }

    fn toks(forms: &[&str]) -> Vec<Token> {
        forms
            .iter()
            .enumerate()
            .map(|(i, f)| Token::new(i + 1, *f, "NOUN"))
            .collect()
    }

    #[test]
    fn lexicon_majority_and_ties() {
        let dog = toks(&["dog"]);
        let hund = toks(&["hund"]);
        let katze = toks(&["katze"]);
        let one = set(1, 1, &[(1, 1)]);
        let single = build_lexicon([AlignedPair {
            language: "en",
            source: &dog,
            target: &hund,
            alignment: &one,
        }]);
        assert_eq!(single.best("en", "dog"), Some(("hund", 1)));

        let majority = build_lexicon(vec![
            AlignedPair { language: "en", source: &dog, target: &hund, alignment: &one },
            AlignedPair { language: "en", source: &dog, target: &katze, alignment: &one },
            AlignedPair { language: "en", source: &dog, target: &hund, alignment: &one },
        ]);
        assert_eq!(majority.best("en", "dog"), Some(("hund", 2)));

        let tie = build_lexicon(vec![
            AlignedPair { language: "en", source: &dog, target: &katze, alignment: &one },
            AlignedPair { language: "en", source: &dog, target: &hund, alignment: &one },
        ]);
        assert_eq!(tie.best("en", "dog"), Some(("hund", 1)));
    }

    #[test]
    fn lexicon_is_case_insensitive_and_round_trips() {
        let mut lex = TranslationLexicon::new();
        lex.add("en", "Dog", "Hund", 2);
        lex.add("en", "dog", "Katze", 1);
        assert_eq!(lex.best("en", "DOG"), Some(("hund", 2)));
        let tsv = lex.to_tsv();
        assert_eq!(tsv, "en\tdog\thund\t2\n");
        let back = TranslationLexicon::from_tsv(&tsv).unwrap();
        assert_eq!(back.best("en", "dog"), Some(("hund", 2)));
        assert!(TranslationLexicon::from_tsv("en\tdog\thund\n").is_err());
    }

    #[test]
    fn code_switch_examples() {
        let mut tree = DepTree::new(
            "s",
            vec![
                Token::new(1, "the", "DET").with_head(2, "det"),
                Token::new(2, "dog", "NOUN").with_head(3, "nsubj"),
                Token::new(3, "runs", "VERB").with_head(0, "root"),
            ],
        );
        tree.language = "en".to_string();

        assert_eq!(code_switch(&tree, &TranslationLexicon::new()), tree);

        let mut lex = TranslationLexicon::new();
        lex.add("en", "dog", "hund", 1);
        let switched = code_switch(&tree, &lex);
        assert_eq!(switched.forms(), vec!["the", "hund", "runs"]);
        assert_eq!(switched.heads(), tree.heads());

        // other language keys are never consulted
        let mut other = TranslationLexicon::new();
        other.add("de", "dog", "chien", 1);
        assert_eq!(code_switch(&tree, &other), tree);
    }
}
