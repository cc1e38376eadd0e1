//! CoNLL-U data model, reader/writer and structural predicates.
//!
//! Only syntactic words are kept: multiword-token ranges (`1-2`) and empty
//! nodes (`1.1`) are skipped while parsing and reported as diagnostics.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One syntactic word of a sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Head position, `0` for the root. `None` when unknown.
    pub head: Option<usize>,
    pub deprel: Option<String>,
    pub deps: String,
    pub misc: String,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>, upos: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: "_".to_string(),
            upos: upos.into(),
            xpos: "_".to_string(),
            feats: "_".to_string(),
            head: None,
            deprel: None,
            deps: "_".to_string(),
            misc: "_".to_string(),
        }
    }

    pub fn with_head(mut self, head: usize, deprel: impl Into<String>) -> Self {
        self.head = Some(head);
        self.deprel = Some(deprel.into());
        self
    }

    /// The dependency label without its language-specific subtype.
    pub fn universal_deprel(&self) -> Option<&str> {
        self.deprel.as_deref().map(universal_label)
    }
}

/// Strip a label subtype: `nmod:poss` becomes `nmod`.
pub fn universal_label(label: &str) -> &str {
    label.split(':').next().unwrap_or(label)
}

/// A sentence with (possibly partial) dependency annotation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepTree {
    pub sentence_id: String,
    pub language: String,
    /// Comment lines without the leading `#`, re-emitted verbatim.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
}

impl DepTree {
    pub fn new(sentence_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        DepTree {
            sentence_id: sentence_id.into(),
            tokens,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head of the token at 1-based position `index`.
    pub fn head(&self, index: usize) -> Option<usize> {
        self.tokens[index - 1].head
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    /// Head vector indexed by position - 1.
    pub fn heads(&self) -> Vec<Option<usize>> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    /// Dependents of every position `0..=n`, in increasing index order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len() + 1];
        for token in &self.tokens {
            if let Some(head) = token.head {
                children[head].push(token.index);
            }
        }
        children
    }

    /// Whether the assigned edges contain a cycle.
    pub fn has_cycle(&self) -> bool {
        heads_have_cycle(&self.heads())
    }

    /// Exactly one root, every token headed, and no cycle.
    pub fn is_full(&self) -> bool {
        !self.is_empty()
            && self.tokens.iter().all(|t| t.head.is_some())
            && self.tokens.iter().filter(|t| t.head == Some(0)).count() == 1
            && !self.has_cycle()
    }

    pub fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::PartialTree(self.sentence_id.clone()))
        }
    }

    /// Number of tokens with an assigned head.
    pub fn assigned(&self) -> usize {
        self.tokens.iter().filter(|t| t.head.is_some()).count()
    }

    /// Projectivity including the attachment to the artificial root at 0.
    pub fn is_projective(&self) -> bool {
        let arcs: Vec<(usize, usize)> = self
            .tokens
            .iter()
            .filter_map(|t| t.head.map(|h| (t.index, h)))
            .collect();
        crossing_arcs(&arcs).iter().all(|&c| !c)
    }

    /// Replace the `# text = ...` comment, if present, with the current forms.
    pub fn refresh_text_comment(&mut self) {
        let text = self.forms().join(" ");
        for comment in &mut self.comments {
            if comment.trim_start().starts_with("text =") {
                *comment = format!(" text = {}", text);
            }
        }
    }
}

/// Cycle check on a head vector (`heads[i]` is the head of position i + 1).
pub(crate) fn heads_have_cycle(heads: &[Option<usize>]) -> bool {
    let n = heads.len();
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        let mut path = Vec::new();
        let mut node = start;
        loop {
            if node == 0 || state[node] == 2 {
                break;
            }
            if state[node] == 1 {
                return true;
            }
            state[node] = 1;
            path.push(node);
            match heads[node - 1] {
                Some(h) if h <= n => node = h,
                _ => break,
            }
        }
        for p in path {
            state[p] = 2;
        }
    }
    false
}

/// For each arc, whether it crosses at least one other arc. Arcs sharing an
/// endpoint never cross.
fn crossing_arcs(arcs: &[(usize, usize)]) -> Vec<bool> {
    let spans: Vec<(usize, usize)> = arcs
        .iter()
        .map(|&(m, h)| (m.min(h), m.max(h)))
        .collect();
    let mut crossing = vec![false; arcs.len()];
    for a in 0..spans.len() {
        for b in a + 1..spans.len() {
            let (l1, r1) = spans[a];
            let (l2, r2) = spans[b];
            let cross = (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1);
            if cross {
                crossing[a] = true;
                crossing[b] = true;
            }
        }
    }
    crossing
}

/// Number of non-root arcs that cross at least one other non-root arc.
///
/// Attachments to the artificial root are not counted, so the measure
/// compares word-to-word arcs before and after reordering.
pub fn count_nonprojective_arcs(tree: &DepTree) -> Result<usize> {
    tree.require_full()?;
    let arcs: Vec<(usize, usize)> = tree
        .tokens
        .iter()
        .filter_map(|t| match t.head {
            Some(h) if h != 0 => Some((t.index, h)),
            _ => None,
        })
        .collect();
    Ok(crossing_arcs(&arcs).into_iter().filter(|&c| c).count())
}

/// A line that was read but not turned into a token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

/// Parse CoNLL-U text, discarding diagnostics.
pub fn parse_conllu(text: &str) -> Result<Vec<DepTree>> {
    parse_conllu_with_diagnostics(text).map(|(trees, _)| trees)
}

pub fn parse_conllu_with_diagnostics(text: &str) -> Result<(Vec<DepTree>, Vec<Diagnostic>)> {
    let mut trees = Vec::new();
    let mut diagnostics = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();

    for (offset, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !block.is_empty() {
                trees.push(parse_block(&block, trees.len() + 1, &mut diagnostics)?);
                block.clear();
            }
        } else {
            block.push((offset + 1, line));
        }
    }
    if !block.is_empty() {
        trees.push(parse_block(&block, trees.len() + 1, &mut diagnostics)?);
    }
    Ok((trees, diagnostics))
}

fn parse_block(
    lines: &[(usize, &str)],
    ordinal: usize,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<DepTree> {
    let mut tree = DepTree::default();
    let mut raw_heads = Vec::new();

    for &(line_no, line) in lines {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim_start().strip_prefix("sent_id") {
                let id = id.trim_start().trim_start_matches('=').trim();
                tree.sentence_id = id.to_string();
            } else if let Some(lang) = comment.trim_start().strip_prefix("language") {
                if let Some(lang) = lang.trim_start().strip_prefix('=') {
                    tree.language = lang.trim().to_string();
                }
            }
            tree.comments.push(comment.to_string());
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("expected 10 columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            diagnostics.push(Diagnostic {
                line: line_no,
                message: format!("skipped non-word line {}", cols[0]),
            });
            continue;
        }
        let index: usize = cols[0].parse().map_err(|_| Error::Conllu {
            line: line_no,
            message: format!("non-numeric index {:?}", cols[0]),
        })?;
        if index != tree.tokens.len() + 1 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("expected index {}, found {}", tree.tokens.len() + 1, index),
            });
        }
        let head = match cols[6] {
            "_" => None,
            h => Some(h.parse::<usize>().map_err(|_| Error::Conllu {
                line: line_no,
                message: format!("non-numeric head {:?}", h),
            })?),
        };
        let deprel = match cols[7] {
            "_" => None,
            r => Some(r.to_string()),
        };
        raw_heads.push((line_no, index, head));
        tree.tokens.push(Token {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: cols[5].to_string(),
            head,
            deprel,
            deps: cols[8].to_string(),
            misc: cols[9].to_string(),
        });
    }

    let n = tree.tokens.len();
    for (line_no, index, head) in raw_heads {
        if let Some(h) = head {
            if h > n || h == index {
                return Err(Error::Conllu {
                    line: line_no,
                    message: format!("head {} out of range for token {} (length {})", h, index, n),
                });
            }
        }
    }
    if tree.sentence_id.is_empty() {
        tree.sentence_id = ordinal.to_string();
    }
    Ok(tree)
}

/// Serialize trees as CoNLL-U; each sentence block ends with a blank line.
pub fn emit_conllu(trees: &[DepTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        write_tree(&mut out, tree);
    }
    out
}

fn write_tree(out: &mut String, tree: &DepTree) {
    for comment in &tree.comments {
        out.push('#');
        out.push_str(comment);
        out.push('\n');
    }
    for t in &tree.tokens {
        let head = t.head.map_or_else(|| "_".to_string(), |h| h.to_string());
        let deprel = t.deprel.as_deref().unwrap_or("_");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.index, t.form, t.lemma, t.upos, t.xpos, t.feats, head, deprel, t.deps, t.misc
        );
    }
    out.push('\n');
}
