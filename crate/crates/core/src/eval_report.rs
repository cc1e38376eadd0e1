//! Attachment scores, head-POS f-scores and POS trigram similarity.

use std::collections::{BTreeMap, HashSet};
use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::treebank::{universal_label, DepTree, Token};

/// Which tokens count as punctuation and are left out of scoring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Punct {
    /// Gold UPOS is PUNCT.
    #[default]
    ByUpos,
    /// Gold relation is punct.
    ByDeprel,
}

impl Punct {
    pub fn excludes(self, gold: &Token) -> bool {
        match self {
            Punct::ByUpos => gold.upos == "PUNCT",
            Punct::ByDeprel => gold.universal_deprel() == Some("punct"),
        }
    }
}

/// Token counts behind UAS and LAS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Attachment {
    pub scored: usize,
    pub head_correct: usize,
    pub label_correct: usize,
}

impl AddAssign for Attachment {
    fn add_assign(&mut self, o: Attachment) {
        self.scored += o.scored;
        self.head_correct += o.head_correct;
        self.label_correct += o.label_correct;
    }
}

impl Attachment {
    pub fn uas(&self) -> f64 {
        ratio(self.head_correct, self.scored)
    }

    pub fn las(&self) -> f64 {
        ratio(self.label_correct, self.scored)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn check_aligned(gold: &[DepTree], pred: &[DepTree]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::SizeMismatch(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (g, p) in gold.iter().zip(pred) {
        if g.len() != p.len() {
            return Err(Error::SizeMismatch(format!(
                "sentence {}: gold has {} tokens, prediction has {}",
                g.sentence_id,
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

pub fn attachment(gold: &[DepTree], pred: &[DepTree], punct: Punct) -> Result<Attachment> {
    check_aligned(gold, pred)?;
    let mut acc = Attachment::default();
    for (g, p) in gold.iter().zip(pred) {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            if punct.excludes(gt) {
                continue;
            }
            acc.scored += 1;
            if gt.head.is_some() && gt.head == pt.head {
                acc.head_correct += 1;
                let label = |t: &Token| t.deprel.as_deref().map(universal_label).map(str::to_string);
                if label(gt).is_some() && label(gt) == label(pt) {
                    acc.label_correct += 1;
                }
            }
        }
    }
    Ok(acc)
}

/// `(UAS, LAS)` over non-punctuation tokens; labels compared on their
/// universal part.
pub fn uas_las(gold: &[DepTree], pred: &[DepTree], punct: Punct) -> Result<(f64, f64)> {
    let a = attachment(gold, pred, punct)?;
    Ok((a.uas(), a.las()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold_edges: usize,
    pub predicted_edges: usize,
}

/// Unlabeled attachment f-score restricted to edges headed by `head_upos`.
/// Predicted edges are selected by the head's tag in the prediction, gold
/// edges by the tag in the gold tree.
pub fn head_pos_fscore(gold: &[DepTree], pred: &[DepTree], head_upos: &str, punct: Punct) -> Result<FScore> {
    check_aligned(gold, pred)?;
    let headed_by = |tree: &DepTree, t: &Token| -> Option<usize> {
        let h = t.head.filter(|&h| h != 0)?;
        (tree.tokens[h - 1].upos == head_upos).then_some(h)
    };
    let mut gold_edges = HashSet::new();
    let mut pred_edges = HashSet::new();
    for (s, (g, p)) in gold.iter().zip(pred).enumerate() {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            if punct.excludes(gt) {
                continue;
            }
            if let Some(h) = headed_by(g, gt) {
                gold_edges.insert((s, gt.index, h));
            }
            if let Some(h) = headed_by(p, pt) {
                pred_edges.insert((s, pt.index, h));
            }
        }
    }
    let mut gold_heads = HashSet::new();
    let mut pred_heads = HashSet::new();
    for (s, (g, p)) in gold.iter().zip(pred).enumerate() {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            if let Some(h) = gt.head {
                gold_heads.insert((s, gt.index, h));
            }
            if let Some(h) = pt.head {
                pred_heads.insert((s, pt.index, h));
            }
        }
    }
    let correct_p = pred_edges.iter().filter(|e| gold_heads.contains(*e)).count();
    let correct_r = gold_edges.iter().filter(|e| pred_heads.contains(*e)).count();
    let precision = ratio(correct_p, pred_edges.len());
    let recall = ratio(correct_r, gold_edges.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(FScore {
        precision,
        recall,
        f1,
        gold_edges: gold_edges.len(),
        predicted_edges: pred_edges.len(),
    })
}

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// UPOS trigram counts with one boundary marker on each side of every
/// sentence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigramCounts {
    counts: BTreeMap<[String; 3], u64>,
    sentences: usize,
}

impl TrigramCounts {
    pub fn of(corpus: &[DepTree]) -> Self {
        let mut c = TrigramCounts::default();
        for tree in corpus {
            c.add_tree(tree);
        }
        c
    }

    pub fn add_tree(&mut self, tree: &DepTree) {
        let mut tags = vec![BOS];
        tags.extend(tree.tokens.iter().map(|t| t.upos.as_str()));
        tags.push(EOS);
        for w in tags.windows(3) {
            let key = [w[0].to_string(), w[1].to_string(), w[2].to_string()];
            *self.counts.entry(key).or_insert(0) += 1;
        }
        self.sentences += 1;
    }

    pub fn merge(&mut self, other: &TrigramCounts) {
        for (k, &v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.sentences += other.sentences;
    }

    pub fn get(&self, trigram: [&str; 3]) -> u64 {
        let key = trigram.map(str::to_string);
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn cosine(&self, other: &TrigramCounts) -> f64 {
        let dot: f64 = self
            .counts
            .iter()
            .map(|(k, &v)| v as f64 * other.counts.get(k).copied().unwrap_or(0) as f64)
            .sum();
        let norm = |c: &TrigramCounts| c.counts.values().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
        let denom = norm(self) * norm(other);
        if denom == 0.0 {
            0.0
        } else {
            dot / denom
        }
    }
}

/// Cosine similarity of the UPOS trigram count vectors of two corpora.
pub fn pos_trigram_cosine(a: &[DepTree], b: &[DepTree]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(TrigramCounts::of(a).cosine(&TrigramCounts::of(b)))
}
