//! Synthetic parallel corpus: a head-initial SVO source language and a
//! head-final SOV target language generated from shared clause skeletons.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::align_lex::AlignmentSet;
use crate::treebank::{DepTree, Token};

pub const SOURCE_LANG: &str = "src";
pub const TARGET_LANG: &str = "tgt";

const NOUNS: &[&str] = &[
    "dog", "cat", "man", "woman", "house", "river", "tree", "bird", "king", "city", "book", "horse",
];
const VERBS: &[&str] = &["sees", "likes", "finds", "builds", "eats", "carries", "watches", "follows"];
const ADJS: &[&str] = &["big", "small", "old", "red", "quiet", "young"];
const DETS: &[&str] = &["the", "a"];
const CASES: &[&str] = &["in", "near", "with", "from"];
const ADVS: &[&str] = &["often", "today", "slowly", "again"];

/// Target-language spelling of a source word.
pub fn translate(form: &str) -> String {
    if form == "." {
        return ".".to_string();
    }
    let mut t: String = form.chars().rev().collect();
    t.push('o');
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

struct Node {
    form: &'static str,
    upos: &'static str,
    deprel: &'static str,
    children: Vec<Node>,
}

impl Node {
    fn leaf(form: &'static str, upos: &'static str, deprel: &'static str) -> Node {
        Node { form, upos, deprel, children: Vec::new() }
    }
}

fn pick<R: Rng>(rng: &mut R, words: &[&'static str]) -> &'static str {
    words.choose(rng).copied().expect("non-empty word list")
}

fn noun_phrase<R: Rng>(rng: &mut R, deprel: &'static str, depth: usize) -> Node {
    let mut children = Vec::new();
    if deprel == "obl" || deprel == "nmod" {
        children.push(Node::leaf(pick(rng, CASES), "ADP", "case"));
    }
    if rng.gen_bool(0.8) {
        children.push(Node::leaf(pick(rng, DETS), "DET", "det"));
    }
    if rng.gen_bool(0.4) {
        children.push(Node::leaf(pick(rng, ADJS), "ADJ", "amod"));
    }
    if depth == 0 && rng.gen_bool(0.25) {
        children.push(noun_phrase(rng, "nmod", depth + 1));
    }
    Node { form: pick(rng, NOUNS), upos: "NOUN", deprel, children }
}

fn clause<R: Rng>(rng: &mut R) -> Node {
    let mut children = vec![noun_phrase(rng, "nsubj", 0)];
    if rng.gen_bool(0.85) {
        children.push(noun_phrase(rng, "obj", 0));
    }
    if rng.gen_bool(0.4) {
        children.push(noun_phrase(rng, "obl", 0));
    }
    if rng.gen_bool(0.3) {
        children.push(Node::leaf(pick(rng, ADVS), "ADV", "advmod"));
    }
    children.push(Node::leaf(".", "PUNCT", "punct"));
    Node { form: pick(rng, VERBS), upos: "VERB", deprel: "root", children }
}

fn source_side(deprel: &str) -> Side {
    match deprel {
        "nsubj" | "det" | "amod" | "case" => Side::Left,
        _ => Side::Right,
    }
}

fn target_side<R: Rng>(deprel: &str, rng: &mut R) -> Side {
    match deprel {
        "amod" | "case" | "punct" => Side::Right,
        "advmod" => {
            if rng.gen_bool(0.5) {
                Side::Left
            } else {
                Side::Right
            }
        }
        _ => Side::Left,
    }
}

#[derive(Clone, Copy)]
struct Info {
    form: &'static str,
    upos: &'static str,
    deprel: &'static str,
    head: usize,
}

/// Number nodes in pre-order (ids from 1) so both languages share ids.
fn number(node: &Node, head: usize, infos: &mut Vec<Info>, children: &mut Vec<Vec<usize>>) -> usize {
    infos.push(Info { form: node.form, upos: node.upos, deprel: node.deprel, head });
    children.push(Vec::new());
    let id = infos.len();
    for c in &node.children {
        let cid = number(c, id, infos, children);
        children[id - 1].push(cid);
    }
    id
}

fn arrange(id: usize, infos: &[Info], children: &[Vec<usize>], side: &mut dyn FnMut(&str) -> Side, out: &mut Vec<usize>) {
    let sides: Vec<Side> = children[id - 1].iter().map(|&c| side(infos[c - 1].deprel)).collect();
    for (&c, &s) in children[id - 1].iter().zip(&sides) {
        if s == Side::Left {
            arrange(c, infos, children, side, out);
        }
    }
    out.push(id);
    for (&c, &s) in children[id - 1].iter().zip(&sides) {
        if s == Side::Right {
            arrange(c, infos, children, side, out);
        }
    }
}

/// Node ids in surface order plus the node table.
struct Flat {
    infos: Vec<Info>,
    order: Vec<usize>,
}

fn to_tree(id: String, language: &str, flat: &Flat, translate_forms: bool) -> DepTree {
    let mut pos = vec![0usize; flat.infos.len() + 1];
    for (p, &node) in flat.order.iter().enumerate() {
        pos[node] = p + 1;
    }
    let tokens = flat
        .order
        .iter()
        .enumerate()
        .map(|(p, &node)| {
            let info = flat.infos[node - 1];
            let form = if translate_forms { translate(info.form) } else { info.form.to_string() };
            let h = if info.head == 0 { 0 } else { pos[info.head] };
            Token::new(p + 1, form, info.upos).with_head(h, info.deprel)
        })
        .collect();
    let mut tree = DepTree::new(id.clone(), tokens);
    tree.language = language.to_string();
    tree.comments.push(format!(" sent_id = {}", id));
    tree.comments.push(format!(" language = {}", language));
    tree.comments.push(" text = ".to_string());
    tree.refresh_text_comment();
    tree
}

/// One generated sentence pair.
#[derive(Clone, Debug)]
pub struct ParallelPair {
    pub source: DepTree,
    pub target: DepTree,
    /// Source-to-target links; some are dropped to imitate aligner gaps.
    pub alignment: AlignmentSet,
}

fn linearize_both<R: Rng>(rng: &mut R, skeleton: &Node) -> (Flat, Flat) {
    let mut infos = Vec::new();
    let mut children = Vec::new();
    number(skeleton, 0, &mut infos, &mut children);
    let mut src = Vec::new();
    arrange(1, &infos, &children, &mut |d| source_side(d), &mut src);
    let mut tgt = Vec::new();
    arrange(1, &infos, &children, &mut |d| target_side(d, rng), &mut tgt);
    (Flat { infos: infos.clone(), order: src }, Flat { infos, order: tgt })
}

pub fn parallel_pair<R: Rng>(rng: &mut R, id: &str, drop_rate: f64) -> ParallelPair {
    let skeleton = clause(rng);
    let (src, tgt) = linearize_both(rng, &skeleton);
    let source = to_tree(format!("{}-src", id), SOURCE_LANG, &src, false);
    let target = to_tree(format!("{}-tgt", id), TARGET_LANG, &tgt, true);
    let n = src.order.len();
    let mut tgt_pos = vec![0usize; n + 1];
    for (p, &node) in tgt.order.iter().enumerate() {
        tgt_pos[node] = p + 1;
    }
    let links: Vec<(usize, usize)> = src
        .order
        .iter()
        .enumerate()
        .filter(|_| !rng.gen_bool(drop_rate))
        .map(|(p, &node)| (p + 1, tgt_pos[node]))
        .collect();
    let alignment = AlignmentSet::from_links(n, n, links).expect("valid links");
    ParallelPair { source, target, alignment }
}

/// Gold source-language treebank.
pub fn source_treebank<R: Rng>(rng: &mut R, prefix: &str, n: usize) -> Vec<DepTree> {
    (0..n)
        .map(|i| {
            let skeleton = clause(rng);
            let (src, _) = linearize_both(rng, &skeleton);
            to_tree(format!("{}-{}", prefix, i + 1), SOURCE_LANG, &src, false)
        })
        .collect()
}

/// Gold target-language treebank.
pub fn target_treebank<R: Rng>(rng: &mut R, prefix: &str, n: usize) -> Vec<DepTree> {
    (0..n)
        .map(|i| {
            let skeleton = clause(rng);
            let (_, tgt) = linearize_both(rng, &skeleton);
            to_tree(format!("{}-{}", prefix, i + 1), TARGET_LANG, &tgt, true)
        })
        .collect()
}
