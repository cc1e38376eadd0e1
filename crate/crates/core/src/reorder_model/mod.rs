//! Learned reordering: a stacked BiLSTM over the source sentence and an MLP
//! that predicts, for each edge, whether the head should end up after the
//! modifier.

pub mod gradcheck;
pub mod io;
pub mod linalg;
pub mod network;
pub mod params;
pub mod train;
pub mod vocab;

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::par;
use crate::reorder_data::ReorderInstance;
use crate::reorder_rule::{linearize, Sides, Skipped};
use crate::treebank::{universal_label, DepTree};

pub use gradcheck::{grad_check, GradCheck};
pub use io::{parse_pretrained, Pretrained};
pub use network::{encode, score_direction, EncoderState, Query, SentenceInput};
pub use params::{ClassifierParams, Hyperparams, TableSizes};
pub use train::{log_to_tsv, EpochLog, Example};
pub use vocab::{normalize_form, ClassifierVocab, Vocab};

pub const MIN_INSTANCES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct ReorderClassifier {
    pub hyper: Hyperparams,
    pub vocab: ClassifierVocab,
    pub params: ClassifierParams,
}

fn class_of(d: Direction) -> usize {
    match d {
        Direction::HeadLeft => 0,
        Direction::HeadRight => 1,
    }
}

impl ReorderClassifier {
    pub fn input(&self, tree: &DepTree) -> SentenceInput {
        SentenceInput {
            words: tree
                .tokens
                .iter()
                .map(|t| self.vocab.words.get(&normalize_form(&t.form)))
                .collect(),
            pos: tree.tokens.iter().map(|t| self.vocab.pos.get(&t.upos)).collect(),
        }
    }

    pub fn query(&self, modifier: usize, head: usize, label: &str, language: &str) -> Query {
        Query {
            modifier,
            head,
            relation: self.vocab.relations.get(universal_label(label)),
            language: self.vocab.languages.get(language),
        }
    }

    /// Direction probabilities of every token's incoming edge (None for the
    /// root).
    pub fn probabilities(&self, tree: &DepTree, language: &str) -> Result<Vec<Option<[f64; 2]>>> {
        tree.require_full()?;
        let state = encode(&self.params, &self.input(tree));
        Ok(tree
            .tokens
            .iter()
            .map(|t| {
                let h = t.head.filter(|&h| h != 0)?;
                let label = t.deprel.as_deref().unwrap_or("_");
                let q = self.query(t.index, h, label, language);
                Some(score_direction(&self.params, &state, &q))
            })
            .collect())
    }

    /// Argmax side for every edge; ties keep the current direction.
    pub fn plan_sides(&self, tree: &DepTree, language: &str) -> Result<Sides> {
        let probs = self.probabilities(tree, language)?;
        Ok(Sides(
            tree.tokens
                .iter()
                .zip(probs)
                .map(|(t, p)| {
                    let p = p?;
                    let current = Direction::of_edge(t.index, t.head?);
                    Some(if p[0] > p[1] {
                        Direction::HeadLeft
                    } else if p[1] > p[0] {
                        Direction::HeadRight
                    } else {
                        current
                    })
                })
                .collect(),
        ))
    }
}

/// Reorder one tree toward `language` with the classifier's directions.
pub fn classify_reorder(tree: &DepTree, model: &ReorderClassifier, language: &str) -> Result<DepTree> {
    let sides = model.plan_sides(tree, language)?;
    Ok(linearize(tree, &sides))
}

/// Reorder a treebank. Partial trees are returned unchanged and reported.
pub fn classify_corpus(
    trees: &[DepTree],
    model: &ReorderClassifier,
    language: &str,
) -> (Vec<DepTree>, Vec<Skipped>) {
    let results = par::map(trees, |t| classify_reorder(t, model, language));
    let mut out = Vec::with_capacity(trees.len());
    let mut skipped = Vec::new();
    for (tree, result) in trees.iter().zip(results) {
        match result {
            Ok(t) => out.push(t),
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

/// Vocabularies from the sentences that carry instances, plus any
/// pretrained forms.
pub fn build_vocab(
    sentences: &[&DepTree],
    instances: &[ReorderInstance],
    pretrained: Option<&Pretrained>,
) -> ClassifierVocab {
    let mut v = ClassifierVocab::default();
    for tree in sentences {
        for t in &tree.tokens {
            v.words.insert(&normalize_form(&t.form));
            v.pos.insert(&t.upos);
        }
    }
    if let Some(p) = pretrained {
        for (form, _) in &p.vectors {
            v.words.insert(&normalize_form(form));
        }
    }
    for i in instances {
        v.relations.insert(universal_label(&i.label));
        v.languages.insert(&i.language);
    }
    v
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ReorderClassifier,
    pub log: Vec<EpochLog>,
    pub train_instances: usize,
    pub heldout_instances: usize,
}

impl TrainOutcome {
    pub fn best(&self) -> Option<&EpochLog> {
        self.log
            .iter()
            .min_by(|a, b| a.heldout_nll.total_cmp(&b.heldout_nll))
    }
}

/// Fit a classifier on `instances`, whose sentence ids refer to `sentences`.
/// A seeded random `heldout_fraction` of the instances is held out for
/// early stopping; the parameters with the lowest heldout NLL are returned.
pub fn train(
    instances: &[ReorderInstance],
    sentences: &[DepTree],
    hyper: &Hyperparams,
    seed: u64,
    pretrained: Option<&Pretrained>,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    if instances.len() < MIN_INSTANCES {
        return Err(Error::TooFewInstances {
            needed: MIN_INSTANCES,
            got: instances.len(),
        });
    }
    if let Some(p) = pretrained {
        if p.dim != hyper.word_dim && !p.vectors.is_empty() {
            return Err(Error::Hyperparams(format!(
                "pretrained vectors have {} dimensions, word_dim is {}",
                p.dim, hyper.word_dim
            )));
        }
    }

    let wanted: HashSet<&str> = instances.iter().map(|i| i.sentence_id.as_str()).collect();
    let mut by_id: HashMap<&str, usize> = HashMap::new();
    for (k, tree) in sentences.iter().enumerate() {
        if !wanted.contains(tree.sentence_id.as_str()) {
            continue;
        }
        if by_id.insert(tree.sentence_id.as_str(), k).is_some() {
            return Err(Error::SizeMismatch(format!(
                "sentence id {} occurs more than once",
                tree.sentence_id
            )));
        }
    }
    for i in instances {
        let tree = by_id
            .get(i.sentence_id.as_str())
            .map(|&k| &sentences[k])
            .ok_or_else(|| Error::SizeMismatch(format!("no sentence with id {}", i.sentence_id)))?;
        if i.modifier == 0 || i.head == 0 || i.modifier > tree.len() || i.head > tree.len() {
            return Err(Error::InvalidEdge {
                modifier: i.modifier,
                head: i.head,
            });
        }
    }

    let mut used: Vec<usize> = by_id.values().copied().collect();
    used.sort_unstable();
    let used_trees: Vec<&DepTree> = used.iter().map(|&k| &sentences[k]).collect();
    let vocab = build_vocab(&used_trees, instances, pretrained);
    let sizes = TableSizes {
        words: vocab.words.len(),
        pos: vocab.pos.len(),
        relations: vocab.relations.len(),
        languages: vocab.languages.len(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ClassifierParams::init(hyper, sizes, &mut rng);
    if let Some(p) = pretrained {
        let mut fixed = linalg::Matrix::zeros(sizes.words, hyper.word_dim);
        for (form, values) in &p.vectors {
            let row = vocab.words.get(&normalize_form(form));
            if row != 0 {
                fixed.row_mut(row).copy_from_slice(values);
            }
        }
        params.word_fixed = Some(fixed);
    }
    let mut model = ReorderClassifier {
        hyper: hyper.clone(),
        vocab,
        params: ClassifierParams::zeros(hyper, sizes),
    };

    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.shuffle(&mut rng);
    let n_heldout = ((instances.len() as f64 * hyper.heldout_fraction).ceil() as usize)
        .clamp(1, instances.len() - 1);
    let (heldout_idx, train_idx) = order.split_at(n_heldout);

    let group = |idx: &[usize]| -> Vec<Example> {
        let mut per_sentence: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        for i in sorted {
            let k = by_id[instances[i].sentence_id.as_str()];
            let s = *slot.entry(k).or_insert_with(|| {
                per_sentence.push((k, Vec::new()));
                per_sentence.len() - 1
            });
            per_sentence[s].1.push(i);
        }
        per_sentence
            .into_iter()
            .map(|(k, items)| Example {
                input: model.input(&sentences[k]),
                items: items
                    .into_iter()
                    .map(|i| {
                        let inst = &instances[i];
                        let q = model.query(inst.modifier, inst.head, &inst.label, &inst.language);
                        (q, class_of(inst.gold))
                    })
                    .collect(),
            })
            .collect()
    };
    let train_set = group(train_idx);
    let heldout_set = group(heldout_idx);

    let (mut best, log) = train::fit(params, hyper, &train_set, &heldout_set, &mut rng);
    io::round_to_f32(&mut best);
    model.params = best;
    Ok(TrainOutcome {
        model,
        log,
        train_instances: train_idx.len(),
        heldout_instances: heldout_idx.len(),
    })
}
