//! End-to-end run on the bundled synthetic corpus.

pub mod count_parser;
pub mod synth;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::align_lex::{build_lexicon, code_switch, AlignedPair};
use crate::direction::{direction_proportions, DirectionStats, DEFAULT_THRESHOLD};
use crate::ensemble::{ensemble_corpus, EnsembleConfig};
use crate::error::Result;
use crate::eval_report::{pos_trigram_cosine, uas_las, Punct};
use crate::projection::{dense_filter, project_tree, DEFAULT_MIN_RATIO, DEFAULT_MIN_SPAN};
use crate::reorder_data::{apply_mapping, derive_mapping, extract_instances};
use crate::reorder_model::{classify_corpus, train, Hyperparams};
use crate::reorder_rule::reorder_corpus;
use crate::treebank::DepTree;
use count_parser::CountParser;
use synth::{parallel_pair, source_treebank, target_treebank, SOURCE_LANG, TARGET_LANG};

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub parallel_sentences: usize,
    pub treebank_sentences: usize,
    pub test_sentences: usize,
    /// Probability of dropping each alignment link.
    pub drop_rate: f64,
    pub seed: u64,
    pub hyper: Hyperparams,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            parallel_sentences: 300,
            treebank_sentences: 300,
            test_sentences: 100,
            drop_rate: 0.08,
            seed: 1,
            hyper: Hyperparams {
                layers: 2,
                minibatch_tokens: 200,
                heldout_fraction: 0.1,
                learning_rate: 0.005,
                max_epochs: 8,
                ..Hyperparams::tiny(8)
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub projected: usize,
    pub dense: usize,
    pub instances: usize,
    pub classifier_heldout_accuracy: f64,
    /// POS trigram cosine against the target test treebank.
    pub cosine_source: f64,
    pub cosine_rule: f64,
    pub cosine_classifier: f64,
    /// (UAS, LAS) of the three systems and the ensemble.
    pub baseline: (f64, f64),
    pub rule: (f64, f64),
    pub classifier: (f64, f64),
    pub ensemble: (f64, f64),
}

impl DemoReport {
    pub fn best_single_uas(&self) -> f64 {
        self.baseline.0.max(self.rule.0).max(self.classifier.0)
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "projected trees\t{}", self.projected)?;
        writeln!(f, "dense trees\t{}", self.dense)?;
        writeln!(f, "reordering instances\t{}", self.instances)?;
        writeln!(f, "classifier heldout accuracy\t{:.4}", self.classifier_heldout_accuracy)?;
        writeln!(f, "trigram cosine source\t{:.4}", self.cosine_source)?;
        writeln!(
            f,
            "trigram cosine rule\t{:.4}\t{:+.4}",
            self.cosine_rule,
            self.cosine_rule - self.cosine_source
        )?;
        writeln!(
            f,
            "trigram cosine classifier\t{:.4}\t{:+.4}",
            self.cosine_classifier,
            self.cosine_classifier - self.cosine_source
        )?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, (uas, las): (f64, f64)| {
            writeln!(
                f,
                "{}\tUAS {:.2}\tLAS {:.2}\tdelta UAS {:+.2}",
                name,
                100.0 * uas,
                100.0 * las,
                100.0 * (uas - self.baseline.0)
            )
        };
        row(f, "baseline", self.baseline)?;
        row(f, "rule", self.rule)?;
        row(f, "classifier", self.classifier)?;
        row(f, "ensemble", self.ensemble)
    }
}

/// Intermediate corpora, for writing to disk.
#[derive(Clone, Debug)]
pub struct DemoOutcome {
    pub report: DemoReport,
    pub corpora: Vec<(&'static str, Vec<DepTree>)>,
    pub source_stats: DirectionStats,
    pub target_stats: DirectionStats,
}

fn blank(tree: &DepTree) -> DepTree {
    let mut t = tree.clone();
    for token in &mut t.tokens {
        token.head = None;
        token.deprel = None;
    }
    t
}

pub fn run_demo(config: &DemoConfig) -> Result<DemoOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs: Vec<_> = (0..config.parallel_sentences)
        .map(|i| parallel_pair(&mut rng, &format!("par-{}", i + 1), config.drop_rate))
        .collect();
    let treebank = source_treebank(&mut rng, "src-train", config.treebank_sentences);
    let test = target_treebank(&mut rng, "tgt-test", config.test_sentences);

    let projected = pairs
        .iter()
        .map(|p| project_tree(&p.source, &p.target, &p.alignment))
        .collect::<Result<Vec<_>>>()?;
    let n_projected = projected.len();
    let dense = dense_filter(projected, DEFAULT_MIN_RATIO, DEFAULT_MIN_SPAN);

    let whitelist = DirectionStats::default_whitelist();
    let source_stats = direction_proportions(&treebank, DEFAULT_THRESHOLD, whitelist.clone());
    let target_stats = direction_proportions(&dense, DEFAULT_THRESHOLD, whitelist);

    let (rule, _) = reorder_corpus(&treebank, &source_stats, &target_stats);

    let mut instances = Vec::new();
    for p in &pairs {
        let Some(mu) = derive_mapping(p.source.len(), &p.alignment)? else { continue };
        if apply_mapping(&p.source, &mu)?.is_some() {
            instances.extend(extract_instances(&p.source, &mu, TARGET_LANG));
        }
    }
    let sources: Vec<DepTree> = pairs.iter().map(|p| p.source.clone()).collect();
    let outcome = train(&instances, &sources, &config.hyper, config.seed, None)?;
    let heldout_accuracy = outcome.best().map_or(0.0, |e| e.heldout_accuracy);
    let (classified, _) = classify_corpus(&treebank, &outcome.model, TARGET_LANG);

    let lexicon = build_lexicon(pairs.iter().map(|p| AlignedPair {
        language: SOURCE_LANG,
        source: &p.source.tokens,
        target: &p.target.tokens,
        alignment: &p.alignment,
    }));
    let switch = |c: &[DepTree]| c.iter().map(|t| code_switch(t, &lexicon)).collect::<Vec<_>>();
    let train_sets = [switch(&treebank), switch(&rule), switch(&classified)];

    let blank_test: Vec<DepTree> = test.iter().map(blank).collect();
    let parses: Vec<Vec<DepTree>> = train_sets
        .iter()
        .map(|set| {
            let parser = CountParser::train(dense.iter().chain(set));
            blank_test.iter().map(|t| parser.parse(t)).collect()
        })
        .collect();
    let ensemble_config = EnsembleConfig::new(false, target_stats.clone());
    let ensembled = ensemble_corpus(&parses[0], &parses[1], &parses[2], &ensemble_config)?;

    let score = |pred: &[DepTree]| uas_las(&test, pred, Punct::ByUpos);
    let report = DemoReport {
        projected: n_projected,
        dense: dense.len(),
        instances: instances.len(),
        classifier_heldout_accuracy: heldout_accuracy,
        cosine_source: pos_trigram_cosine(&treebank, &test)?,
        cosine_rule: pos_trigram_cosine(&rule, &test)?,
        cosine_classifier: pos_trigram_cosine(&classified, &test)?,
        baseline: score(&parses[0])?,
        rule: score(&parses[1])?,
        classifier: score(&parses[2])?,
        ensemble: score(&ensembled)?,
    };

    let [base_parse, rule_parse, clf_parse]: [Vec<DepTree>; 3] =
        parses.try_into().expect("three systems");
    Ok(DemoOutcome {
        report,
        corpora: vec![
            ("source-train", treebank),
            ("source-rule", rule),
            ("source-classifier", classified),
            ("projected-dense", dense),
            ("target-test", test),
            ("parse-baseline", base_parse),
            ("parse-rule", rule_parse),
            ("parse-classifier", clf_parse),
            ("parse-ensemble", ensembled),
        ],
        source_stats,
        target_stats,
    })
}
