//! Command-line front end.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::align_lex::{
    build_lexicon, code_switch, intersect, parse_alignments, soft_pos_filter, AlignedPair, AlignmentSet,
    PosConsistency, TranslationLexicon,
};
use crate::demo::{run_demo, DemoConfig};
use crate::direction::{direction_proportions, DirectionStats, DEFAULT_THRESHOLD};
use crate::ensemble::{ensemble_corpus, EnsembleConfig};
use crate::eval_report::{attachment, head_pos_fscore, pos_trigram_cosine, Punct};
use crate::par;
use crate::projection::{dense_filter, project_tree, DEFAULT_MIN_RATIO, DEFAULT_MIN_SPAN};
use crate::reorder_data::{apply_mapping, derive_mapping, extract_instances, instances_from_tsv, instances_to_tsv};
use crate::reorder_model::{self, classify_corpus, io as model_io, log_to_tsv, parse_pretrained, Hyperparams};
use crate::reorder_rule::{reorder_corpus, Skipped};
use crate::treebank::{emit_conllu, parse_conllu_with_diagnostics, DepTree};

#[derive(Parser, Debug)]
#[command(name = "ud-reorder", version, about = "Treebank reordering, projection and parse ensembling")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for per-sentence stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Flat key=value file; keys are flag names without dashes.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project source trees onto aligned target sentences.
    Project(ProjectArgs),
    /// Keep projected trees that are dense enough to train on.
    DenseFilter(DenseArgs),
    /// Dependency direction statistics.
    Dirstats(DirstatsArgs),
    /// Reorder a treebank by dominant directions.
    ReorderRule(ReorderRuleArgs),
    /// Reordering instances from aligned parallel data.
    ExtractReorderData(ExtractArgs),
    /// Train the reordering classifier.
    TrainClassifier(TrainArgs),
    /// Reorder a treebank with a trained classifier.
    ReorderClassifier(ReorderClassifierArgs),
    /// Replace forms by their most frequent aligned translation.
    Codeswitch(CodeswitchArgs),
    /// Cap each treebank at a number of randomly chosen sentences.
    Sample(SampleArgs),
    /// Combine three parses by weighted voting.
    Ensemble(EnsembleArgs),
    /// Score parses and compare POS trigram distributions.
    Eval(EvalArgs),
    /// Run the full pipeline on the bundled synthetic corpus.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
struct AlignmentArgs {
    /// Source-to-target alignments, Pharaoh format.
    #[arg(long)]
    align: PathBuf,
    /// Target-to-source alignments; intersected with --align when given.
    #[arg(long)]
    align_rev: Option<PathBuf>,
    /// Apply the soft POS consistency filter.
    #[arg(long)]
    pos_filter: bool,
    /// POS consistency table for --pos-filter.
    #[arg(long)]
    pos_table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    /// Parsed source sentences.
    #[arg(long)]
    src: PathBuf,
    /// Target sentences; their heads are ignored.
    #[arg(long)]
    tgt: PathBuf,
    #[command(flatten)]
    alignment: AlignmentArgs,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DenseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_RATIO)]
    min_ratio: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_SPAN)]
    min_span: usize,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StatsOptions {
    /// Proportion a direction must exceed to be dominant.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// File with one label per line replacing the default whitelist.
    #[arg(long)]
    whitelist: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DirstatsArgs {
    #[arg(long = "in", required = true)]
    input: Vec<PathBuf>,
    #[command(flatten)]
    stats: StatsOptions,
    /// Append alpha_right and alpha_left columns.
    #[arg(long)]
    alpha: bool,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReorderRuleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    src_stats: PathBuf,
    #[arg(long)]
    tgt_stats: PathBuf,
    #[command(flatten)]
    stats: StatsOptions,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Parsed source side of the parallel data.
    #[arg(long)]
    src: PathBuf,
    /// Target side; only token counts are used.
    #[arg(long)]
    tgt: PathBuf,
    #[command(flatten)]
    alignment: AlignmentArgs,
    /// Target language id recorded with each instance.
    #[arg(long)]
    language: String,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct HyperArgs {
    #[arg(long)]
    word_dim: Option<usize>,
    #[arg(long)]
    pos_dim: Option<usize>,
    /// Concatenated width of both LSTM directions.
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    relation_dim: Option<usize>,
    #[arg(long)]
    language_dim: Option<usize>,
    #[arg(long)]
    mlp_dim: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    minibatch_tokens: Option<usize>,
    #[arg(long)]
    heldout_fraction: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    clip_norm: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
}

impl HyperArgs {
    fn apply(&self, hp: &mut Hyperparams) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { hp.$f = v; })* };
        }
        set!(word_dim, pos_dim, hidden_dim, relation_dim, language_dim, mlp_dim, layers, minibatch_tokens);
        set!(heldout_fraction, learning_rate, clip_norm, patience, max_epochs);
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Instance TSV from extract-reorder-data.
    #[arg(long, required = true)]
    instances: Vec<PathBuf>,
    /// Sentences the instances refer to.
    #[arg(long, required = true)]
    sentences: Vec<PathBuf>,
    /// Pretrained word vectors, one `form v1 ... vd` per line.
    #[arg(long)]
    pretrained: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Training progress TSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReorderClassifierArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Target language id the model was trained toward.
    #[arg(long)]
    language: String,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CodeswitchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Lexicon TSV; built from --bitext-src/--bitext-tgt/--align otherwise.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, requires_all = ["bitext_tgt", "align"])]
    bitext_src: Option<PathBuf>,
    #[arg(long)]
    bitext_tgt: Option<PathBuf>,
    #[arg(long)]
    align: Option<PathBuf>,
    #[arg(long)]
    align_rev: Option<PathBuf>,
    #[arg(long)]
    pos_filter: bool,
    #[arg(long)]
    pos_table: Option<PathBuf>,
    /// Source language id; defaults to each tree's language comment.
    #[arg(long)]
    language: Option<String>,
    /// Write the lexicon used.
    #[arg(long)]
    lexicon_out: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long = "in", required = true)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    max: usize,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// Parse from the baseline system.
    #[arg(long)]
    base: PathBuf,
    /// Parse from the rule-reordered system.
    #[arg(long)]
    rule: PathBuf,
    /// Parse from the classifier-reordered system.
    #[arg(long)]
    clf: PathBuf,
    /// Target direction statistics.
    #[arg(long)]
    stats: PathBuf,
    #[arg(long, action = clap::ArgAction::Set)]
    european: bool,
    #[command(flatten)]
    options: StatsOptions,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Identify punctuation by relation instead of POS.
    #[arg(long)]
    punct_by_deprel: bool,
    /// Report attachment f-score of edges headed by this POS (repeatable).
    #[arg(long)]
    head_pos: Vec<String>,
    /// Report POS trigram cosine of this corpus against --gold (repeatable).
    #[arg(long)]
    trigram: Vec<PathBuf>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, default_value_t = 300)]
    parallel_sentences: usize,
    #[arg(long, default_value_t = 300)]
    treebank_sentences: usize,
    #[arg(long, default_value_t = 100)]
    test_sentences: usize,
    /// Write the intermediate corpora here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if path.as_os_str() == "-" {
        io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_trees(path: &Path) -> anyhow::Result<Vec<DepTree>> {
    let text = read_text(path)?;
    let (trees, diagnostics) =
        parse_conllu_with_diagnostics(&text).with_context(|| format!("parsing {}", path.display()))?;
    for d in diagnostics {
        eprintln!("{}:{}: {}", path.display(), d.line, d.message);
    }
    Ok(trees)
}

fn whitelist(opts: &StatsOptions) -> anyhow::Result<Vec<String>> {
    match &opts.whitelist {
        None => Ok(DirectionStats::default_whitelist()),
        Some(path) => Ok(read_text(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()),
    }
}

fn read_stats(path: &Path, opts: &StatsOptions) -> anyhow::Result<DirectionStats> {
    DirectionStats::from_tsv(&read_text(path)?, opts.threshold, whitelist(opts)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn report_skipped(skipped: &[Skipped]) {
    for s in skipped {
        eprintln!("skipped {}: {}", s.sentence_id, s.reason);
    }
}

/// Alignments for parallel corpora `src`/`tgt`, intersected and filtered as
/// requested.
fn load_alignments(
    src: &[DepTree],
    tgt: &[DepTree],
    align: &Path,
    align_rev: Option<&Path>,
    pos_filter: bool,
    pos_table: Option<&Path>,
) -> anyhow::Result<Vec<AlignmentSet>> {
    if src.len() != tgt.len() {
        bail!("{} source sentences but {} target sentences", src.len(), tgt.len());
    }
    let sizes: Vec<(usize, usize)> = src.iter().zip(tgt).map(|(s, t)| (s.len(), t.len())).collect();
    let mut sets = parse_alignments(&read_text(align)?, &sizes)
        .with_context(|| format!("parsing {}", align.display()))?;
    if let Some(rev) = align_rev {
        let rev_sizes: Vec<(usize, usize)> = sizes.iter().map(|&(s, t)| (t, s)).collect();
        let backward = parse_alignments(&read_text(rev)?, &rev_sizes)
            .with_context(|| format!("parsing {}", rev.display()))?;
        sets = sets
            .iter()
            .zip(&backward)
            .map(|(f, b)| intersect(f, b))
            .collect::<crate::Result<_>>()?;
    }
    if pos_filter {
        let table = match pos_table {
            Some(p) => PosConsistency::from_table(&read_text(p)?)?,
            None => PosConsistency::default(),
        };
        sets = sets
            .iter()
            .zip(src.iter().zip(tgt))
            .map(|(a, (s, t))| {
                let su: Vec<&str> = s.tokens.iter().map(|x| x.upos.as_str()).collect();
                let tu: Vec<&str> = t.tokens.iter().map(|x| x.upos.as_str()).collect();
                soft_pos_filter(a, &su, &tu, &table)
            })
            .collect();
    }
    Ok(sets)
}

fn cmd_project(a: &ProjectArgs) -> anyhow::Result<()> {
    let src = read_trees(&a.src)?;
    let tgt = read_trees(&a.tgt)?;
    let al = &a.alignment;
    let sets = load_alignments(&src, &tgt, &al.align, al.align_rev.as_deref(), al.pos_filter, al.pos_table.as_deref())?;
    let jobs: Vec<usize> = (0..src.len()).collect();
    let projected = par::map(&jobs, |&i| project_tree(&src[i], &tgt[i], &sets[i]));
    let mut out = Vec::with_capacity(src.len());
    for (i, p) in projected.into_iter().enumerate() {
        match p {
            Ok(t) => out.push(t),
            Err(e) => {
                eprintln!("sentence {}: {}", tgt[i].sentence_id, e);
                let mut t = tgt[i].clone();
                t.tokens.iter_mut().for_each(|x| {
                    x.head = None;
                    x.deprel = None;
                });
                out.push(t);
            }
        }
    }
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_dense(a: &DenseArgs) -> anyhow::Result<()> {
    let trees = read_trees(&a.input)?;
    let total = trees.len();
    let kept = dense_filter(trees, a.min_ratio, a.min_span);
    eprintln!("kept {} of {} trees", kept.len(), total);
    write_text(&a.out, &emit_conllu(&kept))
}

fn cmd_dirstats(a: &DirstatsArgs) -> anyhow::Result<()> {
    let mut trees = Vec::new();
    for path in &a.input {
        trees.extend(read_trees(path)?);
    }
    let stats = direction_proportions(&trees, a.stats.threshold, whitelist(&a.stats)?);
    let tsv = if a.alpha { stats.to_tsv_with_alpha() } else { stats.to_tsv() };
    write_text(&a.out, &tsv)
}

fn cmd_reorder_rule(a: &ReorderRuleArgs) -> anyhow::Result<()> {
    let trees = read_trees(&a.input)?;
    let src = read_stats(&a.src_stats, &a.stats)?;
    let tgt = read_stats(&a.tgt_stats, &a.stats)?;
    let (out, skipped) = reorder_corpus(&trees, &src, &tgt);
    report_skipped(&skipped);
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_extract(a: &ExtractArgs) -> anyhow::Result<()> {
    let src = read_trees(&a.src)?;
    let tgt = read_trees(&a.tgt)?;
    let al = &a.alignment;
    let sets = load_alignments(&src, &tgt, &al.align, al.align_rev.as_deref(), al.pos_filter, al.pos_table.as_deref())?;
    let mut instances = Vec::new();
    let (mut sparse, mut crossing, mut invalid) = (0, 0, 0);
    for (tree, set) in src.iter().zip(&sets) {
        let mu = match derive_mapping(tree.len(), set) {
            Ok(Some(mu)) => mu,
            Ok(None) => {
                sparse += 1;
                continue;
            }
            Err(e) => {
                eprintln!("sentence {}: {}", tree.sentence_id, e);
                invalid += 1;
                continue;
            }
        };
        match apply_mapping(tree, &mu) {
            Ok(Some(_)) => instances.extend(extract_instances(tree, &mu, &a.language)),
            Ok(None) => crossing += 1,
            Err(e) => {
                eprintln!("sentence {}: {}", tree.sentence_id, e);
                invalid += 1;
            }
        }
    }
    eprintln!(
        "{} instances from {} sentences; rejected {} sparse, {} crossing, {} invalid",
        instances.len(),
        src.len() - sparse - crossing - invalid,
        sparse,
        crossing,
        invalid
    );
    write_text(&a.out, &instances_to_tsv(&instances))
}

fn cmd_train(a: &TrainArgs, seed: u64) -> anyhow::Result<()> {
    let mut instances = Vec::new();
    for path in &a.instances {
        instances.extend(
            instances_from_tsv(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?,
        );
    }
    let mut sentences = Vec::new();
    for path in &a.sentences {
        sentences.extend(read_trees(path)?);
    }
    let pretrained = match &a.pretrained {
        Some(p) => Some(parse_pretrained(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?),
        None => None,
    };
    let mut hp = Hyperparams::default();
    a.hyper.apply(&mut hp);
    let outcome = reorder_model::train(&instances, &sentences, &hp, seed, pretrained.as_ref())?;
    for e in &outcome.log {
        eprintln!(
            "epoch {}\ttrain nll {:.4}\theldout nll {:.4}\theldout acc {:.4}",
            e.epoch, e.train_nll, e.heldout_nll, e.heldout_accuracy
        );
    }
    if let Some(log) = &a.log {
        write_text(log, &log_to_tsv(&outcome.log))?;
    }
    model_io::save(&a.model, &outcome.model).with_context(|| format!("writing {}", a.model.display()))?;
    Ok(())
}

fn cmd_reorder_classifier(a: &ReorderClassifierArgs) -> anyhow::Result<()> {
    let trees = read_trees(&a.input)?;
    let model = model_io::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let (out, skipped) = classify_corpus(&trees, &model, &a.language);
    report_skipped(&skipped);
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_codeswitch(a: &CodeswitchArgs) -> anyhow::Result<()> {
    let trees = read_trees(&a.input)?;
    let lexicon = match (&a.lexicon, &a.bitext_src) {
        (Some(path), _) => TranslationLexicon::from_tsv(&read_text(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        (None, Some(src_path)) => {
            let src = read_trees(src_path)?;
            let tgt = read_trees(a.bitext_tgt.as_deref().expect("required by clap"))?;
            let sets = load_alignments(
                &src,
                &tgt,
                a.align.as_deref().expect("required by clap"),
                a.align_rev.as_deref(),
                a.pos_filter,
                a.pos_table.as_deref(),
            )?;
            build_lexicon(src.iter().zip(&tgt).zip(&sets).map(|((s, t), al)| AlignedPair {
                language: a.language.as_deref().unwrap_or(&s.language),
                source: &s.tokens,
                target: &t.tokens,
                alignment: al,
            }))
        }
        (None, None) => bail!("codeswitch needs --lexicon or --bitext-src/--bitext-tgt/--align"),
    };
    if let Some(path) = &a.lexicon_out {
        write_text(path, &lexicon.to_tsv())?;
    }
    let out: Vec<DepTree> = trees
        .iter()
        .map(|t| match &a.language {
            Some(lang) => {
                let mut t = t.clone();
                let original = std::mem::replace(&mut t.language, lang.clone());
                let mut switched = code_switch(&t, &lexicon);
                switched.language = original;
                switched
            }
            None => code_switch(t, &lexicon),
        })
        .collect();
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for path in &a.input {
        let trees = read_trees(path)?;
        if trees.len() <= a.max {
            out.extend(trees);
            continue;
        }
        let mut keep = sample(&mut rng, trees.len(), a.max).into_vec();
        keep.sort_unstable();
        let keep: HashSet<usize> = keep.into_iter().collect();
        out.extend(trees.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, t)| t));
    }
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_ensemble(a: &EnsembleArgs) -> anyhow::Result<()> {
    let base = read_trees(&a.base)?;
    let rule = read_trees(&a.rule)?;
    let clf = read_trees(&a.clf)?;
    let stats = read_stats(&a.stats, &a.options)?;
    let config = EnsembleConfig::new(a.european, stats);
    let out = ensemble_corpus(&base, &rule, &clf, &config)?;
    write_text(&a.out, &emit_conllu(&out))
}

fn cmd_eval(a: &EvalArgs) -> anyhow::Result<()> {
    let gold = read_trees(&a.gold)?;
    let punct = if a.punct_by_deprel { Punct::ByDeprel } else { Punct::ByUpos };
    let mut report = String::new();
    if let Some(pred_path) = &a.pred {
        let pred = read_trees(pred_path)?;
        let att = attachment(&gold, &pred, punct)?;
        report.push_str(&format!("tokens\t{}\n", att.scored));
        report.push_str(&format!("UAS\t{:.4}\n", att.uas()));
        report.push_str(&format!("LAS\t{:.4}\n", att.las()));
        for tag in &a.head_pos {
            let f = head_pos_fscore(&gold, &pred, tag, punct)?;
            report.push_str(&format!(
                "head {}\tP {:.4}\tR {:.4}\tF {:.4}\n",
                tag, f.precision, f.recall, f.f1
            ));
        }
    } else if !a.head_pos.is_empty() {
        bail!("--head-pos needs --pred");
    }
    for path in &a.trigram {
        let other = read_trees(path)?;
        let c = pos_trigram_cosine(&gold, &other).with_context(|| format!("comparing {}", path.display()))?;
        report.push_str(&format!("trigram cosine {}\t{:.4}\n", path.display(), c));
    }
    if report.is_empty() {
        bail!("nothing to evaluate: give --pred or --trigram");
    }
    write_text(&a.out, &report)
}

fn cmd_demo(a: &DemoArgs, seed: u64) -> anyhow::Result<()> {
    let config = DemoConfig {
        parallel_sentences: a.parallel_sentences,
        treebank_sentences: a.treebank_sentences,
        test_sentences: a.test_sentences,
        seed,
        ..DemoConfig::default()
    };
    let outcome = run_demo(&config)?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, trees) in &outcome.corpora {
            write_text(&dir.join(format!("{}.conllu", name)), &emit_conllu(trees))?;
        }
        write_text(&dir.join("source-stats.tsv"), &outcome.source_stats.to_tsv())?;
        write_text(&dir.join("target-stats.tsv"), &outcome.target_stats.to_tsv())?;
    }
    print!("{}", outcome.report);
    Ok(())
}

/// Append `--key value` for config entries whose flag was not given.
fn apply_config(mut argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--config");
    let inline = argv
        .iter()
        .find_map(|a| a.to_str().and_then(|s| s.strip_prefix("--config=")).map(PathBuf::from));
    let path = match (pos, inline) {
        (Some(i), _) => match argv.get(i + 1) {
            Some(p) => PathBuf::from(p),
            None => return Ok(argv),
        },
        (None, Some(p)) => p,
        (None, None) => return Ok(argv),
    };
    let text = read_text(&path)?;

    let root = Cli::command();
    let sub_name = argv.iter().skip(1).filter_map(|a| a.to_str()).find(|a| root.find_subcommand(a).is_some());
    let sub = sub_name.and_then(|n| root.find_subcommand(n));
    let given: HashSet<String> = argv
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();

    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if given.contains(&key) || key == "config" {
            continue;
        }
        let arg = sub
            .and_then(|s| s.get_arguments().find(|a| a.get_long() == Some(key.as_str())))
            .or_else(|| root.get_arguments().find(|a| a.get_long() == Some(key.as_str())));
        let Some(arg) = arg else {
            // keys for other subcommands are allowed in shared files
            continue;
        };
        if arg.get_action().takes_values() {
            argv.push(format!("--{}", key).into());
            argv.push(value.into());
        } else if matches!(value, "true" | "1" | "yes") {
            argv.push(format!("--{}", key).into());
        }
    }
    Ok(argv)
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        par::init_threads(jobs);
    }
    match &cli.command {
        Command::Project(a) => cmd_project(a),
        Command::DenseFilter(a) => cmd_dense(a),
        Command::Dirstats(a) => cmd_dirstats(a),
        Command::ReorderRule(a) => cmd_reorder_rule(a),
        Command::ExtractReorderData(a) => cmd_extract(a),
        Command::TrainClassifier(a) => cmd_train(a, cli.seed),
        Command::ReorderClassifier(a) => cmd_reorder_classifier(a),
        Command::Codeswitch(a) => cmd_codeswitch(a),
        Command::Sample(a) => cmd_sample(a, cli.seed),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Demo(a) => cmd_demo(a, cli.seed),
    }
}

/// Parse `argv` (including the program name) and run; returns the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match apply_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {:#}", e);
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {:#}", e);
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "min_ratio = 0.5\nmin-span=3\nalpha=true\nunknown=1\n").unwrap();
        let argv: Vec<OsString> = ["ud-reorder", "dense-filter", "--in", "x", "--min-span", "7", "--config"]
            .iter()
            .map(OsString::from)
            .chain([cfg.clone().into_os_string()])
            .collect();
        let out = apply_config(argv).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert!(s.ends_with(&["--min-ratio".to_string(), "0.5".to_string()]));
        assert_eq!(s.iter().filter(|a| *a == "--min-span").count(), 1);
        let cli = Cli::try_parse_from(out).unwrap();
        match cli.command {
            Command::DenseFilter(a) => {
                assert_eq!(a.min_ratio, 0.5);
                assert_eq!(a.min_span, 7);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn usage_errors_are_nonzero() {
        assert_eq!(run(["ud-reorder"]), 2);
        assert_eq!(run(["ud-reorder", "frobnicate"]), 2);
        assert_eq!(run(["ud-reorder", "dirstats"]), 2);
        assert_eq!(run(["ud-reorder", "--help"]), 0);
    }
}
