//! `kgrbr`: train an embedding, mine or import rules, evaluate the reasoner
//! against the embedding baseline and compare rank files.
//!
//! Every flag can also come from a `KGRBR_*` environment variable or from a
//! flat `key = value` file passed with `--config`. Flags win over the
//! environment, the environment wins over the file, the file wins over the
//! built-in defaults.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use kgrbr::eval::{
    build_rule_rich_subset, compare_ranks, read_rank_records, write_delta_rows, write_rank_records,
    OracleCheck,
};
use kgrbr::graph::{load_tsv, write_tsv, ColumnOrder, RawTriple};
use kgrbr::rules::{measure_rule, parse_amie, read_rules, write_rules, ConfidenceKind};
use kgrbr::{
    evaluate, mine_rules, train, EmbeddingModel, EvalConfig, KnowledgeGraph, MinerConfig,
    ModelKind, NegativeSampling, NormOrder, RuleIndex, SearchConfig, TrainConfig, Triplet,
};
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(
    name = "kgrbr",
    version,
    about = "Rule-based reranking of knowledge graph embeddings"
)]
struct Cli {
    /// Flat `key = value` file; keys are flag names (`max-depth` or `max_depth`).
    #[arg(long, global = true, env = "KGRBR_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a TransE or TransH model on train.txt.
    Train(TrainArgs),
    /// Mine rules natively or import an AMIE listing, then score them.
    Rules(RulesArgs),
    /// Rank every test fact with the baseline and with the reasoner.
    Evaluate(EvalArgs),
    /// Select the test facts with the most rules for their relation.
    Subset(SubsetArgs),
    /// Per-query rank differences between two rank files.
    Compare(CompareArgs),
    /// Print dataset statistics as JSON.
    Stats(DataArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Directory holding train.txt and, optionally, valid.txt and test.txt.
    #[arg(long, env = "KGRBR_DATASET")]
    dataset: Option<PathBuf>,
    /// Column order of the dataset files, a permutation of `hrt`.
    #[arg(long, env = "KGRBR_COLUMNS", default_value = "hrt")]
    columns: String,
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long, env = "KGRBR_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    /// transe or transh.
    #[arg(long, env = "KGRBR_MODEL", default_value = "transe")]
    model: String,
    #[arg(long, env = "KGRBR_DIM", default_value_t = 100)]
    dim: usize,
    #[arg(long, env = "KGRBR_LEARNING_RATE", default_value_t = 0.001)]
    learning_rate: f64,
    #[arg(long, env = "KGRBR_MARGIN", default_value_t = 1.0)]
    margin: f64,
    #[arg(long, env = "KGRBR_EPOCHS", default_value_t = 1000)]
    epochs: usize,
    #[arg(long, env = "KGRBR_BATCH_SIZE", default_value_t = 1000)]
    batch_size: usize,
    /// l1 or l2.
    #[arg(long, env = "KGRBR_NORM", default_value = "l2")]
    norm: String,
    /// uniform or bernoulli.
    #[arg(long, env = "KGRBR_NEG_SAMPLING", default_value = "uniform")]
    neg_sampling: String,
    #[arg(long, env = "KGRBR_ORTH_WEIGHT", default_value_t = 0.01)]
    orth_weight: f64,
    #[arg(long, env = "KGRBR_ORTH_EPSILON", default_value_t = 0.001)]
    orth_epsilon: f64,
    /// Master seed; the trainer's seed is derived from it.
    #[arg(long, env = "KGRBR_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RulesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Trained model; defaults to `<out>/model.bin`.
    #[arg(long, env = "KGRBR_MODEL_PATH")]
    model_path: Option<PathBuf>,
    /// Mine rules from the training facts.
    #[arg(long, env = "KGRBR_MINE", conflicts_with = "import")]
    mine: bool,
    /// Import an AMIE output listing instead of mining.
    #[arg(long, env = "KGRBR_IMPORT")]
    import: Option<PathBuf>,
    #[arg(long, env = "KGRBR_MIN_SUPPORT", default_value_t = 2)]
    min_support: u64,
    #[arg(long, env = "KGRBR_MIN_CONFIDENCE", default_value_t = 0.5)]
    min_confidence: f64,
    /// standard or pca.
    #[arg(long, env = "KGRBR_CONFIDENCE", default_value = "standard")]
    confidence: String,
    #[arg(long, env = "KGRBR_MAX_BODY_ATOMS", default_value_t = 2)]
    max_body_atoms: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, env = "KGRBR_MODEL_PATH")]
    model_path: Option<PathBuf>,
    /// Scored rule file; defaults to `<out>/rules.tsv`.
    #[arg(long, env = "KGRBR_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, env = "KGRBR_MAX_DEPTH", default_value_t = 10)]
    max_depth: usize,
    #[arg(long, env = "KGRBR_MAX_POPS", default_value_t = 100_000)]
    max_pops: usize,
    #[arg(long, env = "KGRBR_EPSILON_TIE", default_value_t = 0.0)]
    epsilon_tie: f64,
    /// Rescore only the baseline's best N candidates per query.
    #[arg(long, env = "KGRBR_RERANK_TOP")]
    rerank_top: Option<usize>,
    /// TSV of test facts (head, relation, tail) to evaluate instead of the whole split.
    #[arg(long, env = "KGRBR_SUBSET")]
    subset: Option<PathBuf>,
    /// Check every search result against exhaustive enumeration.
    #[arg(long, env = "KGRBR_ORACLE")]
    oracle: bool,
    #[arg(long, env = "KGRBR_ORACLE_GUARD", default_value_t = 1_000_000)]
    oracle_guard: usize,
    #[arg(long, env = "KGRBR_ORACLE_TOLERANCE", default_value_t = 1e-9)]
    oracle_tolerance: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "KGRBR_THREADS")]
    threads: Option<usize>,
    /// Exit with status 3 when any search hit the pop budget.
    #[arg(long, env = "KGRBR_STRICT")]
    strict: bool,
}

#[derive(Args, Debug)]
struct SubsetArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, env = "KGRBR_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, env = "KGRBR_MIN_RULES", default_value_t = 1)]
    min_rules: usize,
    #[arg(long, env = "KGRBR_LIMIT")]
    limit: Option<usize>,
    /// Defaults to `<out>/subset.tsv`.
    #[arg(long, env = "KGRBR_OUTPUT")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    out: OutArgs,
    /// Rank file whose baseline column is compared.
    #[arg(long, env = "KGRBR_BASELINE")]
    baseline: Option<PathBuf>,
    /// Rank file whose reasoner column is compared; defaults to `--baseline`.
    #[arg(long, env = "KGRBR_EMRBR")]
    emrbr: Option<PathBuf>,
    /// Defaults to `<out>/delta.csv`.
    #[arg(long, env = "KGRBR_OUTPUT")]
    output: Option<PathBuf>,
}

/// A failed run and the exit status it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Guard(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Guard(m) => m,
        }
    }
}

impl From<kgrbr::Error> for Failure {
    fn from(e: kgrbr::Error) -> Self {
        match e {
            kgrbr::Error::Config(_) => Failure::Usage(e.to_string()),
            kgrbr::Error::InstanceTooLarge(_) => Failure::Guard(format!("oracle check: {e}")),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

/// Seed for one stochastic component: the first eight bytes (little endian)
/// of SHA-256 over the master seed's little-endian bytes followed by the
/// component name.
fn derive_seed(master: u64, component: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(master.to_le_bytes())
        .chain_update(component.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn parse_config_file(path: &Path) -> Outcome<Vec<(String, String)>> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!(
                "{}: line {}: expected key = value",
                path.display(),
                n + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").replace('-', "_");
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Parses the command line, folding config file entries in as defaults so
/// explicit flags and environment variables still take precedence.
fn parse_cli() -> Outcome<Cli> {
    let handle = |e: clap::Error| -> Failure {
        use clap::error::ErrorKind;
        let _ = e.print();
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            std::process::exit(0);
        }
        Failure::Usage(String::new())
    };

    let first = Cli::command().try_get_matches().map_err(handle)?;
    let Some(config) = first.get_one::<PathBuf>("config").cloned() else {
        return Cli::from_arg_matches(&first).map_err(handle);
    };
    let entries = parse_config_file(&config)?;
    let sub = first
        .subcommand_name()
        .expect("subcommand is required")
        .to_string();

    let base = Cli::command();
    let known = |id: &str, sc: &clap::Command| sc.get_arguments().any(|a| a.get_id() == id);
    for (key, _) in &entries {
        if key != "config" && !base.get_subcommands().any(|sc| known(key, sc)) {
            return Err(Failure::Usage(format!(
                "{}: unknown key {key:?}",
                config.display()
            )));
        }
    }
    let cmd = base.mut_subcommand(&sub, |mut sc| {
        for (key, value) in &entries {
            if known(key, &sc) {
                sc = sc.mut_arg(key, |a| a.default_value(value.clone()));
            }
        }
        sc
    });
    let matches: ArgMatches = cmd.try_get_matches().map_err(handle)?;
    Cli::from_arg_matches(&matches).map_err(handle)
}

struct Dataset {
    graph: KnowledgeGraph,
    has_test: bool,
}

fn load_dataset(args: &DataArgs) -> Outcome<Dataset> {
    let dir = args
        .dataset
        .as_ref()
        .ok_or_else(|| Failure::Usage("--dataset is required".into()))?;
    let order: ColumnOrder = args.columns.parse()?;
    let train_path = dir.join("train.txt");
    if !train_path.is_file() {
        return Err(Failure::Data(format!(
            "{}: no such file",
            train_path.display()
        )));
    }
    let train = load_tsv(&train_path, order)?;
    let optional = |name: &str| -> Outcome<Option<Vec<RawTriple>>> {
        let p = dir.join(name);
        if p.is_file() {
            Ok(Some(load_tsv(&p, order)?))
        } else {
            Ok(None)
        }
    };
    let valid = optional("valid.txt")?.unwrap_or_default();
    let test = optional("test.txt")?;
    let has_test = test.is_some();
    let graph = KnowledgeGraph::build(&train, &valid, &test.unwrap_or_default());
    log::info!(
        "loaded {}: {} entities, {} relations, {} train facts",
        dir.display(),
        graph.num_entities(),
        graph.num_relations(),
        graph.train().len()
    );
    Ok(Dataset { graph, has_test })
}

fn create_out_dir(out: &Path) -> Outcome {
    fs::create_dir_all(out).map_err(io_failure(out))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(io_failure(path))
}

fn load_model(path: Option<&PathBuf>, out: &Path, g: &KnowledgeGraph) -> Outcome<EmbeddingModel> {
    let path = path.cloned().unwrap_or_else(|| out.join("model.bin"));
    Ok(EmbeddingModel::load_for_graph(&path, g)?)
}

/// Rules from a scored rule file. Rules without a stored score are measured
/// against `model` when one is given.
fn load_rule_index(
    path: &Path,
    g: &KnowledgeGraph,
    model: Option<&EmbeddingModel>,
) -> Outcome<RuleIndex> {
    let file = File::open(path).map_err(io_failure(path))?;
    let rules = read_rules(file, g)?;
    let scored = rules
        .into_iter()
        .map(|r| match (r.omega, model) {
            (Some(omega), _) => Ok((r, omega)),
            (None, Some(m)) => {
                let omega = measure_rule(m, &r)?;
                Ok((r, omega))
            }
            (None, None) => Err(Failure::Data(format!(
                "{}: rule {} has no score",
                path.display(),
                r.display(g)
            ))),
        })
        .collect::<Outcome<Vec<_>>>()?;
    Ok(RuleIndex::from_scored(scored))
}

fn cmd_train(a: &TrainArgs) -> Outcome {
    let cfg = TrainConfig {
        kind: a.model.parse::<ModelKind>()?,
        dim: a.dim,
        learning_rate: a.learning_rate,
        margin: a.margin,
        epochs: a.epochs,
        batch_size: a.batch_size,
        norm: a.norm.parse::<NormOrder>()?,
        neg_sampling: a.neg_sampling.parse::<NegativeSampling>()?,
        seed: derive_seed(a.seed, "train"),
        orth_weight: a.orth_weight,
        orth_epsilon: a.orth_epsilon,
    };
    cfg.validate()?;
    let data = load_dataset(&a.data)?;
    log::info!(
        "training {} k={} for {} epochs (seed {})",
        cfg.kind,
        cfg.dim,
        cfg.epochs,
        cfg.seed
    );
    let outcome = train(&data.graph, &cfg)?;

    create_out_dir(&a.out.out)?;
    let model_path = a.out.out.join("model.bin");
    outcome.model.save(&model_path)?;
    let mut log = String::from("epoch,mean_loss\n");
    for e in &outcome.log {
        log.push_str(&format!("{},{}\n", e.epoch, e.mean_loss));
    }
    write_file(&a.out.out.join("train_log.csv"), log.as_bytes())?;
    eprintln!("wrote {}", model_path.display());
    Ok(())
}

fn miner_config(a: &RulesArgs) -> Outcome<MinerConfig> {
    let confidence = match a.confidence.to_ascii_lowercase().as_str() {
        "standard" | "std" => ConfidenceKind::Standard,
        "pca" => ConfidenceKind::Pca,
        other => {
            return Err(Failure::Usage(format!(
                "unknown confidence {other:?} (standard or pca)"
            )))
        }
    };
    if !(0.0..=1.0).contains(&a.min_confidence) {
        return Err(Failure::Usage("--min-confidence must lie in [0, 1]".into()));
    }
    if !(1..=2).contains(&a.max_body_atoms) {
        return Err(Failure::Usage("--max-body-atoms must be 1 or 2".into()));
    }
    Ok(MinerConfig {
        max_body_atoms: a.max_body_atoms,
        min_support: a.min_support,
        min_confidence: a.min_confidence,
        confidence,
    })
}

fn cmd_rules(a: &RulesArgs) -> Outcome {
    if a.import.is_none() && !a.mine {
        return Err(Failure::Usage("pass --mine or --import <file>".into()));
    }
    let miner = miner_config(a)?;
    let data = load_dataset(&a.data)?;
    let g = &data.graph;
    let model = load_model(a.model_path.as_ref(), &a.out.out, g)?;
    let rules = match (&a.import, a.mine) {
        (Some(path), _) => {
            let file = File::open(path).map_err(io_failure(path))?;
            let import = parse_amie(file, g)?;
            eprintln!(
                "imported {} rules; skipped {} with unknown relations, {} unsupported",
                import.rules.len(),
                import.skipped_unknown_relation,
                import.skipped_unsupported
            );
            import.rules
        }
        (None, true) => {
            let rules = mine_rules(g, &miner);
            eprintln!("mined {} rules", rules.len());
            rules
        }
        (None, false) => unreachable!("checked above"),
    };
    let index = RuleIndex::build(rules, &model)?;

    create_out_dir(&a.out.out)?;
    let path = a.out.out.join("rules.tsv");
    let file = File::create(&path).map_err(io_failure(&path))?;
    write_rules(BufWriter::new(file), &index, g)?;
    eprintln!("wrote {} rules to {}", index.len(), path.display());
    Ok(())
}

/// Maps each listed fact to its first position in the test split.
fn subset_indices(path: &Path, g: &KnowledgeGraph) -> Outcome<Vec<usize>> {
    let mut position: HashMap<Triplet, usize> = HashMap::new();
    for (i, t) in g.test().iter().enumerate() {
        position.entry(*t).or_insert(i);
    }
    load_tsv(path, ColumnOrder::HRT)?
        .iter()
        .enumerate()
        .map(|(line, raw)| {
            g.encode(raw)
                .and_then(|t| position.get(&t).copied())
                .ok_or_else(|| {
                    Failure::Data(format!(
                        "{}: line {}: {}\t{}\t{} is not a test fact",
                        path.display(),
                        line + 1,
                        raw.head,
                        raw.relation,
                        raw.tail
                    ))
                })
        })
        .collect()
}

fn cmd_evaluate(a: &EvalArgs) -> Outcome {
    if let Some(n) = a.rerank_top {
        kgrbr::eval::rerank_window(n)?;
    }
    if a.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let data = load_dataset(&a.data)?;
    let g = &data.graph;
    if !data.has_test || g.test().is_empty() {
        return Err(Failure::Data("dataset has no test facts (test.txt)".into()));
    }
    let model = load_model(a.model_path.as_ref(), &a.out.out, g)?;
    let rules_path = a
        .rules
        .clone()
        .unwrap_or_else(|| a.out.out.join("rules.tsv"));
    let index = load_rule_index(&rules_path, g, Some(&model))?;
    let test_indices = match &a.subset {
        Some(p) => subset_indices(p, g)?,
        None => (0..g.test().len()).collect(),
    };

    let cfg = EvalConfig {
        search: SearchConfig {
            max_depth: a.max_depth,
            max_pops: a.max_pops,
            epsilon_tie: a.epsilon_tie,
        },
        rerank_top: a.rerank_top,
        oracle: a.oracle.then_some(OracleCheck {
            state_guard: a.oracle_guard,
            tolerance: a.oracle_tolerance,
        }),
    };
    log::info!(
        "evaluating {} test facts with {} rules",
        test_indices.len(),
        index.len()
    );
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = a.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let output = pool.install(|| evaluate(g, &model, &index, &test_indices, &cfg))?;
    let report = &output.report;

    create_out_dir(&a.out.out)?;
    let mut json = report.to_json();
    json["config"] = serde_json::json!({
        "queries": test_indices.len(),
        "rules": index.len(),
        "max_depth": a.max_depth,
        "max_pops": a.max_pops,
        "epsilon_tie": a.epsilon_tie,
        "rerank_top": a.rerank_top,
        "oracle": a.oracle,
    });
    let mut text = serde_json::to_string_pretty(&json).expect("metrics serialize");
    text.push('\n');
    write_file(&a.out.out.join("metrics.json"), text.as_bytes())?;
    write_file(&a.out.out.join("metrics.txt"), report.to_table().as_bytes())?;

    let ranks_path = a.out.out.join("ranks.csv");
    write_rank_records(
        File::create(&ranks_path).map_err(io_failure(&ranks_path))?,
        &output.records,
    )?;
    let delta_path = a.out.out.join("delta.csv");
    let deltas = compare_ranks(&output.records, &output.records)?;
    write_delta_rows(
        File::create(&delta_path).map_err(io_failure(&delta_path))?,
        &deltas,
    )?;

    print!("{}", report.to_table());
    std::io::stdout().flush().ok();

    if report.oracle_mismatches > 0 {
        return Err(Failure::Guard(format!(
            "{} of {} searches disagree with exhaustive enumeration",
            report.oracle_mismatches, report.oracle_checks
        )));
    }
    if report.truncated_searches > 0 {
        let msg = format!(
            "{} searches hit the pop budget (--max-pops {})",
            report.truncated_searches, a.max_pops
        );
        if a.strict {
            return Err(Failure::Guard(msg));
        }
        log::warn!("{msg}");
    }
    Ok(())
}

fn cmd_subset(a: &SubsetArgs) -> Outcome {
    let data = load_dataset(&a.data)?;
    let g = &data.graph;
    if !data.has_test {
        return Err(Failure::Data("dataset has no test.txt".into()));
    }
    let rules_path = a
        .rules
        .clone()
        .unwrap_or_else(|| a.out.out.join("rules.tsv"));
    let index = load_rule_index(&rules_path, g, None)?;
    let picked = build_rule_rich_subset(g, &index, a.min_rules, a.limit);
    let triples: Vec<RawTriple> = picked.iter().map(|&i| g.to_raw(&g.test()[i])).collect();

    let path = a
        .output
        .clone()
        .unwrap_or_else(|| a.out.out.join("subset.tsv"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    let mut buf = Vec::new();
    write_tsv(&mut buf, &triples).expect("writing to memory");
    write_file(&path, &buf)?;
    eprintln!(
        "wrote {} of {} test facts to {}",
        picked.len(),
        g.test().len(),
        path.display()
    );
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Outcome {
    let baseline_path = a
        .baseline
        .as_ref()
        .ok_or_else(|| Failure::Usage("--baseline is required".into()))?;
    let emrbr_path = a.emrbr.as_ref().unwrap_or(baseline_path);
    let read =
        |p: &Path| -> Outcome<_> { Ok(read_rank_records(File::open(p).map_err(io_failure(p))?)?) };
    let baseline = read(baseline_path)?;
    let emrbr = read(emrbr_path)?;
    let rows = compare_ranks(&baseline, &emrbr)?;

    let path = a
        .output
        .clone()
        .unwrap_or_else(|| a.out.out.join("delta.csv"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    write_delta_rows(File::create(&path).map_err(io_failure(&path))?, &rows)?;
    let improved = rows.iter().filter(|r| r.delta > 0).count();
    let worse = rows.iter().filter(|r| r.delta < 0).count();
    println!("{} queries: {improved} improved, {worse} worse", rows.len());
    Ok(())
}

fn cmd_stats(a: &DataArgs) -> Outcome {
    let data = load_dataset(a)?;
    let stats = serde_json::to_string_pretty(&data.graph.stats()).expect("stats serialize");
    println!("{stats}");
    Ok(())
}

fn run() -> Outcome {
    let cli = parse_cli()?;
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Rules(a) => cmd_rules(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Subset(a) => cmd_subset(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
