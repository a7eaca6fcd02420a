use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};
use varfam_annotate::{AnnotationStore, AppState, FamilySet};
use varfam_core::artifact::{
    load_config, read_families_jsonl, write_families_jsonl, write_json, write_summary_csv, RunConfig,
};
use varfam_core::bench::{evaluate_recovery, generate_corpus, random_pairing, read_ground_truth, GeneratorSpec};
use varfam_core::corpus::CorpusStats;
use varfam_core::embed::{EmbeddingModel, TrainingReport};
use varfam_core::pipeline::{induce_stage, train_stage};

use crate::args::{
    BenchCommand, Cli, Command, EvaluateArgs, GenerateArgs, InduceArgs, Overrides, PipelineArgs, ServeArgs, TrainArgs,
};
use crate::Failure;

pub const MODEL_FILE: &str = "model.bin";
pub const STATS_FILE: &str = "stats.json";
pub const TRAIN_METADATA_FILE: &str = "train_metadata.json";
pub const FAMILIES_FILE: &str = "families.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const INDUCE_METADATA_FILE: &str = "induce_metadata.json";

type Outcome = Result<(), Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(message.into()))
}

pub fn run(cli: Cli) -> Outcome {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Train(args) => train(config_path, args),
        Command::Induce(args) => induce(config_path, args),
        Command::Pipeline(args) => pipeline(config_path, args),
        Command::Serve(args) => serve(args),
        Command::Bench(BenchCommand::Generate(args)) => bench_generate(args),
        Command::Bench(BenchCommand::Evaluate(args)) => bench_evaluate(config_path, args),
    }
}

/// Loads the configuration file (or the defaults) and applies command-line
/// overrides. Every problem here is a configuration error.
fn resolve_config(
    path: Option<&Path>,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    overrides: &Overrides,
) -> Result<RunConfig, Failure> {
    let mut config = match path {
        Some(p) => load_config(p).map_err(|e| Failure::Usage(anyhow::Error::new(e).context("loading configuration")))?,
        None => RunConfig::default(),
    };
    if corpus.is_some() {
        config.corpus = corpus;
    }
    if out.is_some() {
        config.out = out;
    }
    if let Some(mode) = overrides.mode {
        config.mode = mode;
    }
    if let Some(seed) = overrides.seed {
        config.embedding.rng_seed = seed;
    }
    if let Some(workers) = overrides.workers {
        config.workers = workers;
    }
    config.validate()?;
    Ok(config)
}

fn print_resolved(config: &RunConfig) {
    let echo = json!({ "config": config.echo(), "config_hash": config.config_hash() });
    print_json(&echo);
}

/// Pretty JSON on stdout; a closed pipe (`| head`) is not an error.
fn print_json(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("json values serialise");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| usage(format!("`--{flag}` is required (or set `{flag}` in the configuration)")))
}

fn create_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(Failure::Runtime)
}

fn metadata_base(command: &str, config: &RunConfig) -> serde_json::Map<String, Value> {
    let mut meta = serde_json::Map::new();
    meta.insert("command".into(), json!(command));
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert("config".into(), config.echo());
    meta.insert("config_hash".into(), json!(config.config_hash()));
    meta
}

fn run_training(corpus: &Path, model_path: &Path, out: &Path, config: &RunConfig) -> Result<(CorpusStats, EmbeddingModel), Failure> {
    let start = Instant::now();
    let (stats, model, report) = train_stage(corpus, config)?;
    model.save(model_path)?;
    stats.write_json(&out.join(STATS_FILE))?;
    let meta = train_metadata(config, corpus, model_path, &stats, &report, start.elapsed().as_secs_f64());
    write_json(&out.join(TRAIN_METADATA_FILE), &meta)?;
    log::info!("model written to {}", model_path.display());
    Ok((stats, model))
}

fn train_metadata(
    config: &RunConfig,
    corpus: &Path,
    model_path: &Path,
    stats: &CorpusStats,
    report: &TrainingReport,
    seconds: f64,
) -> Value {
    let mut meta = metadata_base("train", config);
    meta.insert("corpus".into(), json!(corpus));
    meta.insert("model".into(), json!(model_path));
    meta.insert(
        "corpus_stats".into(),
        json!({
            "records": stats.records,
            "records_with_dimension": stats.records_with_dimension,
            "skipped": stats.skipped,
            "skipped_total": stats.skipped.total(),
            "token_total": stats.token_total,
            "distinct_tokens": stats.tokens.len(),
            "mentions_dropped": stats.mentions_dropped,
            "non_alphanumeric_dropped": stats.non_alphanumeric_dropped,
        }),
    );
    meta.insert(
        "notes".into(),
        json!([
            "whitespace chunks with no letter or digit (punctuation-only tokens, most emoji) are dropped",
            "@-mentions are dropped before tokenisation",
        ]),
    );
    meta.insert("training".into(), json!(report));
    meta.insert("seconds".into(), json!(seconds));
    Value::Object(meta)
}

fn run_induction(stats: &CorpusStats, model: &EmbeddingModel, out: &Path, config: &RunConfig) -> Outcome {
    let start = Instant::now();
    let (families, report) = induce_stage(stats, model, config)?;
    let hash = config.config_hash();
    let written = write_families_jsonl(&families, &hash, &out.join(FAMILIES_FILE))?;
    let rows = write_summary_csv(&families, &out.join(SUMMARY_FILE))?;
    let mut meta = metadata_base("induce", config);
    meta.insert("report".into(), json!(report));
    meta.insert("families_written".into(), json!(written));
    meta.insert("summary_rows".into(), json!(rows));
    if config.mode == varfam_core::induce::Mode::Open {
        meta.insert(
            "notes".into(),
            json!(["open-mode stars are not deduplicated; overlapping_tokens counts tokens in more than one kept family"]),
        );
    }
    meta.insert("seconds".into(), json!(start.elapsed().as_secs_f64()));
    write_json(&out.join(INDUCE_METADATA_FILE), &Value::Object(meta))?;
    println!(
        "{} families kept of {} induced; wrote {}",
        report.families_kept,
        report.families_induced,
        out.join(FAMILIES_FILE).display()
    );
    Ok(())
}

fn train(config_path: Option<&Path>, args: TrainArgs) -> Outcome {
    let config = resolve_config(config_path, args.corpus, args.out, &args.overrides)?;
    if args.overrides.dry_run {
        print_resolved(&config);
        return Ok(());
    }
    let corpus = required(&config.corpus, "corpus")?;
    let out = required(&config.out, "out")?;
    create_dir(out)?;
    let model_path = args.model.unwrap_or_else(|| out.join(MODEL_FILE));
    let (_, model) = run_training(corpus, &model_path, out, &config)?;
    println!("trained {} word vectors; wrote {}", model.vocabulary().len(), model_path.display());
    Ok(())
}

fn induce(config_path: Option<&Path>, args: InduceArgs) -> Outcome {
    let mut config = resolve_config(config_path, None, args.out, &args.overrides)?;
    if args.overrides.dry_run {
        print_resolved(&config);
        return Ok(());
    }
    let out = required(&config.out, "out")?.to_path_buf();
    let stats_path = args
        .stats
        .unwrap_or_else(|| args.model.parent().unwrap_or(Path::new(".")).join(STATS_FILE));
    let model = EmbeddingModel::load(&args.model)?;
    let stats = CorpusStats::read_json(&stats_path)?;
    // The model and statistics fix the embedding and ingestion settings.
    if *model.config() != config.embedding {
        log::warn!("embedding settings differ from the configuration; using those stored in the model");
        config.embedding = model.config().clone();
    }
    if stats.config != config.ingest {
        log::warn!("ingestion settings differ from the configuration; using those stored in the statistics");
        config.ingest = stats.config.clone();
    }
    create_dir(&out)?;
    run_induction(&stats, &model, &out, &config)
}

fn pipeline(config_path: Option<&Path>, args: PipelineArgs) -> Outcome {
    let config = resolve_config(config_path, args.corpus, args.out, &args.overrides)?;
    if args.overrides.dry_run {
        print_resolved(&config);
        return Ok(());
    }
    let corpus = required(&config.corpus, "corpus")?;
    let out = required(&config.out, "out")?;
    create_dir(out)?;
    let model_path = args.model.unwrap_or_else(|| out.join(MODEL_FILE));
    let (stats, model) = run_training(corpus, &model_path, out, &config)?;
    run_induction(&stats, &model, out, &config)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("cannot listen for ctrl-c: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                log::error!("cannot listen for SIGTERM: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {}
        () = terminate => {}
    }
    log::info!("shutting down");
}

fn serve(args: ServeArgs) -> Outcome {
    let families = FamilySet::load(&args.families)?;
    let annotations = args
        .annotations
        .unwrap_or_else(|| args.families.parent().unwrap_or(Path::new(".")).join("annotations.jsonl"));
    let store = AnnotationStore::open(&annotations).context("opening annotation store")?;
    log::info!(
        "{} families, {} annotations in {}",
        families.len(),
        store.len(),
        annotations.display()
    );
    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.bind)
            .await
            .with_context(|| format!("binding {}", args.bind))?;
        let local = listener.local_addr().context("reading bound address")?;
        println!("listening on http://{local}");
        varfam_annotate::serve(listener, AppState::new(families, store), shutdown_signal())
            .await
            .context("serving")
    })?;
    Ok(())
}

fn bench_generate(args: GenerateArgs) -> Outcome {
    let mut spec = GeneratorSpec::default();
    let GenerateArgs {
        out,
        seed,
        families,
        min_variants,
        max_variants,
        users,
        records,
        zipf_exponent,
        distractors,
    } = args;
    spec.rng_seed = seed.unwrap_or(spec.rng_seed);
    spec.num_families = families.unwrap_or(spec.num_families);
    spec.min_variants = min_variants.unwrap_or(spec.min_variants);
    spec.max_variants = max_variants.unwrap_or(spec.max_variants);
    spec.users = users.unwrap_or(spec.users);
    spec.records = records.unwrap_or(spec.records);
    spec.zipf_exponent = zipf_exponent.unwrap_or(spec.zipf_exponent);
    spec.distractors = distractors.unwrap_or(spec.distractors);
    spec.validate()?;
    let corpus = generate_corpus(&spec)?;
    create_dir(&out)?;
    corpus.write_corpus(&out.join("corpus.jsonl"))?;
    corpus.write_truth(&out.join("truth.json"))?;
    write_json(&out.join("generator_spec.json"), &spec)?;
    println!(
        "wrote {} records with {} planted families to {}",
        corpus.lines.len(),
        corpus.families.len(),
        out.display()
    );
    Ok(())
}

fn bench_evaluate(config_path: Option<&Path>, args: EvaluateArgs) -> Outcome {
    let config = resolve_config(config_path, None, None, &Overrides::none())?;
    let truth = read_ground_truth(&args.truth)?;
    if truth.is_empty() {
        return Err(usage(format!("{} lists no families", args.truth.display())));
    }
    let found: Vec<Vec<String>> = read_families_jsonl(&args.families)?
        .into_iter()
        .map(|f| f.members.into_iter().map(|m| m.token).collect())
        .collect();

    let learnable: Option<BTreeSet<String>> = match &args.stats {
        Some(path) => {
            let stats = CorpusStats::read_json(path)?;
            Some(
                stats
                    .tokens
                    .iter()
                    .filter(|(t, s)| {
                        s.corpus_frequency >= config.embedding.min_count
                            && t.chars().count() >= config.induction.min_len
                    })
                    .map(|(t, _)| t.clone())
                    .collect(),
            )
        }
        None => None,
    };
    let universe: Vec<String> = match &learnable {
        Some(l) => l.iter().cloned().collect(),
        None => found
            .iter()
            .flatten()
            .cloned()
            .chain(truth.iter().flat_map(|f| f.members()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let metrics = evaluate_recovery(&found, &truth, learnable.as_ref());
    let baseline = evaluate_recovery(&random_pairing(&found, &universe, args.seed), &truth, learnable.as_ref());
    let report = json!({
        "metrics": metrics,
        "random_baseline": baseline,
        "dominates_random_f1": metrics.pair_f1 > baseline.pair_f1,
        "learnable_tokens": learnable.as_ref().map(BTreeSet::len),
        "found_families": found.len(),
        "planted_families": truth.len(),
    });
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    print_json(&report);
    Ok(())
}

impl Overrides {
    fn none() -> Overrides {
        Overrides {
            mode: None,
            seed: None,
            workers: None,
            dry_run: false,
        }
    }
}
