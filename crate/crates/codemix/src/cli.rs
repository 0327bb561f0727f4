//! Command-line entry point tying the modules into the batch pipeline.
//!
//! Every run prints a JSON report to stdout that embeds the run manifest
//! (inputs, config hash, version, counts); `--manifest <path>` additionally
//! writes the manifest to a file. Exit codes: 0 success, 1 data error,
//! 2 config/usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::backend::build_backend;
use crate::config::{BackendRole, ToolConfig};
use crate::corpus::{self, PiiStatus, Post, SplitSpec};
use crate::evalstats::{
    self, JudgePreference, MarginMode, Segment, SystemScores,
};
use crate::filters::{run_filter_bank, BackendScorer, ParallelPair, Scorer, TableScorer};
use crate::lid::{self, LidDecision, LidLabel};
use crate::metrics;
use crate::pii::PiiScanner;
use crate::pipeline::{
    self, collect_stage2_corpus, stage1_seed, stage2_iterate, stage3_qa, BackendTranslator,
    SourceSentence, StubTranslator, Translator,
};
use crate::textcore::{analyze, LexiconSet};

#[derive(Parser)]
#[command(
    name = "codemix",
    version,
    about = "Corpus curation and quality-aware data augmentation for code-mixed text"
)]
struct Cli {
    /// TOML config file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write the run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code-mixing statistics (CMI/SPF) over a JSONL corpus, per split.
    Stats(StatsArgs),
    /// Deterministic train/dev/test split.
    Split(SplitArgs),
    /// PII scan + redaction with a discard policy.
    Pii(PiiArgs),
    /// Two-stage code-mixing identification.
    Lid(LidArgs),
    /// Quality-filter bank over candidate parallel pairs.
    Filter(FilterArgs),
    /// Three-stage augmentation pipeline.
    Augment(AugmentArgs),
    /// Statistical evaluation harness.
    Eval(EvalArgs),
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Comma-separated train,dev,test fractions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    fractions: String,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PiiArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Pattern file overriding the built-in set.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// `redact` replaces spans; `discard-all` drops any record with a finding.
    #[arg(long, default_value = "redact")]
    policy: String,
}

#[derive(Args)]
struct LidArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Route every record to the ensemble, skipping the stage-1 gate.
    #[arg(long)]
    stage2_only: bool,
    /// Gold-labeled JSONL (`{id, gold_label}`) to evaluate against.
    #[arg(long)]
    eval: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Sidecar JSONL for rejected pairs (default: `<output>.rejected.jsonl`).
    #[arg(long)]
    rejected: Option<PathBuf>,
    /// Write the filter report JSON here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Disable a filter by name (repeatable).
    #[arg(long)]
    disable: Vec<String>,
    /// Compute the report without writing any output files.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct AugmentArgs {
    /// Monolingual embedded-language sentences (`{id, text}` JSONL).
    #[arg(long)]
    source: PathBuf,
    /// Natural code-mixed seed posts for stage 1.
    #[arg(long)]
    seed_corpus: Option<PathBuf>,
    /// Resume from this checkpoint directory (overrides config).
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Use deterministic stub backends regardless of config.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(subcommand)]
    op: EvalOp,
}

#[derive(Subcommand)]
enum EvalOp {
    /// Paired permutation significance test on segment scores.
    Sigtest {
        /// JSONL of `{id, score_a, score_b}`.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        n_resamples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Metric-vs-judge agreement under the tie margin.
    Agreement {
        #[arg(long)]
        scores: PathBuf,
        /// JSONL of `{id, verdict}` with verdict in {A, B, Tie, BothBad}.
        #[arg(long)]
        prefs: PathBuf,
        #[arg(long)]
        margin: Option<f64>,
        /// Apply the margin as an absolute score gap instead of relative.
        #[arg(long)]
        absolute: bool,
    },
    /// Win/loss/tie/bothbad percentages over judge preferences.
    JudgeAggregate {
        #[arg(long)]
        prefs: PathBuf,
    },
    /// Precision/recall/F1 from confusion counts.
    LidPrf {
        #[arg(long)]
        tp: usize,
        #[arg(long)]
        fp: usize,
        #[arg(long, name = "fn")]
        fn_: usize,
        #[arg(long)]
        tn: usize,
    },
}

enum CliError {
    /// Bad data: exit 1.
    Data(String),
    /// Bad config or usage: exit 2.
    Config(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Config(m) => m,
        }
    }
}

macro_rules! data_err {
    ($e:expr) => {
        $e.map_err(|err| CliError::Data(err.to_string()))
    };
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    subcommand: String,
    inputs: Vec<String>,
    config_hash: String,
    seed: u64,
    counts: BTreeMap<String, u64>,
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are success; anything else is usage (2).
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match &cli.config {
        Some(path) => match ToolConfig::from_path(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        None => ToolConfig::default(),
    };
    match dispatch(&cli, &config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, config: &ToolConfig) -> Result<(), CliError> {
    match &cli.command {
        Command::Stats(args) => cmd_stats(args, config, cli),
        Command::Split(args) => cmd_split(args, config, cli),
        Command::Pii(args) => cmd_pii(args, config, cli),
        Command::Lid(args) => cmd_lid(args, config, cli),
        Command::Filter(args) => cmd_filter(args, config, cli),
        Command::Augment(args) => cmd_augment(args, config, cli),
        Command::Eval(args) => cmd_eval(args, config, cli),
    }
}

fn load_lexicons(config: &ToolConfig) -> Result<LexiconSet, CliError> {
    let set = match (&config.paths.lexicon_matrix, &config.paths.lexicon_embedded) {
        (Some(matrix), Some(embedded)) => LexiconSet::from_paths(matrix, embedded)
            .map_err(|e| CliError::Config(e.to_string()))?,
        (None, None) => LexiconSet::default(),
        _ => {
            return Err(CliError::Config(
                "paths.lexicon_matrix and paths.lexicon_embedded must be set together".into(),
            ))
        }
    };
    Ok(set.with_policy(config.ambiguous_tag))
}

fn emit_report(
    cli: &Cli,
    config: &ToolConfig,
    subcommand: &str,
    inputs: &[&Path],
    counts: BTreeMap<String, u64>,
    body: serde_json::Value,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: subcommand.to_string(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        config_hash: config.hash(),
        seed: config.seed,
        counts,
    };
    if let Some(path) = &cli.manifest {
        let raw = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        std::fs::write(path, raw)
            .map_err(|e| CliError::Data(format!("cannot write manifest: {e}")))?;
    }
    let report = json!({ "manifest": manifest, "report": body });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_stats(args: &StatsArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let lexicons = load_lexicons(config)?;
    let (posts, read_report) =
        data_err!(corpus::read_jsonl::<Post>(&args.input, config.malformed_tolerance))?;
    let mut groups: BTreeMap<String, Vec<Vec<crate::textcore::Token>>> = BTreeMap::new();
    for post in &posts {
        let key = post.split.clone().unwrap_or_else(|| "all".into());
        groups.entry(key).or_default().push(analyze(&post.text, &lexicons));
    }
    let mut body = BTreeMap::new();
    for (split_name, records) in &groups {
        let slices: Vec<&[crate::textcore::Token]> =
            records.iter().map(Vec::as_slice).collect();
        let stats = data_err!(metrics::corpus_stats(slices.into_iter()))?;
        body.insert(split_name.clone(), stats);
    }
    let mut counts = BTreeMap::new();
    counts.insert("records".into(), posts.len() as u64);
    counts.insert("malformed_lines".into(), read_report.errors.len() as u64);
    emit_report(
        cli,
        config,
        "stats",
        &[&args.input],
        counts,
        json!({ "splits": body, "read_errors": read_report.errors }),
    )
}

fn cmd_split(args: &SplitArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let parts: Vec<f64> = args
        .fractions
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --fractions: {e}")))?;
    if parts.len() != 3 {
        return Err(CliError::Config(
            "--fractions needs exactly three comma-separated values".into(),
        ));
    }
    let seed = args.seed.unwrap_or(config.seed);
    let spec = SplitSpec::new(parts[0], parts[1], parts[2], seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (posts, _) =
        data_err!(corpus::read_jsonl::<Post>(&args.input, config.malformed_tolerance))?;
    let total = posts.len();
    // Discarded records are excluded up front; they must never reach a split.
    let clean: Vec<Post> = posts
        .into_iter()
        .filter(|p| p.pii_status != PiiStatus::Discarded)
        .collect();
    let n_discarded = total - clean.len();
    if n_discarded > 0 {
        log::warn!("excluded {n_discarded} discarded records from the split");
    }
    let splits = data_err!(corpus::split(clean, &spec))?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create out dir: {e}")))?;
    for (name, records) in [
        ("train", &splits.train),
        ("dev", &splits.dev),
        ("test", &splits.test),
    ] {
        data_err!(corpus::write_jsonl(
            records,
            &args.out_dir.join(format!("{name}.jsonl"))
        ))?;
    }
    let mut counts = BTreeMap::new();
    counts.insert("input".into(), total as u64);
    counts.insert("excluded_discarded".into(), n_discarded as u64);
    counts.insert("train".into(), splits.train.len() as u64);
    counts.insert("dev".into(), splits.dev.len() as u64);
    counts.insert("test".into(), splits.test.len() as u64);
    emit_report(
        cli,
        config,
        "split",
        &[&args.input],
        counts,
        json!({ "out_dir": args.out_dir, "seed": seed }),
    )
}

fn cmd_pii(args: &PiiArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let scanner = match args.patterns.as_ref().or(config.paths.pii_patterns.as_ref()) {
        Some(path) => {
            PiiScanner::from_pattern_file(path).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => PiiScanner::default(),
    };
    let discard_all = match args.policy.as_str() {
        "redact" => false,
        "discard-all" => true,
        other => {
            return Err(CliError::Config(format!(
                "unknown --policy '{other}', expected redact|discard-all"
            )))
        }
    };
    let (posts, _) =
        data_err!(corpus::read_jsonl::<Post>(&args.input, config.malformed_tolerance))?;
    let mut out = Vec::with_capacity(posts.len());
    let mut counts = BTreeMap::new();
    for mut post in posts {
        let result = scanner.sanitize(&post.text);
        let status = match result {
            crate::pii::RedactionResult::Clean { .. } => "clean",
            crate::pii::RedactionResult::Redacted { ref text, .. } if !discard_all => {
                post.text = text.clone();
                "redacted"
            }
            _ => "discarded",
        };
        match status {
            "discarded" => {
                // The original text never reaches the output file.
                post.text = String::new();
                post.pii_status = PiiStatus::Discarded;
                log::info!("pii: discarded record {}", post.id);
            }
            "redacted" => post.pii_status = PiiStatus::Redacted,
            _ => post.pii_status = PiiStatus::Clean,
        }
        *counts.entry(status.to_string()).or_insert(0) += 1;
        out.push(post);
    }
    data_err!(corpus::write_jsonl(&out, &args.output))?;
    let counts: BTreeMap<String, u64> = counts.into_iter().collect();
    emit_report(
        cli,
        config,
        "pii",
        &[&args.input],
        counts,
        json!({ "output": args.output }),
    )
}

fn cmd_lid(args: &LidArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let lexicons = load_lexicons(config)?;
    let backends: Vec<_> = config
        .backends_with_role(BackendRole::Lid)
        .into_iter()
        .map(|entry| {
            build_backend(&entry.backend)
                .map(|b| (b, entry.backend.clone()))
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let (posts, _) =
        data_err!(corpus::read_jsonl::<Post>(&args.input, config.malformed_tolerance))?;
    let mut decisions = Vec::with_capacity(posts.len());
    for post in &posts {
        let tagged = analyze(&post.text, &lexicons);
        let stage1 = lid::stage1_filter(&tagged);
        let decision = if (stage1 || args.stage2_only) && !backends.is_empty() {
            match lid::ensemble_classify(&post.id, &post.text, &backends) {
                Ok(mut d) => {
                    d.stage1_pass = stage1;
                    d
                }
                Err(e) => return Err(CliError::Data(e.to_string())),
            }
        } else {
            LidDecision {
                record_id: post.id.clone(),
                stage1_pass: stage1,
                ensemble_votes: vec![],
                final_label: Some(if stage1 {
                    LidLabel::CodeMixed
                } else {
                    LidLabel::Monolingual
                }),
                rationale: Some("stage1 heuristic only".into()),
            }
        };
        decisions.push(decision);
    }
    if let Some(path) = &args.output {
        data_err!(corpus::write_jsonl(&decisions, path))?;
    }
    let mut body = json!({
        "stage1_pass": decisions.iter().filter(|d| d.stage1_pass).count(),
        "code_mixed": decisions
            .iter()
            .filter(|d| d.final_label == Some(LidLabel::CodeMixed))
            .count(),
    });
    if let Some(gold_path) = &args.eval {
        #[derive(serde::Deserialize)]
        struct GoldRecord {
            id: String,
            gold_label: LidLabel,
        }
        let (gold, _) =
            data_err!(corpus::read_jsonl::<GoldRecord>(gold_path, config.malformed_tolerance))?;
        let gold: Vec<(String, LidLabel)> =
            gold.into_iter().map(|g| (g.id, g.gold_label)).collect();
        let prf = data_err!(lid::evaluate_lid(&decisions, &gold))?;
        body["evaluation"] = serde_json::to_value(&prf).expect("prf serializes");
    }
    let mut counts = BTreeMap::new();
    counts.insert("records".into(), decisions.len() as u64);
    emit_report(cli, config, "lid", &[&args.input], counts, body)
}

fn build_scorer(config: &ToolConfig, role: BackendRole) -> Result<Option<Box<dyn Scorer>>, CliError> {
    match config.backends_with_role(role).first() {
        Some(entry) => {
            let backend =
                build_backend(&entry.backend).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Some(Box::new(BackendScorer::new(
                backend,
                entry.backend.clone(),
            ))))
        }
        None => Ok(None),
    }
}

fn prepare_pairs(
    mut pairs: Vec<ParallelPair>,
    lexicons: &LexiconSet,
) -> Vec<ParallelPair> {
    for pair in &mut pairs {
        if pair.source_tokens.is_empty() {
            pair.source_tokens = crate::textcore::tokenize(&pair.source_text);
        }
        if pair.target_tokens.is_empty() {
            pair.target_tokens = analyze(&pair.target_text, lexicons);
        }
    }
    pairs
}

fn cmd_filter(args: &FilterArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let lexicons = load_lexicons(config)?;
    let mut filter_config = config.pipeline.filter.clone();
    filter_config.disabled.extend(args.disable.iter().cloned());
    let classifier = build_scorer(config, BackendRole::Classifier)?;
    let qe = build_scorer(config, BackendRole::Qe)?;
    let (pairs, _) = data_err!(corpus::read_jsonl::<ParallelPair>(
        &args.input,
        config.malformed_tolerance
    ))?;
    let pairs = prepare_pairs(pairs, &lexicons);
    let outcome = run_filter_bank(
        pairs,
        &filter_config,
        classifier.as_deref(),
        qe.as_deref(),
    );
    if !args.dry_run {
        if let Some(output) = &args.output {
            data_err!(corpus::write_jsonl(&outcome.accepted, output))?;
            let rejected_path = args.rejected.clone().unwrap_or_else(|| {
                let mut p = output.as_os_str().to_owned();
                p.push(".rejected.jsonl");
                PathBuf::from(p)
            });
            data_err!(corpus::write_jsonl(&outcome.rejected, &rejected_path))?;
        }
        if let Some(report_path) = &args.report {
            let raw = serde_json::to_vec_pretty(&outcome.report).expect("report serializes");
            std::fs::write(report_path, raw)
                .map_err(|e| CliError::Data(format!("cannot write report: {e}")))?;
        }
    }
    let mut counts = BTreeMap::new();
    counts.insert("input".into(), outcome.report.input as u64);
    counts.insert("accepted".into(), outcome.accepted.len() as u64);
    counts.insert("rejected".into(), outcome.rejected.len() as u64);
    counts.insert("deferred".into(), outcome.deferred.len() as u64);
    emit_report(
        cli,
        config,
        "filter",
        &[&args.input],
        counts,
        json!({ "dry_run": args.dry_run, "filter_report": outcome.report }),
    )
}

fn cmd_augment(args: &AugmentArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    let lexicons = load_lexicons(config)?;
    let mut pipeline_config = config.pipeline.clone();
    if let Some(dir) = &args.resume {
        pipeline_config.checkpoint_dir = dir.clone();
    }
    let translator: Box<dyn Translator> = if args.dry_run {
        Box::new(StubTranslator)
    } else {
        match config.backends_with_role(BackendRole::Translator).first() {
            Some(entry) => {
                let backend =
                    build_backend(&entry.backend).map_err(|e| CliError::Config(e.to_string()))?;
                Box::new(BackendTranslator::new(backend, entry.backend.clone()))
            }
            None => {
                return Err(CliError::Config(
                    "no translator backend configured; use --dry-run for stubs".into(),
                ))
            }
        }
    };
    type MaybeScorer = Option<Box<dyn Scorer>>;
    let (classifier, qe): (MaybeScorer, MaybeScorer) = if args.dry_run {
        // Deterministic permissive stubs keep dry runs fully offline.
        (
            Some(Box::new(TableScorer {
                name: "stub-classifier".into(),
                scores: Default::default(),
                default: 0.0,
            })),
            Some(Box::new(TableScorer {
                name: "stub-qe".into(),
                scores: Default::default(),
                default: 1.0,
            })),
        )
    } else {
        (
            build_scorer(config, BackendRole::Classifier)?,
            build_scorer(config, BackendRole::Qe)?,
        )
    };

    let mut seed_pairs = Vec::new();
    let mut seed_audit = Vec::new();
    if let Some(seed_path) = &args.seed_corpus {
        let (posts, _) =
            data_err!(corpus::read_jsonl::<Post>(seed_path, config.malformed_tolerance))?;
        let usable: Vec<Post> = posts
            .into_iter()
            .filter(|p| p.pii_status != PiiStatus::Discarded)
            .collect();
        let (pairs, audit) = stage1_seed(&usable, translator.as_ref());
        seed_pairs = pairs;
        seed_audit = audit;
    }

    let (source, _) = data_err!(corpus::read_jsonl::<SourceSentence>(
        &args.source,
        config.malformed_tolerance
    ))?;
    let status = data_err!(stage2_iterate(
        &pipeline_config,
        &source,
        &seed_pairs,
        translator.as_ref(),
        classifier.as_deref(),
        qe.as_deref(),
        &lexicons,
        None,
    ))?;
    let accumulated = data_err!(collect_stage2_corpus(&pipeline_config))?;

    let (final_corpus, qa_report) = match &qe {
        Some(scorer) => {
            let (accepted, report, _deferred) =
                stage3_qa(accumulated, scorer.as_ref(), &pipeline_config.filter);
            (accepted, Some(report))
        }
        None => (accumulated, None),
    };
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| pipeline_config.checkpoint_dir.join("final_corpus.jsonl"));
    data_err!(corpus::write_jsonl(&final_corpus, &output))?;
    let audit_path = pipeline_config.checkpoint_dir.join("audit.jsonl");
    let all_audit: Vec<pipeline::AuditEntry> =
        seed_audit.into_iter().chain(status.audit).collect();
    data_err!(corpus::write_jsonl(&all_audit, &audit_path))?;

    let mut counts = BTreeMap::new();
    counts.insert("seed_pairs".into(), seed_pairs.len() as u64);
    counts.insert("source_sentences".into(), source.len() as u64);
    counts.insert("final_pairs".into(), final_corpus.len() as u64);
    counts.insert("audit_entries".into(), all_audit.len() as u64);
    emit_report(
        cli,
        config,
        "augment",
        &[&args.source],
        counts,
        json!({
            "done": status.done,
            "iterations": status.iterations,
            "qa_report": qa_report,
            "output": output,
        }),
    )
}

fn cmd_eval(args: &EvalArgs, config: &ToolConfig, cli: &Cli) -> Result<(), CliError> {
    match &args.op {
        EvalOp::Sigtest {
            scores,
            n_resamples,
            seed,
        } => {
            let system = read_scores(scores, config)?;
            let result = data_err!(evalstats::paired_permutation_test(
                &system,
                n_resamples.unwrap_or(config.n_resamples),
                seed.unwrap_or(config.seed),
            ))?;
            let mut counts = BTreeMap::new();
            counts.insert("segments".into(), result.n_segments as u64);
            emit_report(
                cli,
                config,
                "eval sigtest",
                &[scores.as_path()],
                counts,
                serde_json::to_value(&result).expect("result serializes"),
            )
        }
        EvalOp::Agreement {
            scores,
            prefs,
            margin,
            absolute,
        } => {
            let system = read_scores(scores, config)?;
            let (preferences, _) = data_err!(corpus::read_jsonl::<JudgePreference>(
                prefs,
                config.malformed_tolerance
            ))?;
            let mode = if *absolute {
                MarginMode::Absolute
            } else {
                config.margin_mode
            };
            let result = data_err!(evalstats::metric_judge_agreement(
                &system,
                &preferences,
                margin.unwrap_or(config.margin),
                mode,
            ))?;
            let mut counts = BTreeMap::new();
            counts.insert("segments".into(), result.total_segments as u64);
            counts.insert("jointly_decided".into(), result.n_decided as u64);
            emit_report(
                cli,
                config,
                "eval agreement",
                &[scores.as_path(), prefs.as_path()],
                counts,
                serde_json::to_value(&result).expect("result serializes"),
            )
        }
        EvalOp::JudgeAggregate { prefs } => {
            let (preferences, _) = data_err!(corpus::read_jsonl::<JudgePreference>(
                prefs,
                config.malformed_tolerance
            ))?;
            let summary = data_err!(evalstats::win_tie_aggregate(&preferences))?;
            let mut counts = BTreeMap::new();
            counts.insert("judgments".into(), preferences.len() as u64);
            emit_report(
                cli,
                config,
                "eval judge-aggregate",
                &[prefs.as_path()],
                counts,
                serde_json::to_value(&summary).expect("summary serializes"),
            )
        }
        EvalOp::LidPrf { tp, fp, fn_, tn } => {
            let prf = evalstats::prf_from_confusion(*tp, *fp, *fn_, *tn);
            emit_report(
                cli,
                config,
                "eval lid-prf",
                &[],
                BTreeMap::new(),
                serde_json::to_value(&prf).expect("prf serializes"),
            )
        }
    }
}

fn read_scores(path: &Path, config: &ToolConfig) -> Result<SystemScores, CliError> {
    let (segments, _) =
        data_err!(corpus::read_jsonl::<Segment>(path, config.malformed_tolerance))?;
    Ok(SystemScores {
        system_a: "A".into(),
        system_b: "B".into(),
        segments,
    })
}
