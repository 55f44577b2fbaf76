//! The `hgs` command-line tool.
//!
//! Subcommands: `search`, `bench`, `gen-data`, `filter`, `prm-metrics`,
//! `render-trace`. Every subcommand accepts `--config <file>`; flags
//! override file values; `--seed` is mandatory for stochastic runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hgs_core::generator::{Generator, GeneratorError, SamplingParams, ScriptedGenerator, StepSample};
use hgs_core::label::RewardLabel;
use hgs_core::mutation::RuleSet;
use hgs_core::reward::{
    CollapseNeutral, ConstantRewardModel, LabelNoise, RewardError, RewardModel, RewardRequest,
    TableRewardModel,
};
use hgs_core::search::{run_search, NeutralPolicy, RootExhaustedPolicy, SearchConfig};
use hgs_core::synthetic::{OracleRewardModel, SuiteSpec, SyntheticGenerator, SyntheticSuite};
use hgs_core::trace::SearchTrace;

use crate::bench::{
    extract_answer, run_benchmark, sample_and_filter, BenchmarkProblem, Method, ProblemKind,
};
use crate::config::{EnvConfig, FileConfig};
use crate::dataset::{
    build_dataset, read_jsonl, write_jsonl, DatasetOptions, SeedProblem,
};
use crate::files::{
    load_rule_file, load_script_file, read_problems, read_trace, write_json_report, write_trace,
};
use crate::remote::{RemoteConfig, RemoteGenerator, RemoteRewardModel};
use crate::render::render_trace;
use crate::sandbox::{Sandbox, SandboxDefaults};

#[derive(Parser)]
#[command(
    name = "hgs",
    version,
    about = "Reward-guided greedy search over stepwise generations, with a mutation-based step-reward dataset builder for code"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run one guided search for a single question
    Search(SearchCmd),
    /// Evaluate a method over a problem suite
    Bench(BenchCmd),
    /// Build a step-level reward dataset from seed problems
    GenData(GenDataCmd),
    /// Sample k completions per problem and filter on step verdicts
    Filter(FilterCmd),
    /// Compute reward model metrics from gold labels and predictions
    PrmMetrics(PrmMetricsCmd),
    /// Pretty-print a search trace file
    RenderTrace(RenderTraceCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NeutralPolicyArg {
    FirstCreated,
    SeededRandom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootPolicyArg {
    FinalizeFromRoot,
    Fail,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cot,
    HgsPrm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NeutralAsArg {
    Positive,
    Negative,
}

/// Search budget and decoding flags shared by search/bench/filter.
#[derive(Args)]
pub struct SearchOpts {
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Max children per node (B)
    #[arg(long)]
    pub max_bandwidth: Option<usize>,
    /// Iteration budget (T)
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// End-of-sequence marker (repeatable)
    #[arg(long = "eos-marker")]
    pub eos_markers: Vec<String>,
    #[arg(long)]
    pub step_delimiter: Option<String>,
    #[arg(long, value_enum)]
    pub neutral_policy: Option<NeutralPolicyArg>,
    #[arg(long, value_enum)]
    pub root_exhausted_policy: Option<RootPolicyArg>,
}

#[derive(Args)]
pub struct SamplingOpts {
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub top_p: Option<f64>,
    #[arg(long)]
    pub top_k: Option<u32>,
    #[arg(long)]
    pub max_step_tokens: Option<usize>,
}

/// Which generator backs the run: a script file, a remote endpoint, or a
/// seeded synthetic suite.
#[derive(Args)]
pub struct GeneratorOpts {
    /// Scripted generator JSON file
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Remote completion endpoint URL (env: HGS_GENERATOR_URL)
    #[arg(long)]
    pub generator_url: Option<String>,
    /// Generate a synthetic suite of this many problems
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Synthetic: probability a sampled step leaves the correct branch
    #[arg(long)]
    pub noise_p: Option<f64>,
    #[arg(long)]
    pub min_depth: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub branching: Option<usize>,
}

/// Which reward model scores steps.
#[derive(Args)]
pub struct RewardOpts {
    /// Exact-match table loaded from a step-reward JSONL file
    #[arg(long)]
    pub reward_table: Option<PathBuf>,
    /// Remote scoring endpoint URL (env: HGS_REWARD_URL)
    #[arg(long)]
    pub reward_url: Option<String>,
    /// True-label oracle over the synthetic suite
    #[arg(long)]
    pub oracle: bool,
    /// Oracle label corruption probability
    #[arg(long)]
    pub oracle_corruption: Option<f64>,
    /// Degenerate model labeling every step positive
    #[arg(long)]
    pub all_positive: bool,
    /// Ablation: collapse neutral verdicts into this label at scoring time
    #[arg(long, value_enum)]
    pub neutral_as: Option<NeutralAsArg>,
}

#[derive(Args)]
pub struct SearchCmd {
    #[command(flatten)]
    pub search: SearchOpts,
    #[command(flatten)]
    pub sampling: SamplingOpts,
    #[command(flatten)]
    pub generator: GeneratorOpts,
    #[command(flatten)]
    pub reward: RewardOpts,
    /// Question text (defaults to the first synthetic problem's question)
    #[arg(long)]
    pub question: Option<String>,
    /// File containing the question text
    #[arg(long, conflicts_with = "question")]
    pub question_file: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Write the search trace JSON here
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchCmd {
    #[command(flatten)]
    pub search: SearchOpts,
    #[command(flatten)]
    pub sampling: SamplingOpts,
    #[command(flatten)]
    pub generator: GeneratorOpts,
    #[command(flatten)]
    pub reward: RewardOpts,
    /// Benchmark problems JSONL (alternative to --synthetic)
    #[arg(long)]
    pub problems: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenDataCmd {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed problems JSONL
    #[arg(long)]
    pub seed_problems: PathBuf,
    /// Output dataset JSONL
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest JSON (corpus/rule hashes, counts)
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
    /// Operator rule table JSON; compiled-in defaults when omitted
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Disable the bracket-literal ±1 shift
    #[arg(long)]
    pub no_slice_shift: bool,
    /// Also emit positives for blank/comment-only lines
    #[arg(long)]
    pub keep_trivial_lines: bool,
    /// Interpreter argv, e.g. --interpreter python3
    #[arg(long, num_args = 1..)]
    pub interpreter: Option<Vec<String>>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    /// Max concurrent sandbox processes
    #[arg(long)]
    pub process_budget: Option<usize>,
    /// Retain per-run sandbox artifacts here
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct FilterCmd {
    #[command(flatten)]
    pub search: SearchOpts,
    #[command(flatten)]
    pub sampling: SamplingOpts,
    #[command(flatten)]
    pub generator: GeneratorOpts,
    #[command(flatten)]
    pub reward: RewardOpts,
    #[arg(long)]
    pub problems: Option<PathBuf>,
    /// Samples per problem
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PrmMetricsCmd {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Gold dataset JSONL
    #[arg(long)]
    pub dataset: PathBuf,
    /// Predictions JSONL (same schema, label = prediction)
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderTraceCmd {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trace JSON produced by `search --trace-out`
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Generator chosen at the command line.
pub enum AnyGenerator {
    Scripted(ScriptedGenerator),
    Synthetic(SyntheticGenerator),
    Remote(RemoteGenerator),
}

impl Generator for AnyGenerator {
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<StepSample, GeneratorError> {
        match self {
            AnyGenerator::Scripted(g) => g.next_step(state, params, seed),
            AnyGenerator::Synthetic(g) => g.next_step(state, params, seed),
            AnyGenerator::Remote(g) => g.next_step(state, params, seed),
        }
    }

    fn complete(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<String, GeneratorError> {
        match self {
            AnyGenerator::Scripted(g) => g.complete(state, params, seed),
            AnyGenerator::Synthetic(g) => g.complete(state, params, seed),
            AnyGenerator::Remote(g) => g.complete(state, params, seed),
        }
    }
}

/// Reward model chosen at the command line.
pub enum BaseReward {
    Oracle(OracleRewardModel),
    Table(TableRewardModel),
    Remote(RemoteRewardModel),
    Constant(ConstantRewardModel),
}

impl RewardModel for BaseReward {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        match self {
            BaseReward::Oracle(m) => m.score_step(request),
            BaseReward::Table(m) => m.score_step(request),
            BaseReward::Remote(m) => m.score_step(request),
            BaseReward::Constant(m) => m.score_step(request),
        }
    }
}

pub enum AnyReward {
    Plain(BaseReward),
    Collapsed(CollapseNeutral<BaseReward>),
}

impl RewardModel for AnyReward {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        match self {
            AnyReward::Plain(m) => m.score_step(request),
            AnyReward::Collapsed(m) => m.score_step(request),
        }
    }
}

/// Settings after merging flags, environment, config file, and defaults.
struct Resolved {
    search: SearchConfig,
    sampling: SamplingParams,
    file: FileConfig,
    env: EnvConfig,
}

fn resolve(
    search: &SearchOpts,
    sampling: &SamplingOpts,
    seed: u64,
    default_temperature: f64,
) -> Result<Resolved> {
    let file = FileConfig::load_opt(search.config.as_deref())
        .with_context(|| "loading --config file")?;
    let env = EnvConfig::from_env();
    let defaults = SearchConfig::default();

    let eos_markers = if !search.eos_markers.is_empty() {
        search.eos_markers.clone()
    } else {
        file.eos_markers.clone().unwrap_or(defaults.eos_markers)
    };
    let search_config = SearchConfig {
        max_bandwidth: search
            .max_bandwidth
            .or(file.max_bandwidth)
            .unwrap_or(defaults.max_bandwidth),
        max_iterations: search
            .max_iterations
            .or(file.max_iterations)
            .unwrap_or(defaults.max_iterations),
        eos_markers,
        step_delimiter: search
            .step_delimiter
            .clone()
            .or_else(|| file.step_delimiter.clone())
            .unwrap_or(defaults.step_delimiter),
        neutral_policy: match search.neutral_policy {
            Some(NeutralPolicyArg::FirstCreated) => NeutralPolicy::FirstCreated,
            Some(NeutralPolicyArg::SeededRandom) => NeutralPolicy::SeededRandom,
            None => file.neutral_policy.unwrap_or(defaults.neutral_policy),
        },
        root_exhausted_policy: match search.root_exhausted_policy {
            Some(RootPolicyArg::FinalizeFromRoot) => RootExhaustedPolicy::FinalizeFromRoot,
            Some(RootPolicyArg::Fail) => RootExhaustedPolicy::Fail,
            None => file
                .root_exhausted_policy
                .unwrap_or(defaults.root_exhausted_policy),
        },
        rng_seed: seed,
    };
    search_config.validate()?;

    let sampling_defaults = SamplingParams::default();
    let sampling_params = SamplingParams {
        temperature: sampling
            .temperature
            .or(file.temperature)
            .unwrap_or(default_temperature),
        top_p: sampling.top_p.or(file.top_p).unwrap_or(sampling_defaults.top_p),
        top_k: sampling.top_k.or(file.top_k),
        max_step_tokens: sampling
            .max_step_tokens
            .or(file.max_step_tokens)
            .unwrap_or(sampling_defaults.max_step_tokens),
        stop_sequences: Vec::new(),
    };
    sampling_params.validate()?;

    Ok(Resolved {
        search: search_config,
        sampling: sampling_params,
        file,
        env,
    })
}

fn remote_config(resolved: &Resolved, url: String) -> RemoteConfig {
    let mut config = RemoteConfig::new(url);
    config.auth_token = resolved
        .env
        .auth_token
        .clone()
        .or_else(|| resolved.file.auth_token.clone());
    if let Some(secs) = resolved
        .env
        .request_timeout_secs
        .or(resolved.file.request_timeout_secs)
    {
        config.timeout = Duration::from_secs(secs);
    }
    if let Some(inflight) = resolved.file.max_inflight {
        config.max_inflight = inflight;
    }
    config
}

/// Builds the synthetic suite and its benchmark problems when
/// `--synthetic N` is requested.
fn build_suite(
    generator: &GeneratorOpts,
    resolved: &Resolved,
    seed: u64,
) -> Result<Option<(Arc<SyntheticSuite>, Vec<BenchmarkProblem>)>> {
    let Some(size) = generator.synthetic else {
        return Ok(None);
    };
    if size == 0 {
        bail!("--synthetic needs at least one problem");
    }
    let spec = SuiteSpec {
        size,
        seed,
        min_depth: generator.min_depth.unwrap_or(2),
        max_depth: generator.max_depth.unwrap_or(4),
        branching: generator.branching.unwrap_or(3),
        noise_p: generator.noise_p.unwrap_or(0.3),
        eos_marker: resolved.search.eos_markers[0].clone(),
        delimiter: resolved.search.step_delimiter.clone(),
    };
    let suite = Arc::new(SyntheticSuite::generate(&spec));
    let problems = suite
        .trees()
        .iter()
        .enumerate()
        .map(|(i, tree)| BenchmarkProblem {
            problem_id: format!("syn-{i:05}"),
            prompt: tree.question.clone(),
            gold_answer: tree.correct_answer.clone(),
            kind: ProblemKind::MathAnswer,
            test_code: None,
        })
        .collect();
    Ok(Some((suite, problems)))
}

fn build_generator(
    opts: &GeneratorOpts,
    resolved: &Resolved,
    suite: Option<&Arc<SyntheticSuite>>,
) -> Result<AnyGenerator> {
    if let Some(suite) = suite {
        return Ok(AnyGenerator::Synthetic(SyntheticGenerator::new(Arc::clone(
            suite,
        ))));
    }
    if let Some(script) = &opts.script {
        let generator = load_script_file(script, &resolved.search.eos_markers)?;
        return Ok(AnyGenerator::Scripted(generator));
    }
    let url = opts
        .generator_url
        .clone()
        .or_else(|| resolved.env.generator_url.clone())
        .or_else(|| resolved.file.generator_url.clone());
    if let Some(url) = url {
        return Ok(AnyGenerator::Remote(RemoteGenerator::new(
            remote_config(resolved, url),
            resolved.search.step_delimiter.clone(),
            resolved.search.eos_markers.clone(),
        )));
    }
    bail!("no generator selected: pass --script, --generator-url, or --synthetic");
}

fn build_reward(
    opts: &RewardOpts,
    resolved: &Resolved,
    suite: Option<&Arc<SyntheticSuite>>,
    seed: u64,
) -> Result<Option<AnyReward>> {
    let base = if opts.oracle {
        let suite = suite
            .ok_or_else(|| anyhow::anyhow!("--oracle requires --synthetic"))?;
        let corruption = opts.oracle_corruption.unwrap_or(0.0);
        let oracle = if corruption > 0.0 {
            OracleRewardModel::with_noise(
                Arc::clone(suite),
                LabelNoise::uniform(corruption),
                seed,
            )
        } else {
            OracleRewardModel::perfect(Arc::clone(suite))
        };
        Some(BaseReward::Oracle(oracle))
    } else if let Some(path) = &opts.reward_table {
        let examples = read_jsonl(path)?;
        let table = TableRewardModel::from_pairs(examples.into_iter().map(|e| {
            (
                RewardRequest::new(e.previous_data, e.step),
                e.label,
            )
        }));
        Some(BaseReward::Table(table))
    } else if opts.all_positive {
        Some(BaseReward::Constant(ConstantRewardModel(
            RewardLabel::Positive,
        )))
    } else {
        let url = opts
            .reward_url
            .clone()
            .or_else(|| resolved.env.reward_url.clone())
            .or_else(|| resolved.file.reward_url.clone());
        url.map(|url| BaseReward::Remote(RemoteRewardModel::new(remote_config(resolved, url))))
    };

    Ok(base.map(|base| match opts.neutral_as {
        Some(NeutralAsArg::Positive) => {
            AnyReward::Collapsed(CollapseNeutral::new(base, RewardLabel::Positive))
        }
        Some(NeutralAsArg::Negative) => {
            AnyReward::Collapsed(CollapseNeutral::new(base, RewardLabel::Negative))
        }
        None => AnyReward::Plain(base),
    }))
}

fn sandbox_from_config(resolved: &Resolved) -> Result<Option<Sandbox>> {
    let mut defaults = SandboxDefaults::default();
    if let Some(interpreter) = &resolved.file.interpreter {
        defaults.interpreter_command = interpreter.clone();
    }
    if let Some(secs) = resolved.file.sandbox_timeout_secs {
        defaults.timeout = Duration::from_secs(secs);
    }
    if let Some(budget) = resolved.file.process_budget {
        defaults.process_budget = budget;
    }
    // The sandbox is only needed for code-kind problems; a missing
    // interpreter surfaces per problem rather than failing math-only runs.
    Ok(Sandbox::new(defaults).ok())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Search(cmd) => cmd_search(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
        Command::GenData(cmd) => cmd_gen_data(cmd),
        Command::Filter(cmd) => cmd_filter(cmd),
        Command::PrmMetrics(cmd) => cmd_prm_metrics(cmd),
        Command::RenderTrace(cmd) => cmd_render_trace(cmd),
    }
}

fn cmd_search(cmd: SearchCmd) -> Result<()> {
    let resolved = resolve(&cmd.search, &cmd.sampling, cmd.seed, 0.1)?;
    let suite = build_suite(&cmd.generator, &resolved, cmd.seed)?;
    let question = if let Some(question) = cmd.question {
        question
    } else if let Some(path) = &cmd.question_file {
        std::fs::read_to_string(path)?
    } else if let Some((suite, _)) = &suite {
        suite.trees()[0].question.clone()
    } else {
        bail!("pass --question, --question-file, or --synthetic");
    };

    let suite_arc = suite.as_ref().map(|(s, _)| s);
    let mut generator = build_generator(&cmd.generator, &resolved, suite_arc)?;
    let mut reward = build_reward(&cmd.reward, &resolved, suite_arc, cmd.seed)?
        .ok_or_else(|| anyhow::anyhow!(
            "no reward model selected: pass --oracle, --reward-table, --reward-url, or --all-positive"
        ))?;

    let outcome = run_search(
        &question,
        &mut generator,
        &mut reward,
        &resolved.search,
        &resolved.sampling,
    )
    .map_err(|e| anyhow::anyhow!("search failed: {e}"))?;

    println!("termination: {:?}", outcome.termination);
    println!("iterations_used: {}", outcome.iterations_used);
    println!(
        "stats: expansions={} reward_calls={} backtracks={} neutral_descents={}",
        outcome.stats.expansions,
        outcome.stats.reward_calls,
        outcome.stats.backtracks,
        outcome.stats.neutral_descents
    );
    let cleaned = crate::bench::strip_eos_markers(&outcome.final_text, &resolved.search.eos_markers);
    match extract_answer(&cleaned) {
        Some(answer) => println!("extracted_answer: {answer}"),
        None => println!("extracted_answer: (none)"),
    }
    println!("--- final text ---");
    println!("{}", outcome.final_text);

    if let Some(path) = cmd.trace_out {
        write_trace(&path, &SearchTrace::from_outcome(&outcome))?;
        eprintln!("trace written to {}", path.display());
    }
    Ok(())
}

fn cmd_bench(cmd: BenchCmd) -> Result<()> {
    let resolved = resolve(&cmd.search, &cmd.sampling, cmd.seed, 0.1)?;
    let suite = build_suite(&cmd.generator, &resolved, cmd.seed)?;
    let problems = match (&cmd.problems, &suite) {
        (Some(path), _) => read_problems(path)?,
        (None, Some((_, problems))) => problems.clone(),
        (None, None) => bail!("pass --problems or --synthetic"),
    };
    let suite_arc = suite.as_ref().map(|(s, _)| s);
    let mut generator = build_generator(&cmd.generator, &resolved, suite_arc)?;
    let mut reward = build_reward(&cmd.reward, &resolved, suite_arc, cmd.seed)?;

    let method = match cmd.method {
        MethodArg::Cot => Method::Cot,
        MethodArg::HgsPrm => Method::HgsPrm,
    };
    let sandbox = sandbox_from_config(&resolved)?;
    let (report, _traces) = run_benchmark(
        &problems,
        method,
        &mut generator,
        reward.as_mut(),
        &resolved.search,
        &resolved.sampling,
        cmd.seed,
        sandbox.as_ref(),
    )?;

    let correct = report.records.iter().filter(|r| r.correct).count();
    match report.accuracy {
        Some(accuracy) => println!(
            "method={:?} problems={} accuracy={:.4} ({}/{})",
            report.method,
            report.records.len(),
            accuracy,
            correct,
            report.records.len()
        ),
        None => println!("method={:?} problems=0 accuracy=undefined", report.method),
    }
    let errors = report.records.iter().filter(|r| r.error.is_some()).count();
    if errors > 0 {
        println!("problems with errors: {errors}");
    }
    if let Some(path) = cmd.report_out {
        write_json_report(&path, &report)?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_gen_data(cmd: GenDataCmd) -> Result<()> {
    let file = FileConfig::load_opt(cmd.config.as_deref())?;
    let mut defaults = SandboxDefaults::default();
    if let Some(interpreter) = cmd.interpreter.or(file.interpreter) {
        defaults.interpreter_command = interpreter;
    }
    if let Some(secs) = cmd.timeout_secs.or(file.sandbox_timeout_secs) {
        defaults.timeout = Duration::from_secs(secs);
    }
    if let Some(budget) = cmd.process_budget.or(file.process_budget) {
        defaults.process_budget = budget;
    }
    defaults.debug_dir = cmd.debug_dir;
    let sandbox = Sandbox::new(defaults)?;

    let rules = match &cmd.rules {
        Some(path) => load_rule_file(path, !cmd.no_slice_shift)?,
        None => {
            let mut rules = RuleSet::default();
            rules.slice_literal_shift = !cmd.no_slice_shift;
            rules
        }
    };
    let problems: Vec<SeedProblem> = crate::dataset::read_jsonl_records(&cmd.seed_problems)?;
    let options = DatasetOptions {
        skip_blank_and_comment_lines: !cmd.keep_trivial_lines,
    };

    let (examples, manifest) = build_dataset(&problems, &rules, &sandbox, &options)?;
    let count = write_jsonl(&examples, &cmd.out)?;
    println!(
        "wrote {count} examples ({} positive / {} neutral / {} negative) from {} problems",
        manifest.label_counts.positive,
        manifest.label_counts.neutral,
        manifest.label_counts.negative,
        manifest.problems
    );
    if let Some(path) = cmd.manifest_out {
        write_json_report(&path, &manifest)?;
        eprintln!("manifest written to {}", path.display());
    }
    Ok(())
}

fn cmd_filter(cmd: FilterCmd) -> Result<()> {
    // Table 3 setting: sampling runs hotter than search by default.
    let resolved = resolve(&cmd.search, &cmd.sampling, cmd.seed, 0.8)?;
    let suite = build_suite(&cmd.generator, &resolved, cmd.seed)?;
    let problems = match (&cmd.problems, &suite) {
        (Some(path), _) => read_problems(path)?,
        (None, Some((_, problems))) => problems.clone(),
        (None, None) => bail!("pass --problems or --synthetic"),
    };
    let suite_arc = suite.as_ref().map(|(s, _)| s);
    let mut generator = build_generator(&cmd.generator, &resolved, suite_arc)?;
    let mut reward = build_reward(&cmd.reward, &resolved, suite_arc, cmd.seed)?
        .ok_or_else(|| anyhow::anyhow!(
            "no reward model selected: pass --oracle, --reward-table, --reward-url, or --all-positive"
        ))?;
    let sandbox = sandbox_from_config(&resolved)?;

    let report = sample_and_filter(
        &problems,
        cmd.k,
        &mut generator,
        &mut reward,
        &resolved.sampling,
        &resolved.search.step_delimiter,
        &resolved.search.eos_markers,
        cmd.seed,
        sandbox.as_ref(),
    )?;

    let fmt = |value: Option<f64>| match value {
        Some(v) => format!("{v:.4}"),
        None => "undefined".to_string(),
    };
    println!(
        "k={} samples={} accuracy_before={} accuracy_after={} retained_fraction={} empty_filtered_problems={}",
        report.k,
        report.records.len(),
        fmt(report.accuracy_before),
        fmt(report.accuracy_after),
        fmt(report.retained_fraction),
        report.problems_with_empty_filtered_set
    );
    if let Some(path) = cmd.report_out {
        write_json_report(&path, &report)?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_prm_metrics(cmd: PrmMetricsCmd) -> Result<()> {
    let report = crate::bench::report_prm_metrics(&cmd.dataset, &cmd.predictions)?;
    println!("records: {}", report.records);
    for label in RewardLabel::ALL {
        let m = report.metrics.for_label(label);
        let show = |v: hgs_core::metrics::MetricValue| match v.value() {
            Some(x) => format!("{x:.4}"),
            None => "undefined".to_string(),
        };
        println!(
            "{label}: precision={} recall={}",
            show(m.precision),
            show(m.recall)
        );
    }
    println!("penalty_miss_rate: {:.4}", report.metrics.penalty_miss_rate);
    if let Some(path) = cmd.out {
        write_json_report(&path, &report)?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_render_trace(cmd: RenderTraceCmd) -> Result<()> {
    let trace = read_trace(&cmd.trace)?;
    let rendered = render_trace(&trace);
    match cmd.out {
        Some(path) => {
            std::fs::write(&path, &rendered)?;
            eprintln!("rendered trace written to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

/// True when the path exists and is non-empty; small guard shared by
/// tests.
pub fn non_empty_file(path: &Path) -> bool {
    std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false)
}
