//! Step-level reward dataset construction for code.
//!
//! Ground-truth lines become positive examples directly. For the rest,
//! every line is mutated one operator at a time, the mutated program runs
//! against the problem's unit tests, and the mutated step is labeled
//! neutral when the tests still pass and negative when they fail, error,
//! or time out. Labels come from nowhere else.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use hgs_core::label::RewardLabel;
use hgs_core::mutation::{apply_variant, enumerate_mutations, MutantVariant, MutationError, RuleSet};

use crate::sandbox::{ExecStatus, Sandbox, SandboxError};

/// One seed task: prompt, reference solution, and its unit tests. The
/// reference must pass its tests; [`validate_seed_problem`] checks that at
/// ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProblem {
    pub problem_id: String,
    pub prompt: String,
    pub ground_truth_program: Vec<String>,
    pub test_code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleOrigin {
    GroundTruth,
    Mutant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleMeta {
    pub problem_id: String,
    pub line_index: usize,
    pub origin: ExampleOrigin,
    /// Mutation tag (`"+= -> -="`); present exactly for mutants.
    pub rule: Option<String>,
    /// Sandbox outcome; present exactly for mutants.
    pub exec_status: Option<ExecStatus>,
}

/// One (previous data, step, label) training record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRewardExample {
    pub previous_data: String,
    pub step: String,
    pub label: RewardLabel,
    pub meta: ExampleMeta,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("ground truth for {problem_id} does not pass its tests (status {status:?})")]
    ValidationFailed {
        problem_id: String,
        status: ExecStatus,
    },
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
}

/// Build switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetOptions {
    /// Skip blank and comment-only lines when emitting positive examples;
    /// they carry no reasoning content. Mutants are unaffected (such
    /// lines have nothing to mutate anyway).
    pub skip_blank_and_comment_lines: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            skip_blank_and_comment_lines: true,
        }
    }
}

fn is_blank_or_comment(line: &str) -> bool {
    let trimmed = line.trim_start();
    trimmed.is_empty() || trimmed.starts_with('#')
}

/// `prompt` plus lines `0..n` joined by newlines; with `n == 0` this is
/// the bare prompt. Appending `"\n" + lines[n]` yields the next prefix.
pub fn previous_data(prompt: &str, lines: &[String], n: usize) -> String {
    if n == 0 {
        prompt.to_string()
    } else {
        format!("{}\n{}", prompt, lines[..n].join("\n"))
    }
}

/// Runs the reference solution against its tests; anything but a pass
/// rejects the problem.
pub fn validate_seed_problem(sandbox: &Sandbox, problem: &SeedProblem) -> Result<(), DatasetError> {
    let program = problem.ground_truth_program.join("\n");
    let result = sandbox.run_tests(&sandbox.request(program, problem.test_code.clone()))?;
    if result.status != ExecStatus::Pass {
        return Err(DatasetError::ValidationFailed {
            problem_id: problem.problem_id.clone(),
            status: result.status,
        });
    }
    Ok(())
}

/// One positive example per ground-truth line (blank/comment lines
/// skipped by default).
pub fn build_positive_examples(
    problem: &SeedProblem,
    options: &DatasetOptions,
) -> Vec<StepRewardExample> {
    let lines = &problem.ground_truth_program;
    lines
        .iter()
        .enumerate()
        .filter(|(_, line)| !options.skip_blank_and_comment_lines || !is_blank_or_comment(line))
        .map(|(n, line)| StepRewardExample {
            previous_data: previous_data(&problem.prompt, lines, n),
            step: line.clone(),
            label: RewardLabel::Positive,
            meta: ExampleMeta {
                problem_id: problem.problem_id.clone(),
                line_index: n,
                origin: ExampleOrigin::GroundTruth,
                rule: None,
                exec_status: None,
            },
        })
        .collect()
}

fn mutant_example(
    problem: &SeedProblem,
    variant: &MutantVariant,
    status: ExecStatus,
) -> StepRewardExample {
    let label = if status == ExecStatus::Pass {
        RewardLabel::Neutral
    } else {
        RewardLabel::Negative
    };
    StepRewardExample {
        previous_data: previous_data(
            &problem.prompt,
            &problem.ground_truth_program,
            variant.line_index,
        ),
        step: variant.mutated_line.clone(),
        label,
        meta: ExampleMeta {
            problem_id: problem.problem_id.clone(),
            line_index: variant.line_index,
            origin: ExampleOrigin::Mutant,
            rule: Some(variant.rule_tag()),
            exec_status: Some(status),
        },
    }
}

/// Index-addressed parallel map over `tasks`, bounded by `workers`
/// threads. Results come back in task order regardless of completion
/// order.
fn run_parallel<T, R, F>(tasks: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let workers = workers.max(1).min(tasks.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= tasks.len() {
                    break;
                }
                let result = f(&tasks[index]);
                slots.lock().unwrap()[index] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every task completed"))
        .collect()
}

/// Enumerates all mutants of every line, executes each mutated program
/// against the tests (bounded by the sandbox's process budget), and
/// labels the mutated step neutral on pass and negative otherwise.
/// Per-variant sandbox failures are recorded as errors, never aborting
/// the batch.
pub fn build_mutant_examples(
    problem: &SeedProblem,
    rules: &RuleSet,
    sandbox: &Sandbox,
) -> Result<Vec<StepRewardExample>, DatasetError> {
    let lines = &problem.ground_truth_program;
    let mut variants = Vec::new();
    for line_index in 0..lines.len() {
        variants.extend(enumerate_mutations(lines, line_index, rules)?);
    }

    let statuses = run_parallel(&variants, sandbox.defaults().process_budget, |variant| {
        let mutated = apply_variant(lines, variant).expect("variant from this program");
        let request = sandbox.request(mutated.join("\n"), problem.test_code.clone());
        match sandbox.run_tests(&request) {
            Ok(result) => result.status,
            Err(_) => ExecStatus::Error,
        }
    });

    Ok(variants
        .iter()
        .zip(statuses)
        .map(|(variant, status)| mutant_example(problem, variant, status))
        .collect())
}

/// Per-label example counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

impl LabelCounts {
    pub fn tally<'a, I: IntoIterator<Item = &'a StepRewardExample>>(examples: I) -> Self {
        let mut counts = Self::default();
        for example in examples {
            match example.label {
                RewardLabel::Positive => counts.positive += 1,
                RewardLabel::Neutral => counts.neutral += 1,
                RewardLabel::Negative => counts.negative += 1,
            }
        }
        counts
    }
}

/// Provenance record written next to a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub corpus_sha256: String,
    pub rule_table_sha256: String,
    pub interpreter_command: Vec<String>,
    pub timeout_secs: u64,
    pub problems: usize,
    pub examples: usize,
    pub label_counts: LabelCounts,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Builds the full dataset over a corpus: validates every problem, emits
/// positives and judged mutants grouped per line, and assembles the
/// manifest. Output order is (problem, line, positive-then-variants), so
/// identical inputs produce identical bytes.
pub fn build_dataset(
    problems: &[SeedProblem],
    rules: &RuleSet,
    sandbox: &Sandbox,
    options: &DatasetOptions,
) -> Result<(Vec<StepRewardExample>, DatasetManifest), DatasetError> {
    let mut sorted: Vec<&SeedProblem> = problems.iter().collect();
    sorted.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));

    let mut examples = Vec::new();
    for problem in &sorted {
        validate_seed_problem(sandbox, problem)?;
        let positives = build_positive_examples(problem, options);
        let mutants = build_mutant_examples(problem, rules, sandbox)?;
        // Group per line: the positive example first, then its variants.
        let line_count = problem.ground_truth_program.len();
        for line_index in 0..line_count {
            examples.extend(
                positives
                    .iter()
                    .filter(|e| e.meta.line_index == line_index)
                    .cloned(),
            );
            examples.extend(
                mutants
                    .iter()
                    .filter(|e| e.meta.line_index == line_index)
                    .cloned(),
            );
        }
    }

    let corpus_canonical: Vec<u8> = {
        let mut buf = Vec::new();
        for problem in &sorted {
            buf.extend_from_slice(&serde_json::to_vec(problem).expect("serializable"));
            buf.push(b'\n');
        }
        buf
    };
    let manifest = DatasetManifest {
        corpus_sha256: sha256_hex(&corpus_canonical),
        rule_table_sha256: sha256_hex(&serde_json::to_vec(rules).expect("serializable")),
        interpreter_command: sandbox.defaults().interpreter_command.clone(),
        timeout_secs: sandbox.defaults().timeout.as_secs(),
        problems: sorted.len(),
        examples: examples.len(),
        label_counts: LabelCounts::tally(&examples),
    };
    Ok((examples, manifest))
}

/// Writes one JSON object per line, UTF-8. Returns the record count.
pub fn write_jsonl(examples: &[StepRewardExample], path: &Path) -> Result<usize, DatasetError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for example in examples {
        serde_json::to_writer(&mut writer, example).map_err(|e| DatasetError::Schema {
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(examples.len())
}

/// Reads a dataset back; a malformed record reports its 1-based line
/// number.
pub fn read_jsonl(path: &Path) -> Result<Vec<StepRewardExample>, DatasetError> {
    read_jsonl_records(path)
}

/// Line-by-line JSONL reader shared by the dataset and benchmark file
/// formats. Blank lines are rejected, not skipped: a dataset file is
/// exactly one record per line.
pub fn read_jsonl_records<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<T>, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let record = serde_json::from_str(&line).map_err(|e| DatasetError::Schema {
            line: index + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
