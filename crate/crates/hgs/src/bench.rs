//! Benchmark orchestration: chain-of-thought baseline, reward-guided
//! search runs, sample-then-filter analysis, answer grading, and reward
//! model metric reports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use hgs_core::generator::{Generator, SamplingParams};
use hgs_core::label::RewardLabel;
use hgs_core::metrics::{compute_metrics, ConfusionMatrix3, MetricsError, PrmMetrics};
use hgs_core::reward::{RewardModel, RewardRequest};
use hgs_core::search::{run_search, SearchConfig, Termination};
use hgs_core::seed::{derive_seed, fnv1a};
use hgs_core::trace::SearchTrace;

use crate::dataset::{read_jsonl_records, DatasetError, StepRewardExample};
use crate::sandbox::{ExecStatus, Sandbox};

/// How a problem is graded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Extracted final answer compared against `gold_answer`.
    MathAnswer,
    /// Generated program executed against `test_code`.
    CodeUnitTests,
}

/// One evaluation task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub problem_id: String,
    pub prompt: String,
    pub gold_answer: String,
    pub kind: ProblemKind,
    pub test_code: Option<String>,
}

impl BenchmarkProblem {
    pub fn validate(&self) -> Result<(), BenchError> {
        let message = match self.kind {
            ProblemKind::CodeUnitTests if self.test_code.is_none() => {
                Some("code problems require test_code")
            }
            ProblemKind::MathAnswer if self.gold_answer.is_empty() => {
                Some("math problems require a gold answer")
            }
            _ => None,
        };
        match message {
            Some(message) => Err(BenchError::InvalidProblem {
                problem_id: self.problem_id.clone(),
                message: message.into(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cot,
    HgsPrm,
    SampleFilter,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid problem {problem_id}: {message}")]
    InvalidProblem {
        problem_id: String,
        message: String,
    },
    #[error("method {0:?} requires a reward model")]
    MissingRewardModel(Method),
    #[error("method {0:?} is not handled by run_benchmark; use sample_and_filter")]
    UnsupportedMethod(Method),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("dataset and predictions do not share keys: {missing} gold records lack predictions, {unexpected} predictions lack gold records; first examples: {examples:?}")]
    KeyMismatch {
        missing: usize,
        unexpected: usize,
        examples: Vec<String>,
    },
}

/// Content after the last `The answer is:` marker, up to end of line,
/// trimmed with trailing punctuation stripped. Absence is a value, not an
/// error.
pub fn extract_answer(text: &str) -> Option<String> {
    const MARKER: &str = "The answer is:";
    let index = text.rfind(MARKER)?;
    let after = &text[index + MARKER.len()..];
    let line = after.lines().next().unwrap_or("");
    let answer = line
        .trim()
        .trim_end_matches(['.', ',', ';', ':', '!', '?'])
        .trim();
    (!answer.is_empty()).then(|| answer.to_string())
}

/// Strips commas, whitespace, and currency symbols before comparison.
fn normalize_answer(text: &str) -> String {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',' && !"$€£¥".contains(*c))
        .collect()
}

/// Exact rational value of a numeric string: integers, decimals, and
/// `a/b` fractions. Returns a reduced (numerator, denominator) with the
/// sign on the numerator.
fn parse_rational(text: &str) -> Option<(i128, i128)> {
    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }
    let (sign, rest) = match text.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, text.strip_prefix('+').unwrap_or(text)),
    };
    if rest.is_empty() {
        return None;
    }
    let (numerator, denominator) = if let Some((num, den)) = rest.split_once('/') {
        if num.is_empty() || den.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !den.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let den: i128 = den.parse().ok()?;
        if den == 0 {
            return None;
        }
        (num.parse::<i128>().ok()?, den)
    } else if let Some((whole, frac)) = rest.split_once('.') {
        if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        let scale = 10i128.checked_pow(frac.len() as u32)?;
        let whole: i128 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
        let frac: i128 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        (whole.checked_mul(scale)?.checked_add(frac)?, scale)
    } else {
        if !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        (rest.parse::<i128>().ok()?, 1)
    };
    let divisor = gcd(numerator, denominator).max(1);
    Some((sign * numerator / divisor, denominator / divisor))
}

/// Numeric-normalized comparison: parse both sides as exact rationals
/// when possible, otherwise fall back to case-insensitive string
/// equality. A missing prediction is wrong.
pub fn grade_answer(predicted: Option<&str>, gold: &str) -> bool {
    let Some(predicted) = predicted else {
        return false;
    };
    let p = normalize_answer(predicted);
    let g = normalize_answer(gold);
    match (parse_rational(&p), parse_rational(&g)) {
        (Some(a), Some(b)) => a == b,
        _ => p.to_lowercase() == g.to_lowercase(),
    }
}

/// Removes every eos marker occurrence; markers are control tokens, not
/// answer content or code.
pub fn strip_eos_markers(text: &str, eos_markers: &[String]) -> String {
    let mut out = text.to_string();
    for marker in eos_markers {
        if !marker.is_empty() {
            out = out.replace(marker.as_str(), "");
        }
    }
    out
}

/// Per-problem outcome within a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub problem_id: String,
    /// Present for search runs.
    pub termination: Option<Termination>,
    pub extracted_answer: Option<String>,
    pub correct: bool,
    pub generator_calls: usize,
    pub reward_calls: usize,
    pub error: Option<String>,
}

/// Configuration snapshot embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub search: SearchConfig,
    pub sampling: SamplingParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub records: Vec<ProblemRecord>,
    /// Mean of per-problem correctness; absent for an empty run.
    pub accuracy: Option<f64>,
    pub config: ReportConfig,
}

impl RunReport {
    pub fn recompute_accuracy(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        let correct = self.records.iter().filter(|r| r.correct).count();
        Some(correct as f64 / self.records.len() as f64)
    }
}

fn grade_text(
    problem: &BenchmarkProblem,
    final_text: &str,
    eos_markers: &[String],
    sandbox: Option<&Sandbox>,
) -> Result<(Option<String>, bool), String> {
    let cleaned = strip_eos_markers(final_text, eos_markers);
    match problem.kind {
        ProblemKind::MathAnswer => {
            let extracted = extract_answer(&cleaned);
            let correct = grade_answer(extracted.as_deref(), &problem.gold_answer);
            Ok((extracted, correct))
        }
        ProblemKind::CodeUnitTests => {
            let sandbox = sandbox.ok_or_else(|| "code problem needs a sandbox".to_string())?;
            let test_code = problem
                .test_code
                .as_deref()
                .ok_or_else(|| "code problem lacks test_code".to_string())?;
            let result = sandbox
                .run_tests(&sandbox.request(cleaned, test_code.to_string()))
                .map_err(|e| e.to_string())?;
            Ok((None, result.status == ExecStatus::Pass))
        }
    }
}

/// Runs one method over a problem list. Chain-of-thought draws a single
/// completion per problem; the search method runs the full loop and
/// grades its final transcript. Per-problem failures are recorded as
/// incorrect and the run continues. Records are sorted by problem id, so
/// reports are byte-stable for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn run_benchmark<G: Generator, R: RewardModel>(
    problems: &[BenchmarkProblem],
    method: Method,
    generator: &mut G,
    mut reward_model: Option<&mut R>,
    search_config: &SearchConfig,
    sampling: &SamplingParams,
    seed: u64,
    sandbox: Option<&Sandbox>,
) -> Result<(RunReport, Vec<SearchTrace>), BenchError> {
    match method {
        Method::Cot => {}
        Method::HgsPrm => {
            if reward_model.is_none() {
                return Err(BenchError::MissingRewardModel(method));
            }
        }
        Method::SampleFilter => return Err(BenchError::UnsupportedMethod(method)),
    }
    for problem in problems {
        problem.validate()?;
    }

    let mut records = Vec::with_capacity(problems.len());
    let mut traces = Vec::new();
    for problem in problems {
        let problem_seed = derive_seed(seed, "problem", fnv1a(problem.problem_id.as_bytes()));
        let record = match method {
            Method::Cot => {
                match generator.complete(&[problem.prompt.clone()], sampling, problem_seed) {
                    Ok(completion) => {
                        let full_text = format!("{}{}", problem.prompt, completion);
                        match grade_text(problem, &full_text, &search_config.eos_markers, sandbox)
                        {
                            Ok((extracted_answer, correct)) => ProblemRecord {
                                problem_id: problem.problem_id.clone(),
                                termination: None,
                                extracted_answer,
                                correct,
                                generator_calls: 1,
                                reward_calls: 0,
                                error: None,
                            },
                            Err(error) => failed_record(problem, 1, 0, error),
                        }
                    }
                    Err(e) => failed_record(problem, 1, 0, e.to_string()),
                }
            }
            Method::HgsPrm => {
                let config = SearchConfig {
                    rng_seed: problem_seed,
                    ..search_config.clone()
                };
                let reward = reward_model.as_mut().expect("checked above");
                match run_search(&problem.prompt, generator, reward, &config, sampling) {
                    Ok(outcome) => {
                        let generator_calls = outcome.stats.generator_calls(outcome.finalized());
                        let reward_calls = outcome.stats.reward_calls;
                        traces.push(SearchTrace::from_outcome(&outcome));
                        match grade_text(
                            problem,
                            &outcome.final_text,
                            &config.eos_markers,
                            sandbox,
                        ) {
                            Ok((extracted_answer, correct)) => ProblemRecord {
                                problem_id: problem.problem_id.clone(),
                                termination: Some(outcome.termination),
                                extracted_answer,
                                correct,
                                generator_calls,
                                reward_calls,
                                error: None,
                            },
                            Err(error) => {
                                failed_record(problem, generator_calls, reward_calls, error)
                            }
                        }
                    }
                    Err(e) => failed_record(problem, 0, 0, e.to_string()),
                }
            }
            Method::SampleFilter => unreachable!("rejected above"),
        };
        records.push(record);
    }

    records.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
    let accuracy = if records.is_empty() {
        None
    } else {
        Some(records.iter().filter(|r| r.correct).count() as f64 / records.len() as f64)
    };
    Ok((
        RunReport {
            method,
            records,
            accuracy,
            config: ReportConfig {
                search: search_config.clone(),
                sampling: sampling.clone(),
                seed,
            },
        },
        traces,
    ))
}

fn failed_record(
    problem: &BenchmarkProblem,
    generator_calls: usize,
    reward_calls: usize,
    error: String,
) -> ProblemRecord {
    ProblemRecord {
        problem_id: problem.problem_id.clone(),
        termination: None,
        extracted_answer: None,
        correct: false,
        generator_calls,
        reward_calls,
        error: Some(error),
    }
}

/// One sampled completion within a filter run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub problem_id: String,
    pub sample_index: usize,
    pub correct: bool,
    pub step_labels: Vec<RewardLabel>,
    pub retained: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub method: Method,
    pub k: usize,
    /// Fraction of all samples that are correct.
    pub accuracy_before: Option<f64>,
    /// Fraction of retained (no-negative-step) samples that are correct;
    /// absent when nothing survives the filter.
    pub accuracy_after: Option<f64>,
    pub retained_fraction: Option<f64>,
    /// Problems whose samples were all filtered out; they contribute
    /// nothing to `accuracy_after`.
    pub problems_with_empty_filtered_set: usize,
    pub records: Vec<SampleRecord>,
    pub sampling: SamplingParams,
    pub seed: u64,
}

/// Draws `k` full completions per problem, scores every step, and
/// compares accuracy before and after dropping samples that contain a
/// negative step.
#[allow(clippy::too_many_arguments)]
pub fn sample_and_filter<G: Generator, R: RewardModel>(
    problems: &[BenchmarkProblem],
    k: usize,
    generator: &mut G,
    reward_model: &mut R,
    sampling: &SamplingParams,
    step_delimiter: &str,
    eos_markers: &[String],
    seed: u64,
    sandbox: Option<&Sandbox>,
) -> Result<FilterReport, BenchError> {
    assert!(k >= 1, "k must be at least 1");
    for problem in problems {
        problem.validate()?;
    }

    let mut records = Vec::with_capacity(problems.len() * k);
    for problem in problems {
        let problem_seed = derive_seed(seed, "problem", fnv1a(problem.problem_id.as_bytes()));
        for sample_index in 0..k {
            let sample_seed = derive_seed(problem_seed, "sample", sample_index as u64);
            let record = match generator.complete(
                &[problem.prompt.clone()],
                sampling,
                sample_seed,
            ) {
                Ok(completion) => {
                    let full_text = format!("{}{}", problem.prompt, completion);
                    let graded = grade_text(problem, &full_text, eos_markers, sandbox);
                    let scored = score_steps(
                        reward_model,
                        &problem.prompt,
                        &completion,
                        step_delimiter,
                    );
                    match (graded, scored) {
                        (Ok((_, correct)), Ok(step_labels)) => {
                            let retained =
                                !step_labels.contains(&RewardLabel::Negative);
                            SampleRecord {
                                problem_id: problem.problem_id.clone(),
                                sample_index,
                                correct,
                                step_labels,
                                retained,
                                error: None,
                            }
                        }
                        (Err(error), _) => failed_sample(problem, sample_index, error),
                        (_, Err(error)) => failed_sample(problem, sample_index, error),
                    }
                }
                Err(e) => failed_sample(problem, sample_index, e.to_string()),
            };
            records.push(record);
        }
    }
    records.sort_by(|a, b| {
        a.problem_id
            .cmp(&b.problem_id)
            .then(a.sample_index.cmp(&b.sample_index))
    });

    let total = records.len();
    let retained: Vec<&SampleRecord> = records.iter().filter(|r| r.retained).collect();
    let accuracy_before = (total > 0)
        .then(|| records.iter().filter(|r| r.correct).count() as f64 / total as f64);
    let accuracy_after = (!retained.is_empty())
        .then(|| retained.iter().filter(|r| r.correct).count() as f64 / retained.len() as f64);
    let retained_fraction = (total > 0).then(|| retained.len() as f64 / total as f64);
    let problems_with_empty_filtered_set = problems
        .iter()
        .filter(|p| {
            records
                .iter()
                .filter(|r| r.problem_id == p.problem_id)
                .all(|r| !r.retained)
        })
        .count();

    Ok(FilterReport {
        method: Method::SampleFilter,
        k,
        accuracy_before,
        accuracy_after,
        retained_fraction,
        problems_with_empty_filtered_set,
        records,
        sampling: sampling.clone(),
        seed,
    })
}

fn failed_sample(problem: &BenchmarkProblem, sample_index: usize, error: String) -> SampleRecord {
    SampleRecord {
        problem_id: problem.problem_id.clone(),
        sample_index,
        correct: false,
        step_labels: Vec::new(),
        retained: false,
        error: Some(error),
    }
}

/// Splits a completion into steps on the delimiter (each step keeps its
/// trailing delimiter) and scores each one in the context of the prompt
/// plus everything before it.
fn score_steps<R: RewardModel>(
    reward_model: &mut R,
    prompt: &str,
    completion: &str,
    step_delimiter: &str,
) -> Result<Vec<RewardLabel>, String> {
    let mut previous = prompt.to_string();
    let mut labels = Vec::new();
    for step in split_steps(completion, step_delimiter) {
        let label = reward_model
            .score_step(&RewardRequest::new(previous.clone(), step.clone()))
            .map_err(|e| e.to_string())?;
        labels.push(label);
        previous.push_str(&step);
    }
    Ok(labels)
}

/// Delimiter-inclusive split; the final fragment may lack the delimiter.
pub fn split_steps(completion: &str, step_delimiter: &str) -> Vec<String> {
    if completion.is_empty() {
        return Vec::new();
    }
    let mut steps = Vec::new();
    let mut rest = completion;
    while let Some(pos) = rest.find(step_delimiter) {
        let end = pos + step_delimiter.len();
        steps.push(rest[..end].to_string());
        rest = &rest[end..];
    }
    if !rest.is_empty() {
        steps.push(rest.to_string());
    }
    steps
}

/// Metric report over a gold dataset joined with a predictions file of
/// the same JSONL schema. Records join on
/// `(problem_id, line_index, origin, rule, step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub records: usize,
    pub matrix: ConfusionMatrix3,
    pub metrics: PrmMetrics,
}

type JoinKey = (String, usize, String, Option<String>, String);

fn join_key(example: &StepRewardExample) -> JoinKey {
    (
        example.meta.problem_id.clone(),
        example.meta.line_index,
        format!("{:?}", example.meta.origin),
        example.meta.rule.clone(),
        example.step.clone(),
    )
}

/// Joins gold labels with predicted labels and computes metrics. Keys
/// present on only one side are a hard error listing the first offenders.
pub fn report_prm_metrics(
    dataset_path: &Path,
    predictions_path: &Path,
) -> Result<MetricsReport, BenchError> {
    let gold: Vec<StepRewardExample> = read_jsonl_records(dataset_path)?;
    let predictions: Vec<StepRewardExample> = read_jsonl_records(predictions_path)?;

    let mut predicted_by_key: std::collections::BTreeMap<JoinKey, RewardLabel> = predictions
        .iter()
        .map(|e| (join_key(e), e.label))
        .collect();

    let mut pairs = Vec::with_capacity(gold.len());
    let mut missing = Vec::new();
    for example in &gold {
        match predicted_by_key.remove(&join_key(example)) {
            Some(predicted) => pairs.push((example.label, predicted)),
            None => missing.push(format!(
                "{}#{}:{:?}",
                example.meta.problem_id, example.meta.line_index, example.meta.rule
            )),
        }
    }
    let unexpected: Vec<String> = predicted_by_key
        .keys()
        .map(|(id, line, _, rule, _)| format!("{id}#{line}:{rule:?}"))
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        let examples = missing
            .iter()
            .chain(unexpected.iter())
            .take(5)
            .cloned()
            .collect();
        return Err(BenchError::KeyMismatch {
            missing: missing.len(),
            unexpected: unexpected.len(),
            examples,
        });
    }

    let matrix = ConfusionMatrix3::from_pairs(pairs);
    let metrics = compute_metrics(matrix.to_pairs())?;
    Ok(MetricsReport {
        records: gold.len(),
        matrix,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hgs_core::generator::ScriptedGenerator;
    use hgs_core::reward::ConstantRewardModel;

    #[test]
    fn extract_answer_examples() {
        assert_eq!(
            extract_answer("…Thus, the final answer is 180.\nThe answer is: 180."),
            Some("180".to_string())
        );
        assert_eq!(
            extract_answer("…So, the final answer is 16.\nThe answer is: 16."),
            Some("16".to_string())
        );
        assert_eq!(extract_answer("no marker here"), None);
        // Last occurrence wins.
        assert_eq!(
            extract_answer("The answer is: 1.\nwait\nThe answer is: 2."),
            Some("2".to_string())
        );
        assert_eq!(extract_answer("The answer is:   "), None);
    }

    #[test]
    fn grade_answer_examples() {
        assert!(grade_answer(Some("540"), "540"));
        assert!(grade_answer(Some("33,554,508"), "33554508"));
        assert!(!grade_answer(None, "7"));
        assert!(grade_answer(Some("$1,234"), "1234"));
        assert!(grade_answer(Some("0.5"), "1/2"));
        assert!(grade_answer(Some("1.50"), "1.5"));
        assert!(!grade_answer(Some("540"), "541"));
        assert!(grade_answer(Some("YES"), "yes"));
        assert!(!grade_answer(Some("yes"), "no"));
        assert!(grade_answer(Some("-3"), "-3.0"));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("540"), Some((540, 1)));
        assert_eq!(parse_rational("-3"), Some((-3, 1)));
        assert_eq!(parse_rational("0.5"), Some((1, 2)));
        assert_eq!(parse_rational("1/2"), Some((1, 2)));
        assert_eq!(parse_rational("2/4"), Some((1, 2)));
        assert_eq!(parse_rational(".25"), Some((1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn split_steps_keeps_delimiters() {
        assert_eq!(split_steps("a\nb\n", "\n"), vec!["a\n", "b\n"]);
        assert_eq!(split_steps("a\nb", "\n"), vec!["a\n", "b"]);
        assert_eq!(split_steps("", "\n"), Vec::<String>::new());
    }

    #[test]
    fn strip_eos() {
        let markers = vec!["<|eot|>".to_string()];
        assert_eq!(
            strip_eos_markers("The answer is: 5.<|eot|>", &markers),
            "The answer is: 5."
        );
    }

    #[test]
    fn empty_problem_list_has_undefined_accuracy() {
        let mut generator = ScriptedGenerator::new();
        let mut reward = ConstantRewardModel(RewardLabel::Positive);
        let (report, traces) = run_benchmark(
            &[],
            Method::Cot,
            &mut generator,
            Some(&mut reward),
            &SearchConfig::default(),
            &SamplingParams::default(),
            7,
            None,
        )
        .unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.accuracy, None);
        assert!(traces.is_empty());
    }

    #[test]
    fn cot_failure_recorded_not_fatal() {
        // No completion scripted: the problem records an error and the
        // run continues.
        let mut generator = ScriptedGenerator::new();
        let mut reward = ConstantRewardModel(RewardLabel::Positive);
        let problems = vec![BenchmarkProblem {
            problem_id: "p0".into(),
            prompt: "Q?".into(),
            gold_answer: "1".into(),
            kind: ProblemKind::MathAnswer,
            test_code: None,
        }];
        let (report, _) = run_benchmark(
            &problems,
            Method::Cot,
            &mut generator,
            Some(&mut reward),
            &SearchConfig::default(),
            &SamplingParams::default(),
            7,
            None,
        )
        .unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(!report.records[0].correct);
        assert!(report.records[0].error.is_some());
        assert_eq!(report.accuracy, Some(0.0));
    }

    #[test]
    fn hgs_requires_reward_model() {
        let mut generator = ScriptedGenerator::new();
        let err = run_benchmark::<_, ConstantRewardModel>(
            &[],
            Method::HgsPrm,
            &mut generator,
            None,
            &SearchConfig::default(),
            &SamplingParams::default(),
            7,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, BenchError::MissingRewardModel(_)));
    }

    #[test]
    fn all_positive_reward_filter_is_vacuous() {
        let mut generator = ScriptedGenerator::new()
            .with_completion("Q1", "a\nThe answer is: 1.")
            .with_completion("Q2", "b\nThe answer is: 9.");
        let mut reward = ConstantRewardModel(RewardLabel::Positive);
        let problems = vec![
            BenchmarkProblem {
                problem_id: "p1".into(),
                prompt: "Q1".into(),
                gold_answer: "1".into(),
                kind: ProblemKind::MathAnswer,
                test_code: None,
            },
            BenchmarkProblem {
                problem_id: "p2".into(),
                prompt: "Q2".into(),
                gold_answer: "2".into(),
                kind: ProblemKind::MathAnswer,
                test_code: None,
            },
        ];
        let report = sample_and_filter(
            &problems,
            3,
            &mut generator,
            &mut reward,
            &SamplingParams::default(),
            "\n",
            &["<|eot|>".to_string()],
            11,
            None,
        )
        .unwrap();
        assert_eq!(report.retained_fraction, Some(1.0));
        assert_eq!(report.accuracy_after, report.accuracy_before);
        assert_eq!(report.accuracy_before, Some(0.5));
        assert_eq!(report.problems_with_empty_filtered_set, 0);
        assert_eq!(report.records.len(), 6);
    }

    #[test]
    fn report_accuracy_recomputable() {
        let mut generator = ScriptedGenerator::new()
            .with_completion("Q1", "The answer is: 1.")
            .with_completion("Q2", "The answer is: 0.");
        let mut reward = ConstantRewardModel(RewardLabel::Positive);
        let problems = vec![
            BenchmarkProblem {
                problem_id: "p1".into(),
                prompt: "Q1".into(),
                gold_answer: "1".into(),
                kind: ProblemKind::MathAnswer,
                test_code: None,
            },
            BenchmarkProblem {
                problem_id: "p2".into(),
                prompt: "Q2".into(),
                gold_answer: "2".into(),
                kind: ProblemKind::MathAnswer,
                test_code: None,
            },
        ];
        let (report, _) = run_benchmark(
            &problems,
            Method::Cot,
            &mut generator,
            Some(&mut reward),
            &SearchConfig::default(),
            &SamplingParams::default(),
            3,
            None,
        )
        .unwrap();
        assert_eq!(report.accuracy, report.recompute_accuracy());
        assert_eq!(report.accuracy, Some(0.5));
    }
}
