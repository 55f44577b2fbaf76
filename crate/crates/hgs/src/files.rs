//! On-disk formats: generator scripts, mutation rule tables, traces, and
//! benchmark problem lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use hgs_core::generator::ScriptedGenerator;
use hgs_core::mutation::{MutationRule, RuleSet};
use hgs_core::trace::SearchTrace;

use crate::bench::BenchmarkProblem;
use crate::dataset::{read_jsonl_records, DatasetError};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Loads a generator script. The file is one JSON object: every key maps
/// a state (the rendered transcript) to its ordered step list, and the
/// reserved key `"completions"` maps states to full completions:
///
/// ```json
/// {"Q?": ["step one\n", "step two\n"], "completions": {"Q?": "tail text"}}
/// ```
pub fn load_script_file(path: &Path, eos_markers: &[String]) -> Result<ScriptedGenerator, FileError> {
    let raw: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let object = raw
        .as_object()
        .ok_or_else(|| FileError::Format("script file must be a JSON object".into()))?;

    let mut steps: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut completions: BTreeMap<String, String> = BTreeMap::new();
    for (key, value) in object {
        if key == "completions" {
            let table = value.as_object().ok_or_else(|| {
                FileError::Format("\"completions\" must map states to texts".into())
            })?;
            for (state, text) in table {
                let text = text.as_str().ok_or_else(|| {
                    FileError::Format(format!("completion for {state:?} must be a string"))
                })?;
                completions.insert(state.clone(), text.to_string());
            }
        } else {
            let list = value.as_array().ok_or_else(|| {
                FileError::Format(format!("steps for {key:?} must be an array of strings"))
            })?;
            let mut entries = Vec::with_capacity(list.len());
            for item in list {
                let step = item.as_str().ok_or_else(|| {
                    FileError::Format(format!("steps for {key:?} must be strings"))
                })?;
                entries.push(step.to_string());
            }
            steps.insert(key.clone(), entries);
        }
    }
    Ok(ScriptedGenerator::from_tables(
        steps,
        completions,
        eos_markers.to_vec(),
    ))
}

/// Loads an operator rule table: `{"+": ["-"], "==": ["!="]}`. The
/// bracket-literal shift is controlled separately.
pub fn load_rule_file(path: &Path, slice_literal_shift: bool) -> Result<RuleSet, FileError> {
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(&fs::read_to_string(path)?)?;
    let rules: Vec<MutationRule> = raw
        .into_iter()
        .map(|(source, replacements)| MutationRule::new(source, replacements))
        .collect();
    let set = RuleSet::from_rules(rules, slice_literal_shift);
    set.validate()
        .map_err(|e| FileError::Format(e.to_string()))?;
    Ok(set)
}

pub fn write_trace(path: &Path, trace: &SearchTrace) -> Result<(), FileError> {
    fs::write(path, serde_json::to_string_pretty(trace)? + "\n")?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<SearchTrace, FileError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_problems(path: &Path) -> Result<Vec<BenchmarkProblem>, FileError> {
    Ok(read_jsonl_records(path)?)
}

pub fn write_json_report<T: serde::Serialize>(path: &Path, report: &T) -> Result<(), FileError> {
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hgs_core::generator::{Generator, SamplingParams};

    #[test]
    fn script_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        fs::write(
            &path,
            r#"{"Q?": ["a\n", "b\n"], "completions": {"Q?": "tail"}}"#,
        )
        .unwrap();
        let mut generator = load_script_file(&path, &[]).unwrap();
        let params = SamplingParams::default();
        let state = vec!["Q?".to_string()];
        assert_eq!(generator.next_step(&state, &params, 0).unwrap().text, "a\n");
        assert_eq!(generator.next_step(&state, &params, 0).unwrap().text, "b\n");
        assert_eq!(generator.complete(&state, &params, 0).unwrap(), "tail");
    }

    #[test]
    fn script_file_rejects_bad_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        fs::write(&path, r#"{"Q?": "not a list"}"#).unwrap();
        assert!(load_script_file(&path, &[]).is_err());
        fs::write(&path, r#"[1, 2]"#).unwrap();
        assert!(load_script_file(&path, &[]).is_err());
    }

    #[test]
    fn rule_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.json");
        fs::write(&path, r#"{"+": ["-"], "==": ["!="]}"#).unwrap();
        let rules = load_rule_file(&path, true).unwrap();
        assert_eq!(rules.rules.len(), 2);
        assert!(rules.slice_literal_shift);
        assert_eq!(
            rules.replacements_for("+"),
            Some(&["-".to_string()][..])
        );

        fs::write(&path, r#"{"+": ["+"]}"#).unwrap();
        assert!(load_rule_file(&path, true).is_err());
    }
}
