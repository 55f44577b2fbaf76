//! Line tokenizer and single-operator mutation engine.
//!
//! Programs are treated as lists of lines. [`tokenize_line`] lexes one
//! line into spans that cover every non-whitespace byte, shielding string
//! literals and comments so no mutation can touch them. Mutations
//! ([`enumerate_mutations`]) replace exactly one operator occurrence with
//! one same-arity alternative from a rule table, or shift one integer
//! literal inside square brackets by ±1. Every variant differs from its
//! original in exactly one contiguous span and re-tokenizes cleanly.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Operator,
    /// `and`, `or`, `not`, `in`, `is`.
    KeywordOperator,
    Identifier,
    Number,
    /// Whole literal including quotes; contents are never operators.
    String,
    /// Leading whitespace of the line, if any.
    Indent,
    /// Brackets, commas, colons, dots and friends.
    Delimiter,
    /// Comments and anything unclassified.
    Other,
}

/// One lexeme with its byte span within the line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offsets `[start, end)` within the line.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    /// Unclosed string literal; `column` is 1-based.
    #[error("unterminated string literal starting at column {column}")]
    UnterminatedString { column: usize },
    #[error("line {line_index} failed to tokenize: {source}")]
    Tokenize {
        line_index: usize,
        source: alloc::boxed::Box<MutationError>,
    },
    #[error("line index {line_index} out of range for a {line_count}-line program")]
    LineOutOfRange {
        line_index: usize,
        line_count: usize,
    },
    /// The variant was produced from a different program revision.
    #[error("variant does not match the program: line {line_index} has changed")]
    StaleVariant { line_index: usize },
    #[error("rule for {operator:?} lists it as its own replacement")]
    SelfReplacement { operator: String },
}

// Longest first, so that e.g. "**=" never lexes as "*" "*" "=".
const OPERATORS: [&str; 36] = [
    "**=", "//=", "<<=", ">>=", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "<", ">", "=", "&",
    "|", "^", "~", "@",
];

const KEYWORD_OPERATORS: [&str; 5] = ["and", "or", "not", "in", "is"];

const DELIMITERS: [char; 10] = ['(', ')', '[', ']', '{', '}', ',', ':', ';', '.'];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Lexes one line (no newline characters allowed) into tokens whose spans
/// cover every non-whitespace byte. Operators inside string literals and
/// after a comment marker come out as [`TokenKind::String`] /
/// [`TokenKind::Other`], never as operators.
pub fn tokenize_line(line: &str) -> Result<Vec<Token>, MutationError> {
    debug_assert!(!line.contains('\n'), "tokenize_line takes a single line");
    let bytes = line.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0usize;

    let indent_end = line
        .char_indices()
        .find(|(_, c)| *c != ' ' && *c != '\t')
        .map(|(i, _)| i)
        .unwrap_or(line.len());
    if indent_end > 0 {
        tokens.push(Token {
            kind: TokenKind::Indent,
            text: line[..indent_end].to_string(),
            span: (0, indent_end),
        });
        pos = indent_end;
    }

    while pos < line.len() {
        let rest = &line[pos..];
        let c = rest.chars().next().unwrap();

        if c == ' ' || c == '\t' {
            pos += 1;
            continue;
        }

        if c == '#' {
            tokens.push(Token {
                kind: TokenKind::Other,
                text: rest.to_string(),
                span: (pos, line.len()),
            });
            break;
        }

        if c == '"' || c == '\'' {
            let end = scan_string(bytes, pos)?;
            tokens.push(Token {
                kind: TokenKind::String,
                text: line[pos..end].to_string(),
                span: (pos, end),
            });
            pos = end;
            continue;
        }

        if c.is_ascii_digit() {
            let end = scan_number(bytes, pos);
            tokens.push(Token {
                kind: TokenKind::Number,
                text: line[pos..end].to_string(),
                span: (pos, end),
            });
            pos = end;
            continue;
        }

        if is_ident_start(c) {
            let mut end = pos;
            for (i, ch) in rest.char_indices() {
                if is_ident_continue(ch) {
                    end = pos + i + ch.len_utf8();
                } else {
                    break;
                }
            }
            let text = &line[pos..end];
            let kind = if KEYWORD_OPERATORS.contains(&text) {
                TokenKind::KeywordOperator
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token {
                kind,
                text: text.to_string(),
                span: (pos, end),
            });
            pos = end;
            continue;
        }

        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            tokens.push(Token {
                kind: TokenKind::Operator,
                text: (*op).to_string(),
                span: (pos, pos + op.len()),
            });
            pos += op.len();
            continue;
        }

        if DELIMITERS.contains(&c) {
            tokens.push(Token {
                kind: TokenKind::Delimiter,
                text: c.to_string(),
                span: (pos, pos + c.len_utf8()),
            });
            pos += c.len_utf8();
            continue;
        }

        tokens.push(Token {
            kind: TokenKind::Other,
            text: c.to_string(),
            span: (pos, pos + c.len_utf8()),
        });
        pos += c.len_utf8();
    }

    Ok(tokens)
}

/// Scans a string literal starting at `start`, handling backslash escapes
/// and same-line triple quotes. Returns the byte offset one past the
/// closing quote.
fn scan_string(bytes: &[u8], start: usize) -> Result<usize, MutationError> {
    let quote = bytes[start];
    let len = bytes.len();
    let triple = start + 2 < len && bytes[start + 1] == quote && bytes[start + 2] == quote;
    let (needle_len, mut pos) = if triple { (3, start + 3) } else { (1, start + 1) };
    while pos < len {
        if bytes[pos] == b'\\' {
            pos += 2;
            continue;
        }
        if bytes[pos] == quote {
            if needle_len == 1 {
                return Ok(pos + 1);
            }
            if pos + 2 < len && bytes[pos + 1] == quote && bytes[pos + 2] == quote {
                return Ok(pos + 3);
            }
            if pos + 2 == len && bytes[pos + 1] == quote {
                // `""` at end of line does not close a triple quote.
                pos += 2;
                continue;
            }
        }
        pos += 1;
    }
    Err(MutationError::UnterminatedString { column: start + 1 })
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let len = bytes.len();
    let mut pos = start;
    if bytes[pos] == b'0' && pos + 1 < len && matches!(bytes[pos + 1], b'x' | b'X' | b'b' | b'B' | b'o' | b'O') {
        pos += 2;
        while pos < len && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
            pos += 1;
        }
        return pos;
    }
    while pos < len && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
        pos += 1;
    }
    if pos < len && bytes[pos] == b'.' && pos + 1 < len && bytes[pos + 1].is_ascii_digit() {
        pos += 1;
        while pos < len && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
            pos += 1;
        }
    }
    if pos < len && matches!(bytes[pos], b'e' | b'E') {
        let mut exp = pos + 1;
        if exp < len && matches!(bytes[exp], b'+' | b'-') {
            exp += 1;
        }
        if exp < len && bytes[exp].is_ascii_digit() {
            pos = exp;
            while pos < len && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
        }
    }
    pos
}

/// One operator substitution rule: `source` may become any of the
/// `replacements`, all of the same arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRule {
    pub source: String,
    pub replacements: Vec<String>,
}

impl MutationRule {
    pub fn new<S, I, T>(source: S, replacements: I) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Self {
            source: source.into(),
            replacements: replacements.into_iter().map(Into::into).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), MutationError> {
        if self.replacements.contains(&self.source) {
            return Err(MutationError::SelfReplacement {
                operator: self.source.clone(),
            });
        }
        Ok(())
    }
}

/// The active mutation rules: an operator substitution table plus the
/// bracket-literal shift toggle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<MutationRule>,
    /// When set, an integer literal directly inside square brackets also
    /// mutates to its ±1 neighbours.
    pub slice_literal_shift: bool,
}

impl Default for RuleSet {
    fn default() -> Self {
        let rules = vec![
            MutationRule::new("+", ["-"]),
            MutationRule::new("-", ["+"]),
            MutationRule::new("*", ["/"]),
            MutationRule::new("/", ["//", "*"]),
            MutationRule::new("//", ["/"]),
            MutationRule::new("%", ["*"]),
            MutationRule::new("**", ["*"]),
            MutationRule::new("+=", ["-="]),
            MutationRule::new("-=", ["+="]),
            MutationRule::new("*=", ["/="]),
            MutationRule::new("/=", ["//=", "*="]),
            MutationRule::new("//=", ["/="]),
            MutationRule::new("%=", ["*="]),
            MutationRule::new("**=", ["*="]),
            MutationRule::new("<", ["<=", ">"]),
            MutationRule::new("<=", ["<", ">="]),
            MutationRule::new(">", [">=", "<"]),
            MutationRule::new(">=", [">", "<="]),
            MutationRule::new("==", ["!="]),
            MutationRule::new("!=", ["=="]),
            MutationRule::new("and", ["or"]),
            MutationRule::new("or", ["and"]),
        ];
        Self {
            rules,
            slice_literal_shift: true,
        }
    }
}

impl RuleSet {
    pub fn from_rules(rules: Vec<MutationRule>, slice_literal_shift: bool) -> Self {
        Self {
            rules,
            slice_literal_shift,
        }
    }

    pub fn validate(&self) -> Result<(), MutationError> {
        self.rules.iter().try_for_each(MutationRule::validate)
    }

    pub fn replacements_for(&self, operator: &str) -> Option<&[String]> {
        self.rules
            .iter()
            .find(|r| r.source == operator)
            .map(|r| r.replacements.as_slice())
    }
}

/// A single-line, single-edit code mutation, executable by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantVariant {
    pub line_index: usize,
    pub original_line: String,
    pub mutated_line: String,
    /// The replaced text: an operator, or the shifted integer literal.
    pub rule_source: String,
    pub replacement: String,
    /// Byte span of the replaced text within the original line.
    pub span: (usize, usize),
}

impl MutantVariant {
    /// Human-readable rule tag, e.g. `+= -> -=`.
    pub fn rule_tag(&self) -> String {
        format!("{} -> {}", self.rule_source, self.replacement)
    }
}

fn splice(line: &str, span: (usize, usize), replacement: &str) -> String {
    let mut out = String::with_capacity(line.len() + replacement.len());
    out.push_str(&line[..span.0]);
    out.push_str(replacement);
    out.push_str(&line[span.1..]);
    out
}

/// Plain decimal integer literal, eligible for the bracket shift.
fn plain_integer(text: &str) -> Option<u64> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Enumerates every single-edit variant of one line: one per (operator
/// occurrence, applicable replacement) pair in left-to-right, rule-table
/// order, plus ±1 shifts of integer literals inside square brackets.
/// Lines with nothing to mutate yield an empty list.
pub fn enumerate_mutations(
    program: &[String],
    line_index: usize,
    rules: &RuleSet,
) -> Result<Vec<MutantVariant>, MutationError> {
    let line = program
        .get(line_index)
        .ok_or(MutationError::LineOutOfRange {
            line_index,
            line_count: program.len(),
        })?;
    let tokens = tokenize_line(line).map_err(|source| MutationError::Tokenize {
        line_index,
        source: alloc::boxed::Box::new(source),
    })?;

    let mut variants = Vec::new();
    let mut bracket_depth = 0usize;
    for token in &tokens {
        match token.kind {
            TokenKind::Delimiter if token.text == "[" => bracket_depth += 1,
            TokenKind::Delimiter if token.text == "]" => {
                bracket_depth = bracket_depth.saturating_sub(1)
            }
            TokenKind::Operator | TokenKind::KeywordOperator => {
                if let Some(replacements) = rules.replacements_for(&token.text) {
                    for replacement in replacements {
                        push_variant(
                            &mut variants,
                            line,
                            line_index,
                            token.span,
                            &token.text,
                            replacement,
                        );
                    }
                }
            }
            TokenKind::Number if rules.slice_literal_shift && bracket_depth > 0 => {
                if let Some(n) = plain_integer(&token.text) {
                    let up = (n + 1).to_string();
                    let down = if n == 0 {
                        "-1".to_string()
                    } else {
                        (n - 1).to_string()
                    };
                    for replacement in [up, down] {
                        push_variant(
                            &mut variants,
                            line,
                            line_index,
                            token.span,
                            &token.text,
                            &replacement,
                        );
                    }
                }
            }
            _ => {}
        }
    }
    Ok(variants)
}

fn push_variant(
    variants: &mut Vec<MutantVariant>,
    line: &str,
    line_index: usize,
    span: (usize, usize),
    source: &str,
    replacement: &str,
) {
    let mutated_line = splice(line, span, replacement);
    // Identity mutants and structurally invalid ones are discarded; with
    // same-arity rule tables neither case occurs.
    if mutated_line == line || tokenize_line(&mutated_line).is_err() {
        return;
    }
    variants.push(MutantVariant {
        line_index,
        original_line: line.to_string(),
        mutated_line,
        rule_source: source.to_string(),
        replacement: replacement.to_string(),
        span,
    });
}

/// Rewrites the variant's line into a copy of the program. Fails if the
/// program no longer matches the line the variant was derived from.
pub fn apply_variant(
    program: &[String],
    variant: &MutantVariant,
) -> Result<Vec<String>, MutationError> {
    let current = program
        .get(variant.line_index)
        .ok_or(MutationError::LineOutOfRange {
            line_index: variant.line_index,
            line_count: program.len(),
        })?;
    if current != &variant.original_line {
        return Err(MutationError::StaleVariant {
            line_index: variant.line_index,
        });
    }
    let mut mutated = program.to_vec();
    mutated[variant.line_index] = variant.mutated_line.clone();
    Ok(mutated)
}
