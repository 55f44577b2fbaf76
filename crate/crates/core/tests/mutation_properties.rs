//! Property tests for the tokenizer and mutation engine over generated
//! Python-like lines.

use proptest::prelude::*;

use hgs_core::mutation::{
    apply_variant, enumerate_mutations, tokenize_line, MutantVariant, RuleSet, Token, TokenKind,
};

/// Independent count oracle: pair every mutable occurrence with its
/// replacements, tracking bracket depth on its own.
fn oracle_variant_count(line: &str, rules: &RuleSet) -> usize {
    let tokens = tokenize_line(line).expect("line tokenizes");
    let mut depth = 0usize;
    let mut count = 0usize;
    for token in &tokens {
        match token.kind {
            TokenKind::Delimiter if token.text == "[" => depth += 1,
            TokenKind::Delimiter if token.text == "]" => depth = depth.saturating_sub(1),
            TokenKind::Operator | TokenKind::KeywordOperator => {
                count += rules
                    .rules
                    .iter()
                    .filter(|r| r.source == token.text)
                    .map(|r| r.replacements.len())
                    .sum::<usize>();
            }
            TokenKind::Number
                if rules.slice_literal_shift
                    && depth > 0
                    && token.text.bytes().all(|b| b.is_ascii_digit()) =>
            {
                // n+1 and n-1 are always distinct from n.
                count += 2;
            }
            _ => {}
        }
    }
    count
}

/// The edit span of a variant must fall inside a mutable token of the
/// original line — never a string, comment, identifier, or delimiter.
fn assert_edit_inside_mutable_token(line: &str, variant: &MutantVariant) {
    let tokens = tokenize_line(line).unwrap();
    let host: Vec<&Token> = tokens
        .iter()
        .filter(|t| t.span.0 <= variant.span.0 && variant.span.1 <= t.span.1)
        .collect();
    assert_eq!(host.len(), 1, "edit spans exactly one token");
    assert!(
        matches!(
            host[0].kind,
            TokenKind::Operator | TokenKind::KeywordOperator | TokenKind::Number
        ),
        "edit inside a {:?} token",
        host[0].kind
    );
}

fn splice(line: &str, span: (usize, usize), replacement: &str) -> String {
    format!("{}{}{}", &line[..span.0], replacement, &line[span.1..])
}

/// Fragments that compose into lexically valid lines.
fn fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        prop_oneof![
            Just("count"),
            Just("total"),
            Just("xs"),
            Just("i"),
            Just("result")
        ]
        .prop_map(str::to_string),
        (0u32..100).prop_map(|n| n.to_string()),
        prop_oneof![
            Just("+"),
            Just("-"),
            Just("*"),
            Just("/"),
            Just("//"),
            Just("%"),
            Just("**"),
            Just("<"),
            Just("<="),
            Just(">"),
            Just(">="),
            Just("=="),
            Just("!="),
            Just("and"),
            Just("or"),
            Just("=")
        ]
        .prop_map(str::to_string),
        prop_oneof![Just("'a+b'"), Just("\"x - y\""), Just("'#not a comment'")]
            .prop_map(str::to_string),
        (0u32..10).prop_map(|n| format!("xs[{n}]")),
        Just("len(xs)".to_string()),
    ]
}

fn line_strategy() -> impl Strategy<Value = String> {
    (
        prop_oneof![Just(""), Just("    "), Just("\t")],
        proptest::collection::vec(fragment(), 1..8),
        proptest::option::of(Just("# trailing + comment")),
    )
        .prop_map(|(indent, parts, comment)| {
            let mut line = format!("{indent}{}", parts.join(" "));
            if let Some(c) = comment {
                line.push_str("  ");
                line.push_str(c);
            }
            line
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokens_cover_and_order(line in line_strategy()) {
        let tokens = tokenize_line(&line).unwrap();
        let mut last_end = 0usize;
        let mut covered = vec![false; line.len()];
        for t in &tokens {
            prop_assert!(t.span.0 >= last_end);
            prop_assert_eq!(&line[t.span.0..t.span.1], t.text.as_str());
            last_end = t.span.1;
            for c in covered.iter_mut().take(t.span.1).skip(t.span.0) {
                *c = true;
            }
        }
        for (i, b) in line.bytes().enumerate() {
            if b != b' ' && b != b'\t' {
                prop_assert!(covered[i]);
            }
        }
    }

    #[test]
    fn enumeration_properties(line in line_strategy()) {
        let program = vec![line.clone()];
        let rules = RuleSet::default();

        let variants = enumerate_mutations(&program, 0, &rules).unwrap();
        let again = enumerate_mutations(&program, 0, &rules).unwrap();
        prop_assert_eq!(&variants, &again, "two runs must agree");
        prop_assert_eq!(variants.len(), oracle_variant_count(&line, &rules));

        for variant in &variants {
            prop_assert_eq!(variant.original_line.as_str(), line.as_str());
            prop_assert_eq!(
                &line[variant.span.0..variant.span.1],
                variant.rule_source.as_str()
            );
            prop_assert_eq!(
                &variant.mutated_line,
                &splice(&line, variant.span, &variant.replacement)
            );
            prop_assert_ne!(&variant.mutated_line, &line);

            // Reverse substitution recovers the original.
            let back = splice(
                &variant.mutated_line,
                (variant.span.0, variant.span.0 + variant.replacement.len()),
                &variant.rule_source,
            );
            prop_assert_eq!(&back, &line);

            assert_edit_inside_mutable_token(&line, variant);
            tokenize_line(&variant.mutated_line).unwrap();

            let mutated = apply_variant(&program, variant).unwrap();
            prop_assert_eq!(mutated.len(), program.len());
            prop_assert_eq!(&mutated[0], &variant.mutated_line);
        }
    }

    #[test]
    fn apply_is_stale_safe(line in line_strategy()) {
        let program = vec![line];
        let rules = RuleSet::default();
        for variant in enumerate_mutations(&program, 0, &rules).unwrap() {
            let other = vec![format!("{}x", variant.original_line)];
            prop_assert!(apply_variant(&other, &variant).is_err());
        }
    }
}
