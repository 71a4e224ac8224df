//! Compares `analyze` against diagnostics frozen from pyflakes 3.0.1.
//! Regenerate the fixture with `scripts/freeze_lint_fixtures.py`.

use complint_core::lint::{analyze, LintCheckKind};
use complint_core::pyast::{parse_module, SourceText};
use serde::Deserialize;

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    source: String,
    expected: Vec<Expected>,
}

#[derive(Deserialize, Debug, PartialEq)]
struct Expected {
    kind: LintCheckKind,
    symbol: String,
    line: u32,
    col: u32,
    message: String,
    related_line: Option<u32>,
}

fn load() -> Fixture {
    let text = include_str!("fixtures/lint_differential.json");
    serde_json::from_str(text).expect("fixture parses")
}

#[test]
fn fixture_has_enough_cases() {
    let fx = load();
    assert!(fx.cases.len() >= 200, "only {} cases", fx.cases.len());
    for kind in LintCheckKind::ALL {
        assert!(
            fx.cases
                .iter()
                .any(|c| c.expected.iter().any(|e| e.kind == kind)),
            "no case exercises {kind}"
        );
    }
}

#[test]
fn matches_reference_linter() {
    let fx = load();
    let mut failures = Vec::new();
    for case in &fx.cases {
        let src = SourceText::new(case.source.clone());
        let ast = match parse_module(&src) {
            Ok(ast) => ast,
            Err(e) => {
                failures.push(format!("{}: parse error {}", case.name, e.raw_message));
                continue;
            }
        };
        let got: Vec<Expected> = analyze(&ast, &src, &LintCheckKind::ALL)
            .into_iter()
            .map(|d| Expected {
                kind: d.kind,
                symbol: d.symbol,
                line: d.line,
                col: d.column,
                message: d.message,
                related_line: d.related_line,
            })
            .collect();
        if got != case.expected {
            failures.push(format!(
                "{}:\n  expected {:?}\n  got      {:?}",
                case.name, case.expected, got
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "{} of {} cases differ:\n{}",
        failures.len(),
        fx.cases.len(),
        failures.join("\n")
    );
}
