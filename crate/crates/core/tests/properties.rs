use complint_core::lint::{analyze, is_builtin, LintCheckKind};
use complint_core::pyast::{parse_module, SourceText};
use proptest::prelude::*;

fn lint(src: &str) -> Vec<complint_core::Diagnostic> {
    let s = SourceText::new(src);
    let ast = parse_module(&s).expect("parses");
    analyze(&ast, &s, &LintCheckKind::ALL)
}

// Python-looking fragments so the fuzzer reaches deep parser states.
fn fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("def f(a, b=1, *c, **d):\n".to_string()),
        Just("class C(B):\n".to_string()),
        Just("    ".to_string()),
        Just("\t".to_string()),
        Just("\n".to_string()),
        Just("\\\n".to_string()),
        Just("if x:".to_string()),
        Just("else:".to_string()),
        Just("return".to_string()),
        Just("lambda x: x".to_string()),
        Just("f'{a!r:>{w}}'".to_string()),
        Just("'''doc".to_string()),
        Just("\"".to_string()),
        Just("0x1F 0o17 0b1 1_000 1e5 3j 012".to_string()),
        Just("print 1".to_string()),
        Just("f(a=1, a=2)".to_string()),
        Just("(x := 1)".to_string()),
        Just("async def g(): await z".to_string()),
        Just("[i for i in y if i]".to_string()),
        Just("@deco".to_string()),
        Just("é".to_string()),
        Just("\r\n".to_string()),
        "[ -~]{0,12}".prop_map(|s| s),
        any::<char>().prop_map(|c| c.to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parse_is_total_and_coherent(parts in prop::collection::vec(fragment(), 0..24)) {
        let src = SourceText::new(parts.concat());
        let first = parse_module(&src);
        match &first {
            Ok(ast) => {
                // Analysis of anything that parses must not panic either.
                let _ = analyze(ast, &src, &LintCheckKind::ALL);
            }
            Err(e) => {
                prop_assert_eq!(e.is_eof, e.category.is_eof());
                prop_assert!(e.line >= 1);
            }
        }
        prop_assert_eq!(first.is_ok(), parse_module(&src).is_ok());
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let _ = parse_module(&SourceText::new(s));
    }

    #[test]
    fn unused_local_adds_exactly_one(name in "[a-z]{1,6}v", value in 0u32..1000) {
        prop_assume!(!is_builtin(&name));
        let base = "import os\n\ndef f(a):\n    b = os.sep\n    return a + b\n";
        let with = format!(
            "import os\n\ndef f(a):\n    b = os.sep\n    {name} = {value}\n    return a + b\n"
        );
        let before = lint(base);
        let after = lint(&with);
        prop_assert_eq!(after.len(), before.len() + 1);
        prop_assert!(after.iter().any(|d| d.kind == LintCheckKind::UnusedVariable && d.symbol == name));
    }
}

#[test]
fn empty_module_is_clean() {
    assert!(lint("").is_empty());
}

#[test]
fn builtins_are_never_undefined() {
    let names = [
        "print",
        "len",
        "range",
        "open",
        "Exception",
        "ValueError",
        "__name__",
        "__file__",
        "__doc__",
        "__builtins__",
        "NotImplemented",
        "Ellipsis",
        "breakpoint",
        "WindowsError",
    ];
    let src: String = names.iter().map(|n| format!("{n}\n")).collect();
    assert!(lint(&src).is_empty());
}

#[test]
fn reading_a_binding_removes_its_diagnostic() {
    assert_eq!(lint("import os\n").len(), 1);
    assert!(lint("import os\nos\n").is_empty());
    assert_eq!(lint("def f():\n    x = 1\n").len(), 1);
    assert!(lint("def f():\n    x = 1\n    return x\n").is_empty());
}

#[test]
fn check_selection_order_does_not_matter() {
    let src = "import os\ndef f():\n    x = 1\n    return y + f''\n";
    let s = SourceText::new(src);
    let ast = parse_module(&s).unwrap();
    let mut rev = LintCheckKind::ALL;
    rev.reverse();
    assert_eq!(
        analyze(&ast, &s, &LintCheckKind::ALL),
        analyze(&ast, &s, &rev)
    );
    let only = analyze(&ast, &s, &[LintCheckKind::UnusedImport]);
    assert_eq!(only.len(), 1);
    assert_eq!(only[0].symbol, "os");
}

#[test]
fn deferred_function_bodies_see_later_definitions() {
    assert!(lint("def f():\n    return g()\n\ndef g():\n    return 1\n").is_empty());
}
