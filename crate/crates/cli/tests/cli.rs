use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn complint(args: &[&str]) -> Output {
    run(Command::new(env!("CARGO_BIN_EXE_complint"))
        .args(args)
        .env_remove("COMPLINT_JOBS"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.env("RUST_LOG", "warn").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MODULE: &str = r#""""Helpers for the fixture package."""
import os
import sys

SEPARATOR = os.sep
DEFAULTS = {"depth": 3, "names": ["alpha", "beta", "gamma"], "verbose": False}


def join_all(parts, sep=SEPARATOR):
    """Join path parts with the separator."""
    out = []
    for part in parts:
        out.append(str(part).strip(sep))
    return sep.join(out)


def describe(value):
    """Describe a value for logging."""
    kind = type(value).__name__
    return "%s(%r)" % (kind, value)
"#;

/// A small tree plus an extracted problems file.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src");
        fs::create_dir_all(src.join("pkg")).unwrap();
        for i in 0..6 {
            let text = MODULE.replace("fixture package", &format!("fixture package {i}"));
            fs::write(src.join("pkg").join(format!("m{i}.py")), text).unwrap();
        }
        let ws = Workspace { dir };
        let out = complint(&[
            "extract",
            "--root",
            path_str(&ws.path("src")),
            "--seed",
            "3",
            "--min-context-tokens",
            "16",
            "--out",
            path_str(&ws.path("problems.jsonl")),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn problem_ids(&self) -> Vec<String> {
        fs::read_to_string(self.path("problems.jsonl"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                serde_json::from_str::<Value>(l).unwrap()["id"]
                    .as_str()
                    .unwrap()
                    .to_string()
            })
            .collect()
    }

    fn write_completions(&self, lines: &[Value]) -> PathBuf {
        let path = self.path("completions.jsonl");
        let text: String = lines.iter().map(|v| format!("{v}\n")).collect();
        fs::write(&path, text).unwrap();
        path
    }

    fn eval(&self, completions: &Path, out: &str, extra: &[&str]) -> Output {
        let mut args = vec![
            "eval",
            "--problems",
            path_str(&self.dir.path().join("problems.jsonl"))
                .to_owned()
                .leak(),
            "--completions",
            path_str(completions).to_owned().leak(),
            "--out",
            path_str(&self.path(out)).to_owned().leak(),
        ];
        args.extend_from_slice(extra);
        complint(&args)
    }
}

fn completions_for(ids: &[String]) -> Vec<Value> {
    let bodies = [
        "    return sep.join(parts)\n",
        "    return undefined_helper(parts)\n",
        "    result = 1\n    return kind\n",
        "    return (parts,\n",
        "    print parts\n",
    ];
    let mut out = Vec::new();
    for id in ids {
        for (i, body) in bodies.iter().enumerate() {
            out.push(serde_json::json!({"problem_id": id, "sample": i, "completion": body}));
        }
    }
    out
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&complint(&[])), 1);
    assert_eq!(code(&complint(&["frobnicate"])), 1);
    assert_eq!(code(&complint(&["eval", "--problems"])), 1);
    let missing = complint(&[
        "eval",
        "--problems",
        "/nonexistent/p.jsonl",
        "--completions",
        "/nonexistent/c.jsonl",
        "--out",
        "/tmp/never.jsonl",
    ]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("does not exist"));
    assert_eq!(
        code(&complint(&[
            "extract",
            "--root",
            "/nonexistent",
            "--out",
            "x"
        ])),
        1
    );
    assert_eq!(code(&complint(&["--help"])), 0);
}

#[test]
fn extract_empty_tree() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out_path = dir.path().join("problems.jsonl");
    let out = complint(&[
        "extract",
        "--root",
        path_str(&dir.path().join("empty")),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("files_seen 0\nextracted 0\n"));
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 1, "header only");
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["format_version"], 1);
}

#[test]
fn extract_is_deterministic_and_overwrites() {
    let ws = Workspace::new();
    let first = fs::read(ws.path("problems.jsonl")).unwrap();
    assert_eq!(ws.problem_ids().len(), 6);
    let again = complint(&[
        "extract",
        "--root",
        path_str(&ws.path("src")),
        "--seed",
        "3",
        "--min-context-tokens",
        "16",
        "--out",
        path_str(&ws.path("problems.jsonl")),
    ]);
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read(ws.path("problems.jsonl")).unwrap(), first);
}

#[test]
fn eval_output_does_not_depend_on_jobs() {
    let ws = Workspace::new();
    let comps = ws.write_completions(&completions_for(&ws.problem_ids()));
    assert_eq!(code(&ws.eval(&comps, "v1.jsonl", &["--jobs", "1"])), 0);
    assert_eq!(code(&ws.eval(&comps, "v8.jsonl", &["--jobs", "8"])), 0);
    let via_env = run(Command::new(env!("CARGO_BIN_EXE_complint"))
        .args([
            "eval",
            "--problems",
            path_str(&ws.path("problems.jsonl")),
            "--completions",
            path_str(&comps),
            "--out",
            path_str(&ws.path("venv.jsonl")),
        ])
        .env("COMPLINT_JOBS", "3"));
    assert_eq!(code(&via_env), 0, "{}", stderr(&via_env));
    let one = fs::read(ws.path("v1.jsonl")).unwrap();
    assert_eq!(one, fs::read(ws.path("v8.jsonl")).unwrap());
    assert_eq!(one, fs::read(ws.path("venv.jsonl")).unwrap());

    let text = String::from_utf8(one).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["kind"], "verdicts");
    let outcomes: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["outcome"]
                .as_str()
                .unwrap()
                .into()
        })
        .collect();
    assert_eq!(outcomes.len(), 30);
    assert_eq!(
        &outcomes[..5],
        ["lint", "lint", "lint", "ast_error", "ast_error"]
    );
}

#[test]
fn bad_jobs_value_is_a_usage_error() {
    let ws = Workspace::new();
    let comps = ws.write_completions(&completions_for(&ws.problem_ids()));
    assert_eq!(code(&ws.eval(&comps, "v.jsonl", &["--jobs", "0"])), 1);
    let env_zero = run(Command::new(env!("CARGO_BIN_EXE_complint"))
        .args([
            "eval",
            "--problems",
            path_str(&ws.path("problems.jsonl")),
            "--completions",
            path_str(&comps),
            "--out",
            path_str(&ws.path("v.jsonl")),
        ])
        .env("COMPLINT_JOBS", "zero"));
    assert_eq!(code(&env_zero), 1);
}

#[test]
fn orphan_completions_warn_and_are_skipped() {
    let ws = Workspace::new();
    let ids = ws.problem_ids();
    let mut lines = completions_for(&ids[..1]);
    lines.push(
        serde_json::json!({"problem_id": "feedfacefeedface", "sample": 0, "completion": "pass\n"}),
    );
    let comps = ws.write_completions(&lines);
    let out = ws.eval(&comps, "v.jsonl", &[]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("orphans 1"));
    assert!(stderr(&out).contains("unknown problem"));
    let verdicts = fs::read_to_string(ws.path("v.jsonl")).unwrap();
    assert_eq!(verdicts.lines().count(), 1 + 5);
}

#[test]
fn malformed_completion_line_is_a_data_error() {
    let ws = Workspace::new();
    let id = &ws.problem_ids()[0];
    let path = ws.path("completions.jsonl");
    fs::write(
        &path,
        format!(
            "{}\n\n{{\"problem_id\": \"{id}\", \"sample\": \n",
            serde_json::json!({"problem_id": id, "sample": 0, "completion": "pass\n"})
        ),
    )
    .unwrap();
    let out = ws.eval(&path, "v.jsonl", &[]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("completions.jsonl:3"),
        "{}",
        stderr(&out)
    );
    assert!(!ws.path("v.jsonl").exists());
}

#[test]
fn report_json_csv_and_similarity() {
    let ws = Workspace::new();
    let comps = ws.write_completions(&completions_for(&ws.problem_ids()));
    assert_eq!(code(&ws.eval(&comps, "v.jsonl", &[])), 0);
    let verdicts = ws.path("v.jsonl");
    let out = complint(&[
        "report",
        "--verdicts",
        path_str(&verdicts),
        "--conditional",
        "--similarity",
        "--problems",
        path_str(&ws.path("problems.jsonl")),
        "--completions",
        path_str(&comps),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let report = &doc["report"];
    assert_eq!(report["total_samples"], 30);
    assert_eq!(report["evaluated_samples"], 30);
    assert_eq!(report["ast_total_count"], 12);
    assert_eq!(report["ast_total_rate"], 40.0);
    assert_eq!(report["edit_similarity_samples"], 30);
    assert!(doc["conditional"]["rows"].as_array().unwrap().len() == 5);

    let csv_path = ws.path("report.csv");
    let csv = complint(&[
        "report",
        "--verdicts",
        path_str(&verdicts),
        "--format",
        "csv",
        "--out",
        path_str(&csv_path),
    ]);
    assert_eq!(code(&csv), 0);
    assert!(fs::read_to_string(&csv_path).unwrap().lines().count() > 5);

    assert_eq!(
        code(&complint(&[
            "report",
            "--verdicts",
            path_str(&verdicts),
            "--similarity"
        ])),
        1
    );
}

#[test]
fn report_on_empty_verdicts_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.jsonl");
    fs::write(&path, "{\"format_version\":1,\"kind\":\"verdicts\"}\n").unwrap();
    let out = complint(&["report", "--verdicts", path_str(&path)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn report_with_only_unparsable_contexts_has_null_rates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.jsonl");
    fs::write(
        &path,
        "{\"problem_id\":\"a\",\"sample\":0,\"outcome\":\"context_unparsable\",\"diagnostics\":[]}\n",
    )
    .unwrap();
    let out = complint(&["report", "--verdicts", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["report"]["discarded_context_unparsable"], 1);
    assert!(doc["report"]["ast_total_rate"].is_null());
}

#[test]
fn lint_prints_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.py");
    fs::write(
        &file,
        "import os\n\ndef f():\n    x = 1\n    return y + f'z'\n",
    )
    .unwrap();
    let out = complint(&["lint", path_str(&file)]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "1:0 UnusedImport os 'os' imported but unused\n\
         4:4 UnusedVariable x local variable 'x' is assigned to but never used\n\
         5:11 UndefinedName y undefined name 'y'\n\
         5:15 FStringMissingPlaceholders - f-string is missing placeholders\n"
    );
    let only = complint(&[
        "lint",
        path_str(&file),
        "--checks",
        "UndefinedName,UnusedImport",
    ]);
    assert_eq!(stdout(&only).lines().count(), 2);
    assert_eq!(
        code(&complint(&["lint", path_str(&file), "--checks", "Bogus"])),
        1
    );

    fs::write(&file, "def f(:\n").unwrap();
    let bad = complint(&["lint", path_str(&file)]);
    assert_eq!(code(&bad), 2);
    assert!(
        stdout(&bad).starts_with("1:6 SyntaxError invalid_syntax"),
        "{}",
        stdout(&bad)
    );
}
