//! Function-completion problems from local trees of Python files.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pyast::{parse_module, Ast, Constant, NodeId, NodeKind, SourceText, TextRange};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub path: String,
    pub context: String,
    pub groundtruth: String,
    pub context_tokens: usize,
    pub groundtruth_tokens: usize,
}

/// Byte ranges of one function with a docstring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSpan {
    pub name: String,
    /// From the first decorator (or `def`) through the header colon.
    pub header_span: TextRange,
    pub docstring_span: TextRange,
    /// From the first body statement through the last.
    pub body_span: TextRange,
    pub is_method: bool,
    pub is_async: bool,
    pub top_level: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Unparsable,
    NoDocstringFunction,
    ContextTooShort,
    ContextTooLong,
    GroundtruthTooLong,
    NotUtf8,
    TooLarge,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SkipReason::Unparsable => "unparsable",
            SkipReason::NoDocstringFunction => "no_docstring_function",
            SkipReason::ContextTooShort => "context_too_short",
            SkipReason::ContextTooLong => "context_too_long",
            SkipReason::GroundtruthTooLong => "groundtruth_too_long",
            SkipReason::NotUtf8 => "not_utf8",
            SkipReason::TooLarge => "too_large",
        };
        f.write_str(s)
    }
}

pub trait TokenCounter: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Runs of identifier or digit characters count as one token; every other
/// non-whitespace character counts as one.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultTokenCounter;

impl TokenCounter for DefaultTokenCounter {
    fn name(&self) -> &str {
        "atom-run-v1"
    }

    fn count(&self, text: &str) -> usize {
        count_tokens_default(text)
    }
}

pub fn count_tokens_default(text: &str) -> usize {
    let mut n = 0;
    let mut in_word = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            if !in_word {
                n += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !ch.is_whitespace() {
                n += 1;
            }
        }
    }
    n
}

#[derive(Clone, Debug)]
pub struct ExtractConfig {
    pub seed: u64,
    pub min_context_tokens: usize,
    pub max_context_tokens: usize,
    /// Exclusive upper bound.
    pub max_groundtruth_tokens: usize,
    pub top_level_only: bool,
    pub max_file_bytes: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            seed: 0,
            min_context_tokens: 64,
            max_context_tokens: 768,
            max_groundtruth_tokens: 256,
            top_level_only: false,
            max_file_bytes: 1 << 20,
        }
    }
}

/// Functions and methods whose first statement is a string literal, in
/// document order.
pub fn enumerate_candidates(ast: &Ast, _source: &SourceText) -> Vec<FunctionSpan> {
    let mut out = Vec::new();
    visit(ast, ast.module_body(), Parent::Module, &mut out);
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parent {
    Module,
    Class,
    Other,
}

fn visit(ast: &Ast, body: &[NodeId], parent: Parent, out: &mut Vec<FunctionSpan>) {
    for &id in body {
        let node = ast.node(id);
        match &node.kind {
            NodeKind::FunctionDef {
                name,
                body,
                is_async,
                header_end,
                ..
            } => {
                if let Some(doc) = docstring(ast, body) {
                    let first = ast.node(body[0]).range;
                    let last = ast.node(*body.last().unwrap()).range;
                    out.push(FunctionSpan {
                        name: name.clone(),
                        header_span: TextRange::new(node.range.start, *header_end),
                        docstring_span: doc,
                        body_span: TextRange::new(first.start, last.end),
                        is_method: parent == Parent::Class,
                        is_async: *is_async,
                        top_level: parent == Parent::Module,
                    });
                }
                visit(ast, body, Parent::Other, out);
            }
            NodeKind::ClassDef { body, .. } => visit(ast, body, Parent::Class, out),
            _ => {
                for child in node.kind.children() {
                    if is_statement_block_owner(ast, child) {
                        visit(ast, &[child], parent_for_nested(parent), out);
                    }
                }
            }
        }
    }
}

// Compound statements (if/for/while/try/with) can hold definitions; their
// children that are statements are visited with the same rules.
fn is_statement_block_owner(ast: &Ast, id: NodeId) -> bool {
    matches!(
        ast.kind(id),
        NodeKind::FunctionDef { .. }
            | NodeKind::ClassDef { .. }
            | NodeKind::If { .. }
            | NodeKind::For { .. }
            | NodeKind::While { .. }
            | NodeKind::Try { .. }
            | NodeKind::With { .. }
            | NodeKind::ExceptHandler { .. }
    )
}

fn parent_for_nested(parent: Parent) -> Parent {
    match parent {
        // A def under `if` at module level is still top level.
        Parent::Module => Parent::Module,
        _ => Parent::Other,
    }
}

fn docstring(ast: &Ast, body: &[NodeId]) -> Option<TextRange> {
    let first = *body.first()?;
    let NodeKind::Expr { value } = ast.kind(first) else {
        return None;
    };
    match ast.kind(*value) {
        NodeKind::Constant {
            value: Constant::Str(_),
        } => Some(ast.node(first).range),
        _ => None,
    }
}

/// Picks one candidate of a file and cuts it into a problem.
pub fn extract_problem(
    source: &SourceText,
    path: &str,
    config: &ExtractConfig,
    counter: &dyn TokenCounter,
) -> Result<Problem, SkipReason> {
    let ast = parse_module(source).map_err(|_| SkipReason::Unparsable)?;
    let mut candidates = enumerate_candidates(&ast, source);
    if config.top_level_only {
        candidates.retain(|c| c.top_level);
    }
    if candidates.is_empty() {
        return Err(SkipReason::NoDocstringFunction);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(file_seed(config.seed, path));
    let pick = &candidates[rng.gen_range(0..candidates.len())];

    let text = &source.text;
    let cut = line_end(text, pick.docstring_span.end as usize);
    let body_end = line_end(text, pick.body_span.end as usize).max(cut);
    let context = &text[..cut];
    let groundtruth = &text[cut..body_end];

    let context_tokens = counter.count(context);
    let groundtruth_tokens = counter.count(groundtruth);
    if context_tokens < config.min_context_tokens {
        return Err(SkipReason::ContextTooShort);
    }
    if context_tokens > config.max_context_tokens {
        return Err(SkipReason::ContextTooLong);
    }
    if groundtruth_tokens >= config.max_groundtruth_tokens {
        return Err(SkipReason::GroundtruthTooLong);
    }
    Ok(Problem {
        id: problem_id(path, pick.header_span.start, body_end as u32),
        path: path.to_string(),
        context: context.to_string(),
        groundtruth: groundtruth.to_string(),
        context_tokens,
        groundtruth_tokens,
    })
}

/// Offset just past the newline ending the line that contains `pos`, or
/// the end of the text.
fn line_end(text: &str, pos: usize) -> usize {
    match text.as_bytes()[pos..].iter().position(|&b| b == b'\n') {
        Some(i) => pos + i + 1,
        None => text.len(),
    }
}

fn file_seed(seed: u64, path: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(path.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn problem_id(path: &str, start: u32, end: u32) -> String {
    let mut h = Sha256::new();
    h.update(path.as_bytes());
    h.update([0]);
    h.update(format!("{start}:{end}").as_bytes());
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExtractStats {
    pub files_seen: usize,
    pub extracted: usize,
    pub skipped: BTreeMap<SkipReason, usize>,
}

#[derive(Debug)]
pub struct Extraction {
    pub problems: Vec<Problem>,
    pub stats: ExtractStats,
}

/// Walks `root` for `*.py` files in sorted order and extracts at most one
/// problem per file. Paths in problems are relative to `root` and use `/`.
pub fn extract_tree(
    root: &Path,
    config: &ExtractConfig,
    counter: &dyn TokenCounter,
) -> io::Result<Extraction> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(io::Error::other)?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "py") {
            files.push(entry.into_path());
        }
    }
    let mut rel: Vec<(String, std::path::PathBuf)> = files
        .into_iter()
        .map(|p| {
            let r = p.strip_prefix(root).unwrap_or(&p);
            let s = r
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            (s, p)
        })
        .collect();
    rel.sort();

    let mut stats = ExtractStats::default();
    let mut problems = Vec::new();
    for (name, path) in rel {
        stats.files_seen += 1;
        let result = read_source(&path, config.max_file_bytes)?
            .and_then(|src| extract_problem(&src, &name, config, counter));
        match result {
            Ok(p) => {
                stats.extracted += 1;
                problems.push(p);
            }
            Err(reason) => {
                log::debug!("{name}: skipped ({reason})");
                *stats.skipped.entry(reason).or_default() += 1;
            }
        }
    }
    Ok(Extraction { problems, stats })
}

fn read_source(path: &Path, cap: u64) -> io::Result<Result<SourceText, SkipReason>> {
    if std::fs::metadata(path)?.len() > cap {
        return Ok(Err(SkipReason::TooLarge));
    }
    let bytes = std::fs::read(path)?;
    Ok(String::from_utf8(bytes)
        .map(SourceText::new)
        .map_err(|_| SkipReason::NotUtf8))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemsHeader {
    pub format_version: u32,
    pub token_counter: String,
    pub seed: u64,
}

pub fn write_problems<W: Write>(
    mut out: W,
    header: &ProblemsHeader,
    problems: &[Problem],
) -> io::Result<()> {
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for p in problems {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemsError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("missing header record")]
    MissingHeader,
    #[error("unsupported format_version {0}")]
    Version(u32),
}

/// Reads a problems file written by [`write_problems`].
pub fn read_problems<R: BufRead>(
    input: R,
) -> Result<(ProblemsHeader, Vec<Problem>), ProblemsError> {
    let mut header = None;
    let mut problems = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |source| ProblemsError::Malformed {
            line: i + 1,
            source,
        };
        if header.is_none() {
            let h: ProblemsHeader = serde_json::from_str(&line).map_err(malformed)?;
            if h.format_version != FORMAT_VERSION {
                return Err(ProblemsError::Version(h.format_version));
            }
            header = Some(h);
        } else {
            problems.push(serde_json::from_str(&line).map_err(malformed)?);
        }
    }
    Ok((header.ok_or(ProblemsError::MissingHeader)?, problems))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(src: &str) -> Vec<FunctionSpan> {
        let s = SourceText::new(src);
        enumerate_candidates(&parse_module(&s).unwrap(), &s)
    }

    #[test]
    fn token_counts() {
        assert_eq!(count_tokens_default("x = 1"), 3);
        assert_eq!(count_tokens_default(""), 0);
        assert_eq!(count_tokens_default("def f(a, b):"), 8);
    }

    #[test]
    fn only_docstring_functions() {
        let c = spans("def a():\n    \"doc\"\n    return 1\n\ndef b():\n    pass\n");
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].name, "a");
    }

    #[test]
    fn methods_in_order() {
        let c = spans(
            "class K:\n    def m1(self):\n        '''one'''\n    def m2(self):\n        '''two'''\n",
        );
        let names: Vec<_> = c.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["m1", "m2"]);
        assert!(c.iter().all(|s| s.is_method && !s.top_level));
    }

    #[test]
    fn async_def_is_included() {
        let c = spans("async def go():\n    \"\"\"Doc.\"\"\"\n    await x\n");
        assert_eq!(c.len(), 1);
        assert!(c[0].is_async);
    }

    #[test]
    fn nested_and_conditional_defs() {
        let c = spans(
            "if X:\n    def a():\n        'd'\ndef b():\n    'd'\n    def c():\n        'd'\n",
        );
        let names: Vec<_> = c.iter().map(|s| (s.name.as_str(), s.top_level)).collect();
        assert_eq!(names, [("a", true), ("b", true), ("c", false)]);
    }

    #[test]
    fn bytes_and_fstrings_are_not_docstrings() {
        assert!(spans("def a():\n    b'x'\ndef b():\n    f'x'\n").is_empty());
    }

    fn loose() -> ExtractConfig {
        ExtractConfig {
            min_context_tokens: 0,
            ..ExtractConfig::default()
        }
    }

    #[test]
    fn cut_after_docstring_line() {
        let src = "import os\n\ndef f(a):\n    \"\"\"Doc.\"\"\"  # note\n    return a\n\nx = 1\n";
        let p = extract_problem(
            &SourceText::new(src),
            "m.py",
            &loose(),
            &DefaultTokenCounter,
        )
        .unwrap();
        assert_eq!(
            p.context,
            "import os\n\ndef f(a):\n    \"\"\"Doc.\"\"\"  # note\n"
        );
        assert_eq!(p.groundtruth, "    return a\n");
        assert!(src.starts_with(&(p.context.clone() + &p.groundtruth)));
    }

    #[test]
    fn skip_reasons() {
        let cfg = loose();
        let c = &DefaultTokenCounter;
        let run =
            |s: &str, cfg: &ExtractConfig| extract_problem(&SourceText::new(s), "a.py", cfg, c);
        assert_eq!(run("def f(:\n", &cfg), Err(SkipReason::Unparsable));
        assert_eq!(
            run("def f():\n    pass\n", &cfg),
            Err(SkipReason::NoDocstringFunction)
        );
        assert_eq!(
            run("def f():\n    'd'\n", &ExtractConfig::default()),
            Err(SkipReason::ContextTooShort)
        );
        let tight = ExtractConfig {
            max_context_tokens: 3,
            ..cfg.clone()
        };
        assert_eq!(
            run("def f():\n    'd'\n", &tight),
            Err(SkipReason::ContextTooLong)
        );
        let gt = ExtractConfig {
            max_groundtruth_tokens: 2,
            ..cfg
        };
        assert_eq!(
            run("def f():\n    'd'\n    return 1\n", &gt),
            Err(SkipReason::GroundtruthTooLong)
        );
    }

    #[test]
    fn selection_is_deterministic() {
        let src: String = (0..20)
            .map(|i| format!("def f{i}():\n    'doc'\n    return {i}\n"))
            .collect();
        let s = SourceText::new(src);
        let a = extract_problem(&s, "x.py", &loose(), &DefaultTokenCounter).unwrap();
        let b = extract_problem(&s, "x.py", &loose(), &DefaultTokenCounter).unwrap();
        assert_eq!(a, b);
        let picks: std::collections::HashSet<_> = (0..40)
            .map(|seed| {
                let cfg = ExtractConfig { seed, ..loose() };
                extract_problem(&s, "x.py", &cfg, &DefaultTokenCounter)
                    .unwrap()
                    .id
            })
            .collect();
        assert!(picks.len() > 5, "selection ignores the seed");
    }
}
