//! Two-pass attribution: lint the context alone and the context plus the
//! completion, and charge the completion with whatever is new.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lint::{analyze, Diagnostic, LintCheckKind, NameKind, UndefinedKindClassifier};
use crate::pyast::{parse_module, AstErrorCategory, SourceText, SyntaxErrorReport};

/// A generated completion for one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionSample {
    pub problem_id: String,
    #[serde(rename = "sample")]
    pub sample_index: u32,
    pub completion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedKinds {
    pub variable: u32,
    pub function: u32,
}

impl UndefinedKinds {
    pub fn add(&mut self, kind: NameKind) {
        match kind {
            NameKind::Variable => self.variable += 1,
            NameKind::Function => self.function += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    ContextUnparsable,
    AstError(SyntaxErrorReport),
    Lint {
        attributed: Vec<Diagnostic>,
        context_error_kinds: BTreeSet<LintCheckKind>,
        undefined_kinds: UndefinedKinds,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::ContextUnparsable => "context_unparsable",
            Outcome::AstError(_) => "ast_error",
            Outcome::Lint { .. } => "lint",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleVerdict {
    pub problem_id: String,
    pub sample_index: u32,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorType {
    Ast(AstErrorCategory),
    Lint(LintCheckKind),
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorType::Ast(c) => write!(f, "ast:{c}"),
            ErrorType::Lint(k) => write!(f, "lint:{k}"),
        }
    }
}

/// Joins context and completion, bridging with one newline when the context
/// does not already end in one.
pub fn concatenate(context: &str, completion: &str) -> String {
    let mut out = String::with_capacity(context.len() + completion.len() + 1);
    out.push_str(context);
    if !context.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(completion);
    out
}

/// Result of the first pass, reusable across every sample of a problem.
#[derive(Clone, Debug)]
pub struct ContextAnalysis {
    text: String,
    /// `None` when the context does not parse.
    diagnostics: Option<Vec<Diagnostic>>,
}

impl ContextAnalysis {
    pub fn new(context: &SourceText) -> Self {
        let diagnostics = parse_module(context)
            .ok()
            .map(|ast| analyze(&ast, context, &LintCheckKind::ALL));
        ContextAnalysis {
            text: context.text.clone(),
            diagnostics,
        }
    }

    pub fn is_parsable(&self) -> bool {
        self.diagnostics.is_some()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        self.diagnostics.as_deref().unwrap_or(&[])
    }

    /// Lines of the context once the bridging newline is in place.
    pub fn line_count(&self) -> usize {
        let newlines = self.text.bytes().filter(|&b| b == b'\n').count();
        if self.text.ends_with('\n') {
            newlines
        } else {
            newlines + 1
        }
    }

    pub fn evaluate(&self, completion: &str) -> Outcome {
        let Some(context_diags) = &self.diagnostics else {
            return Outcome::ContextUnparsable;
        };
        let full = SourceText::new(concatenate(&self.text, completion));
        let ast = match parse_module(&full) {
            Ok(ast) => ast,
            Err(report) => return Outcome::AstError(report),
        };
        let full_diags = analyze(&ast, &full, &LintCheckKind::ALL);
        let attributed = diff_diagnostics(context_diags, &full_diags, self.line_count());
        let mut undefined_kinds = UndefinedKinds::default();
        if attributed
            .iter()
            .any(|d| d.kind == LintCheckKind::UndefinedName)
        {
            let classifier = UndefinedKindClassifier::new(&ast);
            for d in attributed
                .iter()
                .filter(|d| d.kind == LintCheckKind::UndefinedName)
            {
                undefined_kinds.add(classifier.classify(d));
            }
        }
        Outcome::Lint {
            attributed,
            context_error_kinds: context_diags.iter().map(|d| d.kind).collect(),
            undefined_kinds,
        }
    }
}

pub fn evaluate_sample(context: &SourceText, completion: &str) -> Outcome {
    ContextAnalysis::new(context).evaluate(completion)
}

/// Multiset difference of `full_diags` minus `context_diags`, keyed on
/// (kind, symbol, line). Each context diagnostic cancels at most one
/// full-code diagnostic; the survivors keep their order.
pub fn diff_diagnostics(
    context_diags: &[Diagnostic],
    full_diags: &[Diagnostic],
    _context_line_count: usize,
) -> Vec<Diagnostic> {
    if context_diags.is_empty() {
        return full_diags.to_vec();
    }
    let mut pending: HashMap<(LintCheckKind, &str, u32), usize> = HashMap::new();
    for d in context_diags {
        *pending
            .entry((d.kind, d.symbol.as_str(), d.line))
            .or_default() += 1;
    }
    full_diags
        .iter()
        .filter(
            |d| match pending.get_mut(&(d.kind, d.symbol.as_str(), d.line)) {
                Some(n) if *n > 0 => {
                    *n -= 1;
                    false
                }
                _ => true,
            },
        )
        .cloned()
        .collect()
}

/// Error types of a verdict, each counted once.
pub fn dedup_error_types(outcome: &Outcome) -> BTreeSet<ErrorType> {
    match outcome {
        Outcome::ContextUnparsable => BTreeSet::new(),
        Outcome::AstError(r) => BTreeSet::from([ErrorType::Ast(r.category)]),
        Outcome::Lint { attributed, .. } => {
            attributed.iter().map(|d| ErrorType::Lint(d.kind)).collect()
        }
    }
}

/// One line of the verdict JSONL file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub problem_id: String,
    pub sample: u32,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_category: Option<AstErrorCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_is_eof: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_line: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_col: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_message: Option<String>,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticRecord>,
    #[serde(default)]
    pub context_error_kinds: Vec<LintCheckKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undefined_kinds: Option<UndefinedKinds>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub kind: LintCheckKind,
    pub symbol: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl From<&SampleVerdict> for VerdictRecord {
    fn from(v: &SampleVerdict) -> Self {
        let mut rec = VerdictRecord {
            problem_id: v.problem_id.clone(),
            sample: v.sample_index,
            outcome: v.outcome.label().to_string(),
            ast_category: None,
            ast_is_eof: None,
            ast_line: None,
            ast_col: None,
            ast_message: None,
            diagnostics: Vec::new(),
            context_error_kinds: Vec::new(),
            undefined_kinds: None,
        };
        match &v.outcome {
            Outcome::ContextUnparsable => {}
            Outcome::AstError(r) => {
                rec.ast_category = Some(r.category);
                rec.ast_is_eof = Some(r.is_eof);
                rec.ast_line = Some(r.line);
                rec.ast_col = Some(r.column);
                rec.ast_message = Some(r.raw_message.clone());
            }
            Outcome::Lint {
                attributed,
                context_error_kinds,
                undefined_kinds,
            } => {
                rec.diagnostics = attributed
                    .iter()
                    .map(|d| DiagnosticRecord {
                        kind: d.kind,
                        symbol: d.symbol.clone(),
                        line: d.line,
                        col: d.column,
                        message: d.message.clone(),
                    })
                    .collect();
                rec.context_error_kinds = context_error_kinds.iter().copied().collect();
                rec.undefined_kinds = Some(*undefined_kinds);
            }
        }
        rec
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("unknown outcome {0:?}")]
    UnknownOutcome(String),
    #[error("ast_error record without ast_category")]
    MissingCategory,
}

impl TryFrom<VerdictRecord> for SampleVerdict {
    type Error = RecordError;

    fn try_from(rec: VerdictRecord) -> Result<Self, Self::Error> {
        let outcome = match rec.outcome.as_str() {
            "context_unparsable" => Outcome::ContextUnparsable,
            "ast_error" => {
                let category = rec.ast_category.ok_or(RecordError::MissingCategory)?;
                Outcome::AstError(SyntaxErrorReport {
                    category,
                    is_eof: rec.ast_is_eof.unwrap_or_else(|| category.is_eof()),
                    line: rec.ast_line.unwrap_or(1),
                    column: rec.ast_col.unwrap_or(0),
                    raw_message: rec.ast_message.unwrap_or_default(),
                })
            }
            "lint" => Outcome::Lint {
                attributed: rec
                    .diagnostics
                    .into_iter()
                    .map(|d| Diagnostic {
                        kind: d.kind,
                        symbol: d.symbol,
                        line: d.line,
                        column: d.col,
                        message: d.message,
                        related_line: None,
                    })
                    .collect(),
                context_error_kinds: rec.context_error_kinds.into_iter().collect(),
                undefined_kinds: rec.undefined_kinds.unwrap_or_default(),
            },
            other => return Err(RecordError::UnknownOutcome(other.to_string())),
        };
        Ok(SampleVerdict {
            problem_id: rec.problem_id,
            sample_index: rec.sample,
            outcome,
        })
    }
}
