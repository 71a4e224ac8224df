//! Syntax-error reports and the message -> category taxonomy.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::tokens::{tokenize, Tok};
use super::SourceText;

/// Python exception class a front-end error would be raised as.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Syntax,
    Indentation,
    Tab,
}

/// An error as produced by the tokenizer, parser or tree builder, before
/// categorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawError {
    pub class: ErrorClass,
    pub message: String,
    pub line: u32,
    pub col: u32,
    /// Offending source text. Only plain syntax errors that carry text get
    /// the legacy `print`/`exec` statement check.
    pub text: Option<String>,
}

impl RawError {
    pub fn new(class: ErrorClass, message: impl Into<String>, line: u32, col: u32) -> Self {
        RawError {
            class,
            message: message.into(),
            line,
            col,
            text: None,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    /// Final message, after the legacy statement rewrite.
    pub fn final_message(&self) -> String {
        if self.class == ErrorClass::Syntax {
            if let Some(m) = self.text.as_deref().and_then(legacy_statement_message) {
                return m;
            }
        }
        self.message.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AstErrorCategory {
    UnexpectedEof,
    EolStringLiteral,
    InvalidSyntaxAtEof,
    EofTripleQuotedString,
    InvalidSyntax,
    PrintMissingParentheses,
    KeywordArgumentRepeated,
    LeadingZerosDecimal,
    UnmatchedParen,
    CannotAssignToFunctionCall,
    PositionalAfterKeyword,
    ExpressionCannotContainAssignment,
    Other,
}

impl AstErrorCategory {
    pub const ALL: [AstErrorCategory; 13] = [
        AstErrorCategory::UnexpectedEof,
        AstErrorCategory::EolStringLiteral,
        AstErrorCategory::InvalidSyntaxAtEof,
        AstErrorCategory::EofTripleQuotedString,
        AstErrorCategory::InvalidSyntax,
        AstErrorCategory::PrintMissingParentheses,
        AstErrorCategory::KeywordArgumentRepeated,
        AstErrorCategory::LeadingZerosDecimal,
        AstErrorCategory::UnmatchedParen,
        AstErrorCategory::CannotAssignToFunctionCall,
        AstErrorCategory::PositionalAfterKeyword,
        AstErrorCategory::ExpressionCannotContainAssignment,
        AstErrorCategory::Other,
    ];

    pub fn is_eof(self) -> bool {
        matches!(
            self,
            AstErrorCategory::UnexpectedEof
                | AstErrorCategory::EolStringLiteral
                | AstErrorCategory::InvalidSyntaxAtEof
                | AstErrorCategory::EofTripleQuotedString
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AstErrorCategory::UnexpectedEof => "unexpected_eof",
            AstErrorCategory::EolStringLiteral => "eol_string_literal",
            AstErrorCategory::InvalidSyntaxAtEof => "invalid_syntax_at_eof",
            AstErrorCategory::EofTripleQuotedString => "eof_triple_quoted_string",
            AstErrorCategory::InvalidSyntax => "invalid_syntax",
            AstErrorCategory::PrintMissingParentheses => "print_missing_parentheses",
            AstErrorCategory::KeywordArgumentRepeated => "keyword_argument_repeated",
            AstErrorCategory::LeadingZerosDecimal => "leading_zeros_decimal",
            AstErrorCategory::UnmatchedParen => "unmatched_paren",
            AstErrorCategory::CannotAssignToFunctionCall => "cannot_assign_to_function_call",
            AstErrorCategory::PositionalAfterKeyword => "positional_after_keyword",
            AstErrorCategory::ExpressionCannotContainAssignment => {
                "expression_cannot_contain_assignment"
            }
            AstErrorCategory::Other => "other",
        }
    }
}

impl fmt::Display for AstErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AstErrorCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AstErrorCategory::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown AST error category {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxErrorReport {
    pub category: AstErrorCategory,
    pub is_eof: bool,
    pub line: u32,
    pub column: u32,
    pub raw_message: String,
}

#[derive(Deserialize)]
struct RuleFile {
    version: u32,
    rule: Vec<Rule>,
}

#[derive(Deserialize)]
struct Rule {
    contains: String,
    category: AstErrorCategory,
}

struct Table {
    version: u32,
    rules: Vec<(String, AstErrorCategory)>,
}

const TABLE_SOURCE: &str = include_str!("../../data/ast_error_categories.toml");

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let file: RuleFile =
            toml::from_str(TABLE_SOURCE).expect("embedded category table is valid TOML");
        Table {
            version: file.version,
            rules: file
                .rule
                .into_iter()
                .map(|r| (normalize_message(&r.contains), r.category))
                .collect(),
        }
    })
}

/// Version of the embedded message table.
pub fn category_table_version() -> u32 {
    table().version
}

pub fn normalize_message(msg: &str) -> String {
    let lowered = msg.to_lowercase().replace('"', "'");
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Maps a front-end message onto the category enumeration.
pub fn classify_syntax_error(
    raw_message: &str,
    line: u32,
    column: u32,
    source: &SourceText,
) -> (AstErrorCategory, bool) {
    let norm = normalize_message(raw_message);
    let category = table()
        .rules
        .iter()
        .find(|(needle, _)| norm.contains(needle.as_str()))
        .map(|(_, c)| *c)
        .unwrap_or(AstErrorCategory::Other);
    let category = match category {
        AstErrorCategory::InvalidSyntax | AstErrorCategory::InvalidSyntaxAtEof => {
            if at_or_past_last_token(line, column, &source.text) {
                AstErrorCategory::InvalidSyntaxAtEof
            } else {
                AstErrorCategory::InvalidSyntax
            }
        }
        c => c,
    };
    (category, category.is_eof())
}

/// True when (line, column) is at or beyond the start of the source's last
/// significant token.
fn at_or_past_last_token(line: u32, column: u32, text: &str) -> bool {
    let toks = tokenize(text);
    let last = toks.tokens.iter().rev().find(|t| {
        !matches!(
            t.kind,
            Tok::Newline | Tok::Indent | Tok::Dedent | Tok::EndMarker
        )
    });
    match last {
        None => true,
        Some(t) => (line, column) >= (t.line, t.col),
    }
}

/// CPython's legacy statement check: errors whose text has no `(` and
/// starts with `print ` (possibly after a `:`) get a dedicated message.
pub(crate) fn legacy_statement_message(text: &str) -> Option<String> {
    if text.contains('(') {
        return None;
    }
    if let Some(m) = check_legacy(text) {
        return Some(m);
    }
    let colon = text.find(':')?;
    check_legacy(&text[colon + 1..])
}

fn check_legacy(text: &str) -> Option<String> {
    let rest = text.trim_start();
    if rest.is_empty() {
        return None;
    }
    if rest.starts_with("print ") {
        return Some(print_message(rest));
    }
    if rest.starts_with("exec ") {
        return Some("Missing parentheses in call to 'exec'".to_string());
    }
    None
}

fn print_message(stmt: &str) -> String {
    let data = &stmt["print ".len()..];
    let data = match data.find(';') {
        Some(i) => &data[..i],
        None => data,
    };
    let data = data.trim_matches(|c| matches!(c, ' ' | '\t' | '\r' | '\n'));
    let end_arg = if data.ends_with(',') {
        " end=\" \""
    } else {
        ""
    };
    format!("Missing parentheses in call to 'print'. Did you mean print({data}{end_arg})?")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(s: &str) -> SourceText {
        SourceText::new(s)
    }

    #[test]
    fn every_category_round_trips_its_name() {
        for c in AstErrorCategory::ALL {
            assert_eq!(c.as_str().parse::<AstErrorCategory>().unwrap(), c);
        }
    }

    #[test]
    fn eof_subset_is_exactly_four() {
        let eof: Vec<_> = AstErrorCategory::ALL
            .iter()
            .filter(|c| c.is_eof())
            .collect();
        assert_eq!(eof.len(), 4);
    }

    #[test]
    fn unknown_message_is_other() {
        let (c, eof) = classify_syntax_error("some future message", 1, 0, &src("x\n"));
        assert_eq!(c, AstErrorCategory::Other);
        assert!(!eof);
    }

    #[test]
    fn normalization_ignores_case_quotes_and_spacing() {
        let (c, _) = classify_syntax_error(
            "Missing  parentheses in call to \"print\"",
            1,
            0,
            &src("print 1\n"),
        );
        assert_eq!(c, AstErrorCategory::PrintMissingParentheses);
    }

    #[test]
    fn invalid_syntax_split_by_position() {
        let s = src("x = (1,\ny y\nz = 3\n");
        assert_eq!(
            classify_syntax_error("invalid syntax", 2, 2, &s).0,
            AstErrorCategory::InvalidSyntax
        );
        let s = src("x = 1\ny = 2 +\n");
        assert_eq!(
            classify_syntax_error("invalid syntax", 2, 7, &s).0,
            AstErrorCategory::InvalidSyntaxAtEof
        );
    }

    #[test]
    fn only_close_paren_counts_as_unmatched_paren() {
        let s = src("x\n");
        assert_eq!(
            classify_syntax_error("unmatched ')'", 1, 0, &s).0,
            AstErrorCategory::UnmatchedParen
        );
        assert_eq!(
            classify_syntax_error("unmatched ']'", 1, 0, &s).0,
            AstErrorCategory::Other
        );
    }

    #[test]
    fn legacy_print_rewrite() {
        assert_eq!(
            legacy_statement_message("    print \"Error in prod\"\n").unwrap(),
            "Missing parentheses in call to 'print'. Did you mean print(\"Error in prod\")?"
        );
        assert_eq!(legacy_statement_message("print(\"x\" y\n"), None);
        assert!(legacy_statement_message("if x: print y\n").is_some());
        assert_eq!(
            legacy_statement_message("print x,\n").unwrap(),
            "Missing parentheses in call to 'print'. Did you mean print(x, end=\" \")?"
        );
    }
}
