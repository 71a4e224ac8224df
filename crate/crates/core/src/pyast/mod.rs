//! Python 3.8 front end: tokenizer, parser and syntax-error taxonomy.

mod error;
mod nodes;
mod parser;
mod strings;
mod tokens;

pub use error::{
    category_table_version, classify_syntax_error, normalize_message, AstErrorCategory,
    SyntaxErrorReport,
};
pub use nodes::{
    Ast, BoolOp, CmpOp, Constant, ExprContext, LineIndex, Node, NodeId, NodeKind, Operator, Pos,
    Span, TextRange, UnaryOp,
};
pub(crate) use parser::parse_annotation_string;
pub use tokens::is_valid_identifier;

/// Source text of one file or snippet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceText {
    pub text: String,
}

impl SourceText {
    pub fn new(text: impl Into<String>) -> Self {
        SourceText { text: text.into() }
    }

    /// One more than the number of `\n` characters.
    pub fn line_count(&self) -> usize {
        1 + self.text.bytes().filter(|&b| b == b'\n').count()
    }
}

/// Parses a module, returning the tree or the first syntax error CPython 3.8
/// would raise for it.
pub fn parse_module(source: &SourceText) -> Result<Ast, SyntaxErrorReport> {
    parser::parse(&source.text).map_err(|raw| {
        let message = raw.final_message();
        let (category, is_eof) = classify_syntax_error(&message, raw.line, raw.col, source);
        SyntaxErrorReport {
            category,
            is_eof,
            line: raw.line,
            column: raw.col,
            raw_message: message,
        }
    })
}
