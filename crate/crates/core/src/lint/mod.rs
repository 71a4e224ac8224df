//! Scope and binding analysis with six pyflakes-compatible checks.

mod builtins;
mod checker;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pyast::{Ast, NodeId, NodeKind, SourceText};
use checker::Checker;

pub use builtins::is_builtin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LintCheckKind {
    UndefinedName,
    UnusedVariable,
    FStringMissingPlaceholders,
    UnusedImport,
    RedefinedWhileUnused,
    UndefinedLocal,
}

impl LintCheckKind {
    pub const ALL: [LintCheckKind; 6] = [
        LintCheckKind::UndefinedName,
        LintCheckKind::UnusedVariable,
        LintCheckKind::FStringMissingPlaceholders,
        LintCheckKind::UnusedImport,
        LintCheckKind::RedefinedWhileUnused,
        LintCheckKind::UndefinedLocal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LintCheckKind::UndefinedName => "UndefinedName",
            LintCheckKind::UnusedVariable => "UnusedVariable",
            LintCheckKind::FStringMissingPlaceholders => "FStringMissingPlaceholders",
            LintCheckKind::UnusedImport => "UnusedImport",
            LintCheckKind::RedefinedWhileUnused => "RedefinedWhileUnused",
            LintCheckKind::UndefinedLocal => "UndefinedLocal",
        }
    }
}

impl fmt::Display for LintCheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LintCheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LintCheckKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown check kind `{s}`"))
    }
}

/// One lint finding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: LintCheckKind,
    /// The offending name; empty for f-string findings. Unused imports use
    /// the display form of the import (`os.path`, `a.b as c`).
    pub symbol: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    /// Line of the original definition, where the message names one.
    pub related_line: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameKind {
    Variable,
    Function,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScopeKind {
    Module,
    Function,
    Lambda,
    Class,
    Comprehension,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BindingKind {
    Assignment,
    AugmentedAssignment,
    FunctionDef,
    ClassDef,
    Parameter,
    Import,
    ImportFrom,
    StarImport,
    ForTarget,
    WithTarget,
    ExceptHandler,
    GlobalDecl,
    NonlocalDecl,
    ComprehensionTarget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub kind: BindingKind,
    pub def_line: u32,
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeRecord {
    pub kind: ScopeKind,
    pub parent: Option<usize>,
    /// Bindings left in the scope once analysis finished, in insertion order.
    pub bindings: Vec<Binding>,
}

impl ScopeRecord {
    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == name)
    }
}

/// All scopes of a module; index 0 is the module scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeTree {
    pub scopes: Vec<ScopeRecord>,
}

impl ScopeTree {
    pub fn module(&self) -> &ScopeRecord {
        &self.scopes[0]
    }

    pub fn children(&self, parent: usize) -> impl Iterator<Item = (usize, &ScopeRecord)> {
        self.scopes
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.parent == Some(parent))
    }
}

pub fn build_scopes(ast: &Ast) -> ScopeTree {
    let c = Checker::run(ast);
    let scopes = c
        .scopes
        .iter()
        .map(|s| ScopeRecord {
            kind: s.kind,
            parent: s.parent,
            bindings: s
                .map
                .values()
                .map(|&b| &c.bindings[b])
                .filter(|b| b.class != checker::Class::Builtin)
                .map(|b| Binding {
                    name: b.name.clone(),
                    kind: b.decl,
                    def_line: b.source.map_or(0, |s| ast_line(ast, s)),
                    used: b.used != checker::Used::No,
                })
                .collect(),
        })
        .collect();
    ScopeTree { scopes }
}

fn ast_line(ast: &Ast, id: NodeId) -> u32 {
    ast.nodes.get(id.index()).map_or(0, |n| n.loc.line)
}

/// Runs the checks in `checks` over a parsed module. Output is sorted by
/// line, column and kind.
pub fn analyze(ast: &Ast, _source: &SourceText, checks: &[LintCheckKind]) -> Vec<Diagnostic> {
    if checks.is_empty() {
        return Vec::new();
    }
    let c = Checker::run(ast);
    let mut out: Vec<Diagnostic> = c
        .messages
        .into_iter()
        .filter(|m| checks.contains(&m.kind))
        .map(|m| {
            let message = render(&m);
            Diagnostic {
                kind: m.kind,
                symbol: m.name,
                line: m.loc.line,
                column: m.loc.col,
                message,
                related_line: m.related,
            }
        })
        .collect();
    out.sort_by_key(|d| (d.line, d.column, d.kind));
    out
}

fn render(m: &checker::Message) -> String {
    let name = py_repr(&m.name);
    match m.kind {
        LintCheckKind::UndefinedName => format!("undefined name {name}"),
        LintCheckKind::UnusedVariable => {
            format!("local variable {name} is assigned to but never used")
        }
        LintCheckKind::FStringMissingPlaceholders => "f-string is missing placeholders".into(),
        LintCheckKind::UnusedImport => format!("{name} imported but unused"),
        LintCheckKind::RedefinedWhileUnused => format!(
            "redefinition of unused {name} from line {}",
            m.related.unwrap_or(0)
        ),
        LintCheckKind::UndefinedLocal => match m.related {
            Some(line) if !m.builtin => format!(
                "local variable {name} defined in enclosing scope on line {line} referenced before assignment"
            ),
            _ => format!("local variable {name} defined as a builtin referenced before assignment"),
        },
    }
}

/// Python's `repr()` of a string.
pub(crate) fn py_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                out.push_str(&format!("\\x{:02x}", c as u32))
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

/// Classifies undefined names as functions (the name is the callee of a
/// call) or variables. Builds the lookup once for several diagnostics.
pub struct UndefinedKindClassifier<'a> {
    ast: &'a Ast,
    callee: Vec<bool>,
}

impl<'a> UndefinedKindClassifier<'a> {
    pub fn new(ast: &'a Ast) -> Self {
        let mut callee = vec![false; ast.nodes.len()];
        for node in &ast.nodes {
            if let NodeKind::Call { func, .. } = node.kind {
                callee[func.index()] = true;
            }
        }
        UndefinedKindClassifier { ast, callee }
    }

    pub fn classify(&self, diag: &Diagnostic) -> NameKind {
        let found = self.ast.nodes.iter().enumerate().find(|(_, n)| {
            n.loc.line == diag.line
                && n.loc.col == diag.column
                && matches!(&n.kind, NodeKind::Name { id, .. } if *id == diag.symbol)
        });
        match found {
            Some((i, _)) if self.callee[i] => NameKind::Function,
            Some(_) => NameKind::Variable,
            None => {
                log::warn!(
                    "no name node `{}` at {}:{}; counting it as a variable",
                    diag.symbol,
                    diag.line,
                    diag.column
                );
                NameKind::Variable
            }
        }
    }
}

pub fn classify_undefined_kind(diag: &Diagnostic, ast: &Ast) -> NameKind {
    UndefinedKindClassifier::new(ast).classify(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyast::parse_module;

    fn parse(src: &str) -> (Ast, SourceText) {
        let s = SourceText::new(src);
        (parse_module(&s).unwrap(), s)
    }

    #[test]
    fn repr_matches_python() {
        assert_eq!(py_repr("os"), "'os'");
        assert_eq!(py_repr("it's"), "\"it's\"");
        assert_eq!(py_repr("'\""), "'\\'\"'");
        assert_eq!(py_repr("a\\b\n"), "'a\\\\b\\n'");
        assert_eq!(py_repr("\x01é"), "'\\x01é'");
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in LintCheckKind::ALL {
            assert_eq!(kind.as_str().parse::<LintCheckKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{kind}\""));
        }
        assert!("undefinedname".parse::<LintCheckKind>().is_err());
    }

    #[test]
    fn scope_tree_shape() {
        let (ast, _) = parse(
            "import os\nclass A:\n    x = 1\n    def m(self):\n        return [i for i in self.x]\n",
        );
        let tree = build_scopes(&ast);
        let module = tree.module();
        assert_eq!(module.kind, ScopeKind::Module);
        assert_eq!(module.get("os").unwrap().kind, BindingKind::Import);
        assert!(!module.get("os").unwrap().used);
        assert_eq!(module.get("A").unwrap().def_line, 2);
        let kinds: Vec<ScopeKind> = tree.scopes.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            [
                ScopeKind::Module,
                ScopeKind::Class,
                ScopeKind::Function,
                ScopeKind::Comprehension
            ]
        );
        let (class_idx, class) = tree.children(0).next().unwrap();
        assert_eq!(class.get("x").unwrap().kind, BindingKind::Assignment);
        let (_, method) = tree.children(class_idx).next().unwrap();
        assert!(method.get("self").unwrap().used);
    }

    #[test]
    fn undefined_names_classified_by_call_position() {
        let (ast, src) = parse("a = foo()\nb = bar\nc = baz.qux()\nd = [zed][0]()\n");
        let diags = analyze(&ast, &src, &[LintCheckKind::UndefinedName]);
        let classifier = UndefinedKindClassifier::new(&ast);
        let kinds: Vec<(&str, NameKind)> = diags
            .iter()
            .map(|d| (d.symbol.as_str(), classifier.classify(d)))
            .collect();
        assert_eq!(
            kinds,
            [
                ("foo", NameKind::Function),
                ("bar", NameKind::Variable),
                ("baz", NameKind::Variable),
                ("zed", NameKind::Variable),
            ]
        );
    }

    #[test]
    fn missing_node_counts_as_variable() {
        let (ast, _) = parse("x = 1\n");
        let d = Diagnostic {
            kind: LintCheckKind::UndefinedName,
            symbol: "nowhere".into(),
            line: 9,
            column: 0,
            message: String::new(),
            related_line: None,
        };
        assert_eq!(classify_undefined_kind(&d, &ast), NameKind::Variable);
    }

    #[test]
    fn output_is_sorted_by_position() {
        let (ast, src) = parse("def f():\n    z = y\nimport os\nx = q\n");
        let diags = analyze(&ast, &src, &LintCheckKind::ALL);
        let pos: Vec<(u32, u32)> = diags.iter().map(|d| (d.line, d.column)).collect();
        let mut sorted = pos.clone();
        sorted.sort();
        assert_eq!(pos, sorted);
        assert_eq!(diags.len(), 4);
    }
}
