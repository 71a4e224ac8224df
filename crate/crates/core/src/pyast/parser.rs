//! Recursive-descent parser for the Python 3.8 grammar.
//!
//! Syntax errors are raised on the same token the LL(1) reference parser
//! fails on. Errors the reference raises while building the tree (after a
//! successful parse) are collected in `sem` in the order the reference would
//! discover them, and only the first is reported.

use super::error::{ErrorClass, RawError};
use super::nodes::*;
use super::strings::{decode_bytes, decode_str, normalize_newlines, split_string_token};
use super::tokens::{char_count, line_span_text, tokenize, Tok, Token};

type PResult<T> = Result<T, RawError>;

pub(crate) fn parse(src: &str) -> PResult<Ast> {
    if src.contains('\0') {
        return Err(RawError::new(
            ErrorClass::Syntax,
            "source code string cannot contain null bytes",
            1,
            0,
        ));
    }
    let mut p = Parser::new(src, 0);
    let body = p.file_input()?;
    if let Some(e) = p.sem.first() {
        return Err(e.clone());
    }
    let root = p.add_r(
        NodeKind::Module { body },
        TextRange::new(0, src.len() as u32),
        Pos::new(1, 0),
    );
    Ok(Ast {
        nodes: p.nodes,
        root,
        lines: LineIndex::new(src),
    })
}

/// Parses the contents of a string annotation. Returns the nodes (ids
/// starting at `base`) and the annotation expression, or `None` when the
/// text is not a single expression statement. Every node gets `range` and
/// `loc`.
pub(crate) fn parse_annotation_string(
    text: &str,
    base: u32,
    range: TextRange,
    loc: Pos,
) -> Option<(Vec<Node>, NodeId)> {
    if text.contains('\0') {
        return None;
    }
    let mut p = Parser::new(text, base);
    let body = p.file_input().ok()?;
    if !p.sem.is_empty() || body.len() != 1 {
        return None;
    }
    let value = match &p.node(body[0]).kind {
        NodeKind::Expr { value } => *value,
        _ => return None,
    };
    for n in &mut p.nodes {
        n.range = range;
        n.loc = loc;
    }
    Some((p.nodes, value))
}

fn starts_expr(k: Tok) -> bool {
    matches!(
        k,
        Tok::Name
            | Tok::Number
            | Tok::String
            | Tok::LPar
            | Tok::LSqb
            | Tok::LBrace
            | Tok::Minus
            | Tok::Plus
            | Tok::Tilde
            | Tok::Await
            | Tok::None
            | Tok::True
            | Tok::False
            | Tok::Ellipsis
    )
}

fn starts_test(k: Tok) -> bool {
    starts_expr(k) || matches!(k, Tok::Not | Tok::Lambda)
}

fn is_significant(k: Tok) -> bool {
    !matches!(k, Tok::Newline | Tok::Indent | Tok::Dedent | Tok::EndMarker)
}

fn expr_name(kind: &NodeKind) -> &'static str {
    use NodeKind::*;
    match kind {
        Attribute { .. } => "attribute",
        Subscript { .. } => "subscript",
        Starred { .. } => "starred",
        Name { .. } => "name",
        List { .. } => "list",
        Tuple { .. } => "tuple",
        Lambda { .. } => "lambda",
        Call { .. } => "function call",
        BoolOp { .. } | BinOp { .. } | UnaryOp { .. } => "operator",
        GeneratorExp { .. } => "generator expression",
        Yield { .. } | YieldFrom { .. } => "yield expression",
        Await { .. } => "await expression",
        ListComp { .. } => "list comprehension",
        SetComp { .. } => "set comprehension",
        DictComp { .. } => "dict comprehension",
        Dict { .. } => "dict display",
        Set { .. } => "set display",
        JoinedStr { .. } | FormattedValue { .. } => "f-string expression",
        Constant { value } => match value {
            super::nodes::Constant::None => "None",
            super::nodes::Constant::True => "True",
            super::nodes::Constant::False => "False",
            super::nodes::Constant::Ellipsis => "Ellipsis",
            _ => "literal",
        },
        Compare { .. } => "comparison",
        IfExp { .. } => "conditional expression",
        NamedExpr { .. } => "named expression",
        _ => "expression",
    }
}

fn aug_operator(k: Tok) -> Operator {
    match k {
        Tok::PlusEqual => Operator::Add,
        Tok::MinEqual => Operator::Sub,
        Tok::StarEqual => Operator::Mult,
        Tok::AtEqual => Operator::MatMult,
        Tok::SlashEqual => Operator::Div,
        Tok::PercentEqual => Operator::Mod,
        Tok::AmperEqual => Operator::BitAnd,
        Tok::VBarEqual => Operator::BitOr,
        Tok::CircumflexEqual => Operator::BitXor,
        Tok::LeftShiftEqual => Operator::LShift,
        Tok::RightShiftEqual => Operator::RShift,
        Tok::DoubleStarEqual => Operator::Pow,
        _ => Operator::FloorDiv,
    }
}

/// Location data shared by every node built from one string atom.
#[derive(Clone, Copy)]
struct AtomCtx {
    pos: Pos,
    range: TextRange,
    first: Token,
}

#[derive(Default)]
struct FState {
    last_str: String,
    values: Vec<NodeId>,
    fmode: bool,
}

/// Marker for "a tree-building error was recorded; stop this construct".
struct Recorded;

enum ArgKind {
    Positional,
    Star,
    DoubleStar,
    Generator,
    Keyword(Option<String>),
}

struct ArgItem {
    kind: ArgKind,
    node: NodeId,
    start: Pos,
    mark: usize,
}

pub(super) struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    tok_error: Option<RawError>,
    eof_line: u32,
    i: usize,
    prev_end: u32,
    base: u32,
    nodes: Vec<Node>,
    sem: Vec<RawError>,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str, base: u32) -> Self {
        let t = tokenize(src);
        Parser {
            src,
            toks: t.tokens,
            tok_error: t.error,
            eof_line: t.eof_line,
            i: 0,
            prev_end: 0,
            base,
            nodes: Vec::new(),
            sem: Vec::new(),
        }
    }

    // ---- token helpers ----

    fn cur(&self) -> Token {
        self.toks[self.i]
    }

    fn kind(&self) -> Tok {
        self.toks[self.i].kind
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i];
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        if is_significant(t.kind) {
            self.prev_end = t.end;
        }
        t
    }

    fn eat(&mut self, k: Tok) -> bool {
        if self.kind() == k {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, k: Tok) -> PResult<Token> {
        if self.kind() == k {
            Ok(self.bump())
        } else {
            Err(self.err_here())
        }
    }

    fn expect_name(&mut self) -> PResult<String> {
        let t = self.expect(Tok::Name)?;
        Ok(self.text(&t).to_string())
    }

    fn text(&self, t: &Token) -> &'s str {
        &self.src[t.start as usize..t.end as usize]
    }

    fn line_text(&self, first: u32, last: u32) -> String {
        line_span_text(self.src.as_bytes(), first, last)
    }

    /// The error the reference parser raises when it cannot use the
    /// current token.
    fn err_here(&self) -> RawError {
        let t = self.cur();
        if t.kind == Tok::Error {
            return self
                .tok_error
                .clone()
                .expect("error token carries an error");
        }
        if t.at_eof {
            let text = self.line_text(self.eof_line, self.eof_line);
            let col = text.trim_end_matches(['\n', '\r']).chars().count() as u32;
            return RawError::new(
                ErrorClass::Syntax,
                "unexpected EOF while parsing",
                self.eof_line,
                col,
            )
            .with_text(text);
        }
        match t.kind {
            Tok::Indent => RawError::new(
                ErrorClass::Indentation,
                "unexpected indent",
                t.end_line,
                t.col.saturating_sub(1),
            ),
            Tok::Dedent => RawError::new(
                ErrorClass::Indentation,
                "unexpected unindent",
                t.end_line,
                t.col.saturating_sub(1),
            ),
            _ => RawError::new(
                ErrorClass::Syntax,
                "invalid syntax",
                t.end_line,
                self.tok_char_col(&t),
            )
            .with_text(self.line_text(t.line, t.end_line)),
        }
    }

    /// Character column of a token's start.
    fn tok_char_col(&self, t: &Token) -> u32 {
        let start = t.start as usize;
        char_count(&self.src.as_bytes()[start - t.col as usize..start])
    }

    fn err_expected_indent(&self) -> RawError {
        let t = self.cur();
        if t.kind == Tok::Error || t.at_eof {
            return self.err_here();
        }
        RawError::new(
            ErrorClass::Indentation,
            "expected an indented block",
            t.end_line,
            self.tok_char_col(&t),
        )
    }

    // ---- arena helpers ----

    fn add_r(&mut self, kind: NodeKind, range: TextRange, loc: Pos) -> NodeId {
        let id = NodeId(self.base + self.nodes.len() as u32);
        self.nodes.push(Node { kind, range, loc });
        id
    }

    /// Node ending at the last consumed token.
    fn add(&mut self, kind: NodeKind, start: u32, loc: Pos) -> NodeId {
        let end = self.prev_end.max(start);
        self.add_r(kind, TextRange::new(start, end), loc)
    }

    fn node(&self, id: NodeId) -> &Node {
        &self.nodes[(id.0 - self.base) as usize]
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[(id.0 - self.base) as usize]
    }

    fn loc(t: &Token) -> Pos {
        Pos::new(t.line, t.col)
    }

    // ---- tree-building errors ----

    fn sem_push(&mut self, msg: impl Into<String>, pos: Pos) {
        self.sem
            .push(RawError::new(ErrorClass::Syntax, msg, pos.line, pos.col));
    }

    fn sem_insert(&mut self, at: usize, msg: impl Into<String>, pos: Pos) {
        let at = at.min(self.sem.len());
        self.sem.insert(
            at,
            RawError::new(ErrorClass::Syntax, msg, pos.line, pos.col),
        );
    }

    /// Reorders error segments. `bounds[k]` is where segment `k` starts;
    /// the last segment runs to the end. `order` lists segments in the
    /// order the reference converts them.
    fn reorder_sem(&mut self, bounds: &[usize], order: &[usize]) {
        if self.sem.len() == bounds[0] {
            return;
        }
        let tail = self.sem.split_off(bounds[0]);
        let seg = |k: usize| {
            let s = bounds[k] - bounds[0];
            let e = bounds.get(k + 1).map_or(tail.len(), |b| b - bounds[0]);
            &tail[s..e]
        };
        let mut out = Vec::with_capacity(tail.len());
        for &k in order {
            out.extend_from_slice(seg(k));
        }
        self.sem.extend(out);
    }

    fn forbidden(&mut self, name: &str, pos: Pos, full: bool) -> bool {
        let bad = name == "__debug__" || (full && matches!(name, "None" | "True" | "False"));
        if bad {
            self.sem_push(format!("cannot assign to {name}"), pos);
        }
        bad
    }

    /// Marks `id` as an assignment or deletion target, recording an error
    /// for expressions that cannot be one.
    fn set_context(&mut self, id: NodeId, ctx: ExprContext, pos: Pos) -> bool {
        let verb = if ctx == ExprContext::Store {
            "assign to"
        } else {
            "delete"
        };
        let mut attr_name = None;
        let mut name_id = None;
        let mut recurse = Vec::new();
        let mut bad: Option<&'static str> = None;
        match &mut self.node_mut(id).kind {
            NodeKind::Attribute { ctx: c, attr, .. } => {
                *c = ctx;
                attr_name = Some(attr.clone());
            }
            NodeKind::Subscript { ctx: c, .. } => *c = ctx,
            NodeKind::Starred { ctx: c, value } => {
                *c = ctx;
                recurse.push(*value);
            }
            NodeKind::Name { ctx: c, id } => {
                *c = ctx;
                name_id = Some(id.clone());
            }
            NodeKind::List { ctx: c, elts } | NodeKind::Tuple { ctx: c, elts } => {
                *c = ctx;
                recurse.extend(elts.iter().copied());
            }
            other => bad = Some(expr_name(other)),
        }
        if let Some(what) = bad {
            self.sem_push(format!("cannot {verb} {what}"), pos);
            return false;
        }
        if ctx == ExprContext::Store {
            if let Some(a) = attr_name {
                if self.forbidden(&a, pos, true) {
                    return false;
                }
            }
            if let Some(n) = name_id {
                if self.forbidden(&n, pos, false) {
                    return false;
                }
            }
        }
        for r in recurse {
            if !self.set_context(r, ctx, pos) {
                return false;
            }
        }
        true
    }
}

// ---- statements ----
impl<'s> Parser<'s> {
    fn file_input(&mut self) -> PResult<Vec<NodeId>> {
        let mut body = Vec::new();
        loop {
            match self.kind() {
                Tok::EndMarker => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => body.extend(self.stmt()?),
            }
        }
        Ok(body)
    }

    fn eval_input(&mut self) -> PResult<NodeId> {
        let (e, _) = self.testlist(false)?;
        while self.kind() == Tok::Newline {
            self.bump();
        }
        self.expect(Tok::EndMarker)?;
        Ok(e)
    }

    fn stmt(&mut self) -> PResult<Vec<NodeId>> {
        match self.kind() {
            Tok::If
            | Tok::While
            | Tok::For
            | Tok::Try
            | Tok::With
            | Tok::Def
            | Tok::Class
            | Tok::At
            | Tok::Async => Ok(vec![self.compound_stmt()?]),
            _ => self.simple_stmt(),
        }
    }

    fn simple_stmt(&mut self) -> PResult<Vec<NodeId>> {
        let mut out = vec![self.small_stmt()?];
        while self.kind() == Tok::Semi {
            self.bump();
            if self.kind() == Tok::Newline {
                break;
            }
            out.push(self.small_stmt()?);
        }
        self.expect(Tok::Newline)?;
        Ok(out)
    }

    fn suite(&mut self) -> PResult<Vec<NodeId>> {
        if self.kind() != Tok::Newline {
            return self.simple_stmt();
        }
        self.bump();
        if self.kind() != Tok::Indent {
            return Err(self.err_expected_indent());
        }
        self.bump();
        let mut body = Vec::new();
        loop {
            body.extend(self.stmt()?);
            if self.kind() == Tok::Dedent {
                self.bump();
                break;
            }
        }
        Ok(body)
    }

    fn small_stmt(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let (start, loc) = (t.start, Self::loc(&t));
        match t.kind {
            Tok::Del => {
                self.bump();
                let (elts, _) = self.exprlist()?;
                let mut targets = Vec::new();
                for (e, pos) in elts {
                    self.set_context(e, ExprContext::Del, pos);
                    targets.push(e);
                }
                Ok(self.add(NodeKind::Delete { targets }, start, loc))
            }
            Tok::Pass => {
                self.bump();
                Ok(self.add(NodeKind::Pass, start, loc))
            }
            Tok::Break => {
                self.bump();
                Ok(self.add(NodeKind::Break, start, loc))
            }
            Tok::Continue => {
                self.bump();
                Ok(self.add(NodeKind::Continue, start, loc))
            }
            Tok::Return => {
                self.bump();
                let value = if starts_test(self.kind()) || self.kind() == Tok::Star {
                    Some(self.testlist_star_expr()?.0)
                } else {
                    None
                };
                Ok(self.add(NodeKind::Return { value }, start, loc))
            }
            Tok::Raise => {
                self.bump();
                let mut exc = None;
                let mut cause = None;
                if starts_test(self.kind()) {
                    exc = Some(self.test()?);
                    if self.eat(Tok::From) {
                        cause = Some(self.test()?);
                    }
                }
                Ok(self.add(NodeKind::Raise { exc, cause }, start, loc))
            }
            Tok::Yield => {
                let value = self.yield_expr()?;
                Ok(self.add(NodeKind::Expr { value }, start, loc))
            }
            Tok::Import => self.import_name(),
            Tok::From => self.import_from(),
            Tok::Global | Tok::Nonlocal => {
                self.bump();
                let mut names = vec![self.expect_name()?];
                while self.eat(Tok::Comma) {
                    names.push(self.expect_name()?);
                }
                let kind = if t.kind == Tok::Global {
                    NodeKind::Global { names }
                } else {
                    NodeKind::Nonlocal { names }
                };
                Ok(self.add(kind, start, loc))
            }
            Tok::Assert => {
                self.bump();
                let test = self.test()?;
                let msg = if self.eat(Tok::Comma) {
                    Some(self.test()?)
                } else {
                    None
                };
                Ok(self.add(NodeKind::Assert { test, msg }, start, loc))
            }
            _ => self.expr_stmt(),
        }
    }

    fn expr_stmt(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let (start, loc) = (t.start, Self::loc(&t));
        let (lhs, lhs_pos) = self.testlist_star_expr()?;
        let k = self.kind();
        if k == Tok::Colon {
            self.bump();
            let mut simple = false;
            let mut target_kind = None;
            match &mut self.node_mut(lhs).kind {
                NodeKind::Name { ctx, id } => {
                    *ctx = ExprContext::Store;
                    simple = t.kind != Tok::LPar;
                    target_kind = Some((id.clone(), false));
                }
                NodeKind::Attribute { ctx, attr, .. } => {
                    *ctx = ExprContext::Store;
                    target_kind = Some((attr.clone(), true));
                }
                NodeKind::Subscript { ctx, .. } => *ctx = ExprContext::Store,
                NodeKind::List { .. } => {
                    self.sem_push("only single target (not list) can be annotated", lhs_pos)
                }
                NodeKind::Tuple { .. } => {
                    self.sem_push("only single target (not tuple) can be annotated", lhs_pos)
                }
                _ => self.sem_push("illegal target for annotation", lhs_pos),
            }
            if let Some((name, full)) = target_kind {
                self.forbidden(&name, loc, full);
            }
            let annotation = self.test()?;
            let value = if self.eat(Tok::Equal) {
                Some(if self.kind() == Tok::Yield {
                    self.yield_expr()?
                } else {
                    self.testlist_star_expr()?.0
                })
            } else {
                None
            };
            return Ok(self.add(
                NodeKind::AnnAssign {
                    target: lhs,
                    annotation,
                    value,
                    simple,
                },
                start,
                loc,
            ));
        }
        if k.is_augassign() {
            self.bump();
            if self.set_context(lhs, ExprContext::Store, lhs_pos) {
                let ok = matches!(
                    self.node(lhs).kind,
                    NodeKind::Name { .. } | NodeKind::Attribute { .. } | NodeKind::Subscript { .. }
                );
                if !ok {
                    self.sem_push("illegal expression for augmented assignment", lhs_pos);
                }
            }
            let value = if self.kind() == Tok::Yield {
                self.yield_expr()?
            } else {
                self.testlist(false)?.0
            };
            return Ok(self.add(
                NodeKind::AugAssign {
                    target: lhs,
                    op: aug_operator(k),
                    value,
                },
                start,
                loc,
            ));
        }
        if k != Tok::Equal {
            return Ok(self.add(NodeKind::Expr { value: lhs }, start, loc));
        }
        let mut targets = Vec::new();
        let (mut last, mut last_pos, mut last_is_yield) = (lhs, lhs_pos, false);
        while self.eat(Tok::Equal) {
            if last_is_yield {
                self.sem_push("assignment to yield expression not possible", last_pos);
            } else {
                self.set_context(last, ExprContext::Store, last_pos);
            }
            targets.push(last);
            last_pos = Self::loc(&self.cur());
            if self.kind() == Tok::Yield {
                last = self.yield_expr()?;
                last_is_yield = true;
            } else {
                last = self.testlist_star_expr()?.0;
                last_is_yield = false;
            }
        }
        Ok(self.add(
            NodeKind::Assign {
                targets,
                value: last,
            },
            start,
            loc,
        ))
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut name = self.expect_name()?;
        while self.kind() == Tok::Dot {
            self.bump();
            name.push('.');
            name.push_str(&self.expect_name()?);
        }
        Ok(name)
    }

    fn alias(&mut self, dotted: bool) -> PResult<NodeId> {
        let t = self.cur();
        let name = if dotted {
            self.dotted_name()?
        } else {
            self.expect_name()?
        };
        let mut asname = None;
        if self.eat(Tok::As) {
            let a = self.expect(Tok::Name)?;
            let s = self.text(&a).to_string();
            self.forbidden(&s, Self::loc(&a), false);
            asname = Some(s);
        }
        Ok(self.add(NodeKind::Alias { name, asname }, t.start, Self::loc(&t)))
    }

    fn import_name(&mut self) -> PResult<NodeId> {
        let t = self.bump();
        let mut names = vec![self.alias(true)?];
        while self.eat(Tok::Comma) {
            names.push(self.alias(true)?);
        }
        Ok(self.add(NodeKind::Import { names }, t.start, Self::loc(&t)))
    }

    fn import_from(&mut self) -> PResult<NodeId> {
        let t = self.bump();
        let mut level = 0;
        loop {
            match self.kind() {
                Tok::Dot => level += 1,
                Tok::Ellipsis => level += 3,
                _ => break,
            }
            self.bump();
        }
        let module = if level == 0 || self.kind() == Tok::Name {
            Some(self.dotted_name()?)
        } else {
            None
        };
        self.expect(Tok::Import)?;
        let mut names = Vec::new();
        match self.kind() {
            Tok::Star => {
                let s = self.bump();
                names.push(self.add(
                    NodeKind::Alias {
                        name: "*".into(),
                        asname: None,
                    },
                    s.start,
                    Self::loc(&s),
                ));
            }
            Tok::LPar => {
                self.bump();
                names.push(self.alias(false)?);
                while self.eat(Tok::Comma) {
                    if self.kind() == Tok::RPar {
                        break;
                    }
                    names.push(self.alias(false)?);
                }
                self.expect(Tok::RPar)?;
            }
            _ => {
                let first = Self::loc(&self.cur());
                let mark = self.sem.len();
                names.push(self.alias(false)?);
                let mut trailing = false;
                while self.eat(Tok::Comma) {
                    if self.kind() != Tok::Name {
                        trailing = true;
                        break;
                    }
                    names.push(self.alias(false)?);
                }
                if trailing {
                    self.sem_insert(
                        mark,
                        "trailing comma not allowed without surrounding parentheses",
                        first,
                    );
                }
            }
        }
        Ok(self.add(
            NodeKind::ImportFrom {
                module,
                names,
                level,
            },
            t.start,
            Self::loc(&t),
        ))
    }

    fn compound_stmt(&mut self) -> PResult<NodeId> {
        match self.kind() {
            Tok::If => self.if_stmt(),
            Tok::While => self.while_stmt(),
            Tok::For => {
                let t = self.cur();
                self.for_stmt(t, false)
            }
            Tok::Try => self.try_stmt(),
            Tok::With => {
                let t = self.cur();
                self.with_stmt(t, false)
            }
            Tok::Def => {
                let t = self.cur();
                self.funcdef(t, t, Vec::new(), false)
            }
            Tok::Class => {
                let t = self.cur();
                self.classdef(t, Vec::new())
            }
            Tok::At => self.decorated(),
            _ => {
                let a = self.bump();
                match self.kind() {
                    Tok::Def => self.funcdef(a, a, Vec::new(), true),
                    Tok::With => self.with_stmt(a, true),
                    Tok::For => self.for_stmt(a, true),
                    _ => Err(self.err_here()),
                }
            }
        }
    }

    fn block_end(&self, start: u32) -> u32 {
        self.prev_end.max(start)
    }

    fn if_stmt(&mut self) -> PResult<NodeId> {
        // Clauses: (keyword token, test, body).
        let mut clauses = Vec::new();
        let mut bounds = vec![self.sem.len()];
        let kw = self.bump();
        let test = self.namedexpr_test()?;
        self.expect(Tok::Colon)?;
        let body = self.suite()?;
        clauses.push((kw, test, body, self.prev_end));
        while self.kind() == Tok::Elif {
            bounds.push(self.sem.len());
            let kw = self.bump();
            let test = self.namedexpr_test()?;
            self.expect(Tok::Colon)?;
            let body = self.suite()?;
            clauses.push((kw, test, body, self.prev_end));
        }
        let mut orelse = Vec::new();
        let has_else = self.kind() == Tok::Else;
        if has_else {
            bounds.push(self.sem.len());
            self.bump();
            self.expect(Tok::Colon)?;
            orelse = self.suite()?;
        }
        let n_elif = clauses.len() - 1;
        if n_elif > 0 {
            // The reference builds elif chains from the last clause back.
            let mut order = Vec::new();
            order.push(n_elif);
            if has_else {
                order.push(n_elif + 1);
            }
            for k in (0..n_elif).rev() {
                order.push(k);
            }
            self.reorder_sem(&bounds, &order);
        }
        let end = self.block_end(kw.start);
        let mut tail = orelse;
        while let Some((kw, test, body, _)) = clauses.pop() {
            let id = self.add_r(
                NodeKind::If {
                    test,
                    body,
                    orelse: tail,
                },
                TextRange::new(kw.start, end),
                Self::loc(&kw),
            );
            tail = vec![id];
        }
        Ok(tail[0])
    }

    fn while_stmt(&mut self) -> PResult<NodeId> {
        let kw = self.bump();
        let test = self.namedexpr_test()?;
        self.expect(Tok::Colon)?;
        let body = self.suite()?;
        let orelse = self.else_suite()?;
        Ok(self.add(
            NodeKind::While { test, body, orelse },
            kw.start,
            Self::loc(&kw),
        ))
    }

    fn else_suite(&mut self) -> PResult<Vec<NodeId>> {
        if self.eat(Tok::Else) {
            self.expect(Tok::Colon)?;
            self.suite()
        } else {
            Ok(Vec::new())
        }
    }

    fn for_stmt(&mut self, first: Token, is_async: bool) -> PResult<NodeId> {
        self.expect(Tok::For)?;
        let target = self.target_list()?;
        self.expect(Tok::In)?;
        let iter = self.testlist(false)?.0;
        self.expect(Tok::Colon)?;
        let body = self.suite()?;
        let orelse = self.else_suite()?;
        Ok(self.add(
            NodeKind::For {
                target,
                iter,
                body,
                orelse,
                is_async,
            },
            first.start,
            Self::loc(&first),
        ))
    }

    /// `exprlist` used as a binding target (for loops, comprehensions).
    fn target_list(&mut self) -> PResult<NodeId> {
        let start = self.cur().start;
        let (elts, comma) = self.exprlist()?;
        for &(e, pos) in &elts {
            self.set_context(e, ExprContext::Store, pos);
        }
        if !comma {
            return Ok(elts[0].0);
        }
        let loc = self.node(elts[0].0).loc;
        let elts = elts.into_iter().map(|(e, _)| e).collect();
        Ok(self.add(
            NodeKind::Tuple {
                elts,
                ctx: ExprContext::Store,
            },
            start,
            loc,
        ))
    }

    fn try_stmt(&mut self) -> PResult<NodeId> {
        let kw = self.bump();
        self.expect(Tok::Colon)?;
        let mut bounds = vec![self.sem.len()];
        let body = self.suite()?;
        bounds.push(self.sem.len());
        let mut handlers = Vec::new();
        while self.kind() == Tok::Except {
            let ek = self.bump();
            let mut typ = None;
            let mut name = None;
            if starts_test(self.kind()) {
                typ = Some(self.test()?);
                if self.eat(Tok::As) {
                    let n = self.expect(Tok::Name)?;
                    let s = self.text(&n).to_string();
                    self.forbidden(&s, Self::loc(&n), false);
                    name = Some(s);
                }
            }
            self.expect(Tok::Colon)?;
            let hbody = self.suite()?;
            handlers.push(self.add(
                NodeKind::ExceptHandler {
                    typ,
                    name,
                    body: hbody,
                },
                ek.start,
                Self::loc(&ek),
            ));
        }
        bounds.push(self.sem.len());
        let mut orelse = Vec::new();
        let mut finalbody = Vec::new();
        if handlers.is_empty() {
            if self.kind() != Tok::Finally {
                return Err(self.err_here());
            }
        } else if self.kind() == Tok::Else {
            orelse = self.else_suite()?;
        }
        bounds.push(self.sem.len());
        if self.eat(Tok::Finally) {
            self.expect(Tok::Colon)?;
            finalbody = self.suite()?;
        }
        // Body, else, finally, then the handlers.
        self.reorder_sem(&bounds, &[0, 2, 3, 1]);
        Ok(self.add(
            NodeKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            },
            kw.start,
            Self::loc(&kw),
        ))
    }

    fn with_stmt(&mut self, first: Token, is_async: bool) -> PResult<NodeId> {
        self.expect(Tok::With)?;
        let mut items = Vec::new();
        loop {
            let t = self.cur();
            let context_expr = self.test()?;
            let mut optional_vars = None;
            if self.eat(Tok::As) {
                let pos = Self::loc(&self.cur());
                let v = self.expr()?;
                self.set_context(v, ExprContext::Store, pos);
                optional_vars = Some(v);
            }
            let loc = self.node(context_expr).loc;
            items.push(self.add(
                NodeKind::WithItem {
                    context_expr,
                    optional_vars,
                },
                t.start,
                loc,
            ));
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Colon)?;
        let body = self.suite()?;
        Ok(self.add(
            NodeKind::With {
                items,
                body,
                is_async,
            },
            first.start,
            Self::loc(&first),
        ))
    }

    fn decorated(&mut self) -> PResult<NodeId> {
        let first = self.cur();
        let mut decorators = Vec::new();
        while self.kind() == Tok::At {
            let at = self.bump();
            let nt = self.cur();
            let nloc = Self::loc(&nt);
            let first_name = self.expect(Tok::Name)?;
            let mut e = self.add(
                NodeKind::Name {
                    id: self.text(&first_name).to_string(),
                    ctx: ExprContext::Load,
                },
                nt.start,
                nloc,
            );
            while self.eat(Tok::Dot) {
                let a = self.expect(Tok::Name)?;
                let attr = self.text(&a).to_string();
                e = self.add(
                    NodeKind::Attribute {
                        value: e,
                        attr,
                        ctx: ExprContext::Load,
                    },
                    nt.start,
                    nloc,
                );
            }
            if self.kind() == Tok::LPar {
                let lpar = self.bump();
                if self.kind() == Tok::RPar {
                    self.bump();
                    e = self.add(
                        NodeKind::Call {
                            func: e,
                            args: Vec::new(),
                            keywords: Vec::new(),
                        },
                        nt.start,
                        Self::loc(&at),
                    );
                } else {
                    e = self.call_trailer(e, nt.start, lpar, true)?;
                }
            }
            self.expect(Tok::Newline)?;
            decorators.push(e);
        }
        match self.kind() {
            Tok::Def => {
                let t = self.cur();
                self.funcdef(first, t, decorators, false)
            }
            Tok::Class => self.classdef(first, decorators),
            Tok::Async => {
                let a = self.bump();
                if self.kind() != Tok::Def {
                    return Err(self.err_here());
                }
                self.funcdef(first, a, decorators, true)
            }
            _ => Err(self.err_here()),
        }
    }

    /// `first` is where the statement's range starts (a decorator, if
    /// any); `anchor` is the token it is reported at.
    fn funcdef(
        &mut self,
        first: Token,
        anchor: Token,
        decorators: Vec<NodeId>,
        is_async: bool,
    ) -> PResult<NodeId> {
        self.expect(Tok::Def)?;
        let nt = self.expect(Tok::Name)?;
        let name = self.text(&nt).to_string();
        self.forbidden(&name, Self::loc(&nt), false);
        let lpar = self.expect(Tok::LPar)?;
        let args = self.parameters(Tok::RPar, true, lpar)?;
        self.expect(Tok::RPar)?;
        let returns = if self.eat(Tok::RArrow) {
            Some(self.test()?)
        } else {
            None
        };
        let colon = self.expect(Tok::Colon)?;
        let body = self.suite()?;
        Ok(self.add(
            NodeKind::FunctionDef {
                name,
                args,
                body,
                decorators,
                returns,
                is_async,
                header_end: colon.end,
            },
            first.start,
            Self::loc(&anchor),
        ))
    }

    fn classdef(&mut self, first: Token, decorators: Vec<NodeId>) -> PResult<NodeId> {
        let kw = self.expect(Tok::Class)?;
        let nt = self.expect(Tok::Name)?;
        let name = self.text(&nt).to_string();
        self.forbidden(&name, Self::loc(&nt), false);
        let mut bases = Vec::new();
        let mut keywords = Vec::new();
        if self.kind() == Tok::LPar {
            let lpar = self.bump();
            if !self.eat(Tok::RPar) {
                let (a, k) = self.arglist(lpar, false)?;
                bases = a;
                keywords = k;
            }
        }
        self.expect(Tok::Colon)?;
        let body = self.suite()?;
        Ok(self.add(
            NodeKind::ClassDef {
                name,
                bases,
                keywords,
                body,
                decorators,
            },
            first.start,
            Self::loc(&kw),
        ))
    }

    /// `typedargslist` / `varargslist`, up to (not including) `close`.
    fn parameters(&mut self, close: Tok, typed: bool, open: Token) -> PResult<NodeId> {
        let start_tok = self.cur();
        let list_pos = Self::loc(&start_tok);
        let mut posonlyargs = Vec::new();
        let mut args: Vec<NodeId> = Vec::new();
        let mut defaults = Vec::new();
        let mut vararg = None;
        let mut kwonlyargs = Vec::new();
        let mut kw_defaults = Vec::new();
        let mut kwarg = None;
        let (mut seen_slash, mut seen_star, mut seen_dstar) = (false, false, false);
        let mut found_default = false;
        let mut reported = false;
        // Bare `*` still waiting for a keyword-only parameter.
        let mut bare_star: Option<Pos> = None;
        loop {
            let k = self.kind();
            if k == close {
                break;
            }
            if seen_dstar {
                return Err(self.err_here());
            }
            match k {
                Tok::Name => {
                    let mark = self.sem.len();
                    let (arg, _) = self.param_def(typed)?;
                    let default = if self.kind() == Tok::Equal {
                        self.bump();
                        let dmark = self.sem.len();
                        let d = self.test()?;
                        // Defaults are converted before the annotation.
                        let n = dmark - mark;
                        self.sem[mark..].rotate_left(n);
                        Some(d)
                    } else {
                        None
                    };
                    if seen_star {
                        bare_star = None;
                        kwonlyargs.push(arg);
                        kw_defaults.push(default);
                    } else {
                        match default {
                            Some(d) => {
                                found_default = true;
                                defaults.push(d);
                            }
                            None if found_default && !reported => {
                                reported = true;
                                self.sem_insert(
                                    mark,
                                    "non-default argument follows default argument",
                                    list_pos,
                                );
                            }
                            None => {}
                        }
                        args.push(arg);
                    }
                }
                Tok::Slash => {
                    if seen_slash || seen_star || args.is_empty() {
                        return Err(self.err_here());
                    }
                    self.bump();
                    seen_slash = true;
                    posonlyargs.append(&mut args);
                }
                Tok::Star => {
                    if seen_star {
                        return Err(self.err_here());
                    }
                    let st = self.bump();
                    seen_star = true;
                    if self.kind() == Tok::Name {
                        vararg = Some(self.param_def(typed)?.0);
                    } else {
                        bare_star = Some(Self::loc(&st));
                    }
                }
                Tok::DoubleStar => {
                    let dt = self.bump();
                    if let Some(p) = bare_star.take() {
                        let _ = p;
                        self.sem_push("named arguments must follow bare *", Self::loc(&dt));
                    }
                    seen_dstar = true;
                    if self.kind() != Tok::Name {
                        return Err(self.err_here());
                    }
                    kwarg = Some(self.param_def(typed)?.0);
                }
                _ => return Err(self.err_here()),
            }
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        if let Some(p) = bare_star {
            self.sem_push("named arguments must follow bare *", p);
        }
        let start = if start_tok.kind == close {
            open.end
        } else {
            start_tok.start
        };
        let end = self.prev_end.max(start);
        Ok(self.add_r(
            NodeKind::Arguments {
                posonlyargs,
                args,
                vararg,
                kwonlyargs,
                kw_defaults,
                kwarg,
                defaults,
            },
            TextRange::new(start, end),
            list_pos,
        ))
    }

    fn param_def(&mut self, typed: bool) -> PResult<(NodeId, Pos)> {
        let t = self.expect(Tok::Name)?;
        let name = self.text(&t).to_string();
        let pos = Self::loc(&t);
        self.forbidden(&name, pos, false);
        let annotation = if typed && self.eat(Tok::Colon) {
            Some(self.test()?)
        } else {
            None
        };
        Ok((
            self.add(NodeKind::Arg { name, annotation }, t.start, pos),
            pos,
        ))
    }
}

// ---- expressions ----
impl<'s> Parser<'s> {
    fn yield_expr(&mut self) -> PResult<NodeId> {
        let t = self.expect(Tok::Yield)?;
        let loc = Self::loc(&t);
        if self.eat(Tok::From) {
            let value = self.test()?;
            return Ok(self.add(NodeKind::YieldFrom { value }, t.start, loc));
        }
        let value = if starts_test(self.kind()) || self.kind() == Tok::Star {
            Some(self.testlist_star_expr()?.0)
        } else {
            None
        };
        Ok(self.add(NodeKind::Yield { value }, t.start, loc))
    }

    /// Comma-separated list; a single element without a trailing comma is
    /// returned as is, otherwise a tuple located at the first token.
    #[allow(clippy::type_complexity)]
    fn seq(
        &mut self,
        allow_star: bool,
        expr_only: bool,
    ) -> PResult<(NodeId, Pos, Vec<(NodeId, Pos)>, bool)> {
        let t = self.cur();
        let pos = Self::loc(&t);
        let mut elts = Vec::new();
        let mut comma = false;
        loop {
            let ep = Self::loc(&self.cur());
            let e = if allow_star && self.kind() == Tok::Star {
                self.star_expr()?
            } else if expr_only {
                self.expr()?
            } else {
                self.test()?
            };
            elts.push((e, ep));
            if self.kind() != Tok::Comma {
                break;
            }
            self.bump();
            comma = true;
            let k = self.kind();
            let more = if expr_only {
                starts_expr(k)
            } else {
                starts_test(k)
            };
            if !(more || (allow_star && k == Tok::Star)) {
                break;
            }
        }
        if !comma {
            let (e, _) = elts[0];
            return Ok((e, pos, elts, false));
        }
        let ids = elts.iter().map(|&(e, _)| e).collect();
        let tup = self.add(
            NodeKind::Tuple {
                elts: ids,
                ctx: ExprContext::Load,
            },
            t.start,
            pos,
        );
        Ok((tup, pos, elts, true))
    }

    fn testlist_star_expr(&mut self) -> PResult<(NodeId, Pos)> {
        let (e, p, _, _) = self.seq(true, false)?;
        Ok((e, p))
    }

    fn testlist(&mut self, _star: bool) -> PResult<(NodeId, Pos)> {
        let (e, p, _, _) = self.seq(false, false)?;
        Ok((e, p))
    }

    /// `exprlist`: the elements with their start positions, and whether a
    /// comma made it a tuple.
    fn exprlist(&mut self) -> PResult<(Vec<(NodeId, Pos)>, bool)> {
        let mut elts = Vec::new();
        let mut comma = false;
        loop {
            let ep = Self::loc(&self.cur());
            let e = if self.kind() == Tok::Star {
                self.star_expr()?
            } else {
                self.expr()?
            };
            elts.push((e, ep));
            if self.kind() != Tok::Comma {
                break;
            }
            self.bump();
            comma = true;
            if !(starts_expr(self.kind()) || self.kind() == Tok::Star) {
                break;
            }
        }
        Ok((elts, comma))
    }

    fn star_expr(&mut self) -> PResult<NodeId> {
        let t = self.expect(Tok::Star)?;
        let value = self.expr()?;
        Ok(self.add(
            NodeKind::Starred {
                value,
                ctx: ExprContext::Load,
            },
            t.start,
            Self::loc(&t),
        ))
    }

    fn namedexpr_test(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let target = self.test()?;
        if self.kind() != Tok::ColonEqual {
            return Ok(target);
        }
        self.bump();
        let value = self.test()?;
        self.finish_namedexpr(target, value, t)
    }

    fn finish_namedexpr(&mut self, target: NodeId, value: NodeId, t: Token) -> PResult<NodeId> {
        let pos = Self::loc(&t);
        if let NodeKind::Name { .. } = self.node(target).kind {
            self.set_context(target, ExprContext::Store, pos);
        } else {
            let what = expr_name(&self.node(target).kind);
            self.sem_push(format!("cannot use named assignment with {what}"), pos);
        }
        Ok(self.add(NodeKind::NamedExpr { target, value }, t.start, pos))
    }

    fn test(&mut self) -> PResult<NodeId> {
        if self.kind() == Tok::Lambda {
            return self.lambdef(false);
        }
        let t = self.cur();
        let body = self.or_test()?;
        if self.kind() != Tok::If {
            return Ok(body);
        }
        self.bump();
        let test = self.or_test()?;
        self.expect(Tok::Else)?;
        let orelse = self.test()?;
        Ok(self.add(
            NodeKind::IfExp { test, body, orelse },
            t.start,
            Self::loc(&t),
        ))
    }

    fn test_nocond(&mut self) -> PResult<NodeId> {
        if self.kind() == Tok::Lambda {
            self.lambdef(true)
        } else {
            self.or_test()
        }
    }

    fn lambdef(&mut self, nocond: bool) -> PResult<NodeId> {
        let t = self.expect(Tok::Lambda)?;
        let args = self.parameters(Tok::Colon, false, t)?;
        self.expect(Tok::Colon)?;
        let body = if nocond {
            self.test_nocond()?
        } else {
            self.test()?
        };
        Ok(self.add(NodeKind::Lambda { args, body }, t.start, Self::loc(&t)))
    }

    fn or_test(&mut self) -> PResult<NodeId> {
        self.boolop(Tok::Or)
    }

    fn boolop(&mut self, k: Tok) -> PResult<NodeId> {
        let t = self.cur();
        let first = if k == Tok::Or {
            self.boolop(Tok::And)?
        } else {
            self.not_test()?
        };
        if self.kind() != k {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat(k) {
            values.push(if k == Tok::Or {
                self.boolop(Tok::And)?
            } else {
                self.not_test()?
            });
        }
        let op = if k == Tok::Or {
            BoolOp::Or
        } else {
            BoolOp::And
        };
        Ok(self.add(NodeKind::BoolOp { op, values }, t.start, Self::loc(&t)))
    }

    fn not_test(&mut self) -> PResult<NodeId> {
        if self.kind() == Tok::Not {
            let t = self.bump();
            let operand = self.not_test()?;
            return Ok(self.add(
                NodeKind::UnaryOp {
                    op: UnaryOp::Not,
                    operand,
                },
                t.start,
                Self::loc(&t),
            ));
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> PResult<Option<CmpOp>> {
        let op = match self.kind() {
            Tok::Less => CmpOp::Lt,
            Tok::Greater => CmpOp::Gt,
            Tok::EqEqual => CmpOp::Eq,
            Tok::GreaterEqual => CmpOp::GtE,
            Tok::LessEqual => CmpOp::LtE,
            Tok::NotEqual => CmpOp::NotEq,
            Tok::In => CmpOp::In,
            Tok::Not => {
                self.bump();
                self.expect(Tok::In)?;
                return Ok(Some(CmpOp::NotIn));
            }
            Tok::Is => {
                self.bump();
                return Ok(Some(if self.eat(Tok::Not) {
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }));
            }
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(op))
    }

    fn comparison(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let mark = self.sem.len();
        let left = self.expr()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        let right_mark = self.sem.len();
        while let Some(op) = self.comp_op()? {
            ops.push(op);
            comparators.push(self.expr()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        // Comparators are converted before the left operand.
        self.reorder_sem(&[mark, right_mark], &[1, 0]);
        Ok(self.add(
            NodeKind::Compare {
                left,
                ops,
                comparators,
            },
            t.start,
            Self::loc(&t),
        ))
    }

    /// Left-associative binary operator levels, loosest first.
    fn binary(&mut self, level: usize) -> PResult<NodeId> {
        if level == 6 {
            return self.factor();
        }
        let t = self.cur();
        let mut left = self.binary(level + 1)?;
        loop {
            let op = match (level, self.kind()) {
                (0, Tok::VBar) => Operator::BitOr,
                (1, Tok::Circumflex) => Operator::BitXor,
                (2, Tok::Amper) => Operator::BitAnd,
                (3, Tok::LeftShift) => Operator::LShift,
                (3, Tok::RightShift) => Operator::RShift,
                (4, Tok::Plus) => Operator::Add,
                (4, Tok::Minus) => Operator::Sub,
                (5, Tok::Star) => Operator::Mult,
                (5, Tok::Slash) => Operator::Div,
                (5, Tok::Percent) => Operator::Mod,
                (5, Tok::DoubleSlash) => Operator::FloorDiv,
                (5, Tok::At) => Operator::MatMult,
                _ => break,
            };
            self.bump();
            let right = self.binary(level + 1)?;
            left = self.add(NodeKind::BinOp { left, op, right }, t.start, Self::loc(&t));
        }
        Ok(left)
    }

    fn expr(&mut self) -> PResult<NodeId> {
        self.binary(0)
    }

    fn factor(&mut self) -> PResult<NodeId> {
        let op = match self.kind() {
            Tok::Plus => UnaryOp::UAdd,
            Tok::Minus => UnaryOp::USub,
            Tok::Tilde => UnaryOp::Invert,
            _ => return self.power(),
        };
        let t = self.bump();
        let operand = self.factor()?;
        Ok(self.add(NodeKind::UnaryOp { op, operand }, t.start, Self::loc(&t)))
    }

    fn power(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let left = self.atom_expr()?;
        if !self.eat(Tok::DoubleStar) {
            return Ok(left);
        }
        let right = self.factor()?;
        Ok(self.add(
            NodeKind::BinOp {
                left,
                op: Operator::Pow,
                right,
            },
            t.start,
            Self::loc(&t),
        ))
    }

    fn atom_expr(&mut self) -> PResult<NodeId> {
        let aw = if self.kind() == Tok::Await {
            Some(self.bump())
        } else {
            None
        };
        let start = self.cur().start;
        let mut e = self.atom()?;
        loop {
            match self.kind() {
                Tok::Dot => {
                    self.bump();
                    let a = self.expect(Tok::Name)?;
                    let attr = self.text(&a).to_string();
                    let loc = self.node(e).loc;
                    e = self.add(
                        NodeKind::Attribute {
                            value: e,
                            attr,
                            ctx: ExprContext::Load,
                        },
                        start,
                        loc,
                    );
                }
                Tok::LPar => {
                    let lpar = self.bump();
                    if self.kind() == Tok::RPar {
                        self.bump();
                        let loc = self.node(e).loc;
                        e = self.add(
                            NodeKind::Call {
                                func: e,
                                args: Vec::new(),
                                keywords: Vec::new(),
                            },
                            start,
                            loc,
                        );
                    } else {
                        e = self.call_trailer(e, start, lpar, true)?;
                    }
                }
                Tok::LSqb => {
                    self.bump();
                    let slice = self.subscriptlist()?;
                    self.expect(Tok::RSqb)?;
                    let loc = self.node(e).loc;
                    e = self.add(
                        NodeKind::Subscript {
                            value: e,
                            slice,
                            ctx: ExprContext::Load,
                        },
                        start,
                        loc,
                    );
                }
                _ => break,
            }
        }
        if let Some(a) = aw {
            e = self.add(NodeKind::Await { value: e }, a.start, Self::loc(&a));
        }
        Ok(e)
    }

    fn call_trailer(
        &mut self,
        func: NodeId,
        start: u32,
        lpar: Token,
        allow_gen: bool,
    ) -> PResult<NodeId> {
        let (args, keywords) = self.arglist(lpar, allow_gen)?;
        let loc = self.node(func).loc;
        Ok(self.add(
            NodeKind::Call {
                func,
                args,
                keywords,
            },
            start,
            loc,
        ))
    }

    /// Arguments after `(`, through the closing `)`.
    fn arglist(&mut self, lpar: Token, allow_gen: bool) -> PResult<(Vec<NodeId>, Vec<NodeId>)> {
        let call_mark = self.sem.len();
        let mut items: Vec<ArgItem> = Vec::new();
        let mut trailing_comma = false;
        loop {
            if self.kind() == Tok::RPar {
                break;
            }
            trailing_comma = false;
            let t = self.cur();
            let start = Self::loc(&t);
            let mark = self.sem.len();
            let item = match t.kind {
                Tok::Star => {
                    self.bump();
                    let value = self.test()?;
                    let node = self.add(
                        NodeKind::Starred {
                            value,
                            ctx: ExprContext::Load,
                        },
                        t.start,
                        start,
                    );
                    ArgItem {
                        kind: ArgKind::Star,
                        node,
                        start,
                        mark,
                    }
                }
                Tok::DoubleStar => {
                    self.bump();
                    let value = self.test()?;
                    let node = self.add(NodeKind::Keyword { arg: None, value }, t.start, start);
                    ArgItem {
                        kind: ArgKind::DoubleStar,
                        node,
                        start,
                        mark,
                    }
                }
                _ => {
                    let first_i = self.i;
                    let e = self.test()?;
                    match self.kind() {
                        Tok::For | Tok::Async => {
                            let generators = self.comp_for()?;
                            let node = self.add(
                                NodeKind::GeneratorExp { elt: e, generators },
                                t.start,
                                Self::loc(&lpar),
                            );
                            ArgItem {
                                kind: ArgKind::Generator,
                                node,
                                start,
                                mark,
                            }
                        }
                        Tok::ColonEqual => {
                            self.bump();
                            let value = self.test()?;
                            let node = self.finish_namedexpr(e, value, t)?;
                            ArgItem {
                                kind: ArgKind::Positional,
                                node,
                                start,
                                mark,
                            }
                        }
                        Tok::Equal => {
                            self.bump();
                            // The keyword slot is never converted as an
                            // expression, so errors inside it don't count.
                            self.sem.truncate(mark);
                            let single = self.i - first_i == 2;
                            let key_tok = self.toks[first_i];
                            let name = if single
                                && matches!(
                                    key_tok.kind,
                                    Tok::Name | Tok::None | Tok::True | Tok::False
                                ) {
                                Some(self.text(&key_tok).to_string())
                            } else {
                                None
                            };
                            let value = self.test()?;
                            let node = self.add(
                                NodeKind::Keyword {
                                    arg: Some(name.clone().unwrap_or_default()),
                                    value,
                                },
                                t.start,
                                start,
                            );
                            ArgItem {
                                kind: ArgKind::Keyword(name),
                                node,
                                start,
                                mark,
                            }
                        }
                        _ => ArgItem {
                            kind: ArgKind::Positional,
                            node: e,
                            start,
                            mark,
                        },
                    }
                }
            };
            items.push(item);
            if !self.eat(Tok::Comma) {
                break;
            }
            trailing_comma = true;
        }
        self.expect(Tok::RPar)?;

        // First pass: generator arguments.
        for it in &items {
            if let ArgKind::Generator = it.kind {
                if !allow_gen {
                    self.sem_insert(call_mark, "invalid syntax", it.start);
                    break;
                }
                if items.len() > 1 || trailing_comma {
                    self.sem_insert(
                        call_mark,
                        "Generator expression must be parenthesized",
                        it.start,
                    );
                    break;
                }
            }
        }
        // Second pass: ordering and keyword checks; only the first matters.
        let (mut nkeywords, mut ndoublestars) = (0, 0);
        let mut seen: Vec<String> = Vec::new();
        let mut args = Vec::new();
        let mut keywords = Vec::new();
        let mut reported = false;
        for it in &items {
            let mut err: Option<String> = None;
            match &it.kind {
                ArgKind::Positional => {
                    if nkeywords > 0 {
                        err = Some(if ndoublestars > 0 {
                            "positional argument follows keyword argument unpacking".into()
                        } else {
                            "positional argument follows keyword argument".into()
                        });
                    }
                    args.push(it.node);
                }
                ArgKind::Star => {
                    if ndoublestars > 0 {
                        err = Some(
                            "iterable argument unpacking follows keyword argument unpacking".into(),
                        );
                    }
                    args.push(it.node);
                }
                ArgKind::Generator => args.push(it.node),
                ArgKind::DoubleStar => {
                    nkeywords += 1;
                    ndoublestars += 1;
                    keywords.push(it.node);
                }
                ArgKind::Keyword(name) => {
                    match name {
                        None => {
                            err = Some(
                                "expression cannot contain assignment, perhaps you meant \"==\"?"
                                    .into(),
                            )
                        }
                        Some(n)
                            if matches!(n.as_str(), "None" | "True" | "False" | "__debug__") =>
                        {
                            err = Some(format!("cannot assign to {n}"))
                        }
                        Some(n) if seen.contains(n) => {
                            err = Some("keyword argument repeated".into())
                        }
                        Some(n) => seen.push(n.clone()),
                    }
                    nkeywords += 1;
                    keywords.push(it.node);
                }
            }
            if let Some(msg) = err {
                if !reported {
                    reported = true;
                    self.sem_insert(it.mark, msg, it.start);
                }
            }
        }
        Ok((args, keywords))
    }

    fn subscriptlist(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let mut dims = Vec::new();
        let mut comma = false;
        loop {
            dims.push(self.subscript()?);
            if self.kind() != Tok::Comma {
                break;
            }
            self.bump();
            comma = true;
            if !(starts_test(self.kind()) || self.kind() == Tok::Colon) {
                break;
            }
        }
        let is_slice = |p: &Self, d: &(NodeId, bool)| {
            let _ = p;
            d.1
        };
        if !comma {
            let (d, sliced) = dims[0];
            if sliced {
                return Ok(d);
            }
            let loc = self.node(d).loc;
            let r = self.node(d).range;
            return Ok(self.add_r(NodeKind::Index { value: d }, r, loc));
        }
        if dims.iter().all(|d| !is_slice(self, d)) {
            let elts = dims.iter().map(|d| d.0).collect();
            let tup = self.add(
                NodeKind::Tuple {
                    elts,
                    ctx: ExprContext::Load,
                },
                t.start,
                Self::loc(&t),
            );
            let r = self.node(tup).range;
            return Ok(self.add_r(NodeKind::Index { value: tup }, r, Self::loc(&t)));
        }
        let mut wrapped = Vec::new();
        for (d, sliced) in dims {
            if sliced {
                wrapped.push(d);
            } else {
                let loc = self.node(d).loc;
                let r = self.node(d).range;
                wrapped.push(self.add_r(NodeKind::Index { value: d }, r, loc));
            }
        }
        Ok(self.add(NodeKind::ExtSlice { dims: wrapped }, t.start, Self::loc(&t)))
    }

    /// One subscript; the flag tells whether it is a slice.
    fn subscript(&mut self) -> PResult<(NodeId, bool)> {
        let t = self.cur();
        let mut lower = None;
        if self.kind() != Tok::Colon {
            let e = self.test()?;
            if self.kind() != Tok::Colon {
                return Ok((e, false));
            }
            lower = Some(e);
        }
        self.expect(Tok::Colon)?;
        let upper = if starts_test(self.kind()) {
            Some(self.test()?)
        } else {
            None
        };
        let mut step = None;
        if self.eat(Tok::Colon) && starts_test(self.kind()) {
            step = Some(self.test()?);
        }
        Ok((
            self.add(
                NodeKind::Slice { lower, upper, step },
                t.start,
                Self::loc(&t),
            ),
            true,
        ))
    }

    /// One or more `for ... in ...` clauses with their `if` filters.
    fn comp_for(&mut self) -> PResult<Vec<NodeId>> {
        let mut gens = Vec::new();
        loop {
            let t = self.cur();
            let is_async = self.eat(Tok::Async);
            self.expect(Tok::For)?;
            let target = self.target_list()?;
            self.expect(Tok::In)?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat(Tok::If) {
                ifs.push(self.test_nocond()?);
            }
            gens.push(self.add(
                NodeKind::Comprehension {
                    target,
                    iter,
                    ifs,
                    is_async,
                },
                t.start,
                Self::loc(&t),
            ));
            if !matches!(self.kind(), Tok::For | Tok::Async) {
                break;
            }
        }
        Ok(gens)
    }

    fn check_comp_elt(&mut self, elt: NodeId, pos: Pos) {
        if let NodeKind::Starred { .. } = self.node(elt).kind {
            self.sem_push("iterable unpacking cannot be used in comprehension", pos);
        }
    }
}

// ---- atoms and displays ----
impl<'s> Parser<'s> {
    fn atom(&mut self) -> PResult<NodeId> {
        let t = self.cur();
        let pos = Self::loc(&t);
        let constant = |value| NodeKind::Constant { value };
        match t.kind {
            Tok::LPar => {
                self.bump();
                match self.kind() {
                    Tok::RPar => {
                        self.bump();
                        let elts = Vec::new();
                        Ok(self.add(
                            NodeKind::Tuple {
                                elts,
                                ctx: ExprContext::Load,
                            },
                            t.start,
                            pos,
                        ))
                    }
                    Tok::Yield => {
                        let y = self.yield_expr()?;
                        self.expect(Tok::RPar)?;
                        Ok(y)
                    }
                    _ => self.testlist_comp(t, Tok::RPar),
                }
            }
            Tok::LSqb => {
                self.bump();
                if self.eat(Tok::RSqb) {
                    let elts = Vec::new();
                    return Ok(self.add(
                        NodeKind::List {
                            elts,
                            ctx: ExprContext::Load,
                        },
                        t.start,
                        pos,
                    ));
                }
                self.testlist_comp(t, Tok::RSqb)
            }
            Tok::LBrace => {
                self.bump();
                if self.eat(Tok::RBrace) {
                    let kind = NodeKind::Dict {
                        keys: Vec::new(),
                        values: Vec::new(),
                    };
                    return Ok(self.add(kind, t.start, pos));
                }
                self.dictorsetmaker(t)
            }
            Tok::Name => {
                self.bump();
                let id = self.text(&t).to_string();
                Ok(self.add(
                    NodeKind::Name {
                        id,
                        ctx: ExprContext::Load,
                    },
                    t.start,
                    pos,
                ))
            }
            Tok::Number => {
                self.bump();
                let s = self.text(&t).to_string();
                let lower = s.to_ascii_lowercase();
                let value = if lower.ends_with('j') {
                    Constant::Complex(s)
                } else if lower.starts_with("0x")
                    || lower.starts_with("0o")
                    || lower.starts_with("0b")
                {
                    Constant::Int(s)
                } else if lower.contains(['.', 'e']) {
                    Constant::Float(s)
                } else {
                    Constant::Int(s)
                };
                Ok(self.add(constant(value), t.start, pos))
            }
            Tok::String => Ok(self.strings_atom()),
            Tok::Ellipsis | Tok::None | Tok::True | Tok::False => {
                self.bump();
                let value = match t.kind {
                    Tok::Ellipsis => Constant::Ellipsis,
                    Tok::None => Constant::None,
                    Tok::True => Constant::True,
                    _ => Constant::False,
                };
                Ok(self.add(constant(value), t.start, pos))
            }
            _ => Err(self.err_here()),
        }
    }

    /// Contents of `(...)` or `[...]` after the opening bracket.
    fn testlist_comp(&mut self, open: Token, close: Tok) -> PResult<NodeId> {
        let pos = Self::loc(&open);
        let elt_pos = Self::loc(&self.cur());
        let first = self.comp_element()?;
        if matches!(self.kind(), Tok::For | Tok::Async) {
            self.check_comp_elt(first, elt_pos);
            let generators = self.comp_for()?;
            self.expect(close)?;
            let kind = if close == Tok::RPar {
                NodeKind::GeneratorExp {
                    elt: first,
                    generators,
                }
            } else {
                NodeKind::ListComp {
                    elt: first,
                    generators,
                }
            };
            return Ok(self.add(kind, open.start, pos));
        }
        let mut elts = vec![first];
        let mut comma = false;
        while self.eat(Tok::Comma) {
            comma = true;
            if !(starts_test(self.kind()) || self.kind() == Tok::Star) {
                break;
            }
            elts.push(self.comp_element()?);
        }
        self.expect(close)?;
        let ctx = ExprContext::Load;
        if close == Tok::RSqb {
            return Ok(self.add(NodeKind::List { elts, ctx }, open.start, pos));
        }
        if !comma {
            return Ok(first);
        }
        Ok(self.add(NodeKind::Tuple { elts, ctx }, open.start, pos))
    }

    fn comp_element(&mut self) -> PResult<NodeId> {
        if self.kind() == Tok::Star {
            self.star_expr()
        } else {
            self.namedexpr_test()
        }
    }

    /// A dict entry; `None` as key marks `**mapping`.
    fn dict_item(&mut self) -> PResult<(Option<NodeId>, NodeId)> {
        if self.eat(Tok::DoubleStar) {
            return Ok((None, self.expr()?));
        }
        let key = self.test()?;
        self.expect(Tok::Colon)?;
        Ok((Some(key), self.test()?))
    }

    /// Contents of `{...}` after the brace, which is known not to be empty.
    fn dictorsetmaker(&mut self, open: Token) -> PResult<NodeId> {
        let pos = Self::loc(&open);
        let mark = self.sem.len();
        let elt_pos = Self::loc(&self.cur());
        let mut first = None;
        let is_dict = match self.kind() {
            Tok::DoubleStar => true,
            Tok::Star => false,
            _ => {
                let key = self.test()?;
                first = Some(key);
                self.kind() == Tok::Colon
            }
        };
        if is_dict {
            let (k, v) = match first {
                Some(key) => {
                    self.expect(Tok::Colon)?;
                    (Some(key), self.test()?)
                }
                None => self.dict_item()?,
            };
            if matches!(self.kind(), Tok::For | Tok::Async) {
                if k.is_none() {
                    self.sem_insert(
                        mark,
                        "dict unpacking cannot be used in dict comprehension",
                        pos,
                    );
                }
                let generators = self.comp_for()?;
                self.expect(Tok::RBrace)?;
                let kind = NodeKind::DictComp {
                    key: k.unwrap_or(v),
                    value: v,
                    generators,
                };
                return Ok(self.add(kind, open.start, pos));
            }
            let (mut keys, mut values) = (vec![k], vec![v]);
            while self.eat(Tok::Comma) {
                if !(starts_test(self.kind()) || self.kind() == Tok::DoubleStar) {
                    break;
                }
                let (k, v) = self.dict_item()?;
                keys.push(k);
                values.push(v);
            }
            self.expect(Tok::RBrace)?;
            return Ok(self.add(NodeKind::Dict { keys, values }, open.start, pos));
        }
        let first = match first {
            Some(e) => e,
            None => self.star_expr()?,
        };
        if matches!(self.kind(), Tok::For | Tok::Async) {
            self.check_comp_elt(first, elt_pos);
            let generators = self.comp_for()?;
            self.expect(Tok::RBrace)?;
            return Ok(self.add(
                NodeKind::SetComp {
                    elt: first,
                    generators,
                },
                open.start,
                pos,
            ));
        }
        let mut elts = vec![first];
        while self.eat(Tok::Comma) {
            if !(starts_test(self.kind()) || self.kind() == Tok::Star) {
                break;
            }
            elts.push(if self.kind() == Tok::Star {
                self.star_expr()?
            } else {
                self.test()?
            });
        }
        self.expect(Tok::RBrace)?;
        Ok(self.add(NodeKind::Set { elts }, open.start, pos))
    }
}

// ---- string literals and f-strings ----
impl<'s> Parser<'s> {
    fn strings_atom(&mut self) -> NodeId {
        let first = self.cur();
        let mut toks = Vec::new();
        while self.kind() == Tok::String {
            toks.push(self.bump());
        }
        let last = toks[toks.len() - 1];
        let ctx = AtomCtx {
            pos: Self::loc(&first),
            range: TextRange::new(first.start, last.end),
            first,
        };
        match self.concat_strings(&toks, &ctx) {
            Ok(id) => id,
            Err(Recorded) => {
                let value = Constant::Str(String::new());
                self.add_r(NodeKind::Constant { value }, ctx.range, ctx.pos)
            }
        }
    }

    fn ferr(&mut self, msg: impl Into<String>, ctx: &AtomCtx) -> Recorded {
        self.sem_push(msg, ctx.pos);
        Recorded
    }

    fn concat_strings(&mut self, toks: &[Token], ctx: &AtomCtx) -> Result<NodeId, Recorded> {
        let mut st = FState::default();
        let mut bytes = Vec::new();
        let mut bytesmode = false;
        for (i, tok) in toks.iter().enumerate() {
            let sp = split_string_token(self.text(tok));
            let mut plain = None;
            if sp.is_bytes {
                match decode_bytes(sp.body, sp.is_raw) {
                    Ok(b) => bytes.extend(b),
                    Err(m) => return Err(self.ferr(m, ctx)),
                }
            } else if !sp.is_f {
                match decode_str(sp.body, sp.is_raw) {
                    Ok(s) => plain = Some(s),
                    Err(m) => return Err(self.ferr(format!("(unicode error) {m}"), ctx)),
                }
            }
            if i != 0 && bytesmode != sp.is_bytes {
                return Err(self.ferr("cannot mix bytes and nonbytes literals", ctx));
            }
            bytesmode = sp.is_bytes;
            if sp.is_f {
                let abs = tok.start + sp.body_offset as u32;
                let mut s = 0;
                self.fstring_concat(&mut st, sp.body, abs, &mut s, sp.is_raw, 0, ctx)?;
            } else if let Some(p) = plain {
                st.last_str.push_str(&p);
            }
        }
        if bytesmode {
            let value = Constant::Bytes(bytes);
            return Ok(self.add_r(NodeKind::Constant { value }, ctx.range, ctx.pos));
        }
        Ok(self.fstring_finish(st, ctx))
    }

    fn flush_str(&mut self, st: &mut FState, ctx: &AtomCtx) {
        if !st.last_str.is_empty() {
            let value = Constant::Str(std::mem::take(&mut st.last_str));
            let id = self.add_r(NodeKind::Constant { value }, ctx.range, ctx.pos);
            st.values.push(id);
        }
    }

    fn fstring_finish(&mut self, mut st: FState, ctx: &AtomCtx) -> NodeId {
        if !st.fmode {
            let value = Constant::Str(st.last_str);
            return self.add_r(NodeKind::Constant { value }, ctx.range, ctx.pos);
        }
        self.flush_str(&mut st, ctx);
        self.add_r(
            NodeKind::JoinedStr { values: st.values },
            ctx.range,
            ctx.pos,
        )
    }

    fn fstring_parse(
        &mut self,
        body: &'s str,
        abs: u32,
        s: &mut usize,
        raw: bool,
        lvl: u32,
        ctx: &AtomCtx,
    ) -> Result<NodeId, Recorded> {
        let mut st = FState::default();
        self.fstring_concat(&mut st, body, abs, s, raw, lvl, ctx)?;
        Ok(self.fstring_finish(st, ctx))
    }

    #[allow(clippy::too_many_arguments)]
    fn fstring_concat(
        &mut self,
        st: &mut FState,
        body: &'s str,
        abs: u32,
        s: &mut usize,
        raw: bool,
        lvl: u32,
        ctx: &AtomCtx,
    ) -> Result<(), Recorded> {
        let b = body.as_bytes();
        let end = b.len();
        loop {
            let (literal, doubled) = self.fstring_find_literal(body, s, raw, lvl, ctx)?;
            if let Some(l) = literal {
                st.last_str.push_str(&l);
            }
            if doubled {
                continue;
            }
            if *s >= end || b[*s] == b'}' {
                break;
            }
            let (expr_text, value) = self.fstring_find_expr(body, abs, s, raw, lvl, ctx)?;
            if let Some(t) = expr_text {
                st.last_str.push_str(&t);
            }
            st.fmode = true;
            self.flush_str(st, ctx);
            st.values.push(value);
        }
        if lvl == 0 && *s + 1 < end {
            return Err(self.ferr("f-string: unexpected end of string", ctx));
        }
        if lvl != 0 && (*s >= end || b[*s] != b'}') {
            return Err(self.ferr("f-string: expecting '}'", ctx));
        }
        st.fmode = true;
        Ok(())
    }

    /// Scans literal text up to the next expression. The flag is set when
    /// the literal ended at a doubled brace.
    fn fstring_find_literal(
        &mut self,
        body: &'s str,
        s: &mut usize,
        raw: bool,
        lvl: u32,
        ctx: &AtomCtx,
    ) -> Result<(Option<String>, bool), Recorded> {
        let b = body.as_bytes();
        let end = b.len();
        let start = *s;
        let mut i = *s;
        let mut doubled = false;
        while i < end {
            let mut ch = b[i];
            i += 1;
            if !raw && ch == b'\\' && i < end {
                ch = b[i];
                i += 1;
                if ch == b'N' {
                    if i < end && b[i] == b'{' {
                        i += 1;
                        while i < end {
                            i += 1;
                            if b[i - 1] == b'}' {
                                break;
                            }
                        }
                        continue;
                    }
                    if i < end {
                        i += 1;
                    }
                    break;
                }
            }
            if ch == b'{' || ch == b'}' {
                if lvl == 0 {
                    if i < end && b[i] == ch {
                        *s = i + 1;
                        doubled = true;
                        break;
                    }
                    if ch == b'}' {
                        *s = i - 1;
                        return Err(self.ferr("f-string: single '}' is not allowed", ctx));
                    }
                }
                i -= 1;
                break;
            }
        }
        while !body.is_char_boundary(i) {
            i += 1;
        }
        if !doubled {
            *s = i;
        }
        if i == start {
            return Ok((None, doubled));
        }
        let text = &body[start..i];
        if raw {
            return Ok((Some(normalize_newlines(text).into_owned()), doubled));
        }
        match decode_str(text, false) {
            Ok(t) => Ok((Some(t), doubled)),
            Err(m) => Err(self.ferr(format!("(unicode error) {m}"), ctx)),
        }
    }

    /// Scans one `{...}` replacement field starting at the `{`.
    fn fstring_find_expr(
        &mut self,
        body: &'s str,
        abs: u32,
        s: &mut usize,
        raw: bool,
        lvl: u32,
        ctx: &AtomCtx,
    ) -> Result<(Option<String>, NodeId), Recorded> {
        let b = body.as_bytes();
        let end = b.len();
        *s += 1;
        let expr_start = *s;
        if lvl >= 2 {
            return Err(self.ferr("f-string: expressions nested too deeply", ctx));
        }
        let mut quote = 0u8;
        let mut triple = false;
        let mut stack: Vec<u8> = Vec::new();
        while *s < end {
            let ch = b[*s];
            if ch == b'\\' {
                return Err(self.ferr("f-string expression part cannot include a backslash", ctx));
            }
            if quote != 0 {
                if ch == quote {
                    if !triple {
                        quote = 0;
                    } else if *s + 2 < end && b[*s + 1] == ch && b[*s + 2] == ch {
                        *s += 2;
                        quote = 0;
                        triple = false;
                    }
                }
                *s += 1;
                continue;
            }
            match ch {
                b'\'' | b'"' => {
                    if *s + 2 < end && b[*s + 1] == ch && b[*s + 2] == ch {
                        triple = true;
                        *s += 2;
                    } else {
                        triple = false;
                    }
                    quote = ch;
                }
                b'[' | b'{' | b'(' => {
                    if stack.len() >= 200 {
                        return Err(self.ferr("f-string: too many nested parenthesis", ctx));
                    }
                    stack.push(ch);
                }
                b'#' => {
                    return Err(self.ferr("f-string expression part cannot include '#'", ctx));
                }
                b'!' | b':' | b'}' | b'=' | b'>' | b'<' if stack.is_empty() => {
                    let next = b.get(*s + 1).copied();
                    if next == Some(b'=') && matches!(ch, b'!' | b'=' | b'>' | b'<') {
                        *s += 2;
                        continue;
                    }
                    if ch == b'>' || ch == b'<' {
                        *s += 1;
                        continue;
                    }
                    break;
                }
                b']' | b'}' | b')' => {
                    let Some(open) = stack.pop() else {
                        let msg = format!("f-string: unmatched '{}'", ch as char);
                        return Err(self.ferr(msg, ctx));
                    };
                    let ok = matches!((open, ch), (b'(', b')') | (b'[', b']') | (b'{', b'}'));
                    if !ok {
                        let msg = format!(
                            "f-string: closing parenthesis '{}' does not match opening parenthesis '{}'",
                            ch as char, open as char
                        );
                        return Err(self.ferr(msg, ctx));
                    }
                }
                _ => {}
            }
            *s += 1;
        }
        let expr_end = *s;
        if quote != 0 {
            return Err(self.ferr("f-string: unterminated string", ctx));
        }
        if let Some(&open) = stack.last() {
            return Err(self.ferr(format!("f-string: unmatched '{}'", open as char), ctx));
        }
        let expecting = "f-string: expecting '}'";
        if *s >= end {
            return Err(self.ferr(expecting, ctx));
        }
        let expr = &body[expr_start..expr_end];
        let value = self.fstring_compile_expr(expr, abs + expr_start as u32, ctx)?;
        let mut expr_text = None;
        if b[*s] == b'=' {
            *s += 1;
            while *s < end && matches!(b[*s], b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c) {
                *s += 1;
            }
            expr_text = Some(body[expr_start..*s].to_string());
        }
        let mut conversion = None;
        if *s < end && b[*s] == b'!' {
            *s += 1;
            if *s >= end {
                return Err(self.ferr(expecting, ctx));
            }
            let c = b[*s];
            *s += 1;
            if !matches!(c, b's' | b'r' | b'a') {
                let msg = "f-string: invalid conversion character: expected 's', 'r', or 'a'";
                return Err(self.ferr(msg, ctx));
            }
            conversion = Some(c as char);
        }
        if *s >= end {
            return Err(self.ferr(expecting, ctx));
        }
        let mut format_spec = None;
        if b[*s] == b':' {
            *s += 1;
            if *s >= end {
                return Err(self.ferr(expecting, ctx));
            }
            format_spec = Some(self.fstring_parse(body, abs, s, raw, lvl + 1, ctx)?);
        }
        if *s >= end || b[*s] != b'}' {
            return Err(self.ferr(expecting, ctx));
        }
        *s += 1;
        if expr_text.is_some() && format_spec.is_none() && conversion.is_none() {
            conversion = Some('r');
        }
        let kind = NodeKind::FormattedValue {
            value,
            conversion,
            format_spec,
        };
        Ok((expr_text, self.add_r(kind, ctx.range, ctx.pos)))
    }

    /// Parses a replacement-field expression on its own, then moves its
    /// nodes into this source's coordinates.
    fn fstring_compile_expr(
        &mut self,
        expr: &str,
        expr_abs: u32,
        ctx: &AtomCtx,
    ) -> Result<NodeId, Recorded> {
        if expr
            .bytes()
            .all(|c| matches!(c, b' ' | b'\t' | b'\n' | 0x0c))
        {
            return Err(self.ferr("f-string: empty expression not allowed", ctx));
        }
        let wrapped = format!("({expr})");
        let base = self.base + self.nodes.len() as u32;
        let mut sub = Parser::new(&wrapped, base);
        let value = match sub.eval_input() {
            Ok(v) => v,
            Err(mut e) => {
                e.text = None;
                self.sem.push(e);
                return Err(Recorded);
            }
        };
        // Column adjustment is based on where the expression text first
        // appears in the first string token.
        let mut lines = ctx.pos.line - 1;
        let mut cols = ctx.pos.col;
        let first_text = self.text(&ctx.first);
        if let Some(idx) = first_text.find(&format!("{{{expr}}}")) {
            let before = &first_text[..idx];
            lines += before.matches('\n').count() as u32;
            cols += (idx - before.rfind('\n').unwrap_or(0)) as u32;
        }
        if !sub.sem.is_empty() {
            for mut e in sub.sem {
                if e.line == 1 {
                    e.col += cols;
                }
                e.line += lines;
                self.sem.push(e);
            }
            return Err(Recorded);
        }
        for mut n in sub.nodes {
            n.range = TextRange::new(expr_abs - 1 + n.range.start, expr_abs - 1 + n.range.end);
            if n.loc.line == 1 {
                n.loc.col += cols;
            }
            n.loc.line += lines;
            self.nodes.push(n);
        }
        Ok(value)
    }
}
