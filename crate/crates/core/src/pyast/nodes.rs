//! Arena-allocated syntax tree mirroring the shape of CPython 3.8's `ast`.
//!
//! Every node has two locations:
//! * `range`: the true byte extent in the source, used for containment and
//!   slicing (decorators are inside their function's range, for example);
//! * `loc`: the position CPython 3.8 would report as `lineno`/`col_offset`,
//!   which is what diagnostics print.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// 1-based line, 0-based UTF-8 byte column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Half-open byte range into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct TextRange {
    pub start: u32,
    pub end: u32,
}

impl TextRange {
    pub fn new(start: u32, end: u32) -> Self {
        debug_assert!(start <= end);
        TextRange { start, end }
    }

    pub fn contains_range(&self, other: TextRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn cover(self, other: TextRange) -> TextRange {
        TextRange {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Line/column extent of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExprContext {
    Load,
    Store,
    Del,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Add,
    Sub,
    Mult,
    MatMult,
    Div,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
    FloorDiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Invert,
    Not,
    UAdd,
    USub,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Is,
    IsNot,
    In,
    NotIn,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Str(String),
    Bytes(Vec<u8>),
    /// Numeric literals keep their source text; no checks need the value.
    Int(String),
    Float(String),
    Complex(String),
    True,
    False,
    None,
    Ellipsis,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Module {
        body: Vec<NodeId>,
    },

    // Statements
    FunctionDef {
        name: String,
        args: NodeId,
        body: Vec<NodeId>,
        decorators: Vec<NodeId>,
        returns: Option<NodeId>,
        is_async: bool,
        /// Byte offset just past the header's `:`.
        header_end: u32,
    },
    ClassDef {
        name: String,
        bases: Vec<NodeId>,
        keywords: Vec<NodeId>,
        body: Vec<NodeId>,
        decorators: Vec<NodeId>,
    },
    Return {
        value: Option<NodeId>,
    },
    Delete {
        targets: Vec<NodeId>,
    },
    Assign {
        targets: Vec<NodeId>,
        value: NodeId,
    },
    AugAssign {
        target: NodeId,
        op: Operator,
        value: NodeId,
    },
    AnnAssign {
        target: NodeId,
        annotation: NodeId,
        value: Option<NodeId>,
        simple: bool,
    },
    For {
        target: NodeId,
        iter: NodeId,
        body: Vec<NodeId>,
        orelse: Vec<NodeId>,
        is_async: bool,
    },
    While {
        test: NodeId,
        body: Vec<NodeId>,
        orelse: Vec<NodeId>,
    },
    If {
        test: NodeId,
        body: Vec<NodeId>,
        orelse: Vec<NodeId>,
    },
    With {
        items: Vec<NodeId>,
        body: Vec<NodeId>,
        is_async: bool,
    },
    Raise {
        exc: Option<NodeId>,
        cause: Option<NodeId>,
    },
    Try {
        body: Vec<NodeId>,
        handlers: Vec<NodeId>,
        orelse: Vec<NodeId>,
        finalbody: Vec<NodeId>,
    },
    Assert {
        test: NodeId,
        msg: Option<NodeId>,
    },
    Import {
        names: Vec<NodeId>,
    },
    ImportFrom {
        module: Option<String>,
        names: Vec<NodeId>,
        level: u32,
    },
    Global {
        names: Vec<String>,
    },
    Nonlocal {
        names: Vec<String>,
    },
    Expr {
        value: NodeId,
    },
    Pass,
    Break,
    Continue,

    // Expressions
    BoolOp {
        op: BoolOp,
        values: Vec<NodeId>,
    },
    NamedExpr {
        target: NodeId,
        value: NodeId,
    },
    BinOp {
        left: NodeId,
        op: Operator,
        right: NodeId,
    },
    UnaryOp {
        op: UnaryOp,
        operand: NodeId,
    },
    Lambda {
        args: NodeId,
        body: NodeId,
    },
    IfExp {
        test: NodeId,
        body: NodeId,
        orelse: NodeId,
    },
    Dict {
        /// `None` marks a `**mapping` entry.
        keys: Vec<Option<NodeId>>,
        values: Vec<NodeId>,
    },
    Set {
        elts: Vec<NodeId>,
    },
    ListComp {
        elt: NodeId,
        generators: Vec<NodeId>,
    },
    SetComp {
        elt: NodeId,
        generators: Vec<NodeId>,
    },
    DictComp {
        key: NodeId,
        value: NodeId,
        generators: Vec<NodeId>,
    },
    GeneratorExp {
        elt: NodeId,
        generators: Vec<NodeId>,
    },
    Await {
        value: NodeId,
    },
    Yield {
        value: Option<NodeId>,
    },
    YieldFrom {
        value: NodeId,
    },
    Compare {
        left: NodeId,
        ops: Vec<CmpOp>,
        comparators: Vec<NodeId>,
    },
    Call {
        func: NodeId,
        args: Vec<NodeId>,
        keywords: Vec<NodeId>,
    },
    FormattedValue {
        value: NodeId,
        conversion: Option<char>,
        format_spec: Option<NodeId>,
    },
    JoinedStr {
        values: Vec<NodeId>,
    },
    Constant {
        value: Constant,
    },
    Attribute {
        value: NodeId,
        attr: String,
        ctx: ExprContext,
    },
    Subscript {
        value: NodeId,
        slice: NodeId,
        ctx: ExprContext,
    },
    Starred {
        value: NodeId,
        ctx: ExprContext,
    },
    Name {
        id: String,
        ctx: ExprContext,
    },
    List {
        elts: Vec<NodeId>,
        ctx: ExprContext,
    },
    Tuple {
        elts: Vec<NodeId>,
        ctx: ExprContext,
    },

    // Slices (3.8 layout)
    Index {
        value: NodeId,
    },
    Slice {
        lower: Option<NodeId>,
        upper: Option<NodeId>,
        step: Option<NodeId>,
    },
    ExtSlice {
        dims: Vec<NodeId>,
    },

    // Auxiliary nodes
    Comprehension {
        target: NodeId,
        iter: NodeId,
        ifs: Vec<NodeId>,
        is_async: bool,
    },
    ExceptHandler {
        typ: Option<NodeId>,
        name: Option<String>,
        body: Vec<NodeId>,
    },
    Arguments {
        posonlyargs: Vec<NodeId>,
        args: Vec<NodeId>,
        vararg: Option<NodeId>,
        kwonlyargs: Vec<NodeId>,
        kw_defaults: Vec<Option<NodeId>>,
        kwarg: Option<NodeId>,
        defaults: Vec<NodeId>,
    },
    Arg {
        name: String,
        annotation: Option<NodeId>,
    },
    Keyword {
        /// `None` for `**kwargs`.
        arg: Option<String>,
        value: NodeId,
    },
    Alias {
        name: String,
        asname: Option<String>,
    },
    WithItem {
        context_expr: NodeId,
        optional_vars: Option<NodeId>,
    },
}

impl NodeKind {
    /// Short lowercase name, mostly for debugging output.
    pub fn name(&self) -> &'static str {
        use NodeKind::*;
        match self {
            Module { .. } => "Module",
            FunctionDef { .. } => "FunctionDef",
            ClassDef { .. } => "ClassDef",
            Return { .. } => "Return",
            Delete { .. } => "Delete",
            Assign { .. } => "Assign",
            AugAssign { .. } => "AugAssign",
            AnnAssign { .. } => "AnnAssign",
            For { .. } => "For",
            While { .. } => "While",
            If { .. } => "If",
            With { .. } => "With",
            Raise { .. } => "Raise",
            Try { .. } => "Try",
            Assert { .. } => "Assert",
            Import { .. } => "Import",
            ImportFrom { .. } => "ImportFrom",
            Global { .. } => "Global",
            Nonlocal { .. } => "Nonlocal",
            Expr { .. } => "Expr",
            Pass => "Pass",
            Break => "Break",
            Continue => "Continue",
            BoolOp { .. } => "BoolOp",
            NamedExpr { .. } => "NamedExpr",
            BinOp { .. } => "BinOp",
            UnaryOp { .. } => "UnaryOp",
            Lambda { .. } => "Lambda",
            IfExp { .. } => "IfExp",
            Dict { .. } => "Dict",
            Set { .. } => "Set",
            ListComp { .. } => "ListComp",
            SetComp { .. } => "SetComp",
            DictComp { .. } => "DictComp",
            GeneratorExp { .. } => "GeneratorExp",
            Await { .. } => "Await",
            Yield { .. } => "Yield",
            YieldFrom { .. } => "YieldFrom",
            Compare { .. } => "Compare",
            Call { .. } => "Call",
            FormattedValue { .. } => "FormattedValue",
            JoinedStr { .. } => "JoinedStr",
            Constant { .. } => "Constant",
            Attribute { .. } => "Attribute",
            Subscript { .. } => "Subscript",
            Starred { .. } => "Starred",
            Name { .. } => "Name",
            List { .. } => "List",
            Tuple { .. } => "Tuple",
            Index { .. } => "Index",
            Slice { .. } => "Slice",
            ExtSlice { .. } => "ExtSlice",
            Comprehension { .. } => "comprehension",
            ExceptHandler { .. } => "ExceptHandler",
            Arguments { .. } => "arguments",
            Arg { .. } => "arg",
            Keyword { .. } => "keyword",
            Alias { .. } => "alias",
            WithItem { .. } => "withitem",
        }
    }

    pub fn is_stmt(&self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            FunctionDef { .. }
                | ClassDef { .. }
                | Return { .. }
                | Delete { .. }
                | Assign { .. }
                | AugAssign { .. }
                | AnnAssign { .. }
                | For { .. }
                | While { .. }
                | If { .. }
                | With { .. }
                | Raise { .. }
                | Try { .. }
                | Assert { .. }
                | Import { .. }
                | ImportFrom { .. }
                | Global { .. }
                | Nonlocal { .. }
                | Expr { .. }
                | Pass
                | Break
                | Continue
        )
    }

    /// True for nodes that carry an `elts` or `ctx` field in Python's ast.
    /// The linter skips these when looking for a node's logical parent.
    pub fn has_elts_or_ctx(&self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Attribute { .. }
                | Subscript { .. }
                | Starred { .. }
                | Name { .. }
                | List { .. }
                | Tuple { .. }
                | Set { .. }
        )
    }

    pub fn ctx(&self) -> Option<ExprContext> {
        use NodeKind::*;
        match self {
            Attribute { ctx, .. }
            | Subscript { ctx, .. }
            | Starred { ctx, .. }
            | Name { ctx, .. }
            | List { ctx, .. }
            | Tuple { ctx, .. } => Some(*ctx),
            _ => None,
        }
    }

    /// Child nodes in the order the reference linter visits them: the `iter`,
    /// `generators` or `value` field first, then the remaining fields in
    /// declaration order.
    pub fn children(&self) -> Vec<NodeId> {
        use NodeKind::*;
        let mut out = Vec::new();
        fn opt(out: &mut Vec<NodeId>, n: &Option<NodeId>) {
            if let Some(n) = n {
                out.push(*n);
            }
        }
        match self {
            Module { body } => out.extend(body),
            FunctionDef {
                args,
                body,
                decorators,
                returns,
                ..
            } => {
                out.push(*args);
                out.extend(body);
                out.extend(decorators);
                opt(&mut out, returns);
            }
            ClassDef {
                bases,
                keywords,
                body,
                decorators,
                ..
            } => {
                out.extend(bases);
                out.extend(keywords);
                out.extend(body);
                out.extend(decorators);
            }
            Return { value } => opt(&mut out, value),
            Delete { targets } => out.extend(targets),
            Assign { targets, value } => {
                out.push(*value);
                out.extend(targets);
            }
            AugAssign { target, value, .. } => {
                out.push(*value);
                out.push(*target);
            }
            AnnAssign {
                target,
                annotation,
                value,
                ..
            } => {
                opt(&mut out, value);
                out.push(*target);
                out.push(*annotation);
            }
            For {
                target,
                iter,
                body,
                orelse,
                ..
            } => {
                out.push(*iter);
                out.push(*target);
                out.extend(body);
                out.extend(orelse);
            }
            While { test, body, orelse } | If { test, body, orelse } => {
                out.push(*test);
                out.extend(body);
                out.extend(orelse);
            }
            With { items, body, .. } => {
                out.extend(items);
                out.extend(body);
            }
            Raise { exc, cause } => {
                opt(&mut out, exc);
                opt(&mut out, cause);
            }
            Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                out.extend(body);
                out.extend(handlers);
                out.extend(orelse);
                out.extend(finalbody);
            }
            Assert { test, msg } => {
                out.push(*test);
                opt(&mut out, msg);
            }
            Import { names } | ImportFrom { names, .. } => out.extend(names),
            Global { .. } | Nonlocal { .. } | Pass | Break | Continue => {}
            Expr { value } => out.push(*value),
            BoolOp { values, .. } => out.extend(values),
            NamedExpr { target, value } => {
                out.push(*value);
                out.push(*target);
            }
            BinOp { left, right, .. } => {
                out.push(*left);
                out.push(*right);
            }
            UnaryOp { operand, .. } => out.push(*operand),
            Lambda { args, body } => {
                out.push(*args);
                out.push(*body);
            }
            IfExp { test, body, orelse } => {
                out.push(*test);
                out.push(*body);
                out.push(*orelse);
            }
            Dict { keys, values } => {
                out.extend(keys.iter().flatten());
                out.extend(values);
            }
            Set { elts } => out.extend(elts),
            ListComp { elt, generators }
            | SetComp { elt, generators }
            | GeneratorExp { elt, generators } => {
                out.extend(generators);
                out.push(*elt);
            }
            DictComp {
                key,
                value,
                generators,
            } => {
                out.extend(generators);
                out.push(*key);
                out.push(*value);
            }
            Await { value } | YieldFrom { value } => out.push(*value),
            Yield { value } => opt(&mut out, value),
            Compare {
                left, comparators, ..
            } => {
                out.push(*left);
                out.extend(comparators);
            }
            Call {
                func,
                args,
                keywords,
            } => {
                out.push(*func);
                out.extend(args);
                out.extend(keywords);
            }
            FormattedValue {
                value, format_spec, ..
            } => {
                out.push(*value);
                opt(&mut out, format_spec);
            }
            JoinedStr { values } => out.extend(values),
            Constant { .. } | Name { .. } | Alias { .. } => {}
            Attribute { value, .. } | Starred { value, .. } => out.push(*value),
            Subscript { value, slice, .. } => {
                out.push(*value);
                out.push(*slice);
            }
            List { elts, .. } | Tuple { elts, .. } => out.extend(elts),
            Index { value } => out.push(*value),
            Slice { lower, upper, step } => {
                opt(&mut out, lower);
                opt(&mut out, upper);
                opt(&mut out, step);
            }
            ExtSlice { dims } => out.extend(dims),
            Comprehension {
                target, iter, ifs, ..
            } => {
                out.push(*iter);
                out.push(*target);
                out.extend(ifs);
            }
            ExceptHandler { typ, body, .. } => {
                opt(&mut out, typ);
                out.extend(body);
            }
            Arguments {
                posonlyargs,
                args,
                vararg,
                kwonlyargs,
                kw_defaults,
                kwarg,
                defaults,
            } => {
                out.extend(posonlyargs);
                out.extend(args);
                opt(&mut out, vararg);
                out.extend(kwonlyargs);
                out.extend(kw_defaults.iter().flatten());
                opt(&mut out, kwarg);
                out.extend(defaults);
            }
            Arg { annotation, .. } => opt(&mut out, annotation),
            Keyword { value, .. } => out.push(*value),
            WithItem {
                context_expr,
                optional_vars,
            } => {
                out.push(*context_expr);
                opt(&mut out, optional_vars);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub range: TextRange,
    pub loc: Pos,
}

/// Byte offsets of line starts, treating `\n`, `\r\n` and lone `\r` as breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineIndex {
    starts: Vec<u32>,
    len: u32,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let bytes = text.as_bytes();
        let mut starts = vec![0u32];
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'\n' => starts.push(i as u32 + 1),
                b'\r' => {
                    if bytes.get(i + 1) == Some(&b'\n') {
                        i += 1;
                    }
                    starts.push(i as u32 + 1);
                }
                _ => {}
            }
            i += 1;
        }
        LineIndex {
            starts,
            len: bytes.len() as u32,
        }
    }

    /// Number of lines, counting a final line after a trailing break.
    pub fn line_count(&self) -> usize {
        self.starts.len()
    }

    pub fn line_start(&self, line: u32) -> Option<u32> {
        self.starts.get(line.checked_sub(1)? as usize).copied()
    }

    /// End of `line` including its line break, or end of text.
    pub fn line_end_inclusive(&self, line: u32) -> Option<u32> {
        let idx = line.checked_sub(1)? as usize;
        if idx >= self.starts.len() {
            return None;
        }
        Some(self.starts.get(idx + 1).copied().unwrap_or(self.len))
    }

    pub fn pos(&self, offset: u32) -> Pos {
        let line = match self.starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Pos {
            line: line as u32 + 1,
            col: offset - self.starts[line],
        }
    }
}

/// A parsed module.
#[derive(Clone, Debug)]
pub struct Ast {
    pub nodes: Vec<Node>,
    pub root: NodeId,
    pub lines: LineIndex,
}

impl Ast {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn span(&self, id: NodeId) -> Span {
        let r = self.node(id).range;
        Span {
            start: self.lines.pos(r.start),
            end: self.lines.pos(r.end),
        }
    }

    pub fn module_body(&self) -> &[NodeId] {
        match self.kind(self.root) {
            NodeKind::Module { body } => body,
            _ => &[],
        }
    }

    /// Pre-order walk from the root, children in visiting order.
    pub fn walk(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            let children = self.kind(id).children();
            stack.extend(children.into_iter().rev());
        }
        out
    }
}
