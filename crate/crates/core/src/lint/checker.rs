//! Binding and scope tracking modelled on pyflakes 3.0.1's `Checker`.
//!
//! The traversal order, the deferral of function bodies and the fork
//! detection for conditional redefinitions follow the reference closely,
//! because the six supported checks depend on those details.

use std::collections::HashSet;

use indexmap::IndexMap;

use super::builtins::{BUILTINS, CLASS_SCOPE_MAGIC};
use super::{BindingKind, LintCheckKind, ScopeKind};
use crate::pyast::{
    parse_annotation_string, Ast, Constant, ExprContext, Node, NodeId, NodeKind, Pos,
};

pub(crate) type BindingId = usize;
pub(crate) type ScopeId = usize;

const TYPING_MODULES: [&str; 2] = ["typing", "typing_extensions"];
const ALWAYS_USED: [&str; 3] = [
    "__tracebackhide__",
    "__traceback_info__",
    "__traceback_supplement__",
];

/// Binding classes of the reference linter, by their original names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[allow(clippy::enum_variant_names)]
pub(crate) enum Class {
    Builtin,
    Plain,
    Importation,
    Submodule,
    ImportFrom,
    Star,
    Future,
    Argument,
    Assignment,
    NamedExpr,
    Annotation,
    FunctionDef,
    ClassDef,
    Export,
}

impl Class {
    fn is_importation(self) -> bool {
        matches!(
            self,
            Class::Importation | Class::Submodule | Class::ImportFrom | Class::Star | Class::Future
        )
    }

    fn is_definition(self) -> bool {
        self.is_importation()
            || matches!(self, Class::Builtin | Class::FunctionDef | Class::ClassDef)
    }

    fn is_assignment(self) -> bool {
        matches!(self, Class::Assignment | Class::NamedExpr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Used {
    No,
    /// Marked used without a location (annotation-only names, `__all__`).
    Yes,
    At(ScopeId, NodeId),
}

impl Used {
    fn is_used(self) -> bool {
        self != Used::No
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Binding {
    pub name: String,
    pub class: Class,
    pub decl: BindingKind,
    pub source: Option<NodeId>,
    pub used: Used,
    full_name: String,
    module: String,
    real_name: String,
    redefined: Vec<NodeId>,
    export_names: Vec<String>,
}

impl Binding {
    fn new(name: &str, class: Class, decl: BindingKind, source: Option<NodeId>) -> Self {
        Binding {
            name: name.to_string(),
            class,
            decl,
            source,
            used: Used::No,
            full_name: name.to_string(),
            module: String::new(),
            real_name: name.to_string(),
            redefined: Vec::new(),
            export_names: Vec::new(),
        }
    }

    fn has_alias(&self) -> bool {
        self.full_name.rsplit('.').next() != Some(self.name.as_str())
    }

    /// The text the reference linter prints for an import binding.
    fn display(&self) -> String {
        match self.class {
            Class::Submodule => self.full_name.clone(),
            Class::ImportFrom | Class::Future => {
                if self.real_name != self.name {
                    format!("{} as {}", self.full_name, self.name)
                } else {
                    self.full_name.clone()
                }
            }
            Class::Star => {
                if self.full_name.ends_with('.') {
                    format!("from {} import *", self.full_name)
                } else {
                    self.name.clone()
                }
            }
            _ => {
                if self.has_alias() {
                    format!("{} as {}", self.full_name, self.name)
                } else {
                    self.full_name.clone()
                }
            }
        }
    }

    fn redefines(&self, other: &Binding) -> bool {
        let plain = other.class.is_definition() && self.name == other.name;
        match self.class {
            Class::Annotation => false,
            Class::Submodule if other.class.is_importation() => self.full_name == other.full_name,
            c if c.is_importation() => {
                if other.class == Class::Submodule {
                    self.full_name == other.full_name
                } else {
                    plain
                }
            }
            _ => plain,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Scope {
    pub kind: ScopeKind,
    pub parent: Option<ScopeId>,
    pub map: IndexMap<String, BindingId>,
    import_starred: bool,
    uses_locals: bool,
    globals: HashSet<String>,
    annotations_future: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ann {
    None,
    Str,
    Bare,
}

#[derive(Clone, Debug)]
enum Deferred {
    Function(NodeId),
    StringAnnotation {
        text: String,
        node: NodeId,
        anchor: NodeId,
    },
    Annotation {
        annotation: NodeId,
        node: NodeId,
    },
    UnusedAssignments,
}

#[derive(Clone, Debug)]
pub(crate) struct Message {
    pub kind: LintCheckKind,
    pub name: String,
    pub loc: Pos,
    pub related: Option<u32>,
    /// Present for `UndefinedLocal`: whether the shadowed name is a builtin.
    pub builtin: bool,
}

pub(crate) struct Checker<'a> {
    ast: &'a Ast,
    extra: Vec<Node>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<u32>,
    node_depth: u32,
    pub bindings: Vec<Binding>,
    pub scopes: Vec<Scope>,
    stack: Vec<ScopeId>,
    dead: Vec<ScopeId>,
    deferred: Vec<(Deferred, Vec<ScopeId>)>,
    deferred_assignments: Vec<(Deferred, Vec<ScopeId>)>,
    in_deferred: bool,
    except_handlers: Vec<Vec<Option<String>>>,
    ann: Ann,
    in_fstring: bool,
    pub messages: Vec<Message>,
}

impl<'a> Checker<'a> {
    pub fn run(ast: &'a Ast) -> Self {
        let mut c = Checker {
            ast,
            extra: Vec::new(),
            parent: vec![None; ast.nodes.len()],
            depth: vec![0; ast.nodes.len()],
            node_depth: 0,
            bindings: Vec::new(),
            scopes: Vec::new(),
            stack: Vec::new(),
            dead: Vec::new(),
            deferred: Vec::new(),
            deferred_assignments: Vec::new(),
            in_deferred: false,
            except_handlers: vec![Vec::new()],
            ann: Ann::None,
            in_fstring: false,
            messages: Vec::new(),
        };
        c.push_scope(ScopeKind::Module);
        let module = c.stack[0];
        for name in BUILTINS {
            let b = c.new_binding(Binding::new(
                name,
                Class::Builtin,
                BindingKind::Assignment,
                None,
            ));
            c.scopes[module].map.insert(name.to_string(), b);
        }
        c.handle_children(ast.root);
        c.in_deferred = true;
        let mut i = 0;
        while i < c.deferred.len() {
            let (d, stack) = c.deferred[i].clone();
            c.stack = stack;
            c.run_deferred(d);
            i += 1;
        }
        let assignments = std::mem::take(&mut c.deferred_assignments);
        for (d, stack) in assignments {
            c.stack = stack;
            c.run_deferred(d);
        }
        c.stack.truncate(1);
        c.pop_scope();
        c.check_dead_scopes();
        c
    }

    // ---- node access ----

    fn node(&self, id: NodeId) -> &Node {
        let n = self.ast.nodes.len();
        if id.index() < n {
            &self.ast.nodes[id.index()]
        } else {
            &self.extra[id.index() - n]
        }
    }

    fn kind(&self, id: NodeId) -> &NodeKind {
        &self.node(id).kind
    }

    fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.parent.get(id.index()).copied().flatten()
    }

    /// First ancestor that is not a name, attribute, subscript, starred
    /// expression or display.
    fn get_parent(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = id;
        loop {
            cur = self.parent_of(cur)?;
            if !self.kind(cur).has_elts_or_ctx() {
                return Some(cur);
            }
        }
    }

    fn common_ancestor(&self, mut l: NodeId, mut r: NodeId, stop: NodeId) -> Option<NodeId> {
        loop {
            if l == stop || r == stop {
                return None;
            }
            let (pl, pr) = (self.parent_of(l)?, self.parent_of(r)?);
            if l == r {
                return Some(l);
            }
            let (dl, dr) = (self.depth[l.index()], self.depth[r.index()]);
            if dl > dr {
                l = pl;
            } else if dl < dr {
                r = pr;
            } else {
                l = pl;
                r = pr;
            }
        }
    }

    fn descendant_of(&self, node: NodeId, ancestors: &[NodeId], stop: NodeId) -> bool {
        ancestors
            .iter()
            .any(|&a| self.common_ancestor(node, a, stop).is_some())
    }

    /// True when the two nodes sit on different branches of an `if` or `try`.
    fn different_forks(&self, l: NodeId, r: NodeId) -> bool {
        let Some(anc) = self.common_ancestor(l, r, self.ast.root) else {
            return false;
        };
        let parts: Vec<Vec<NodeId>> = match self.kind(anc) {
            NodeKind::If { body, .. } => vec![body.clone()],
            NodeKind::Try {
                body,
                handlers,
                orelse,
                ..
            } => {
                let mut v = vec![body.iter().chain(orelse).copied().collect()];
                v.extend(handlers.iter().map(|h| vec![*h]));
                v
            }
            _ => return false,
        };
        parts
            .iter()
            .any(|items| self.descendant_of(l, items, anc) ^ self.descendant_of(r, items, anc))
    }

    fn scope_node(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = id;
        loop {
            if cur == self.ast.root {
                return None;
            }
            cur = self.get_parent(cur)?;
            if matches!(
                self.kind(cur),
                NodeKind::Module { .. }
                    | NodeKind::ClassDef { .. }
                    | NodeKind::FunctionDef { .. }
                    | NodeKind::Lambda { .. }
                    | NodeKind::ListComp { .. }
                    | NodeKind::SetComp { .. }
                    | NodeKind::GeneratorExp { .. }
                    | NodeKind::DictComp { .. }
            ) {
                return Some(cur);
            }
        }
    }

    fn node_name(&self, id: NodeId) -> Option<String> {
        match self.kind(id) {
            NodeKind::Name { id, .. } => Some(id.clone()),
            NodeKind::ExceptHandler { name, .. } => name.clone(),
            _ => None,
        }
    }

    // ---- scopes and bindings ----

    fn cur(&self) -> ScopeId {
        *self.stack.last().expect("scope stack is never empty")
    }

    fn cur_kind(&self) -> ScopeKind {
        self.scopes[self.cur()].kind
    }

    fn push_scope(&mut self, kind: ScopeKind) {
        let parent = self.stack.last().copied();
        let globals = if matches!(kind, ScopeKind::Function | ScopeKind::Lambda) {
            ALWAYS_USED.iter().map(|s| s.to_string()).collect()
        } else {
            HashSet::new()
        };
        self.scopes.push(Scope {
            kind,
            parent,
            map: IndexMap::new(),
            import_starred: false,
            uses_locals: false,
            globals,
            annotations_future: false,
        });
        self.stack.push(self.scopes.len() - 1);
    }

    fn pop_scope(&mut self) {
        let s = self.stack.pop().expect("scope stack is never empty");
        self.dead.push(s);
    }

    fn is_function_scope(&self, s: ScopeId) -> bool {
        matches!(self.scopes[s].kind, ScopeKind::Function | ScopeKind::Lambda)
    }

    fn new_binding(&mut self, b: Binding) -> BindingId {
        self.bindings.push(b);
        self.bindings.len() - 1
    }

    fn report(&mut self, kind: LintCheckKind, node: NodeId, name: &str, related: Option<NodeId>) {
        let loc = self.node(node).loc;
        let related = related.map(|r| self.node(r).loc.line);
        self.messages.push(Message {
            kind,
            name: name.to_string(),
            loc,
            related,
            builtin: false,
        });
    }

    fn annotations_future(&self) -> bool {
        let s = self.stack[0];
        self.scopes[s].kind == ScopeKind::Module && self.scopes[s].annotations_future
    }

    fn in_postponed_annotation(&self) -> bool {
        self.ann == Ann::Str || self.annotations_future()
    }

    fn add_binding(&mut self, node: NodeId, value: Binding) {
        let name = value.name.clone();
        let mut scope = self.stack[0];
        for &s in self.stack.iter().rev() {
            scope = s;
            if self.scopes[s].map.contains_key(&name) {
                break;
            }
        }
        let existing = self.scopes[scope].map.get(&name).copied();
        let cur = self.cur();
        let mut value = value;

        if let Some(ex) = existing {
            let ex_b = &self.bindings[ex];
            let ex_source = ex_b.source;
            if ex_b.class != Class::Builtin
                && !ex_source.is_some_and(|s| self.different_forks(node, s))
            {
                let parent_stmt = value.source.and_then(|s| self.get_parent(s));
                let in_for =
                    parent_stmt.is_some_and(|p| matches!(self.kind(p), NodeKind::For { .. }));
                if ex_b.class.is_importation() && in_for {
                    // Shadowed by a loop variable: a check outside this set.
                } else if scope == cur {
                    if !ex_b.used.is_used()
                        && value.redefines(ex_b)
                        && (name != "_" || ex_b.class.is_importation())
                        && !self.is_typing_overload(ex)
                    {
                        self.report(LintCheckKind::RedefinedWhileUnused, node, &name, ex_source);
                    }
                } else if ex_b.class.is_importation() && value.redefines(ex_b) {
                    self.bindings[ex].redefined.push(node);
                }
            }
        }

        if let Some(&b) = self.scopes[cur].map.get(&name) {
            value.used = self.bindings[b].used;
        }

        let is_annotation = value.class == Class::Annotation;
        if !self.scopes[cur].map.contains_key(&name) || !is_annotation {
            let mut pos = self.stack.len() - 1;
            if value.class == Class::NamedExpr {
                while self.scopes[self.stack[pos]].kind == ScopeKind::Comprehension {
                    pos -= 1;
                }
            }
            let target = self.stack[pos];
            let id = self.new_binding(value);
            self.scopes[target].map.insert(name, id);
        }
    }

    fn is_typing_overload(&self, b: BindingId) -> bool {
        let Some(src) = self.bindings[b].source else {
            return false;
        };
        match self.kind(src) {
            NodeKind::FunctionDef { decorators, .. } => decorators
                .iter()
                .any(|&d| self.is_typing(d, |n| n == "overload")),
            _ => false,
        }
    }

    fn lookup(&self, name: &str) -> Option<BindingId> {
        self.stack
            .iter()
            .rev()
            .find_map(|&s| self.scopes[s].map.get(name).copied())
    }

    fn is_typing(&self, node: NodeId, pred: impl Fn(&str) -> bool) -> bool {
        match self.kind(node) {
            NodeKind::Name { id, .. } => self.lookup(id).is_some_and(|b| {
                let b = &self.bindings[b];
                matches!(b.class, Class::ImportFrom | Class::Future)
                    && TYPING_MODULES.contains(&b.module.as_str())
                    && pred(&b.real_name)
            }),
            NodeKind::Attribute { value, attr, .. } => match self.kind(*value) {
                NodeKind::Name { id, .. } => {
                    self.lookup(id).is_some_and(|b| {
                        let b = &self.bindings[b];
                        b.class.is_importation() && TYPING_MODULES.contains(&b.full_name.as_str())
                    }) && pred(attr)
                }
                _ => false,
            },
            _ => false,
        }
    }

    // ---- traversal ----

    fn set_parent(&mut self, id: NodeId, parent: NodeId) {
        let i = id.index();
        if i >= self.parent.len() {
            self.parent.resize(i + 1, None);
            self.depth.resize(i + 1, 0);
        }
        self.parent[i] = Some(parent);
        self.depth[i] = self.node_depth;
    }

    fn handle_opt(&mut self, id: Option<NodeId>, parent: NodeId) {
        if let Some(id) = id {
            self.handle_node(id, parent);
        }
    }

    fn handle_node(&mut self, id: NodeId, parent: NodeId) {
        self.node_depth += 1;
        self.set_parent(id, parent);
        self.dispatch(id);
        self.node_depth -= 1;
    }

    fn handle_children(&mut self, id: NodeId) {
        for c in self.kind(id).children() {
            self.handle_node(c, id);
        }
    }

    fn handle_all(&mut self, ids: &[NodeId], parent: NodeId) {
        for &c in ids {
            self.handle_node(c, parent);
        }
    }

    fn with_ann<R>(&mut self, ann: Ann, f: impl FnOnce(&mut Self) -> R) -> R {
        let saved = std::mem::replace(&mut self.ann, ann);
        let r = f(self);
        self.ann = saved;
        r
    }

    fn defer(&mut self, d: Deferred) {
        self.deferred.push((d, self.stack.clone()));
    }

    fn run_deferred(&mut self, d: Deferred) {
        match d {
            Deferred::Function(node) => self.run_function(node),
            Deferred::StringAnnotation { text, node, anchor } => {
                self.handle_string_annotation(&text, node, anchor)
            }
            Deferred::Annotation { annotation, node } => {
                self.with_ann(Ann::Bare, |c| c.handle_node(annotation, node))
            }
            Deferred::UnusedAssignments => self.check_unused_assignments(),
        }
    }

    fn dispatch(&mut self, id: NodeId) {
        use NodeKind as K;
        let kind = self.kind(id).clone();
        match kind {
            K::FunctionDef {
                name, decorators, ..
            } => {
                self.handle_all(&decorators, id);
                self.lambda(id);
                let b = Binding::new(
                    &name,
                    Class::FunctionDef,
                    BindingKind::FunctionDef,
                    Some(id),
                );
                self.add_binding(id, b);
            }
            K::ClassDef {
                name,
                bases,
                keywords,
                body,
                decorators,
            } => {
                self.handle_all(&decorators, id);
                self.handle_all(&bases, id);
                self.handle_all(&keywords, id);
                self.push_scope(ScopeKind::Class);
                self.handle_all(&body, id);
                self.pop_scope();
                let b = Binding::new(&name, Class::ClassDef, BindingKind::ClassDef, Some(id));
                self.add_binding(id, b);
            }
            K::Return { value } | K::Yield { value } => {
                if !matches!(self.cur_kind(), ScopeKind::Class | ScopeKind::Module) {
                    self.handle_opt(value, id);
                }
            }
            K::Await { value } | K::YieldFrom { value } => {
                if !matches!(self.cur_kind(), ScopeKind::Class | ScopeKind::Module) {
                    self.handle_node(value, id);
                }
            }
            K::AugAssign { target, value, .. } => {
                self.handle_node_load(target);
                self.handle_node(value, id);
                self.handle_node(target, id);
            }
            K::AnnAssign {
                target,
                annotation,
                value,
                ..
            } => {
                self.handle_annotation(Some(annotation), id);
                if let Some(v) = value {
                    if self.is_typing(annotation, |n| n == "TypeAlias") {
                        self.handle_annotation(Some(v), id);
                    } else {
                        self.handle_node(v, id);
                    }
                }
                self.handle_node(target, id);
            }
            K::Import { names } => self.import(id, &names),
            K::ImportFrom {
                module,
                names,
                level,
            } => self.import_from(id, module.as_deref(), &names, level),
            K::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let mut names = Vec::new();
                for &h in &handlers {
                    if let K::ExceptHandler { typ: Some(t), .. } = self.kind(h) {
                        match self.kind(*t) {
                            K::Tuple { elts, .. } => {
                                names.extend(elts.iter().map(|&e| self.node_name(e)))
                            }
                            _ => names.push(self.node_name(*t)),
                        }
                    }
                }
                self.except_handlers.push(names);
                self.handle_all(&body, id);
                self.except_handlers.pop();
                self.handle_all(&handlers, id);
                self.handle_all(&orelse, id);
                self.handle_all(&finalbody, id);
            }
            K::ExceptHandler { name, .. } => self.except_handler(id, name),
            K::Global { names } | K::Nonlocal { names } => self.global(id, &names),
            K::Lambda { .. } => self.lambda(id),
            K::ListComp { .. }
            | K::SetComp { .. }
            | K::DictComp { .. }
            | K::GeneratorExp { .. } => {
                self.push_scope(ScopeKind::Comprehension);
                self.handle_children(id);
                self.pop_scope();
            }
            K::Name { id: name, ctx } => match ctx {
                ExprContext::Load => {
                    self.handle_node_load(id);
                    if name == "locals"
                        && self.is_function_scope(self.cur())
                        && self
                            .parent_of(id)
                            .is_some_and(|p| matches!(self.kind(p), K::Call { .. }))
                    {
                        let cur = self.cur();
                        self.scopes[cur].uses_locals = true;
                    }
                }
                ExprContext::Store => self.handle_node_store(id),
                ExprContext::Del => self.handle_node_delete(id),
            },
            K::Constant {
                value: Constant::Str(s),
            } => {
                if self.ann != Ann::None {
                    let d = Deferred::StringAnnotation {
                        text: s,
                        node: id,
                        anchor: id,
                    };
                    if self.in_deferred {
                        self.run_deferred(d);
                    } else {
                        self.defer(d);
                    }
                }
            }
            K::JoinedStr { values } => {
                if !self.in_fstring
                    && !values
                        .iter()
                        .any(|&v| matches!(self.kind(v), K::FormattedValue { .. }))
                {
                    self.report(LintCheckKind::FStringMissingPlaceholders, id, "", None);
                }
                let saved = std::mem::replace(&mut self.in_fstring, true);
                self.handle_children(id);
                self.in_fstring = saved;
            }
            K::Subscript { value, slice, .. } => self.subscript(id, value, slice),
            K::Call {
                func,
                args,
                keywords,
            } => self.call(id, func, &args, &keywords),
            K::Arguments {
                posonlyargs,
                args,
                vararg,
                kwonlyargs,
                kwarg,
                ..
            } => {
                self.handle_all(&posonlyargs, id);
                self.handle_all(&args, id);
                self.handle_opt(vararg, id);
                self.handle_all(&kwonlyargs, id);
                self.handle_opt(kwarg, id);
            }
            K::Arg { name, .. } => {
                let source = self.scope_node(id);
                let b = Binding::new(&name, Class::Argument, BindingKind::Parameter, source);
                self.add_binding(id, b);
            }
            K::Pass | K::Break | K::Continue => {}
            _ => self.handle_children(id),
        }
    }

    fn lambda(&mut self, id: NodeId) {
        let (args_node, returns, is_lambda) = match self.kind(id) {
            NodeKind::FunctionDef { args, returns, .. } => (*args, *returns, false),
            NodeKind::Lambda { args, .. } => (*args, None, true),
            _ => return,
        };
        let NodeKind::Arguments {
            posonlyargs,
            args,
            vararg,
            kwonlyargs,
            kw_defaults,
            kwarg,
            defaults,
        } = self.kind(args_node).clone()
        else {
            return;
        };
        let mut annotations = Vec::new();
        for &a in posonlyargs.iter().chain(&args).chain(&kwonlyargs) {
            annotations.push(self.arg_annotation(a));
        }
        if !is_lambda {
            for a in vararg.iter().chain(kwarg.iter()) {
                annotations.push(self.arg_annotation(*a));
            }
            annotations.push(returns);
        }
        for ann in annotations {
            self.handle_annotation(ann, id);
        }
        for d in defaults
            .iter()
            .copied()
            .chain(kw_defaults.iter().flatten().copied())
        {
            self.handle_node(d, id);
        }
        self.defer(Deferred::Function(id));
    }

    fn arg_annotation(&self, arg: NodeId) -> Option<NodeId> {
        match self.kind(arg) {
            NodeKind::Arg { annotation, .. } => *annotation,
            _ => None,
        }
    }

    fn run_function(&mut self, id: NodeId) {
        let (args, body): (NodeId, Vec<NodeId>) = match self.kind(id) {
            NodeKind::FunctionDef { args, body, .. } => (*args, body.clone()),
            NodeKind::Lambda { args, body } => (*args, vec![*body]),
            _ => return,
        };
        let kind = if matches!(self.kind(id), NodeKind::Lambda { .. }) {
            ScopeKind::Lambda
        } else {
            ScopeKind::Function
        };
        self.push_scope(kind);
        self.handle_node(args, id);
        self.handle_all(&body, id);
        self.deferred_assignments
            .push((Deferred::UnusedAssignments, self.stack.clone()));
        self.pop_scope();
    }

    fn check_unused_assignments(&mut self) {
        let s = self.cur();
        if self.scopes[s].uses_locals {
            return;
        }
        let mut unused = Vec::new();
        for (name, &b) in &self.scopes[s].map {
            let binding = &self.bindings[b];
            if !binding.used.is_used()
                && name != "_"
                && !self.scopes[s].globals.contains(name)
                && binding.class.is_assignment()
            {
                if let Some(src) = binding.source {
                    unused.push((name.clone(), src));
                }
            }
        }
        for (name, src) in unused {
            self.report(LintCheckKind::UnusedVariable, src, &name, None);
        }
    }

    fn handle_annotation(&mut self, annotation: Option<NodeId>, node: NodeId) {
        let Some(ann) = annotation else {
            return;
        };
        self.with_ann(Ann::Bare, |c| {
            if let NodeKind::Constant {
                value: Constant::Str(s),
            } = c.kind(ann)
            {
                let d = Deferred::StringAnnotation {
                    text: s.clone(),
                    node,
                    anchor: ann,
                };
                c.defer(d);
            } else if c.annotations_future() {
                c.defer(Deferred::Annotation {
                    annotation: ann,
                    node,
                });
            } else {
                c.handle_node(ann, node);
            }
        });
    }

    fn handle_string_annotation(&mut self, text: &str, node: NodeId, anchor: NodeId) {
        let base = (self.ast.nodes.len() + self.extra.len()) as u32;
        let a = self.node(anchor);
        let (range, loc) = (a.range, a.loc);
        let Some((nodes, expr)) = parse_annotation_string(text, base, range, loc) else {
            // A malformed forward reference is a separate check.
            return;
        };
        self.extra.extend(nodes);
        self.with_ann(Ann::Str, |c| c.handle_node(expr, node));
    }

    fn import(&mut self, id: NodeId, names: &[NodeId]) {
        for &alias in names {
            let NodeKind::Alias { name, asname } = self.kind(alias).clone() else {
                continue;
            };
            let b = if name.contains('.') && asname.is_none() {
                let package = name.split('.').next().unwrap_or_default();
                let mut b = Binding::new(package, Class::Submodule, BindingKind::Import, Some(id));
                b.full_name = name;
                b
            } else {
                let mut b = Binding::new(
                    asname.as_deref().unwrap_or(&name),
                    Class::Importation,
                    BindingKind::Import,
                    Some(id),
                );
                b.full_name = name;
                b
            };
            self.add_binding(id, b);
        }
    }

    fn import_from(&mut self, id: NodeId, module: Option<&str>, names: &[NodeId], level: u32) {
        let is_future = module == Some("__future__");
        let modname = format!("{}{}", ".".repeat(level as usize), module.unwrap_or(""));
        for &alias in names {
            let NodeKind::Alias { name, asname } = self.kind(alias).clone() else {
                continue;
            };
            let bound = asname.clone().unwrap_or_else(|| name.clone());
            let b = if is_future {
                let mut b = self.from_binding(&bound, id, "__future__", &name, Class::Future);
                b.used = Used::At(self.cur(), id);
                if name == "annotations" && self.cur_kind() == ScopeKind::Module {
                    let cur = self.cur();
                    self.scopes[cur].annotations_future = true;
                }
                b
            } else if name == "*" {
                if self.cur_kind() != ScopeKind::Module {
                    continue;
                }
                let cur = self.cur();
                self.scopes[cur].import_starred = true;
                let mut b = Binding::new(
                    &format!("{modname}.*"),
                    Class::Star,
                    BindingKind::StarImport,
                    Some(id),
                );
                b.full_name = modname.clone();
                b
            } else {
                self.from_binding(&bound, id, &modname, &name, Class::ImportFrom)
            };
            self.add_binding(id, b);
        }
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_binding(
        &self,
        name: &str,
        id: NodeId,
        module: &str,
        real: &str,
        class: Class,
    ) -> Binding {
        let mut b = Binding::new(name, class, BindingKind::ImportFrom, Some(id));
        b.full_name = if module.ends_with('.') {
            format!("{module}{real}")
        } else {
            format!("{module}.{real}")
        };
        b.module = module.to_string();
        b.real_name = real.to_string();
        b
    }

    fn except_handler(&mut self, id: NodeId, name: Option<String>) {
        let Some(name) = name else {
            self.handle_children(id);
            return;
        };
        let cur = self.cur();
        if self.scopes[cur].map.contains_key(&name) {
            self.handle_node_store(id);
        }
        let prev = self.scopes[cur].map.shift_remove(&name);
        self.handle_node_store(id);
        self.handle_children(id);
        let cur = self.cur();
        if let Some(b) = self.scopes[cur].map.shift_remove(&name) {
            if !self.bindings[b].used.is_used() {
                self.report(LintCheckKind::UnusedVariable, id, &name, None);
            }
        }
        if let Some(prev) = prev {
            self.scopes[cur].map.insert(name, prev);
        }
    }

    fn global(&mut self, id: NodeId, names: &[String]) {
        let global_scope = self.stack[0];
        if self.cur() == global_scope {
            return;
        }
        let decl = match self.kind(id) {
            NodeKind::Nonlocal { .. } => BindingKind::NonlocalDecl,
            _ => BindingKind::GlobalDecl,
        };
        for name in names {
            let mut b = Binding::new(name, Class::Assignment, decl, Some(id));
            b.used = Used::At(global_scope, id);
            let b = self.new_binding(b);
            self.messages
                .retain(|m| !(m.kind == LintCheckKind::UndefinedName && &m.name == name));
            self.scopes[global_scope]
                .map
                .entry(name.clone())
                .or_insert(b);
            for i in 1..self.stack.len() {
                let s = self.stack[i];
                self.scopes[s].map.insert(name.clone(), b);
            }
        }
    }

    fn is_name_or_attr(&self, id: NodeId, name: &str) -> bool {
        match self.kind(id) {
            NodeKind::Name { id, .. } => id == name,
            NodeKind::Attribute { attr, .. } => attr == name,
            _ => false,
        }
    }

    fn subscript(&mut self, id: NodeId, value: NodeId, slice: NodeId) {
        if self.is_name_or_attr(value, "Literal") {
            self.with_ann(Ann::None, |c| c.handle_children(id));
        } else if self.is_name_or_attr(value, "Annotated") {
            self.handle_node(value, id);
            let elts = match self.kind(slice) {
                NodeKind::Index { value } => match self.kind(*value) {
                    NodeKind::Tuple { elts, .. } => Some(elts.clone()),
                    _ => None,
                },
                _ => None,
            };
            match elts {
                Some(elts) if elts.len() >= 2 => {
                    self.handle_node(elts[0], id);
                    self.with_ann(Ann::None, |c| c.handle_all(&elts[1..], id));
                }
                _ => self.handle_node(slice, id),
            }
        } else if self.is_typing(value, |_| true) {
            self.with_ann(Ann::Bare, |c| c.handle_children(id));
        } else {
            self.handle_children(id);
        }
    }

    /// Children of `id` except the named fields, for the few node kinds the
    /// typing special cases need.
    fn handle_children_except(&mut self, id: NodeId, omit: &[&str]) {
        let kids: Vec<NodeId> = match self.kind(id) {
            NodeKind::Call {
                func,
                args,
                keywords,
            } => {
                let mut v = vec![*func];
                if !omit.contains(&"args") {
                    v.extend(args);
                }
                if !omit.contains(&"keywords") {
                    v.extend(keywords);
                }
                v
            }
            NodeKind::Keyword { value, .. } if !omit.contains(&"value") => vec![*value],
            NodeKind::Keyword { .. } => vec![],
            NodeKind::Dict { keys, values } => {
                let mut v: Vec<NodeId> = keys.iter().flatten().copied().collect();
                if !omit.contains(&"values") {
                    v.extend(values);
                }
                v
            }
            NodeKind::Tuple { .. } | NodeKind::List { .. } if omit.contains(&"elts") => vec![],
            k => k.children(),
        };
        self.handle_all(&kids, id);
    }

    fn call(&mut self, id: NodeId, func: NodeId, args: &[NodeId], keywords: &[NodeId]) {
        let mut omit: Vec<&str> = Vec::new();
        let mut annotated: Vec<NodeId> = Vec::new();
        let mut not_annotated: Vec<(NodeId, Vec<&str>)> = Vec::new();
        let kw = |c: &Self, k: NodeId| match c.kind(k) {
            NodeKind::Keyword { arg, value } => (arg.clone(), *value),
            _ => unreachable!("call keywords are keyword nodes"),
        };

        if self.is_typing(func, |n| n == "cast") && !args.is_empty() {
            self.with_ann(Ann::Bare, |c| c.handle_node(args[0], id));
        } else if self.is_typing(func, |n| n == "TypeVar") {
            omit.extend(["args", "keywords"]);
            annotated.extend(args.iter().skip(1));
            for &k in keywords {
                let (arg, value) = kw(self, k);
                let bound = arg.as_deref() == Some("bound");
                if bound {
                    annotated.push(value);
                }
                not_annotated.push((k, if bound { vec!["value"] } else { vec![] }));
            }
        } else if self.is_typing(func, |n| n == "TypedDict") {
            if args.len() > 1 {
                if let NodeKind::Dict { values, .. } = self.kind(args[1]) {
                    omit.push("args");
                    annotated.extend(values);
                    for (i, &a) in args.iter().enumerate() {
                        not_annotated.push((a, if i == 1 { vec!["values"] } else { vec![] }));
                    }
                }
            }
            omit.push("keywords");
            for &k in keywords {
                annotated.push(kw(self, k).1);
                not_annotated.push((k, vec!["value"]));
            }
        } else if self.is_typing(func, |n| n == "NamedTuple") {
            if args.len() > 1 {
                let fields = match self.kind(args[1]) {
                    NodeKind::Tuple { elts, .. } | NodeKind::List { elts, .. } => {
                        Some(elts.clone())
                    }
                    _ => None,
                };
                let pairs: Option<Vec<Vec<NodeId>>> = fields.and_then(|elts| {
                    elts.iter()
                        .map(|&e| match self.kind(e) {
                            NodeKind::Tuple { elts, .. } | NodeKind::List { elts, .. }
                                if elts.len() == 2 =>
                            {
                                Some(elts.clone())
                            }
                            _ => None,
                        })
                        .collect()
                });
                if let Some(pairs) = pairs {
                    omit.push("args");
                    annotated.extend(pairs.iter().map(|p| p[1]));
                    not_annotated.extend(pairs.iter().map(|p| (p[0], vec![])));
                    for (i, &a) in args.iter().enumerate() {
                        not_annotated.push((a, if i == 1 { vec!["elts"] } else { vec![] }));
                    }
                    if let NodeKind::Tuple { elts, .. } | NodeKind::List { elts, .. } =
                        self.kind(args[1]).clone()
                    {
                        not_annotated.extend(elts.into_iter().map(|e| (e, vec!["elts"])));
                    }
                }
            }
            omit.push("keywords");
            for &k in keywords {
                annotated.push(kw(self, k).1);
                not_annotated.push((k, vec!["value"]));
            }
        }

        if omit.is_empty() {
            self.handle_children(id);
            return;
        }
        self.with_ann(Ann::None, |c| {
            for (node, om) in &not_annotated {
                c.handle_children_except(*node, om);
            }
            c.handle_children_except(id, &omit);
        });
        self.with_ann(Ann::Bare, |c| c.handle_all(&annotated, id));
    }

    fn handle_node_load(&mut self, id: NodeId) {
        let Some(name) = self.node_name(id) else {
            return;
        };
        let cur = self.cur();
        let mut in_generators: Option<bool> = None;
        let mut import_starred = false;
        for i in (0..self.stack.len()).rev() {
            let s = self.stack[i];
            if self.scopes[s].kind == ScopeKind::Class {
                if name == "__class__" {
                    return;
                } else if in_generators == Some(false) {
                    continue;
                }
            }
            if let Some(&b) = self.scopes[s].map.get(&name) {
                if self.bindings[b].class == Class::Annotation && !self.in_postponed_annotation() {
                    self.bindings[b].used = Used::Yes;
                    continue;
                }
                self.bindings[b].used = Used::At(cur, id);
                let binding = &self.bindings[b];
                if binding.class.is_importation() && binding.has_alias() {
                    if let Some(&full) = self.scopes[s].map.get(&binding.full_name) {
                        self.bindings[full].used = Used::At(cur, id);
                    }
                }
                return;
            }
            import_starred = import_starred || self.scopes[s].import_starred;
            if in_generators != Some(false) {
                in_generators = Some(self.scopes[s].kind == ScopeKind::Comprehension);
            }
        }

        if import_starred {
            for i in (0..self.stack.len()).rev() {
                let s = self.stack[i];
                let stars: Vec<BindingId> = self.scopes[s]
                    .map
                    .values()
                    .copied()
                    .filter(|&b| self.bindings[b].class == Class::Star)
                    .collect();
                for b in stars {
                    self.bindings[b].used = Used::At(cur, id);
                }
            }
            return;
        }
        if CLASS_SCOPE_MAGIC.contains(&name.as_str()) && self.cur_kind() == ScopeKind::Class {
            return;
        }
        let protected = self
            .except_handlers
            .last()
            .is_some_and(|h| h.iter().any(|n| n.as_deref() == Some("NameError")));
        if !protected {
            self.report(LintCheckKind::UndefinedName, id, &name, None);
        }
    }

    fn is_literal_tuple_unpacking(&self, id: NodeId) -> bool {
        match self.kind(id) {
            NodeKind::Assign { targets, value } => {
                targets.iter().chain(std::iter::once(value)).all(|&t| {
                    matches!(
                        self.kind(t),
                        NodeKind::Tuple { .. } | NodeKind::List { .. } | NodeKind::Set { .. }
                    )
                })
            }
            _ => false,
        }
    }

    fn handle_node_store(&mut self, id: NodeId) {
        let Some(name) = self.node_name(id) else {
            return;
        };
        let cur = self.cur();
        if self.is_function_scope(cur) && !self.scopes[cur].map.contains_key(&name) {
            for i in 0..self.stack.len() - 1 {
                let s = self.stack[i];
                if !(self.is_function_scope(s) || self.scopes[s].kind == ScopeKind::Module) {
                    continue;
                }
                let Some(&b) = self.scopes[s].map.get(&name) else {
                    continue;
                };
                if let Used::At(us, use_node) = self.bindings[b].used {
                    if us == cur && !self.scopes[cur].globals.contains(&name) {
                        let source = self.bindings[b].source;
                        let loc = self.node(use_node).loc;
                        let related = source.map(|s| self.node(s).loc.line);
                        self.messages.push(Message {
                            kind: LintCheckKind::UndefinedLocal,
                            name: name.clone(),
                            loc,
                            related,
                            builtin: source.is_none(),
                        });
                        break;
                    }
                }
            }
        }

        let parent_stmt = self.get_parent(id);
        let direct = self.parent_of(id);
        let pk = parent_stmt.map(|p| self.kind(p));
        let (class, decl) = match pk {
            Some(NodeKind::AnnAssign { value: None, .. }) => {
                (Class::Annotation, BindingKind::Assignment)
            }
            Some(NodeKind::For { .. }) => (Class::Plain, BindingKind::ForTarget),
            Some(NodeKind::Comprehension { .. }) => {
                (Class::Plain, BindingKind::ComprehensionTarget)
            }
            _ if parent_stmt != direct
                && !parent_stmt.is_some_and(|p| self.is_literal_tuple_unpacking(p)) =>
            {
                let decl = match pk {
                    Some(NodeKind::WithItem { .. }) => BindingKind::WithTarget,
                    _ => BindingKind::Assignment,
                };
                (Class::Plain, decl)
            }
            _ if name == "__all__"
                && self.cur_kind() == ScopeKind::Module
                && direct.is_some_and(|d| {
                    matches!(
                        self.kind(d),
                        NodeKind::Assign { .. }
                            | NodeKind::AugAssign { .. }
                            | NodeKind::AnnAssign { .. }
                    )
                }) =>
            {
                (Class::Export, BindingKind::Assignment)
            }
            Some(NodeKind::NamedExpr { .. }) => (Class::NamedExpr, BindingKind::Assignment),
            Some(NodeKind::AugAssign { .. }) => {
                (Class::Assignment, BindingKind::AugmentedAssignment)
            }
            Some(NodeKind::WithItem { .. }) => (Class::Assignment, BindingKind::WithTarget),
            Some(NodeKind::Try { .. })
                if matches!(self.kind(id), NodeKind::ExceptHandler { .. }) =>
            {
                (Class::Assignment, BindingKind::ExceptHandler)
            }
            _ => (Class::Assignment, BindingKind::Assignment),
        };
        let mut b = Binding::new(&name, class, decl, Some(id));
        if class == Class::Export {
            let stmt = direct.expect("export binding has a parent statement");
            b.source = Some(stmt);
            b.export_names = self.export_names(stmt);
        }
        self.add_binding(id, b);
    }

    fn export_names(&self, stmt: NodeId) -> Vec<String> {
        let cur = self.cur();
        let (value, aug) = match self.kind(stmt) {
            NodeKind::Assign { value, .. } => (Some(*value), false),
            NodeKind::AugAssign { value, .. } => (Some(*value), true),
            NodeKind::AnnAssign { value, .. } => (*value, false),
            _ => (None, false),
        };
        let mut names = Vec::new();
        if aug {
            if let Some(&b) = self.scopes[cur].map.get("__all__") {
                names = self.bindings[b].export_names.clone();
            }
        }
        let Some(value) = value else {
            return names;
        };
        let add = |names: &mut Vec<String>, id: NodeId| {
            if let NodeKind::List { elts, .. } | NodeKind::Tuple { elts, .. } = self.kind(id) {
                for &e in elts {
                    if let NodeKind::Constant {
                        value: Constant::Str(s),
                    } = self.kind(e)
                    {
                        names.push(s.clone());
                    }
                }
            }
        };
        match self.kind(value) {
            NodeKind::List { .. } | NodeKind::Tuple { .. } => add(&mut names, value),
            NodeKind::BinOp { .. } => {
                let mut current = value;
                while let NodeKind::BinOp { left, right, .. } = self.kind(current) {
                    if !matches!(
                        self.kind(*right),
                        NodeKind::List { .. } | NodeKind::Tuple { .. }
                    ) {
                        break;
                    }
                    add(&mut names, *right);
                    match self.kind(*left) {
                        NodeKind::BinOp { .. } => current = *left,
                        NodeKind::List { .. } | NodeKind::Tuple { .. } => {
                            add(&mut names, *left);
                            break;
                        }
                        _ => break,
                    }
                }
            }
            _ => {}
        }
        names
    }

    fn handle_node_delete(&mut self, id: NodeId) {
        let Some(name) = self.node_name(id) else {
            return;
        };
        let mut cur = self.parent_of(id);
        while let Some(p) = cur {
            if matches!(
                self.kind(p),
                NodeKind::If { .. } | NodeKind::While { .. } | NodeKind::IfExp { .. }
            ) {
                return;
            }
            cur = self.parent_of(p);
        }
        let s = self.cur();
        if self.is_function_scope(s) && self.scopes[s].globals.contains(&name) {
            self.scopes[s].globals.remove(&name);
        } else if self.scopes[s].map.shift_remove(&name).is_none() {
            self.report(LintCheckKind::UndefinedName, id, &name, None);
        }
    }

    fn check_dead_scopes(&mut self) {
        for i in 0..self.dead.len() {
            let s = self.dead[i];
            if self.scopes[s].kind == ScopeKind::Class {
                continue;
            }
            let all = self.scopes[s]
                .map
                .get("__all__")
                .copied()
                .filter(|&b| self.bindings[b].class == Class::Export);
            let all_names: Vec<String> = all
                .map(|b| self.bindings[b].export_names.clone())
                .unwrap_or_default();
            let any_undefined = all_names
                .iter()
                .any(|n| !self.scopes[s].map.contains_key(n));
            if any_undefined && self.scopes[s].import_starred {
                let stars: Vec<BindingId> = self.scopes[s]
                    .map
                    .values()
                    .copied()
                    .filter(|&b| self.bindings[b].class == Class::Star)
                    .collect();
                for b in stars {
                    self.bindings[b].used = Used::Yes;
                }
            }
            let values: Vec<BindingId> = self.scopes[s].map.values().copied().collect();
            for b in values {
                let binding = self.bindings[b].clone();
                if !binding.class.is_importation() {
                    continue;
                }
                let used = binding.used.is_used() || all_names.contains(&binding.name);
                let source = binding.source.expect("imports have a source");
                if !used {
                    self.report(
                        LintCheckKind::UnusedImport,
                        source,
                        &binding.display(),
                        None,
                    );
                }
                for &n in &binding.redefined {
                    let in_for = self
                        .get_parent(n)
                        .is_some_and(|p| matches!(self.kind(p), NodeKind::For { .. }));
                    if in_for || used {
                        continue;
                    }
                    self.report(
                        LintCheckKind::RedefinedWhileUnused,
                        n,
                        &binding.name,
                        Some(source),
                    );
                }
            }
        }
    }
}
