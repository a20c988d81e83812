//! Expressions, variables and contexts.
//!
//! Bound variables are de Bruijn indices; free variables are names. Binders
//! carry a display hint that is ignored by equality, so `==` on [`Expr`] is
//! alpha-equivalence. Binder bodies are opened with fresh names when a named
//! view is needed (typing, the explicit-substitution machine).

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// A variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The hint given to binders introduced by `=>` sugar.
    pub fn anonymous() -> Name {
        Name::new("_")
    }

    pub fn is_anonymous(&self) -> bool {
        &*self.0 == "_"
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

/// One node of an expression tree.
#[derive(Clone, Debug)]
pub enum Node {
    Tau,
    /// de Bruijn index, 0 is the innermost enclosing binder.
    Bound(u32),
    Free(Name),
    /// `[x:dom]body`
    UnivAbs { hint: Name, dom: Expr, body: Expr },
    /// `[x!dom]body`
    ExistAbs { hint: Name, dom: Expr, body: Expr },
    /// `(fun arg)`
    Apply(Expr, Expr),
    /// `<x := witness, body : template>`; `x` is bound in `template` only.
    ProtDef { hint: Name, witness: Expr, body: Expr, template: Expr },
    ProjL(Expr),
    ProjR(Expr),
    /// `[a,b]`
    Product(Expr, Expr),
    /// `[a+b]`
    Sum(Expr, Expr),
    /// `inl{value, other}`
    InjL { value: Expr, other: Expr },
    /// `inr{other, value}`
    InjR { other: Expr, value: Expr },
    /// `case{left, right}`
    Case(Expr, Expr),
    Neg(Expr),
}

struct Inner {
    node: Node,
    /// One past the largest loose de Bruijn index (0 when locally closed).
    loose: u32,
    size: u32,
}

/// Reference-counted immutable expression. Equality is alpha-equivalence.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

/// Child position inside a node, used by paths.
pub type Step = u8;

impl Expr {
    pub fn new(node: Node) -> Expr {
        let (loose, size) = {
            let mut loose = 0u32;
            let mut size = 1u32;
            match &node {
                Node::Tau | Node::Free(_) => {}
                Node::Bound(i) => loose = i + 1,
                _ => {
                    for (i, c) in node_children(&node).into_iter().enumerate() {
                        let l = if node_binds(&node, i) { c.loose().saturating_sub(1) } else { c.loose() };
                        loose = loose.max(l);
                        size = size.saturating_add(c.size() as u32);
                    }
                }
            }
            (loose, size)
        };
        Expr(Arc::new(Inner { node, loose, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn tau() -> Expr {
        Expr::new(Node::Tau)
    }
    pub fn bound(i: u32) -> Expr {
        Expr::new(Node::Bound(i))
    }
    pub fn free(name: impl Into<Name>) -> Expr {
        Expr::new(Node::Free(name.into()))
    }
    pub fn univ(hint: Name, dom: Expr, body: Expr) -> Expr {
        Expr::new(Node::UnivAbs { hint, dom, body })
    }
    pub fn exist(hint: Name, dom: Expr, body: Expr) -> Expr {
        Expr::new(Node::ExistAbs { hint, dom, body })
    }
    pub fn apply(f: Expr, a: Expr) -> Expr {
        Expr::new(Node::Apply(f, a))
    }
    pub fn protdef(hint: Name, witness: Expr, body: Expr, template: Expr) -> Expr {
        Expr::new(Node::ProtDef { hint, witness, body, template })
    }
    pub fn proj_l(e: Expr) -> Expr {
        Expr::new(Node::ProjL(e))
    }
    pub fn proj_r(e: Expr) -> Expr {
        Expr::new(Node::ProjR(e))
    }
    pub fn product(a: Expr, b: Expr) -> Expr {
        Expr::new(Node::Product(a, b))
    }
    pub fn sum(a: Expr, b: Expr) -> Expr {
        Expr::new(Node::Sum(a, b))
    }
    pub fn inj_l(value: Expr, other: Expr) -> Expr {
        Expr::new(Node::InjL { value, other })
    }
    pub fn inj_r(other: Expr, value: Expr) -> Expr {
        Expr::new(Node::InjR { other, value })
    }
    pub fn case(l: Expr, r: Expr) -> Expr {
        Expr::new(Node::Case(l, r))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::new(Node::Neg(e))
    }

    /// `[x:dom]body` where `x` occurs free in `body`.
    pub fn univ_named(x: &Name, dom: Expr, body: &Expr) -> Expr {
        Expr::univ(x.clone(), dom, body.abstract_free(x))
    }
    /// `[x!dom]body` where `x` occurs free in `body`.
    pub fn exist_named(x: &Name, dom: Expr, body: &Expr) -> Expr {
        Expr::exist(x.clone(), dom, body.abstract_free(x))
    }
    /// `<x := witness, body : template>` where `x` occurs free in `template`.
    pub fn protdef_named(x: &Name, witness: Expr, body: Expr, template: &Expr) -> Expr {
        Expr::protdef(x.clone(), witness, body, template.abstract_free(x))
    }
    /// `[dom => body]`
    pub fn arrow(dom: Expr, body: Expr) -> Expr {
        Expr::univ(Name::anonymous(), dom, body.lift(1, 0))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self.node(), Node::Tau)
    }

    /// True when no de Bruijn index escapes the expression.
    pub fn is_locally_closed(&self) -> bool {
        self.0.loose == 0
    }

    pub fn loose(&self) -> u32 {
        self.0.loose
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.0.size as usize
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        node_children(self.node())
    }

    /// Whether child `i` sits under this node's binder.
    pub fn binds_child(&self, i: usize) -> bool {
        node_binds(self.node(), i)
    }

    /// The binder hint of an abstraction or protected definition.
    pub fn hint(&self) -> Option<&Name> {
        match self.node() {
            Node::UnivAbs { hint, .. } | Node::ExistAbs { hint, .. } | Node::ProtDef { hint, .. } => Some(hint),
            _ => None,
        }
    }

    pub fn child(&self, i: usize) -> Option<&Expr> {
        self.children().get(i).copied()
    }

    /// Rebuild this node with child `i` replaced.
    pub fn with_child(&self, i: usize, c: Expr) -> Expr {
        let mut kids: Vec<Expr> = self.children().into_iter().cloned().collect();
        assert!(i < kids.len(), "child index out of range");
        kids[i] = c;
        self.rebuild(kids)
    }

    /// Rebuild this node with a full list of new children.
    pub fn rebuild(&self, kids: Vec<Expr>) -> Expr {
        let mut k = kids.into_iter();
        let mut next = || k.next().expect("wrong child count");
        let node = match self.node() {
            Node::Tau | Node::Bound(_) | Node::Free(_) => return self.clone(),
            Node::UnivAbs { hint, .. } => Node::UnivAbs { hint: hint.clone(), dom: next(), body: next() },
            Node::ExistAbs { hint, .. } => Node::ExistAbs { hint: hint.clone(), dom: next(), body: next() },
            Node::Apply(..) => Node::Apply(next(), next()),
            Node::ProtDef { hint, .. } => {
                Node::ProtDef { hint: hint.clone(), witness: next(), body: next(), template: next() }
            }
            Node::ProjL(_) => Node::ProjL(next()),
            Node::ProjR(_) => Node::ProjR(next()),
            Node::Product(..) => Node::Product(next(), next()),
            Node::Sum(..) => Node::Sum(next(), next()),
            Node::InjL { .. } => Node::InjL { value: next(), other: next() },
            Node::InjR { .. } => Node::InjR { other: next(), value: next() },
            Node::Case(..) => Node::Case(next(), next()),
            Node::Neg(_) => Node::Neg(next()),
        };
        Expr::new(node)
    }

    /// Subterm at a path of child positions.
    pub fn at_path(&self, path: &[Step]) -> Option<&Expr> {
        let mut cur = self;
        for &s in path {
            cur = cur.child(s as usize)?;
        }
        Some(cur)
    }

    /// Replace the subterm at `path`.
    pub fn replace_at(&self, path: &[Step], new: Expr) -> Option<Expr> {
        match path.split_first() {
            None => Some(new),
            Some((&s, rest)) => {
                let c = self.child(s as usize)?;
                let c2 = c.replace_at(rest, new)?;
                Some(self.with_child(s as usize, c2))
            }
        }
    }

    /// Shift loose indices `>= cutoff` up by `by`.
    pub fn lift(&self, by: u32, cutoff: u32) -> Expr {
        if by == 0 || self.0.loose <= cutoff {
            return self.clone();
        }
        match self.node() {
            Node::Bound(i) => Expr::bound(i + by),
            _ => self.map_children(|i, c| {
                let cut = if self.binds_child(i) { cutoff + 1 } else { cutoff };
                c.lift(by, cut)
            }),
        }
    }

    /// Replace index 0 by `arg` in a binder body, lowering the other loose indices.
    pub fn instantiate(&self, arg: &Expr) -> Expr {
        self.subst_index(0, arg)
    }

    fn subst_index(&self, depth: u32, arg: &Expr) -> Expr {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.node() {
            Node::Bound(i) => {
                if *i == depth {
                    arg.lift(depth, 0)
                } else if *i > depth {
                    Expr::bound(i - 1)
                } else {
                    self.clone()
                }
            }
            _ => self.map_children(|i, c| {
                let d = if self.binds_child(i) { depth + 1 } else { depth };
                c.subst_index(d, arg)
            }),
        }
    }

    /// Open a binder body with a free variable.
    pub fn open(&self, x: &Name) -> Expr {
        self.instantiate(&Expr::free(x.clone()))
    }

    /// Turn free `x` into index 0 (the inverse of [`Expr::open`]).
    pub fn abstract_free(&self, x: &Name) -> Expr {
        self.abstract_at(x, 0)
    }

    fn abstract_at(&self, x: &Name, depth: u32) -> Expr {
        match self.node() {
            Node::Tau => self.clone(),
            Node::Free(y) => {
                if y == x {
                    Expr::bound(depth)
                } else {
                    self.clone()
                }
            }
            Node::Bound(i) => {
                if *i >= depth {
                    Expr::bound(i + 1)
                } else {
                    self.clone()
                }
            }
            _ => {
                if self.0.loose <= depth && !self.has_free(x) {
                    return self.clone();
                }
                self.map_children(|i, c| {
                    let d = if self.binds_child(i) { depth + 1 } else { depth };
                    c.abstract_at(x, d)
                })
            }
        }
    }

    /// Capture-avoiding substitution of free `x` by `b`.
    pub fn substitute(&self, x: &Name, b: &Expr) -> Expr {
        self.substitute_at(x, b, 0)
    }

    fn substitute_at(&self, x: &Name, b: &Expr, depth: u32) -> Expr {
        match self.node() {
            Node::Free(y) if y == x => b.lift(depth, 0),
            Node::Tau | Node::Free(_) | Node::Bound(_) => self.clone(),
            _ => {
                if !self.has_free(x) {
                    return self.clone();
                }
                self.map_children(|i, c| {
                    let d = if self.binds_child(i) { depth + 1 } else { depth };
                    c.substitute_at(x, b, d)
                })
            }
        }
    }

    /// Does index `idx` (relative to this expression) occur loosely?
    pub fn has_loose(&self, idx: u32) -> bool {
        if self.0.loose <= idx {
            return false;
        }
        match self.node() {
            Node::Bound(i) => *i == idx,
            _ => self.children().iter().enumerate().any(|(i, c)| {
                let d = if self.binds_child(i) { idx + 1 } else { idx };
                c.has_loose(d)
            }),
        }
    }

    /// Remove an unused binder level: loose indices above 0 move down by one.
    /// Callers must ensure index 0 does not occur.
    pub fn lower(&self) -> Expr {
        debug_assert!(!self.has_loose(0));
        self.instantiate(&Expr::tau())
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self.node() {
            Node::Free(x) => {
                out.insert(x.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_free(out);
                }
            }
        }
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self.node() {
            Node::Free(y) => y == x,
            _ => self.children().iter().any(|c| c.has_free(x)),
        }
    }

    /// Alpha-equivalence. Same as `==`.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        self == other
    }

    fn map_children(&self, mut f: impl FnMut(usize, &Expr) -> Expr) -> Expr {
        let kids: Vec<Expr> = self.children().into_iter().enumerate().map(|(i, c)| f(i, c)).collect();
        let changed = kids.iter().zip(self.children()).any(|(a, b)| !a.ptr_eq(b));
        if changed {
            self.rebuild(kids)
        } else {
            self.clone()
        }
    }

    /// A hint-free serialisation; equal strings iff alpha-equivalent.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.write_canonical(&mut s);
        s
    }

    fn write_canonical(&self, s: &mut String) {
        use std::fmt::Write;
        let tag = match self.node() {
            Node::Tau => {
                s.push('T');
                return;
            }
            Node::Bound(i) => {
                let _ = write!(s, "#{i}");
                return;
            }
            Node::Free(x) => {
                let _ = write!(s, "${}:{}", x.as_str().len(), x);
                return;
            }
            Node::UnivAbs { .. } => "U",
            Node::ExistAbs { .. } => "E",
            Node::Apply(..) => "A",
            Node::ProtDef { .. } => "D",
            Node::ProjL(_) => "L",
            Node::ProjR(_) => "R",
            Node::Product(..) => "P",
            Node::Sum(..) => "S",
            Node::InjL { .. } => "l",
            Node::InjR { .. } => "r",
            Node::Case(..) => "C",
            Node::Neg(_) => "N",
        };
        s.push('(');
        s.push_str(tag);
        for c in self.children() {
            s.push(' ');
            c.write_canonical(s);
        }
        s.push(')');
    }
}

fn node_children(node: &Node) -> Vec<&Expr> {
    match node {
        Node::Tau | Node::Bound(_) | Node::Free(_) => vec![],
        Node::UnivAbs { dom, body, .. } | Node::ExistAbs { dom, body, .. } => vec![dom, body],
        Node::Apply(a, b) | Node::Product(a, b) | Node::Sum(a, b) | Node::Case(a, b) => vec![a, b],
        Node::ProtDef { witness, body, template, .. } => vec![witness, body, template],
        Node::ProjL(a) | Node::ProjR(a) | Node::Neg(a) => vec![a],
        Node::InjL { value, other } => vec![value, other],
        Node::InjR { other, value } => vec![other, value],
    }
}

fn node_binds(node: &Node, i: usize) -> bool {
    match node {
        Node::UnivAbs { .. } | Node::ExistAbs { .. } => i == 1,
        Node::ProtDef { .. } => i == 2,
        _ => false,
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.size != other.0.size || self.0.loose != other.0.loose {
            return false;
        }
        use Node::*;
        match (self.node(), other.node()) {
            (Tau, Tau) => true,
            (Bound(i), Bound(j)) => i == j,
            (Free(x), Free(y)) => x == y,
            (UnivAbs { dom: a, body: b, .. }, UnivAbs { dom: c, body: d, .. })
            | (ExistAbs { dom: a, body: b, .. }, ExistAbs { dom: c, body: d, .. })
            | (Apply(a, b), Apply(c, d))
            | (Product(a, b), Product(c, d))
            | (Sum(a, b), Sum(c, d))
            | (Case(a, b), Case(c, d))
            | (InjL { value: a, other: b }, InjL { value: c, other: d })
            | (InjR { other: a, value: b }, InjR { other: c, value: d }) => a == c && b == d,
            (
                ProtDef { witness: a, body: b, template: c, .. },
                ProtDef { witness: d, body: e, template: f, .. },
            ) => a == d && b == e && c == f,
            (ProjL(a), ProjL(b)) | (ProjR(a), ProjR(b)) | (Neg(a), Neg(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self.node()).hash(state);
        match self.node() {
            Node::Bound(i) => i.hash(state),
            Node::Free(x) => x.hash(state),
            _ => {
                for c in self.children() {
                    c.hash(state);
                }
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // The surface printer gives the readable form; this one is structural.
        f.write_str(&self.canonical())
    }
}

/// Pick a name from `hint` that `taken` rejects, trying `hint`, `hint_1`, `hint_2`, ...
pub fn fresh_name(hint: &Name, mut taken: impl FnMut(&str) -> bool) -> Name {
    let base = if hint.is_anonymous() { "x" } else { hint.as_str() };
    if !taken(base) {
        return Name::new(base);
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|cand| !taken(cand))
        .map(|s| Name::new(&s))
        .expect("infinite supply")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("variable `{0}` is already declared")]
    Duplicate(Name),
}

/// An ordered list of declarations `x : A`.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<(Name, Expr)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, x: &Name) -> Option<&Expr> {
        self.entries.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    /// Position of a declaration.
    pub fn position(&self, x: &Name) -> Option<usize> {
        self.entries.iter().rposition(|(y, _)| y == x)
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.entries.iter().any(|(y, _)| y == x)
    }

    pub fn extend(&self, x: Name, ty: Expr) -> Result<Context, ContextError> {
        let mut c = self.clone();
        c.push(x, ty)?;
        Ok(c)
    }

    pub fn push(&mut self, x: Name, ty: Expr) -> Result<(), ContextError> {
        if self.contains(&x) {
            return Err(ContextError::Duplicate(x));
        }
        self.entries.push((x, ty));
        Ok(())
    }

    pub fn pop(&mut self) -> Option<(Name, Expr)> {
        self.entries.pop()
    }

    pub fn entries(&self) -> &[(Name, Expr)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Expr)> {
        self.entries.iter()
    }

    /// The first `n` declarations.
    pub fn prefix(&self, n: usize) -> Context {
        Context { entries: self.entries[..n.min(self.entries.len())].to_vec() }
    }

    /// `[x1:A1]...[xn:An]body`
    pub fn abstraction(&self, body: &Expr) -> Expr {
        self.entries.iter().rev().fold(body.clone(), |acc, (x, t)| Expr::univ_named(x, t.clone(), &acc))
    }

    /// A name based on `hint` that is neither declared here nor free in `avoid`.
    pub fn fresh(&self, hint: &Name, avoid: &[&Expr]) -> Name {
        fresh_name(hint, |s| {
            let n = Name::new(s);
            self.contains(&n) || avoid.iter().any(|e| e.has_free(&n))
        })
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|(x, t)| (x, t))).finish()
    }
}
