//! Printers for kernel expressions and surface terms.
//!
//! The kernel printer picks binder names from the hints, renaming only when
//! a hint would capture a free variable or an outer binder that the body
//! refers to. `parse_expr(print(e))` is alpha-equivalent to `e`.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use super::{BindKind, BracketEnd, Directive, DirectiveKind, Segment, Term, TermKind, Theory};
use crate::syntax::{fresh_name, Expr, Name, Node};

/// Render a locally closed expression.
pub fn print(e: &Expr) -> String {
    print_in(e, &[])
}

/// Render with names for loose indices: `scope[last]` is index 0.
pub fn print_in(e: &Expr, scope: &[Name]) -> String {
    let mut p = Printer { free: e.free_vars(), scope: scope.iter().map(|n| n.to_string()).collect(), out: String::new() };
    p.expr(e);
    p.out
}

struct Printer {
    free: BTreeSet<Name>,
    scope: Vec<String>,
    out: String,
}

fn loose_indices(e: &Expr, depth: u32, acc: &mut BTreeSet<u32>) {
    if e.loose() <= depth {
        return;
    }
    match e.node() {
        Node::Bound(i) => {
            if *i >= depth {
                acc.insert(i - depth);
            }
        }
        _ => {
            for (i, c) in e.children().into_iter().enumerate() {
                loose_indices(c, if e.binds_child(i) { depth + 1 } else { depth }, acc);
            }
        }
    }
}

impl Printer {
    // Choose a display name for a binder whose scope is `body`.
    fn choose(&self, hint: &Name, body: &Expr) -> String {
        let mut refs = BTreeSet::new();
        loose_indices(body, 0, &mut refs);
        let n = self.scope.len();
        let captured: BTreeSet<&str> = refs
            .iter()
            .filter(|&&k| k >= 1 && (k as usize) <= n)
            .map(|&k| self.scope[n - k as usize].as_str())
            .collect();
        fresh_name(hint, |c| self.free.contains(&Name::new(c)) || captured.contains(c)).to_string()
    }

    fn under(&mut self, name: String, f: impl FnOnce(&mut Self)) {
        self.scope.push(name);
        f(self);
        self.scope.pop();
    }

    fn expr(&mut self, e: &Expr) {
        match e.node() {
            Node::Tau => self.out.push_str("tau"),
            Node::Free(x) => self.out.push_str(x.as_str()),
            Node::Bound(i) => {
                let n = self.scope.len();
                match n.checked_sub(1 + *i as usize) {
                    Some(k) => {
                        let s = self.scope[k].clone();
                        self.out.push_str(&s);
                    }
                    None => {
                        let _ = write!(self.out, "#{i}");
                    }
                }
            }
            Node::UnivAbs { hint, dom, body } if hint.is_anonymous() && !body.has_loose(0) => {
                self.out.push('[');
                self.expr(dom);
                self.out.push_str(" => ");
                self.under("_".into(), |p| p.expr(body));
                self.out.push(']');
            }
            Node::UnivAbs { hint, dom, body } | Node::ExistAbs { hint, dom, body } => {
                let x = self.choose(hint, body);
                let sep = if matches!(e.node(), Node::UnivAbs { .. }) { ':' } else { '!' };
                let _ = write!(self.out, "[{x}{sep}");
                self.expr(dom);
                self.out.push(']');
                self.under(x, |p| p.expr(body));
            }
            Node::Apply(..) => {
                let mut spine = Vec::new();
                let mut cur = e;
                while let Node::Apply(f, a) = cur.node() {
                    spine.push(a);
                    cur = f;
                }
                self.out.push('(');
                self.expr(cur);
                for a in spine.into_iter().rev() {
                    self.out.push(' ');
                    self.expr(a);
                }
                self.out.push(')');
            }
            Node::ProtDef { hint, witness, body, template } => {
                let x = self.choose(hint, template);
                let _ = write!(self.out, "[{x}:=");
                self.expr(witness);
                self.out.push(',');
                self.expr(body);
                self.out.push(':');
                self.under(x, |p| p.expr(template));
                self.out.push(']');
            }
            Node::ProjL(a) | Node::ProjR(a) => {
                let parens = matches!(a.node(), Node::Neg(_) | Node::UnivAbs { .. } | Node::ExistAbs { .. });
                if parens {
                    self.out.push('(');
                }
                self.expr(a);
                if parens {
                    self.out.push(')');
                }
                self.out.push_str(if matches!(e.node(), Node::ProjL(_)) { ".1" } else { ".2" });
            }
            Node::Product(a, b) => {
                self.out.push('[');
                self.expr(a);
                let mut rest = b;
                while let Node::Product(x, y) = rest.node() {
                    self.out.push(',');
                    self.expr(x);
                    rest = y;
                }
                self.out.push(',');
                self.expr(rest);
                self.out.push(']');
            }
            Node::Sum(a, b) => {
                self.out.push('[');
                self.expr(a);
                self.out.push('+');
                self.expr(b);
                self.out.push(']');
            }
            Node::InjL { value, other } => self.braces("inl", value, other),
            Node::InjR { other, value } => self.braces("inr", other, value),
            Node::Case(l, r) => self.braces("case", l, r),
            Node::Neg(a) => {
                self.out.push('~');
                self.expr(a);
            }
        }
    }

    fn braces(&mut self, kw: &str, a: &Expr, b: &Expr) {
        self.out.push_str(kw);
        self.out.push('{');
        self.expr(a);
        self.out.push(',');
        self.expr(b);
        self.out.push('}');
    }
}

fn postfix_operand(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match &t.kind {
        TermKind::Neg(_) | TermKind::Binder { end: BracketEnd::Body(_), .. } => write!(f, "({t})"),
        _ => write!(f, "{t}"),
    }
}

fn list(f: &mut fmt::Formatter<'_>, items: &[Term], sep: &str) -> fmt::Result {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Tau => f.write_str("tau"),
            TermKind::Ident(s) => f.write_str(s),
            TermKind::SchemeInst(s, args) => {
                write!(f, "{s}[")?;
                list(f, args, ", ")?;
                f.write_str("]")
            }
            TermKind::Binder { segments, end } => {
                f.write_str("[")?;
                for (i, s) in segments.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    match s {
                        Segment::Bind { kind, names, ty } => {
                            let sep = if *kind == BindKind::Univ { ":" } else { "!" };
                            write!(f, "{}{sep}{ty}", names.join(","))?;
                        }
                        Segment::Premise(t) => write!(f, "{t}")?,
                    }
                }
                match end {
                    BracketEnd::Body(b) => write!(f, "]{b}"),
                    BracketEnd::Arrow(r) => write!(f, " => {r}]"),
                }
            }
            TermKind::App(items) => {
                f.write_str("(")?;
                list(f, items, " ")?;
                f.write_str(")")
            }
            TermKind::ProtDef { name, witness, body, template } => {
                write!(f, "[{name} := {witness}, {body} : {template}]")
            }
            TermKind::ProjL(a) => {
                postfix_operand(f, a)?;
                f.write_str(".1")
            }
            TermKind::ProjR(a) => {
                postfix_operand(f, a)?;
                f.write_str(".2")
            }
            TermKind::Product(items) => {
                f.write_str("[")?;
                list(f, items, ", ")?;
                f.write_str("]")
            }
            TermKind::Sum(a, b) => write!(f, "[{a} + {b}]"),
            TermKind::InjL(a, b) => write!(f, "inl{{{a}, {b}}}"),
            TermKind::InjR(a, b) => write!(f, "inr{{{a}, {b}}}"),
            TermKind::Case(a, b) => write!(f, "case{{{a}, {b}}}"),
            TermKind::Neg(a) => write!(f, "~{a}"),
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DirectiveKind::Axiom { names, ty } => write!(f, "axiom {} : {ty}.", names.join(", ")),
            DirectiveKind::Def { name, ty: Some(t), body } => write!(f, "def {name} : {t} := {body}."),
            DirectiveKind::Def { name, ty: None, body } => write!(f, "def {name} := {body}."),
            DirectiveKind::Scheme { name, params, ty } => write!(f, "scheme {name}({}) : {ty}.", params.join(", ")),
            DirectiveKind::Check { subject, ty } => write!(f, "check {subject} : {ty}."),
            DirectiveKind::Normalize(t) => write!(f, "normalize {t}."),
            DirectiveKind::AssertConverts(a, b) => write!(f, "assert {a} == {b}."),
            DirectiveKind::AssertInvalid { subject, ty: Some(t) } => write!(f, "assert invalid {subject} : {t}."),
            DirectiveKind::AssertInvalid { subject, ty: None } => write!(f, "assert invalid {subject}."),
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.directives {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
