//! Shared test helpers: a named term representation with its own
//! capture-avoiding substitution, used as an oracle for the kernel.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dkernel::surface::parse_expr;
use dkernel::{Context, Expr, Name};
use proptest::prelude::*;

/// Terms with explicit variable names. `ProtDef` binds only in the template.
#[derive(Clone, Debug)]
pub enum Named {
    Tau,
    Var(String),
    Univ(String, Box<Named>, Box<Named>),
    Exist(String, Box<Named>, Box<Named>),
    App(Box<Named>, Box<Named>),
    ProtDef(String, Box<Named>, Box<Named>, Box<Named>),
    ProjL(Box<Named>),
    ProjR(Box<Named>),
    Product(Box<Named>, Box<Named>),
    Sum(Box<Named>, Box<Named>),
    InjL(Box<Named>, Box<Named>),
    InjR(Box<Named>, Box<Named>),
    Case(Box<Named>, Box<Named>),
    Neg(Box<Named>),
}

use Named::*;

fn b(n: Named) -> Box<Named> {
    Box::new(n)
}

impl Named {
    pub fn to_expr(&self) -> Expr {
        match self {
            Tau => Expr::tau(),
            Var(x) => Expr::free(Name::new(x)),
            Univ(x, d, e) => Expr::univ_named(&Name::new(x), d.to_expr(), &e.to_expr()),
            Exist(x, d, e) => Expr::exist_named(&Name::new(x), d.to_expr(), &e.to_expr()),
            App(f, a) => Expr::apply(f.to_expr(), a.to_expr()),
            ProtDef(x, w, c, t) => Expr::protdef_named(&Name::new(x), w.to_expr(), c.to_expr(), &t.to_expr()),
            ProjL(a) => Expr::proj_l(a.to_expr()),
            ProjR(a) => Expr::proj_r(a.to_expr()),
            Product(a, c) => Expr::product(a.to_expr(), c.to_expr()),
            Sum(a, c) => Expr::sum(a.to_expr(), c.to_expr()),
            InjL(a, c) => Expr::inj_l(a.to_expr(), c.to_expr()),
            InjR(a, c) => Expr::inj_r(a.to_expr(), c.to_expr()),
            Case(a, c) => Expr::case(a.to_expr(), c.to_expr()),
            Neg(a) => Expr::neg(a.to_expr()),
        }
    }

    pub fn free(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut s);
        s
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let under = |x: &str, e: &Named, bound: &mut Vec<String>, out: &mut BTreeSet<String>| {
            bound.push(x.to_string());
            e.collect_free(bound, out);
            bound.pop();
        };
        match self {
            Tau => {}
            Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Univ(x, d, e) | Exist(x, d, e) => {
                d.collect_free(bound, out);
                under(x, e, bound, out);
            }
            ProtDef(x, w, c, t) => {
                w.collect_free(bound, out);
                c.collect_free(bound, out);
                under(x, t, bound, out);
            }
            ProjL(a) | ProjR(a) | Neg(a) => a.collect_free(bound, out),
            App(a, c) | Product(a, c) | Sum(a, c) | InjL(a, c) | InjR(a, c) | Case(a, c) => {
                a.collect_free(bound, out);
                c.collect_free(bound, out);
            }
        }
    }

    /// Textbook capture-avoiding substitution `self[x := s]`.
    pub fn subst(&self, x: &str, s: &Named) -> Named {
        let fv = s.free();
        // Substitute under a binder `y` scoping over `e`.
        let binder = |y: &String, e: &Named| -> (String, Named) {
            if y == x {
                return (y.clone(), e.clone());
            }
            if fv.contains(y) && e.free().contains(x) {
                let mut taken = fv.clone();
                taken.extend(e.free());
                taken.insert(x.to_string());
                let mut k = 0;
                let fresh = loop {
                    let c = format!("{y}_r{k}");
                    if !taken.contains(&c) {
                        break c;
                    }
                    k += 1;
                };
                let renamed = e.subst(y, &Var(fresh.clone()));
                return (fresh, renamed.subst(x, s));
            }
            (y.clone(), e.subst(x, s))
        };
        match self {
            Tau => Tau,
            Var(y) if y == x => s.clone(),
            Var(y) => Var(y.clone()),
            Univ(y, d, e) => {
                let (y2, e2) = binder(y, e);
                Univ(y2, b(d.subst(x, s)), b(e2))
            }
            Exist(y, d, e) => {
                let (y2, e2) = binder(y, e);
                Exist(y2, b(d.subst(x, s)), b(e2))
            }
            ProtDef(y, w, c, t) => {
                let (y2, t2) = binder(y, t);
                ProtDef(y2, b(w.subst(x, s)), b(c.subst(x, s)), b(t2))
            }
            ProjL(a) => ProjL(b(a.subst(x, s))),
            ProjR(a) => ProjR(b(a.subst(x, s))),
            Neg(a) => Neg(b(a.subst(x, s))),
            App(a, c) => App(b(a.subst(x, s)), b(c.subst(x, s))),
            Product(a, c) => Product(b(a.subst(x, s)), b(c.subst(x, s))),
            Sum(a, c) => Sum(b(a.subst(x, s)), b(c.subst(x, s))),
            InjL(a, c) => InjL(b(a.subst(x, s)), b(c.subst(x, s))),
            InjR(a, c) => InjR(b(a.subst(x, s)), b(c.subst(x, s))),
            Case(a, c) => Case(b(a.subst(x, s)), b(c.subst(x, s))),
        }
    }
}

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

pub fn arb_named() -> impl Strategy<Value = Named> {
    let leaf = prop_oneof![Just(Tau), prop::sample::select(NAMES.to_vec()).prop_map(|x| Var(x.to_string()))];
    leaf.prop_recursive(5, 48, 3, |inner| {
        let name = prop::sample::select(NAMES.to_vec()).prop_map(str::to_string);
        prop_oneof![
            (name.clone(), inner.clone(), inner.clone()).prop_map(|(x, d, e)| Univ(x, b(d), b(e))),
            (name.clone(), inner.clone(), inner.clone()).prop_map(|(x, d, e)| Exist(x, b(d), b(e))),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| App(b(f), b(a))),
            (name, inner.clone(), inner.clone(), inner.clone()).prop_map(|(x, w, c, t)| ProtDef(x, b(w), b(c), b(t))),
            inner.clone().prop_map(|a| ProjL(b(a))),
            inner.clone().prop_map(|a| ProjR(b(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| Product(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| Sum(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| InjL(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| InjR(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| Case(b(a), b(c))),
            inner.prop_map(|a| Neg(b(a))),
        ]
    })
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    arb_named().prop_map(|n| n.to_expr())
}

/// Parse an expression, panicking with the source on failure.
pub fn ex(src: &str) -> Expr {
    parse_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

/// Build a context from `name : type` pairs, each type in surface syntax.
pub fn ctx(decls: &[(&str, &str)]) -> Context {
    let mut c = Context::new();
    for (x, t) in decls {
        c.push(Name::new(x), ex(t)).expect("distinct names");
    }
    c
}
