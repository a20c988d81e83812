//! Reduction with explicit substitutions.
//!
//! An independent reduction engine used as an oracle for
//! [`crate::reduction`]. It has its own term type with a substitution node
//! `[x:=a]b`, its own index manipulation, and it never performs a
//! meta-level substitution while reducing: definitions are unfolded one
//! occurrence at a time through an environment.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{Expr, Name, Node};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum SNode {
    Tau,
    Bound(u32),
    Free(Name),
    UnivAbs(SExpr, SExpr),
    ExistAbs(SExpr, SExpr),
    Apply(SExpr, SExpr),
    /// witness, body, template (template under the binder)
    ProtDef(SExpr, SExpr, SExpr),
    ProjL(SExpr),
    ProjR(SExpr),
    Product(SExpr, SExpr),
    Sum(SExpr, SExpr),
    /// value, other
    InjL(SExpr, SExpr),
    /// other, value
    InjR(SExpr, SExpr),
    Case(SExpr, SExpr),
    Neg(SExpr),
    /// `[x:=def]body`, body under the binder.
    Subst(SExpr, SExpr),
}

/// Expression with explicit substitutions. Equality is structural (alpha).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SExpr(Arc<SNode>);

/// Definitions in scope: `x := a`.
pub type Env = Vec<(Name, SExpr)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EsError {
    #[error("explicit-substitution reduction ran out of fuel after {0} steps")]
    FuelExhausted(u64),
}

impl SExpr {
    pub fn new(n: SNode) -> SExpr {
        SExpr(Arc::new(n))
    }

    pub fn node(&self) -> &SNode {
        &self.0
    }

    pub fn free(x: &Name) -> SExpr {
        SExpr::new(SNode::Free(x.clone()))
    }

    pub fn subst(def: SExpr, body: SExpr) -> SExpr {
        SExpr::new(SNode::Subst(def, body))
    }

    /// Embed a kernel expression.
    pub fn from_expr(e: &Expr) -> SExpr {
        let s = |e: &Expr| SExpr::from_expr(e);
        SExpr::new(match e.node() {
            Node::Tau => SNode::Tau,
            Node::Bound(i) => SNode::Bound(*i),
            Node::Free(x) => SNode::Free(x.clone()),
            Node::UnivAbs { dom, body, .. } => SNode::UnivAbs(s(dom), s(body)),
            Node::ExistAbs { dom, body, .. } => SNode::ExistAbs(s(dom), s(body)),
            Node::Apply(f, a) => SNode::Apply(s(f), s(a)),
            Node::ProtDef { witness, body, template, .. } => SNode::ProtDef(s(witness), s(body), s(template)),
            Node::ProjL(a) => SNode::ProjL(s(a)),
            Node::ProjR(a) => SNode::ProjR(s(a)),
            Node::Product(a, b) => SNode::Product(s(a), s(b)),
            Node::Sum(a, b) => SNode::Sum(s(a), s(b)),
            Node::InjL { value, other } => SNode::InjL(s(value), s(other)),
            Node::InjR { other, value } => SNode::InjR(s(other), s(value)),
            Node::Case(a, b) => SNode::Case(s(a), s(b)),
            Node::Neg(a) => SNode::Neg(s(a)),
        })
    }

    /// Back to a kernel expression; `None` if a substitution node remains.
    /// Binder hints are not tracked here, so all binders come back as `x`.
    pub fn to_expr(&self) -> Option<Expr> {
        let h = || Name::new("x");
        Some(match self.node() {
            SNode::Tau => Expr::tau(),
            SNode::Bound(i) => Expr::bound(*i),
            SNode::Free(x) => Expr::free(x.clone()),
            SNode::UnivAbs(a, b) => Expr::univ(h(), a.to_expr()?, b.to_expr()?),
            SNode::ExistAbs(a, b) => Expr::exist(h(), a.to_expr()?, b.to_expr()?),
            SNode::Apply(a, b) => Expr::apply(a.to_expr()?, b.to_expr()?),
            SNode::ProtDef(a, b, c) => Expr::protdef(h(), a.to_expr()?, b.to_expr()?, c.to_expr()?),
            SNode::ProjL(a) => Expr::proj_l(a.to_expr()?),
            SNode::ProjR(a) => Expr::proj_r(a.to_expr()?),
            SNode::Product(a, b) => Expr::product(a.to_expr()?, b.to_expr()?),
            SNode::Sum(a, b) => Expr::sum(a.to_expr()?, b.to_expr()?),
            SNode::InjL(a, b) => Expr::inj_l(a.to_expr()?, b.to_expr()?),
            SNode::InjR(a, b) => Expr::inj_r(a.to_expr()?, b.to_expr()?),
            SNode::Case(a, b) => Expr::case(a.to_expr()?, b.to_expr()?),
            SNode::Neg(a) => Expr::neg(a.to_expr()?),
            SNode::Subst(..) => return None,
        })
    }

    fn kids(&self) -> Vec<&SExpr> {
        match self.node() {
            SNode::Tau | SNode::Bound(_) | SNode::Free(_) => vec![],
            SNode::UnivAbs(a, b)
            | SNode::ExistAbs(a, b)
            | SNode::Apply(a, b)
            | SNode::Product(a, b)
            | SNode::Sum(a, b)
            | SNode::InjL(a, b)
            | SNode::InjR(a, b)
            | SNode::Case(a, b)
            | SNode::Subst(a, b) => vec![a, b],
            SNode::ProtDef(a, b, c) => vec![a, b, c],
            SNode::ProjL(a) | SNode::ProjR(a) | SNode::Neg(a) => vec![a],
        }
    }

    fn binds(&self, i: usize) -> bool {
        match self.node() {
            SNode::UnivAbs(..) | SNode::ExistAbs(..) | SNode::Subst(..) => i == 1,
            SNode::ProtDef(..) => i == 2,
            _ => false,
        }
    }

    fn with_kids(&self, k: Vec<SExpr>) -> SExpr {
        let mut it = k.into_iter();
        let mut n = || it.next().expect("child count");
        SExpr::new(match self.node() {
            SNode::Tau | SNode::Bound(_) | SNode::Free(_) => return self.clone(),
            SNode::UnivAbs(..) => SNode::UnivAbs(n(), n()),
            SNode::ExistAbs(..) => SNode::ExistAbs(n(), n()),
            SNode::Apply(..) => SNode::Apply(n(), n()),
            SNode::ProtDef(..) => SNode::ProtDef(n(), n(), n()),
            SNode::ProjL(_) => SNode::ProjL(n()),
            SNode::ProjR(_) => SNode::ProjR(n()),
            SNode::Product(..) => SNode::Product(n(), n()),
            SNode::Sum(..) => SNode::Sum(n(), n()),
            SNode::InjL(..) => SNode::InjL(n(), n()),
            SNode::InjR(..) => SNode::InjR(n(), n()),
            SNode::Case(..) => SNode::Case(n(), n()),
            SNode::Neg(_) => SNode::Neg(n()),
            SNode::Subst(..) => SNode::Subst(n(), n()),
        })
    }

    fn map(&self, depth: u32, f: &dyn Fn(&SExpr, u32) -> SExpr) -> SExpr {
        let kids = self
            .kids()
            .into_iter()
            .enumerate()
            .map(|(i, c)| f(c, if self.binds(i) { depth + 1 } else { depth }))
            .collect();
        self.with_kids(kids)
    }

    fn shift(&self, by: u32, cutoff: u32) -> SExpr {
        match self.node() {
            SNode::Bound(i) if *i >= cutoff => SExpr::new(SNode::Bound(i + by)),
            SNode::Tau | SNode::Bound(_) | SNode::Free(_) => self.clone(),
            _ => self.map(cutoff, &|c, d| c.shift(by, d)),
        }
    }

    /// Replace index `depth` by `arg` and lower the indices above it.
    fn inst(&self, arg: &SExpr, depth: u32) -> SExpr {
        match self.node() {
            SNode::Bound(i) if *i == depth => arg.shift(depth, 0),
            SNode::Bound(i) if *i > depth => SExpr::new(SNode::Bound(i - 1)),
            SNode::Tau | SNode::Bound(_) | SNode::Free(_) => self.clone(),
            _ => self.map(depth, &|c, d| c.inst(arg, d)),
        }
    }

    fn close(&self, x: &Name, depth: u32) -> SExpr {
        match self.node() {
            SNode::Free(y) if y == x => SExpr::new(SNode::Bound(depth)),
            SNode::Bound(i) if *i >= depth => SExpr::new(SNode::Bound(i + 1)),
            SNode::Tau | SNode::Bound(_) | SNode::Free(_) => self.clone(),
            _ => self.map(depth, &|c, d| c.close(x, d)),
        }
    }

    fn open(&self, x: &Name) -> SExpr {
        self.inst(&SExpr::free(x), 0)
    }

    fn uses(&self, idx: u32) -> bool {
        match self.node() {
            SNode::Bound(i) => *i == idx,
            _ => self.kids().iter().enumerate().any(|(i, c)| c.uses(if self.binds(i) { idx + 1 } else { idx })),
        }
    }

    fn mentions(&self, x: &Name) -> bool {
        match self.node() {
            SNode::Free(y) => y == x,
            _ => self.kids().iter().any(|c| c.mentions(x)),
        }
    }

    fn max_fresh(&self) -> u64 {
        match self.node() {
            SNode::Free(x) => fresh_index(x).map_or(0, |k| k + 1),
            _ => self.kids().iter().map(|c| c.max_fresh()).max().unwrap_or(0),
        }
    }

    pub fn has_subst(&self) -> bool {
        matches!(self.node(), SNode::Subst(..)) || self.kids().iter().any(|c| c.has_subst())
    }

    pub fn size(&self) -> usize {
        1 + self.kids().iter().map(|c| c.size()).sum::<usize>()
    }
}

impl fmt::Debug for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.node() {
            SNode::Tau => return f.write_str("τ"),
            SNode::Bound(i) => return write!(f, "#{i}"),
            SNode::Free(x) => return write!(f, "{x}"),
            SNode::UnivAbs(..) => "U",
            SNode::ExistAbs(..) => "E",
            SNode::Apply(..) => "A",
            SNode::ProtDef(..) => "D",
            SNode::ProjL(_) => "L",
            SNode::ProjR(_) => "R",
            SNode::Product(..) => "P",
            SNode::Sum(..) => "S",
            SNode::InjL(..) => "l",
            SNode::InjR(..) => "r",
            SNode::Case(..) => "C",
            SNode::Neg(_) => "N",
            SNode::Subst(..) => "Sub",
        };
        write!(f, "({tag}")?;
        for c in self.kids() {
            write!(f, " {c:?}")?;
        }
        f.write_str(")")
    }
}

// Names introduced when opening binders look like `%3`; the surface syntax
// cannot produce them.
fn fresh_index(x: &Name) -> Option<u64> {
    x.as_str().strip_prefix('%').and_then(|s| s.parse().ok())
}

struct Supply(u64);

impl Supply {
    fn for_terms(env: &Env, a: &SExpr) -> Supply {
        let m = env.iter().map(|(x, d)| d.max_fresh().max(fresh_index(x).map_or(0, |k| k + 1))).max().unwrap_or(0);
        Supply(m.max(a.max_fresh()))
    }

    fn next(&mut self) -> Name {
        let n = Name::new(&format!("%{}", self.0));
        self.0 += 1;
        n
    }
}

/// The maximal negation-reduct: the normal form under the negation rules
/// that push `~` inwards, with their restricted congruences.
pub fn neg_normalize(a: &SExpr) -> SExpr {
    match a.node() {
        SNode::Neg(b) => push_neg(&neg_normalize(b)),
        SNode::Product(x, y) => SExpr::new(SNode::Product(neg_normalize(x), neg_normalize(y))),
        SNode::Sum(x, y) => SExpr::new(SNode::Sum(neg_normalize(x), neg_normalize(y))),
        SNode::UnivAbs(d, b) => SExpr::new(SNode::UnivAbs(d.clone(), neg_normalize(b))),
        SNode::ExistAbs(d, b) => SExpr::new(SNode::ExistAbs(d.clone(), neg_normalize(b))),
        _ => a.clone(),
    }
}

// Whether a negation rule applies somewhere inside the region that
// negation reduction may enter.
fn has_neg_redex(a: &SExpr) -> bool {
    match a.node() {
        SNode::Neg(b) => {
            matches!(b.node(), SNode::Neg(_) | SNode::Product(..) | SNode::Sum(..) | SNode::UnivAbs(..) | SNode::ExistAbs(..))
                || has_neg_redex(b)
        }
        SNode::Product(x, y) | SNode::Sum(x, y) => has_neg_redex(x) || has_neg_redex(y),
        SNode::UnivAbs(_, b) | SNode::ExistAbs(_, b) => has_neg_redex(b),
        _ => false,
    }
}

// `~b` where `b` is already negation-normal.
fn push_neg(b: &SExpr) -> SExpr {
    let n = |x: &SExpr| push_neg(x);
    match b.node() {
        SNode::Neg(c) => c.clone(),
        SNode::Product(x, y) => SExpr::new(SNode::Sum(n(x), n(y))),
        SNode::Sum(x, y) => SExpr::new(SNode::Product(n(x), n(y))),
        SNode::UnivAbs(d, c) => SExpr::new(SNode::ExistAbs(d.clone(), n(c))),
        SNode::ExistAbs(d, c) => SExpr::new(SNode::UnivAbs(d.clone(), n(c))),
        _ => SExpr::new(SNode::Neg(b.clone())),
    }
}

fn lookup<'a>(env: &'a Env, x: &Name) -> Option<&'a SExpr> {
    env.iter().rev().find(|(y, _)| y == x).map(|(_, d)| d)
}

// Axioms at the root, in a fixed order.
fn root_steps(env: &Env, a: &SExpr, out: &mut Vec<SExpr>) {
    let mk = SExpr::new;
    match a.node() {
        SNode::Free(x) => {
            if let Some(d) = lookup(env, x) {
                out.push(d.clone());
            }
        }
        SNode::Subst(_, body) => {
            if !body.uses(0) {
                out.push(body.inst(&mk(SNode::Tau), 0));
            }
        }
        SNode::Apply(f, arg) => match (f.node(), arg.node()) {
            (SNode::UnivAbs(_, b), _) | (SNode::ExistAbs(_, b), _) => out.push(SExpr::subst(arg.clone(), b.clone())),
            (SNode::Case(l, _), SNode::InjL(v, _)) => out.push(mk(SNode::Apply(l.clone(), v.clone()))),
            (SNode::Case(_, r), SNode::InjR(_, v)) => out.push(mk(SNode::Apply(r.clone(), v.clone()))),
            _ => {}
        },
        SNode::ProjL(p) => match p.node() {
            SNode::ProtDef(w, _, _) | SNode::Product(w, _) | SNode::Sum(w, _) => out.push(w.clone()),
            _ => {}
        },
        SNode::ProjR(p) => match p.node() {
            SNode::ProtDef(_, b, _) | SNode::Product(_, b) | SNode::Sum(_, b) => out.push(b.clone()),
            _ => {}
        },
        SNode::Neg(b) => {
            if matches!(b.node(), SNode::Tau | SNode::ProtDef(..) | SNode::InjL(..) | SNode::InjR(..) | SNode::Case(..)) {
                out.push(b.clone());
            }
        }
        _ => {}
    }
    // The bundled negation rule: jump to the maximal negation-reduct.
    if has_neg_redex(a) {
        out.push(neg_normalize(a));
    }
}

fn successors(env: &mut Env, a: &SExpr, supply: &mut Supply, limit: usize, out: &mut Vec<SExpr>) {
    root_steps(env, a, out);
    if out.len() >= limit {
        out.truncate(limit);
        return;
    }
    let kids = a.kids();
    // Inside a substitution, reduce the body (with the definition in scope)
    // before the definition.
    let order: Vec<usize> =
        if matches!(a.node(), SNode::Subst(..)) { vec![1, 0] } else { (0..kids.len()).collect() };
    for i in order {
        let child = kids[i];
        let mut sub = Vec::new();
        if a.binds(i) {
            let x = supply.next();
            let opened = child.open(&x);
            let pushed = if let SNode::Subst(def, _) = a.node() {
                env.push((x.clone(), def.clone()));
                true
            } else {
                false
            };
            successors(env, &opened, supply, limit - out.len(), &mut sub);
            if pushed {
                env.pop();
            }
            for s in sub {
                let mut k: Vec<SExpr> = kids.iter().map(|c| (*c).clone()).collect();
                k[i] = s.close(&x, 0);
                out.push(a.with_kids(k));
            }
        } else {
            successors(env, child, supply, limit - out.len(), &mut sub);
            for s in sub {
                let mut k: Vec<SExpr> = kids.iter().map(|c| (*c).clone()).collect();
                k[i] = s;
                out.push(a.with_kids(k));
            }
        }
        if out.len() >= limit {
            out.truncate(limit);
            return;
        }
    }
}

/// All one-step successors of `a` in environment `env`.
pub fn es_step(env: &Env, a: &SExpr) -> Vec<SExpr> {
    let mut supply = Supply::for_terms(env, a);
    let mut env = env.clone();
    let mut out = Vec::new();
    successors(&mut env, a, &mut supply, usize::MAX, &mut out);
    out
}

/// The first successor in the fixed search order.
pub fn es_step_first(env: &Env, a: &SExpr) -> Option<SExpr> {
    let mut supply = Supply::for_terms(env, a);
    let mut env = env.clone();
    let mut out = Vec::new();
    successors(&mut env, a, &mut supply, 1, &mut out);
    out.pop()
}

/// Definitional normal form: unfold every definition and substitution,
/// performing no other reduction.
pub fn dnf(env: &Env, a: &SExpr) -> Expr {
    dnf_s(env, a).to_expr().expect("no substitution nodes after unfolding")
}

fn dnf_s(env: &Env, a: &SExpr) -> SExpr {
    match a.node() {
        SNode::Free(x) => match env.iter().rposition(|(y, _)| y == x) {
            Some(k) => dnf_s(&env[..k].to_vec(), &env[k].1),
            None => a.clone(),
        },
        SNode::Subst(def, body) => dnf_s(env, body).inst(&dnf_s(env, def), 0),
        SNode::Tau | SNode::Bound(_) => a.clone(),
        _ => a.with_kids(a.kids().into_iter().map(|c| dnf_s(env, c)).collect()),
    }
}

/// Outcome of an explicit-substitution normalisation.
#[derive(Clone, Debug)]
pub struct EsNormalized {
    pub expr: Expr,
    pub steps: u64,
}

/// Reduce to an irreducible form with the explicit-substitution rules, then
/// take its definitional normal form.
pub fn es_normalize(a: &Expr, fuel: u64) -> Result<EsNormalized, EsError> {
    let env = Env::new();
    let mut cur = SExpr::from_expr(a);
    let mut steps = 0;
    while let Some(next) = es_step_first(&env, &cur) {
        if steps >= fuel {
            return Err(EsError::FuelExhausted(steps));
        }
        steps += 1;
        cur = next;
    }
    Ok(EsNormalized { expr: dnf(&env, &cur), steps })
}

/// Does `x` occur in `a`? Exposed for tests of the `rem` rule.
pub fn mentions(a: &SExpr, x: &Name) -> bool {
    a.mentions(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> SExpr {
        SExpr::free(&Name::new(s))
    }
    fn n(a: SExpr) -> SExpr {
        SExpr::new(SNode::Neg(a))
    }
    fn prod(a: SExpr, b: SExpr) -> SExpr {
        SExpr::new(SNode::Product(a, b))
    }
    fn sum(a: SExpr, b: SExpr) -> SExpr {
        SExpr::new(SNode::Sum(a, b))
    }

    #[test]
    fn bundled_negation_reaches_the_end() {
        // ~~[a,b] jumps straight to [a,b].
        let t = n(n(prod(f("a"), f("b"))));
        assert_eq!(neg_normalize(&t), prod(f("a"), f("b")));
        assert!(es_step(&Env::new(), &t).contains(&prod(f("a"), f("b"))));
    }

    #[test]
    fn negation_of_sum() {
        let t = n(sum(f("a"), n(f("b"))));
        assert_eq!(neg_normalize(&t), prod(n(f("a")), f("b")));
    }

    #[test]
    fn use_looks_up_environment() {
        let env: Env = vec![(Name::new("y"), SExpr::new(SNode::Tau))];
        assert_eq!(es_step(&env, &f("y")), vec![SExpr::new(SNode::Tau)]);
    }

    #[test]
    fn dnf_unfolds_substitutions() {
        // [x:=a](x x) unfolds to (a a).
        let body = SExpr::new(SNode::Apply(SExpr::new(SNode::Bound(0)), SExpr::new(SNode::Bound(0))));
        let t = SExpr::subst(f("a"), body);
        assert_eq!(dnf(&Env::new(), &t), Expr::apply(Expr::free("a"), Expr::free("a")));
    }
}
