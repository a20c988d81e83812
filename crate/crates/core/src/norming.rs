//! Norms: binary trees over `tau` that measure the shape of an expression.
//!
//! Every valid expression has a norm, and an expression shares its norm
//! with its type and with all of its reducts.

use std::fmt;
use std::sync::Arc;

use crate::syntax::{Context, Expr, Node};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Norm {
    Tau,
    Pair(Arc<Norm>, Arc<Norm>),
}

impl Norm {
    pub fn pair(a: Norm, b: Norm) -> Norm {
        Norm::Pair(Arc::new(a), Arc::new(b))
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        match self {
            Norm::Tau => 1,
            Norm::Pair(a, b) => a.size() + b.size(),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Tau => f.write_str("tau"),
            Norm::Pair(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The norm of `e` in `ctx`, or `None` when `e` is not normable.
/// A declared variable takes the norm of its type, computed in the
/// part of the context that precedes it.
pub fn norm(ctx: &Context, e: &Expr) -> Option<Norm> {
    let mut declared: Vec<Option<Norm>> = Vec::with_capacity(ctx.len());
    for (i, (_, t)) in ctx.iter().enumerate() {
        let n = norm_in(ctx, &declared[..i], &mut Vec::new(), t);
        declared.push(n);
    }
    norm_in(ctx, &declared, &mut Vec::new(), e)
}

/// Leaf count of the norm.
pub fn norm_size(ctx: &Context, e: &Expr) -> Option<usize> {
    norm(ctx, e).map(|n| n.size())
}

// `bound[len-1-i]` is the norm for de Bruijn index `i`.
fn norm_in(ctx: &Context, declared: &[Option<Norm>], bound: &mut Vec<Norm>, e: &Expr) -> Option<Norm> {
    let go = |bound: &mut Vec<Norm>, e: &Expr| norm_in(ctx, declared, bound, e);
    match e.node() {
        Node::Tau => Some(Norm::Tau),
        Node::Bound(i) => bound.len().checked_sub(1 + *i as usize).map(|k| bound[k].clone()),
        Node::Free(x) => {
            let k = ctx.position(x)?;
            declared.get(k).cloned().flatten()
        }
        Node::UnivAbs { dom, body, .. } | Node::ExistAbs { dom, body, .. } => {
            let a = go(bound, dom)?;
            bound.push(a.clone());
            let b = go(bound, body);
            bound.pop();
            Some(Norm::pair(a, b?))
        }
        Node::Apply(f, arg) => {
            let fnorm = go(bound, f)?;
            let anorm = go(bound, arg)?;
            match fnorm {
                Norm::Pair(d, c) if *d == anorm => Some((*c).clone()),
                _ => None,
            }
        }
        Node::ProtDef { witness, body, template, .. } => {
            let a = go(bound, witness)?;
            let b = go(bound, body)?;
            bound.push(a.clone());
            let c = go(bound, template);
            bound.pop();
            if c? == b {
                Some(Norm::pair(a, b))
            } else {
                None
            }
        }
        Node::Product(a, b) | Node::Sum(a, b) => Some(Norm::pair(go(bound, a)?, go(bound, b)?)),
        Node::InjL { value, other } => Some(Norm::pair(go(bound, value)?, go(bound, other)?)),
        Node::InjR { other, value } => Some(Norm::pair(go(bound, other)?, go(bound, value)?)),
        Node::ProjL(a) => match go(bound, a)? {
            Norm::Pair(l, _) => Some((*l).clone()),
            Norm::Tau => None,
        },
        Node::ProjR(a) => match go(bound, a)? {
            Norm::Pair(_, r) => Some((*r).clone()),
            Norm::Tau => None,
        },
        Node::Case(l, r) => match (go(bound, l)?, go(bound, r)?) {
            (Norm::Pair(a, c1), Norm::Pair(b, c2)) if c1 == c2 => {
                Some(Norm::pair(Norm::pair((*a).clone(), (*b).clone()), (*c1).clone()))
            }
            _ => None,
        },
        Node::Neg(a) => go(bound, a),
    }
}
