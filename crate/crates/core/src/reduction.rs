//! One-step reduction, normalisation strategies, conversion and the
//! normal-form classifier.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Expr, Node, Step};

/// Default step budget for normalisation.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Rule names for the axioms of one-step reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleTag {
    Beta1,
    Beta2,
    Beta3,
    Beta4,
    Pi1,
    Pi2,
    Pi3,
    Pi4,
    Pi5,
    Pi6,
    Nu1,
    Nu2,
    Nu3,
    Nu4,
    Nu5,
    Nu6,
    Nu7,
    Nu8,
    Nu9,
    Nu10,
}

impl RuleTag {
    pub const ALL: [RuleTag; 20] = [
        RuleTag::Beta1,
        RuleTag::Beta2,
        RuleTag::Beta3,
        RuleTag::Beta4,
        RuleTag::Pi1,
        RuleTag::Pi2,
        RuleTag::Pi3,
        RuleTag::Pi4,
        RuleTag::Pi5,
        RuleTag::Pi6,
        RuleTag::Nu1,
        RuleTag::Nu2,
        RuleTag::Nu3,
        RuleTag::Nu4,
        RuleTag::Nu5,
        RuleTag::Nu6,
        RuleTag::Nu7,
        RuleTag::Nu8,
        RuleTag::Nu9,
        RuleTag::Nu10,
    ];

    pub fn name(self) -> &'static str {
        use RuleTag::*;
        match self {
            Beta1 => "β1",
            Beta2 => "β2",
            Beta3 => "β3",
            Beta4 => "β4",
            Pi1 => "π1",
            Pi2 => "π2",
            Pi3 => "π3",
            Pi4 => "π4",
            Pi5 => "π5",
            Pi6 => "π6",
            Nu1 => "ν1",
            Nu2 => "ν2",
            Nu3 => "ν3",
            Nu4 => "ν4",
            Nu5 => "ν5",
            Nu6 => "ν6",
            Nu7 => "ν7",
            Nu8 => "ν8",
            Nu9 => "ν9",
            Nu10 => "ν10",
        }
    }

    pub fn parse(s: &str) -> Option<RuleTag> {
        RuleTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sequence of child positions from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Path(pub Vec<Step>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// A redex occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Redex {
    pub path: Path,
    pub tag: RuleTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("no {tag} redex at {path}")]
    InvalidRedex { path: Path, tag: RuleTag },
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { steps: u64 },
    #[error("term grew beyond {limit} nodes")]
    SizeExceeded { limit: usize },
}

/// Which axiom applies at the root, if any. At most one can.
pub fn root_redex(e: &Expr) -> Option<RuleTag> {
    use RuleTag::*;
    match e.node() {
        Node::Apply(f, a) => match (f.node(), a.node()) {
            (Node::UnivAbs { .. }, _) => Some(Beta1),
            (Node::ExistAbs { .. }, _) => Some(Beta2),
            (Node::Case(..), Node::InjL { .. }) => Some(Beta3),
            (Node::Case(..), Node::InjR { .. }) => Some(Beta4),
            _ => None,
        },
        Node::ProjL(a) => match a.node() {
            Node::ProtDef { .. } => Some(Pi1),
            Node::Product(..) => Some(Pi3),
            Node::Sum(..) => Some(Pi5),
            _ => None,
        },
        Node::ProjR(a) => match a.node() {
            Node::ProtDef { .. } => Some(Pi2),
            Node::Product(..) => Some(Pi4),
            Node::Sum(..) => Some(Pi6),
            _ => None,
        },
        Node::Neg(a) => match a.node() {
            Node::Neg(_) => Some(Nu1),
            Node::Product(..) => Some(Nu2),
            Node::Sum(..) => Some(Nu3),
            Node::UnivAbs { .. } => Some(Nu4),
            Node::ExistAbs { .. } => Some(Nu5),
            Node::Tau => Some(Nu6),
            Node::ProtDef { .. } => Some(Nu7),
            Node::InjL { .. } => Some(Nu8),
            Node::InjR { .. } => Some(Nu9),
            Node::Case(..) => Some(Nu10),
            _ => None,
        },
        _ => None,
    }
}

/// Contract the root redex.
pub fn contract(e: &Expr) -> Option<(RuleTag, Expr)> {
    use RuleTag::*;
    let tag = root_redex(e)?;
    let out = match (tag, e.node()) {
        (Beta1 | Beta2, Node::Apply(f, a)) => match f.node() {
            Node::UnivAbs { body, .. } | Node::ExistAbs { body, .. } => body.instantiate(a),
            _ => unreachable!(),
        },
        (Beta3 | Beta4, Node::Apply(f, a)) => match (f.node(), a.node()) {
            (Node::Case(l, _), Node::InjL { value, .. }) => Expr::apply(l.clone(), value.clone()),
            (Node::Case(_, r), Node::InjR { value, .. }) => Expr::apply(r.clone(), value.clone()),
            _ => unreachable!(),
        },
        (_, Node::ProjL(a)) => match a.node() {
            Node::ProtDef { witness, .. } => witness.clone(),
            Node::Product(x, _) | Node::Sum(x, _) => x.clone(),
            _ => unreachable!(),
        },
        (_, Node::ProjR(a)) => match a.node() {
            Node::ProtDef { body, .. } => body.clone(),
            Node::Product(_, y) | Node::Sum(_, y) => y.clone(),
            _ => unreachable!(),
        },
        (_, Node::Neg(a)) => match a.node() {
            Node::Neg(x) => x.clone(),
            Node::Product(x, y) => Expr::sum(Expr::neg(x.clone()), Expr::neg(y.clone())),
            Node::Sum(x, y) => Expr::product(Expr::neg(x.clone()), Expr::neg(y.clone())),
            Node::UnivAbs { hint, dom, body } => Expr::exist(hint.clone(), dom.clone(), Expr::neg(body.clone())),
            Node::ExistAbs { hint, dom, body } => Expr::univ(hint.clone(), dom.clone(), Expr::neg(body.clone())),
            Node::Tau | Node::ProtDef { .. } | Node::InjL { .. } | Node::InjR { .. } | Node::Case(..) => a.clone(),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    };
    Some((tag, out))
}

/// All redex occurrences in pre-order (root first, children left to right).
pub fn redexes(e: &Expr) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_redexes(e, &mut path, &mut out);
    out
}

fn collect_redexes(e: &Expr, path: &mut Vec<Step>, out: &mut Vec<Redex>) {
    if let Some(tag) = root_redex(e) {
        out.push(Redex { path: Path(path.clone()), tag });
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i as Step);
        collect_redexes(c, path, out);
        path.pop();
    }
}

/// True when no redex occurs anywhere.
pub fn is_normal(e: &Expr) -> bool {
    root_redex(e).is_none() && e.children().into_iter().all(is_normal)
}

/// Contract the redex named by `path` and `tag`.
pub fn step_at(e: &Expr, path: &Path, tag: RuleTag) -> Result<Expr, ReductionError> {
    let bad = || ReductionError::InvalidRedex { path: path.clone(), tag };
    let sub = e.at_path(&path.0).ok_or_else(bad)?;
    match contract(sub) {
        Some((t, r)) if t == tag => e.replace_at(&path.0, r).ok_or_else(bad),
        _ => Err(bad()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Pre-order: root first, then children left to right.
    LeftmostOutermost,
    /// Post-order: children right to left, then the root.
    RightmostInnermost,
}

/// Perform one step under `strategy`; returns the reduct and the contracted redex.
pub fn step(e: &Expr, strategy: Strategy) -> Option<(Expr, Redex)> {
    let mut path = Vec::new();
    let (r, tag) = match strategy {
        Strategy::LeftmostOutermost => step_lo(e, &mut path)?,
        Strategy::RightmostInnermost => step_ri(e, &mut path)?,
    };
    Some((r, Redex { path: Path(path), tag }))
}

fn step_lo(e: &Expr, path: &mut Vec<Step>) -> Option<(Expr, RuleTag)> {
    if let Some((tag, r)) = contract(e) {
        return Some((r, tag));
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i as Step);
        if let Some((c2, tag)) = step_lo(c, path) {
            return Some((e.with_child(i, c2), tag));
        }
        path.pop();
    }
    None
}

fn step_ri(e: &Expr, path: &mut Vec<Step>) -> Option<(Expr, RuleTag)> {
    let kids = e.children();
    for i in (0..kids.len()).rev() {
        path.push(i as Step);
        if let Some((c2, tag)) = step_ri(kids[i], path) {
            return Some((e.with_child(i, c2), tag));
        }
        path.pop();
    }
    contract(e).map(|(tag, r)| (r, tag))
}

/// One recorded step of a normalisation trace.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub redex: Redex,
    pub result: Expr,
}

/// Result of a normalisation run.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub expr: Expr,
    pub steps: u64,
    pub trace: Vec<TraceStep>,
}

/// Configurable normaliser.
#[derive(Clone, Debug)]
pub struct Normalizer {
    pub strategy: Strategy,
    pub fuel: u64,
    pub trace: bool,
    /// Abort when an intermediate term exceeds this many nodes.
    pub size_limit: Option<usize>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer { strategy: Strategy::LeftmostOutermost, fuel: DEFAULT_FUEL, trace: false, size_limit: None }
    }
}

impl Normalizer {
    pub fn new(strategy: Strategy, fuel: u64) -> Normalizer {
        Normalizer { strategy, fuel, ..Normalizer::default() }
    }

    pub fn with_trace(mut self) -> Normalizer {
        self.trace = true;
        self
    }

    pub fn run(&self, e: &Expr) -> Result<Normalized, ReductionError> {
        let mut cur = e.clone();
        let mut steps = 0u64;
        let mut trace = Vec::new();
        loop {
            match step(&cur, self.strategy) {
                None => return Ok(Normalized { expr: cur, steps, trace }),
                Some((next, redex)) => {
                    if steps >= self.fuel {
                        return Err(ReductionError::FuelExhausted { steps });
                    }
                    steps += 1;
                    if let Some(limit) = self.size_limit {
                        if next.size() > limit {
                            return Err(ReductionError::SizeExceeded { limit });
                        }
                    }
                    if self.trace {
                        trace.push(TraceStep { redex, result: next.clone() });
                    }
                    cur = next;
                }
            }
        }
    }
}

/// Leftmost-outermost normal form within `fuel` steps.
pub fn normalize(e: &Expr, fuel: u64) -> Result<Expr, ReductionError> {
    Normalizer::new(Strategy::LeftmostOutermost, fuel).run(e).map(|n| n.expr)
}

/// Beta-pi-nu convertibility, decided by comparing normal forms.
pub fn converts(a: &Expr, b: &Expr, fuel: u64) -> Result<bool, ReductionError> {
    if a == b {
        return Ok(true);
    }
    Ok(normalize(a, fuel)? == normalize(b, fuel)?)
}

/// Shape of an expression with respect to valid normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormalClass {
    /// A valid normal form that is not a dead end.
    InN,
    /// A dead end: a variable possibly under eliminations.
    InD,
    /// Irreducible but not a valid normal form, such as `(tau tau)`.
    Stuck,
    /// Contains a redex.
    Reducible,
}

impl fmt::Display for NormalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalClass::InN => "InN",
            NormalClass::InD => "InD",
            NormalClass::Stuck => "Stuck",
            NormalClass::Reducible => "Reducible",
        })
    }
}

pub fn classify(e: &Expr) -> NormalClass {
    if !is_normal(e) {
        NormalClass::Reducible
    } else if in_d(e) {
        NormalClass::InD
    } else if in_n(e) {
        NormalClass::InN
    } else {
        NormalClass::Stuck
    }
}

fn in_d(e: &Expr) -> bool {
    match e.node() {
        Node::Bound(_) | Node::Free(_) => true,
        Node::Apply(f, a) => match f.node() {
            Node::Case(l, r) => in_d(a) && in_n(l) && in_n(r),
            _ => in_d(f) && in_n(a),
        },
        Node::ProjL(a) | Node::ProjR(a) => in_d(a),
        Node::Neg(a) => !matches!(a.node(), Node::Neg(_)) && in_d(a),
        _ => false,
    }
}

fn in_n(e: &Expr) -> bool {
    match e.node() {
        Node::Tau => true,
        Node::UnivAbs { dom, body, .. } | Node::ExistAbs { dom, body, .. } => in_n(dom) && in_n(body),
        Node::ProtDef { witness, body, template, .. } => in_n(witness) && in_n(body) && in_n(template),
        Node::Product(a, b) | Node::Sum(a, b) | Node::Case(a, b) => in_n(a) && in_n(b),
        Node::InjL { value, other } | Node::InjR { other, value } => in_n(value) && in_n(other),
        _ => in_d(e),
    }
}
