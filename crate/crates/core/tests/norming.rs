mod common;

use common::{arb_named, ctx, ex, Named};
use dkernel::meta::{gen_case, GenConfig};
use dkernel::norming::{norm, norm_size, Norm};
use dkernel::reduction::{redexes, step_at, Normalizer, Strategy as Order};
use dkernel::typing::{infer, valid};
use dkernel::Context;
use proptest::prelude::*;

// Norms as strings over named terms; `env` maps names to their norms.
fn oracle(env: &mut Vec<(String, Option<String>)>, t: &Named) -> Option<String> {
    fn split(n: &str) -> Option<(String, String)> {
        let inner = n.strip_prefix('[')?.strip_suffix(']')?;
        let mut depth = 0;
        for (i, c) in inner.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                ',' if depth == 0 => return Some((inner[..i].into(), inner[i + 1..].into())),
                _ => {}
            }
        }
        None
    }
    let pair = |a: String, b: String| format!("[{a},{b}]");
    let binder = |env: &mut Vec<(String, Option<String>)>, x: &str, a: Option<String>, body: &Named| {
        env.push((x.into(), a));
        let r = oracle(env, body);
        env.pop();
        r
    };
    match t {
        Named::Tau => Some("tau".into()),
        Named::Var(x) => env.iter().rev().find(|(y, _)| y == x)?.1.clone(),
        Named::Univ(x, d, body) | Named::Exist(x, d, body) => {
            let a = oracle(env, d)?;
            let b = binder(env, x, Some(a.clone()), body)?;
            Some(pair(a, b))
        }
        Named::App(f, a) => {
            let (d, c) = split(&oracle(env, f)?)?;
            (d == oracle(env, a)?).then_some(c)
        }
        Named::ProtDef(x, w, c, tmpl) => {
            let a = oracle(env, w)?;
            let b = oracle(env, c)?;
            let t = binder(env, x, Some(a.clone()), tmpl)?;
            (t == b).then(|| pair(a, b))
        }
        Named::Product(a, b) | Named::Sum(a, b) | Named::InjL(a, b) | Named::InjR(a, b) => {
            Some(pair(oracle(env, a)?, oracle(env, b)?))
        }
        Named::ProjL(a) => split(&oracle(env, a)?).map(|p| p.0),
        Named::ProjR(a) => split(&oracle(env, a)?).map(|p| p.1),
        Named::Case(l, r) => {
            let (a, c1) = split(&oracle(env, l)?)?;
            let (b, c2) = split(&oracle(env, r)?)?;
            (c1 == c2).then(|| pair(pair(a, b), c1))
        }
        Named::Neg(a) => oracle(env, a),
    }
}

fn triple() -> Context {
    ctx(&[("p", "tau"), ("q", "tau"), ("z", "[x:p][y:q]tau"), ("w", "[x:tau]x")])
}

#[test]
fn valid_and_normable() {
    let g = triple();
    let e = ex("[x:p](z x)");
    assert!(valid(&g, &e));
    assert_eq!(norm(&g, &e).unwrap().to_string(), "[tau,[tau,tau]]");
}

#[test]
fn normable_but_invalid() {
    let g = triple();
    let e = ex("[x:p](z p)");
    assert!(!valid(&g, &e));
    assert_eq!(norm(&g, &e).unwrap().to_string(), "[tau,[tau,tau]]");
}

#[test]
fn neither_valid_nor_normable() {
    let e = ex("[x:[y:tau]y](x x)");
    assert!(!valid(&Context::new(), &e));
    assert_eq!(norm(&Context::new(), &e), None);
}

#[test]
fn context_variables_take_the_norm_of_their_type() {
    let g = triple();
    assert_eq!(norm(&g, &ex("w")).unwrap().to_string(), "[tau,tau]");
    assert_eq!(norm(&g, &ex("(w p)")).unwrap(), Norm::Tau);
    assert_eq!(norm(&g, &ex("unknown")), None);
    assert_eq!(norm_size(&g, &ex("z")), Some(3));
}

#[test]
fn omega_has_no_norm() {
    assert_eq!(norm(&Context::new(), &ex("([x:tau](x x) [x:tau](x x))")), None);
}

#[test]
fn generated_terms_share_norms_with_types_and_reducts() {
    let cfg = GenConfig::with_seed(11);
    for i in 0..300 {
        let Some(g) = gen_case(&cfg, i) else { continue };
        let n = norm(&g.ctx, &g.term).unwrap_or_else(|| panic!("case {i} not normable"));
        assert_eq!(norm(&g.ctx, &g.ty), Some(n.clone()), "case {i}: type");
        for rx in redexes(&g.term).into_iter().take(8) {
            let r = step_at(&g.term, &rx.path, rx.tag).unwrap();
            assert_eq!(norm(&g.ctx, &r), Some(n.clone()), "case {i}: reduct {r}");
        }
        let nf = Normalizer::new(Order::LeftmostOutermost, 1_000_000).run(&g.term).unwrap().expr;
        assert_eq!(norm(&g.ctx, &nf), Some(n), "case {i}: normal form");
        assert!(infer(&g.ctx, &nf).is_ok());
    }
}

proptest! {
    #[test]
    fn norms_match_a_named_oracle(t in arb_named()) {
        let g = ctx(&[("x", "tau"), ("y", "[a:tau]tau"), ("z", "[tau,tau]")]);
        let mut env: Vec<(String, Option<String>)> = vec![
            ("x".into(), Some("tau".into())),
            ("y".into(), Some("[tau,tau]".into())),
            ("z".into(), Some("[tau,tau]".into())),
        ];
        let want = oracle(&mut env, &t);
        let got = norm(&g, &t.to_expr()).map(|n| n.to_string());
        prop_assert_eq!(got, want);
    }
}
