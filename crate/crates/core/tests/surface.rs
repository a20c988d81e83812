mod common;

use common::{arb_expr, ex};
use dkernel::corpus::default_dir;
use dkernel::meta::{gen_case, GenConfig};
use dkernel::surface::elab::{elaborate, elaborate_free, instance_name};
use dkernel::surface::{
    parse_expr, parse_expr_term, parse_theory, print, ElabError, JobKind, Session,
};
use dkernel::Expr;
use proptest::prelude::*;

fn roundtrip(e: &Expr) {
    let s = print(e);
    let back = parse_expr(&s).unwrap_or_else(|err| panic!("{s}: {err}"));
    assert_eq!(&back, e, "printed as {s}");
}

#[test]
fn sugar_parses_to_the_core_forms() {
    assert_eq!(ex("[a => b]"), ex("[x:a]b"));
    assert_eq!(ex("[a;b => c]"), ex("[x:a][y:b]c"));
    assert_eq!(ex("[x,y:a; z!b]c"), ex("[x:a][y:a][z!b]c"));
    assert_eq!(ex("(f a b c)"), ex("(((f a) b) c)"));
    assert_eq!(ex("~a.1.2"), ex("~((a.1).2)"));
    assert_eq!(ex("-- note\n[x:tau]x -- trailing"), ex("[y:tau]y"));
}

#[test]
fn printing_uses_readable_names() {
    assert_eq!(print(&ex("[x:tau]x")), "[x:tau]x");
    assert_eq!(print(&ex("[x:tau]tau")), "[x:tau]tau");
    assert_eq!(print(&ex("[x := a, c : (P x)]")), "[x:=a,c:(P x)]");
    // A binder shadowing a free name is renamed on output.
    let e = Expr::univ_named(&dkernel::Name::new("x"), Expr::tau(), &ex("x"));
    let shadow = Expr::apply(e, ex("x"));
    roundtrip(&shadow);
}

#[test]
fn corpus_expressions_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(default_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "d") {
            let theory = parse_theory(&std::fs::read_to_string(&path).unwrap()).unwrap();
            for d in &theory.directives {
                for t in d.kind.terms() {
                    if let Ok(e) = elaborate_free(t) {
                        roundtrip(&e);
                        n += 1;
                    }
                }
            }
        }
    }
    assert!(n > 100, "only {n} expressions");
}

#[test]
fn generated_terms_round_trip() {
    let cfg = GenConfig::with_seed(3);
    for i in 0..500 {
        if let Some(g) = gen_case(&cfg, i) {
            roundtrip(&g.term);
            roundtrip(&g.ty);
        }
    }
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_expr_term("[x:tau x").unwrap_err();
    assert_eq!((err.span.line, err.span.col), (1, 8));
    let err = parse_theory("axiom a : tau.\ncheck (a : tau.").unwrap_err();
    assert_eq!(err.span.line, 2);
    assert!(parse_expr_term("[x:tau]").is_err());
    assert!(parse_expr_term("inl{a}").is_err());
    assert!(parse_expr_term("a b").is_err());
}

#[test]
fn unknown_and_duplicate_names_are_rejected() {
    let t = parse_theory("axiom a : tau.\naxiom a : tau.").unwrap();
    assert!(matches!(elaborate(&t), Err(ElabError::Duplicate { .. })));
    let t = parse_theory("check b : tau.").unwrap();
    let err = elaborate(&t).unwrap_err();
    assert!(matches!(&err, ElabError::UnknownName { name, .. } if name == "b"));
    assert_eq!(err.span().line, 1);
    let t = parse_theory("def f := (f tau).").unwrap();
    assert!(matches!(elaborate(&t), Err(ElabError::UnknownName { .. } | ElabError::RecursiveDef { .. })));
}

#[test]
fn definitions_unfold_and_judgments_become_jobs() {
    let t = parse_theory("axiom a : tau.\ndef id := [x:a]x.\ncheck id : [a => a].\nnormalize (id a).\nassert (id a) == a.")
        .unwrap();
    let jobs = elaborate(&t).unwrap();
    assert_eq!(jobs.len(), 3);
    assert!(matches!(jobs[0].kind, JobKind::Check { .. }));
    let mut s = Session::new(dkernel::DEFAULT_FUEL);
    let vs = s.process("t.d", &t);
    assert!(vs.iter().all(|v| v.ok), "{vs:?}");
    assert_eq!(vs[3].detail, "a");
}

#[test]
fn scheme_instances_are_named_by_their_normal_arguments() {
    let src = "axiom a : tau.\nscheme K(A) : [A => A].\ncheck K[a] : [a => a].\ncheck K[([x:tau]x a)] : [a => a].";
    let t = parse_theory(src).unwrap();
    let mut s = Session::new(dkernel::DEFAULT_FUEL);
    let vs = s.process("k.d", &t);
    assert!(vs.iter().all(|v| v.ok), "{vs:?}");
    let name = instance_name("K", &[ex("a")]);
    assert!(s.ctx.lookup(&name).is_some());
    assert_eq!(s.ctx.len(), 2, "convertible arguments share one instance");
    assert!(name.as_str().starts_with("K@") && name.as_str().len() == 2 + 12);
    assert_ne!(name, instance_name("K", &[ex("tau")]));
}

#[test]
fn scheme_misuse_is_reported() {
    let base = "axiom a : tau.\nscheme K(A) : [A => A].\n";
    let elab = |extra: &str| elaborate(&parse_theory(&format!("{base}{extra}")).unwrap());
    assert!(matches!(elab("check K[a,a] : tau."), Err(ElabError::Arity { .. })));
    assert!(matches!(elab("check K : tau."), Err(ElabError::BareScheme { .. })));
    assert!(matches!(elab("check a[a] : tau."), Err(ElabError::NotAScheme { .. })));
    assert!(matches!(elab("check [y:tau]K[y] : tau."), Err(ElabError::BoundSchemeArgument { .. })));
}

#[test]
fn invalid_assertions_report_the_error_kind() {
    let t = parse_theory("axiom a : tau.\nassert invalid (a a).\nassert invalid [x:a]x.").unwrap();
    let vs = Session::new(dkernel::DEFAULT_FUEL).process("n.d", &t);
    assert!(vs[1].ok);
    assert_eq!(vs[1].error.as_deref(), Some("NotAFunction"));
    assert!(!vs[2].ok);
}

proptest! {
    #[test]
    fn arbitrary_terms_round_trip(e in arb_expr()) {
        let s = print(&e);
        prop_assert_eq!(parse_expr(&s).unwrap(), e);
    }
}
