//! `dcheck`: check theory files and query expressions of the d calculus.
//!
//! Exit status is 0 when every verdict is ok, 1 when a directive or query
//! fails, and 2 on parse or usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dkernel::certificate::replay_certificate;
use dkernel::explicit::es_normalize;
use dkernel::meta::{run_property, GenConfig, Property, PropertyReport};
use dkernel::norming::norm;
use dkernel::reduction::{classify, Normalizer, Strategy};
use dkernel::surface::{parse_expr_term, parse_theory, Session, Span, Verdict};
use dkernel::{Checker, Expr, DEFAULT_FUEL};

#[derive(Parser)]
#[command(name = "dcheck", version, about = "Verifying kernel for the d calculus")]
struct Cli {
    /// Reduction step budget for every normalisation.
    #[arg(long, global = true, env = "D_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Attach replayed rule certificates to successful checks.
    #[arg(long, global = true)]
    explain: bool,
    /// Cross-check normal forms against the explicit-substitution engine.
    #[arg(long, global = true)]
    oracle: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the directives of the files in order, in one shared context.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the inferred type of an expression.
    Typeof {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Theory files providing declarations.
        #[arg(long)]
        ctx: Vec<PathBuf>,
        /// Normalise the type before printing.
        #[arg(long)]
        nf: bool,
    },
    /// Print the normal form of an expression.
    Normalize {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(long)]
        ctx: Vec<PathBuf>,
        /// List every contraction with its rule and position.
        #[arg(long)]
        trace: bool,
    },
    /// Print the norm of an expression.
    Norm {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(long)]
        ctx: Vec<PathBuf>,
    },
    /// Classify an expression against the valid normal forms.
    Classify {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(long)]
        ctx: Vec<PathBuf>,
    },
    /// Run a metatheory property on generated terms.
    Meta {
        property: Property,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        /// Maximum generator depth.
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Stats {
    steps: u64,
    max_depth: usize,
}

#[derive(Serialize)]
struct Output {
    verdicts: Vec<Verdict>,
    stats: Stats,
}

/// Parse or read errors, reported with exit status 2.
struct UsageError(String);

fn load(session: &mut Session, files: &[PathBuf]) -> Result<Vec<Verdict>, UsageError> {
    let mut out = Vec::new();
    for f in files {
        let name = f.display().to_string();
        let src = fs::read_to_string(f).map_err(|e| UsageError(format!("{name}: {e}")))?;
        let theory = parse_theory(&src).map_err(|e| UsageError(format!("{name}:{e}")))?;
        out.extend(session.process(&name, &theory));
    }
    Ok(out)
}

fn verdict(kind: &str, ok: bool, detail: String, error: Option<String>) -> Verdict {
    Verdict { file: "<expr>".into(), index: 0, kind: kind.into(), ok, detail, span: Span::default(), error }
}

fn query(session: &mut Session, src: &str) -> Result<Expr, UsageError> {
    let term = parse_expr_term(src).map_err(|e| UsageError(format!("<expr>:{e}")))?;
    let e = session.elaborate_expr(&term).map_err(|e| UsageError(format!("<expr>: {e}")))?;
    Ok(e)
}

fn oracle_check(e: &Expr, kernel: &Expr, fuel: u64) -> Option<Verdict> {
    match es_normalize(e, fuel) {
        Ok(s) if &s.expr == kernel => None,
        Ok(s) => Some(verdict("internal-error", false, format!("oracle disagrees: {kernel} vs {}", s.expr), None)),
        Err(err) => Some(verdict("internal-error", false, format!("oracle failed: {err}"), None)),
    }
}

fn run(cli: &Cli, session: &mut Session) -> Result<Vec<Verdict>, UsageError> {
    let verdicts = match &cli.cmd {
        Cmd::Check { files } => return load(session, files),
        Cmd::Typeof { ctx, .. } | Cmd::Normalize { ctx, .. } | Cmd::Norm { ctx, .. } | Cmd::Classify { ctx, .. } => {
            load(session, ctx)?
        }
        Cmd::Meta { .. } => unreachable!("handled separately"),
    };
    // Context files must load cleanly before the query means anything.
    let failed: Vec<Verdict> = verdicts.into_iter().filter(|v| !v.ok).collect();
    if !failed.is_empty() {
        return Ok(failed);
    }
    let mut out = Vec::new();
    match &cli.cmd {
        Cmd::Typeof { expr, nf, .. } => {
            let e = query(session, expr)?;
            let mut ck = Checker::new(cli.fuel);
            let v = match ck.infer(&session.ctx, &e) {
                Ok(t) => {
                    let shown = if *nf { ck.normalize(&t) } else { Ok(t) };
                    match shown {
                        Ok(t) => {
                            let mut detail = t.to_string();
                            if cli.explain {
                                match ck.certificate(&session.ctx, &e, None) {
                                    Ok(c) => match replay_certificate(&c, cli.fuel) {
                                        Ok(()) => detail = format!("{detail}\n{}", c.root.render()),
                                        Err(err) => return Ok(vec![verdict("typeof", false, format!("certificate replay failed: {err}"), None)]),
                                    },
                                    Err(err) => return Ok(vec![verdict("typeof", false, err.to_string(), Some(err.kind.to_string()))]),
                                }
                            }
                            verdict("typeof", true, detail, None)
                        }
                        Err(err) => verdict("typeof", false, err.to_string(), Some(err.kind.to_string())),
                    }
                }
                Err(err) => verdict("typeof", false, err.to_string(), Some(err.kind.to_string())),
            };
            session.steps += ck.steps;
            out.push(v);
        }
        Cmd::Normalize { expr, trace, .. } => {
            let e = query(session, expr)?;
            let mut n = Normalizer::new(Strategy::LeftmostOutermost, cli.fuel);
            n.trace = *trace;
            match n.run(&e) {
                Ok(r) => {
                    session.steps += r.steps;
                    let mut lines: Vec<String> = r
                        .trace
                        .iter()
                        .enumerate()
                        .map(|(i, s)| format!("{}. {} at {}: {}", i + 1, s.redex.tag, s.redex.path, s.result))
                        .collect();
                    lines.push(r.expr.to_string());
                    out.push(verdict("normalize", true, lines.join("\n"), None));
                    if cli.oracle {
                        out.extend(oracle_check(&e, &r.expr, cli.fuel));
                    }
                }
                Err(err) => out.push(verdict("normalize", false, err.to_string(), Some("FuelExhausted".into()))),
            }
        }
        Cmd::Norm { expr, .. } => {
            let e = query(session, expr)?;
            out.push(match norm(&session.ctx, &e) {
                Some(n) => verdict("norm", true, n.to_string(), None),
                None => verdict("norm", false, "not normable".into(), None),
            });
        }
        Cmd::Classify { expr, .. } => {
            let e = query(session, expr)?;
            out.push(verdict("classify", true, classify(&e).to_string(), None));
        }
        Cmd::Check { .. } | Cmd::Meta { .. } => unreachable!(),
    }
    Ok(out)
}

fn print_report(r: &PropertyReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(r).expect("report serialises"));
        return;
    }
    println!(
        "{}: seed {} cases {} checked {} skipped {} failures {} max steps {} ({} ms)",
        r.property,
        r.seed,
        r.cases,
        r.checked,
        r.skipped,
        r.failures.len(),
        r.max_steps,
        r.elapsed_ms
    );
    for f in &r.failures {
        println!("  case {} in {}: {}\n    term: {}", f.index, f.context, f.detail, f.term);
        if let Some(s) = &f.shrunk {
            println!("    shrunk: {s}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Meta { property, seed, cases, depth } = &cli.cmd {
        let mut cfg = GenConfig::with_seed(*seed);
        cfg.fuel = cli.fuel;
        if let Some(d) = depth {
            cfg.max_depth = *d;
        }
        let report = run_property(*property, &cfg, *cases);
        print_report(&report, cli.json);
        return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
    }
    let plain_query = !matches!(cli.cmd, Cmd::Check { .. });
    let mut session = Session::new(cli.fuel);
    session.explain = cli.explain;
    session.oracle = cli.oracle;
    let verdicts = match run(&cli, &mut session) {
        Ok(v) => v,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let ok = verdicts.iter().all(|v| v.ok);
    if cli.json {
        let out = Output { verdicts, stats: Stats { steps: session.steps, max_depth: session.max_depth } };
        println!("{}", serde_json::to_string_pretty(&out).expect("verdicts serialise"));
    } else {
        for v in &verdicts {
            if plain_query && v.file == "<expr>" {
                if v.ok {
                    println!("{}", v.detail);
                } else {
                    println!("{}: {}", v.kind, v.detail);
                }
            } else {
                let status = if v.ok { "ok" } else { "FAIL" };
                let detail = v.detail.replace('\n', "\n    ");
                println!("{}:{}: {} #{} {status}: {detail}", v.file, v.span, v.kind, v.index);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
