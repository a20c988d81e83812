//! Golden corpus: theory files plus a manifest of expected verdicts.
//!
//! The manifest (`manifest.tsv`) has two kinds of lines:
//!
//! ```text
//! session <name> <file> <file> ...        files checked in one shared context
//! <file>\t<index>\t<verdict>\t<locus>     expected outcome of a judgment
//! ```
//!
//! A verdict is `ok` or the name of the error kind that must be reported.
//! Every judgment directive in a session needs a manifest row; axioms,
//! definitions and schemes must simply be accepted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::surface::{parse_theory, Session, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    Ok,
    Kind(String),
}

#[derive(Clone, Debug)]
pub struct GoldenCase {
    pub file: String,
    pub index: usize,
    pub expected: Expected,
    pub locus: String,
}

#[derive(Clone, Debug)]
pub struct CorpusSession {
    pub name: String,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub sessions: Vec<CorpusSession>,
    pub cases: Vec<GoldenCase>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
}

impl Manifest {
    pub fn parse(src: &str) -> Result<Manifest, CorpusError> {
        let mut m = Manifest::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |msg: &str| CorpusError::Manifest { line: i + 1, msg: msg.to_string() };
            if let Some(rest) = line.strip_prefix("session ") {
                let mut parts = rest.split_whitespace();
                let name = parts.next().ok_or_else(|| bad("session needs a name"))?.to_string();
                let files: Vec<String> = parts.map(str::to_string).collect();
                if files.is_empty() {
                    return Err(bad("session lists no files"));
                }
                m.sessions.push(CorpusSession { name, files });
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return Err(bad("expected file, index, verdict and locus separated by tabs"));
            }
            let index = cols[1].trim().parse().map_err(|_| bad("index is not a number"))?;
            let expected = match cols[2].trim() {
                "ok" => Expected::Ok,
                k => Expected::Kind(k.to_string()),
            };
            m.cases.push(GoldenCase {
                file: cols[0].trim().to_string(),
                index,
                expected,
                locus: cols.get(3).map(|s| s.trim().to_string()).unwrap_or_default(),
            });
        }
        Ok(m)
    }

    pub fn load(dir: &Path) -> Result<Manifest, CorpusError> {
        let path = dir.join("manifest.tsv");
        let src = fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })?;
        Manifest::parse(&src)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    /// Judgments compared against the manifest.
    pub checks: usize,
    pub passed: usize,
    pub failures: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub elapsed: Duration,
}

impl CorpusReport {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn matches(expected: &Expected, v: &Verdict) -> bool {
    match expected {
        Expected::Ok => v.ok,
        Expected::Kind(k) => v.error.as_deref() == Some(k.as_str()) && (v.ok || v.kind != "assert-invalid"),
    }
}

/// Check every session of the corpus in `dir` against its manifest.
pub fn run_corpus(dir: &Path, fuel: u64) -> Result<CorpusReport, CorpusError> {
    let start = Instant::now();
    let manifest = Manifest::load(dir)?;
    let mut expected: BTreeMap<(String, usize), &GoldenCase> = BTreeMap::new();
    let mut report = CorpusReport::default();
    for c in &manifest.cases {
        if expected.insert((c.file.clone(), c.index), c).is_some() {
            report.failures.push(format!("{}#{}: listed twice in the manifest", c.file, c.index));
        }
    }
    let mut seen: BTreeSet<(String, usize)> = BTreeSet::new();
    for s in &manifest.sessions {
        let mut session = Session::new(fuel);
        for f in &s.files {
            let path = dir.join(f);
            let src = fs::read_to_string(&path).map_err(|source| CorpusError::Io { path: path.clone(), source })?;
            let theory = match parse_theory(&src) {
                Ok(t) => t,
                Err(e) => {
                    report.failures.push(format!("{}: {f}: parse error {e}", s.name));
                    break;
                }
            };
            let verdicts = session.process(f, &theory);
            for (d, v) in theory.directives.iter().zip(&verdicts) {
                let key = (f.clone(), v.index);
                if d.kind.is_judgment() {
                    report.checks += 1;
                    seen.insert(key.clone());
                    match expected.get(&key) {
                        Some(c) if matches(&c.expected, v) => report.passed += 1,
                        Some(c) => report.failures.push(format!(
                            "{}: {f}#{} ({}): expected {:?}, got ok={} error={:?}: {}",
                            s.name, v.index, c.locus, c.expected, v.ok, v.error, v.detail
                        )),
                        None => report.failures.push(format!("{}: {f}#{}: judgment missing from the manifest", s.name, v.index)),
                    }
                } else if !v.ok {
                    report.failures.push(format!("{}: {f}#{}: {} rejected: {}", s.name, v.index, v.kind, v.detail));
                }
            }
            report.verdicts.extend(verdicts);
        }
    }
    for key in expected.keys() {
        if !seen.contains(key) {
            report.failures.push(format!("{}#{}: manifest row matches no judgment", key.0, key.1));
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Location of the corpus shipped with this repository.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}
