//! Text workloads: one operation per line, 1-based positions.
//!
//! ```text
//! # comment
//! Q l r beta     β-majority query, beta as "0.25" or "1/4"
//! M l r          minority query
//! I i c          insert symbol c at position i
//! D i            delete position i
//! ```
//!
//! A symbol is a single printable non-digit character or a decimal byte
//! code (`I 3 53` inserts the character `5`). The comment lines `# seed N`
//! and `# source NAME` are recorded in [`Workload`].

use std::time::Instant;

use serde::Serialize;

use super::space::SpaceReport;
use crate::document::Document;
use crate::dynseq::Alphabet;
use crate::error::Error;
use crate::fraction::{parse_fraction, Fraction};
use crate::Symbol;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Majority { l: usize, r: usize, beta: Fraction },
    Minority { l: usize, r: usize },
    Insert { i: usize, byte: u8 },
    Delete { i: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workload {
    /// Operations with their 1-based line numbers and source text.
    pub ops: Vec<(usize, String, Op)>,
    pub source: Option<String>,
    pub seed: Option<u64>,
}

/// A workload failure tied to a line.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

fn parse_symbol(tok: &str) -> Option<u8> {
    if tok.bytes().all(|b| b.is_ascii_digit()) {
        return tok.parse().ok();
    }
    match tok.as_bytes() {
        [b] if b.is_ascii_graphic() => Some(*b),
        _ => None,
    }
}

impl Workload {
    pub fn parse(text: &str) -> Result<Workload, LineError> {
        let mut w = Workload::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                let mut it = comment.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("seed"), Some(v)) => w.seed = v.parse().ok(),
                    (Some("source"), Some(v)) => w.source = Some(v.to_string()),
                    _ => {}
                }
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            let op = parse_op(trimmed).map_err(|message| LineError { line, message })?;
            w.ops.push((line, trimmed.to_string(), op));
        }
        Ok(w)
    }

    /// Bytes inserted anywhere in the workload.
    pub fn inserted_bytes(&self) -> Vec<u8> {
        self.ops
            .iter()
            .filter_map(|(_, _, op)| match op {
                Op::Insert { byte, .. } => Some(*byte),
                _ => None,
            })
            .collect()
    }
}

fn parse_op(line: &str) -> Result<Op, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let pos = |k: usize| -> Result<usize, String> {
        let t = toks.get(k).ok_or_else(|| format!("missing operand {k}"))?;
        t.parse().map_err(|_| format!("bad position {t:?}"))
    };
    let arity = |n: usize| -> Result<(), String> {
        if toks.len() == n {
            Ok(())
        } else {
            Err(format!("{} expects {} operands, got {}", toks[0], n - 1, toks.len() - 1))
        }
    };
    match toks[0] {
        "Q" => {
            arity(4)?;
            let beta = parse_fraction(toks[3]).map_err(|e| e.to_string())?;
            Ok(Op::Majority { l: pos(1)?, r: pos(2)?, beta })
        }
        "M" => {
            arity(3)?;
            Ok(Op::Minority { l: pos(1)?, r: pos(2)? })
        }
        "I" => {
            arity(3)?;
            let byte = parse_symbol(toks[2]).ok_or_else(|| format!("bad symbol {:?}", toks[2]))?;
            Ok(Op::Insert { i: pos(1)?, byte })
        }
        "D" => {
            arity(2)?;
            Ok(Op::Delete { i: pos(1)? })
        }
        other => Err(format!("unknown operation {other:?}")),
    }
}

/// Renders a symbol as its character when printable, else its byte code.
pub fn show_symbol(alphabet: &Alphabet, s: Symbol) -> String {
    match alphabet.byte_of(s) {
        Some(b) if b.is_ascii_graphic() => (b as char).to_string(),
        Some(b) => b.to_string(),
        None => format!("#{s}"),
    }
}

/// Mean and median latency per operation class, in nanoseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub op_classes: Vec<String>,
    pub op_counts: Vec<u64>,
    pub mean_ns: Vec<f64>,
    pub median_ns: Vec<u64>,
}

impl Timings {
    /// `samples[k]` holds the latencies of class `classes[k]`.
    pub fn from_samples(classes: &[&str], samples: &mut [Vec<u64>]) -> Self {
        let mut t = Timings::default();
        for (name, s) in classes.iter().zip(samples.iter_mut()) {
            s.sort_unstable();
            t.op_classes.push(name.to_string());
            t.op_counts.push(s.len() as u64);
            t.mean_ns.push(if s.is_empty() { 0.0 } else { s.iter().sum::<u64>() as f64 / s.len() as f64 });
            t.median_ns.push(s.get(s.len() / 2).copied().unwrap_or(0));
        }
        t
    }
}

/// Machine-readable summary of one workload run; one flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub n_initial: usize,
    pub n_final: usize,
    pub alpha: String,
    #[serde(flatten)]
    pub timings: Timings,
    pub verifications_total: u64,
    pub verifications_per_query: f64,
    pub minority_candidates_total: u64,
    #[serde(flatten)]
    pub space: SpaceReport,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Op(#[from] LineError),
}

impl RunError {
    /// 1 for setup failures, 2 for an invalid operation.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Setup(_) => 1,
            RunError::Op(_) => 2,
        }
    }
}

const CLASSES: [&str; 4] = ["Q", "M", "I", "D"];

/// Builds both indexes over `text` with threshold `alpha`, runs `workload`
/// and returns one output line per query plus the report.
pub fn run_workload(text: &[u8], alpha: Fraction, workload: &Workload) -> Result<(Vec<String>, RunReport), RunError> {
    let mut all = text.to_vec();
    all.extend(workload.inserted_bytes());
    let alphabet = Alphabet::from_bytes(&all);
    let symbols = alphabet.encode(text);
    let mut doc =
        Document::build(&symbols, alphabet.sigma().max(1), alpha, alpha).map_err(|e| RunError::Setup(e.to_string()))?;
    let n_initial = doc.len();
    let mut samples: Vec<Vec<u64>> = vec![Vec::new(); 4];
    let (mut verifications, mut minority_candidates) = (0u64, 0u64);
    let mut lines = Vec::new();
    for (line, src, op) in &workload.ops {
        let fail = |e: Error| LineError { line: *line, message: e.to_string() };
        let start = Instant::now();
        let class = match *op {
            Op::Majority { l, r, beta } => {
                let (out, trace) = doc.query_majority_traced(l, r, beta).map_err(fail)?;
                verifications += trace.verified as u64;
                let shown: Vec<String> = out.iter().map(|&s| show_symbol(&alphabet, s)).collect();
                lines.push(format!("{src} -> {}", if shown.is_empty() { "none".into() } else { shown.join(" ") }));
                0
            }
            Op::Minority { l, r } => {
                let (out, trace) = doc.query_minority_traced(l, r).map_err(fail)?;
                minority_candidates += trace.candidates as u64;
                lines.push(format!("{src} -> {}", out.map_or("none".into(), |s| show_symbol(&alphabet, s))));
                1
            }
            Op::Insert { i, byte } => {
                doc.insert(alphabet.symbol_of(byte).expect("alphabet covers inserts"), i).map_err(fail)?;
                2
            }
            Op::Delete { i } => {
                doc.delete(i).map_err(fail)?;
                3
            }
        };
        samples[class].push(start.elapsed().as_nanos() as u64);
    }
    let timings = Timings::from_samples(&CLASSES, &mut samples);
    let queries = timings.op_counts[0];
    let report = RunReport {
        n_initial,
        n_final: doc.len(),
        alpha: alpha.to_string(),
        timings,
        verifications_total: verifications,
        verifications_per_query: if queries == 0 { 0.0 } else { verifications as f64 / queries as f64 },
        minority_candidates_total: minority_candidates,
        space: SpaceReport::for_document(&doc),
    };
    Ok((lines, report))
}
