//! Query dispatch by range length and candidate verification.

use super::{MajorityIndex, NIL};
use crate::dynseq::DynamicSequence;
use crate::error::{Error, Result};
use crate::fraction::{at_most, exceeds, Fraction};
use crate::frequent::scan_majorities;
use crate::gamma_chunks::scan_chunks;
use crate::Symbol;

/// Which structure answered a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryPath {
    /// The range was extracted and scanned.
    Direct,
    /// `β ≤ 1/σ`: every symbol was counted.
    AllSymbols,
    /// Tree node list at this level.
    Large { level: u32 },
    /// Miniblock list at medium level `-level`.
    Medium { level: u32 },
    /// Chunked list at β sub-level `-level`.
    Beta { level: u32 },
}

/// What a query looked at; used by tests and benchmark reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryTrace {
    pub path: QueryPath,
    /// Candidates whose count was computed with `rank`.
    pub verified: usize,
    /// Candidates cut off by the stop rule, with their stored counts
    /// (β levels report the chunk bound instead).
    pub skipped: Vec<(Symbol, u64)>,
    /// Chunks decoded on β levels.
    pub chunks: usize,
    /// Updates since the consulted list was computed.
    pub drift: u64,
}

impl QueryTrace {
    pub fn new(path: QueryPath) -> Self {
        QueryTrace { path, verified: 0, skipped: Vec::new(), chunks: 0, drift: 0 }
    }
}

/// Counts the candidates of `S[l..=r]` in stored-count order and keeps those
/// above `β · (r - l + 1)`.
///
/// Stops at the first candidate whose stored count plus `drift` (updates
/// since the counts were taken) cannot exceed the threshold; every later
/// candidate has a stored count no larger, so none of them can qualify.
pub fn verify_candidates(
    seq: &DynamicSequence,
    candidates: &[(Symbol, u64)],
    l: usize,
    r: usize,
    beta: Fraction,
    drift: u64,
    mut trace: Option<&mut QueryTrace>,
) -> Vec<Symbol> {
    let len = (r - l + 1) as u64;
    let mut out = Vec::new();
    for (k, &(c, stored)) in candidates.iter().enumerate() {
        if at_most(stored + drift, beta, len) {
            if let Some(t) = trace.as_deref_mut() {
                t.skipped.extend_from_slice(&candidates[k..]);
            }
            break;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.verified += 1;
        }
        let count = seq.count_in(c, l, r) as u64;
        if exceeds(count, beta, len) {
            out.push(c);
        }
    }
    out.sort_unstable();
    out
}

impl MajorityIndex {
    /// Symbols occurring more than `β · (r - l + 1)` times in `S[l..=r]`.
    pub fn query(&self, l: usize, r: usize, beta: Fraction) -> Result<Vec<Symbol>> {
        self.run_query(l, r, beta, None)
    }

    pub fn query_traced(&self, l: usize, r: usize, beta: Fraction) -> Result<(Vec<Symbol>, QueryTrace)> {
        let mut trace = QueryTrace::new(QueryPath::Direct);
        let out = self.run_query(l, r, beta, Some(&mut trace))?;
        Ok((out, trace))
    }

    /// Checks `β` against the build threshold; `Ok(true)` means every
    /// symbol must be tried.
    pub(crate) fn check_beta(&self, beta: Fraction) -> Result<bool> {
        if *beta.numer() == 0 || beta >= Fraction::from_integer(1) {
            return Err(Error::ThresholdOutOfRange(beta.to_string()));
        }
        let sigma = self.sigma() as u128;
        if *beta.numer() as u128 * sigma <= *beta.denom() as u128 {
            return Ok(true);
        }
        if beta < self.params.alpha_eff {
            return Err(Error::ThresholdBelowBuildAlpha {
                beta: beta.to_string(),
                alpha: self.params.alpha_eff.to_string(),
            });
        }
        Ok(false)
    }

    fn run_query(&self, l: usize, r: usize, beta: Fraction, mut trace: Option<&mut QueryTrace>) -> Result<Vec<Symbol>> {
        self.check_range(l, r)?;
        let all = self.check_beta(beta)?;
        let len = (r - l + 1) as u64;
        let set_path = |trace: &mut Option<&mut QueryTrace>, path| {
            if let Some(t) = trace.as_deref_mut() {
                t.path = path;
            }
        };
        if all {
            set_path(&mut trace, QueryPath::AllSymbols);
            let mut out = Vec::new();
            for c in 1..=self.sigma() {
                if let Some(t) = trace.as_deref_mut() {
                    t.verified += 1;
                }
                let count = self.seq.count_in(c, l, r) as u64;
                if exceeds(count, beta, len) {
                    out.push(c);
                }
            }
            return Ok(out);
        }
        let p = &self.params;
        if len >= p.leaf {
            return Ok(self.query_large(l, r, beta, trace));
        }
        if len > p.mini {
            if let Some(out) = self.query_medium(l, r, beta, trace.as_deref_mut()) {
                return Ok(out);
            }
        } else if len >= p.beta_floor(beta) {
            if let Some(out) = self.query_beta(l, r, beta, trace.as_deref_mut()) {
                return Ok(out);
            }
        }
        set_path(&mut trace, QueryPath::Direct);
        let window = self.seq.extract(l, r)?;
        scan_majorities(&window, beta)
    }

    /// Lowest level `l` with `r ≤ b_{l+1}`, capped at the root level.
    pub(crate) fn large_level(&self, len: u64) -> u32 {
        let height = self.node(self.root).level;
        let mut level = 0;
        while level < height && 2 * len > self.params.weight(level + 1) {
            level += 1;
        }
        level
    }

    fn query_large(&self, l: usize, r: usize, beta: Fraction, mut trace: Option<&mut QueryTrace>) -> Vec<Symbol> {
        let len = (r - l + 1) as u64;
        let level = self.large_level(len);
        let (cands, drift) = if level == self.node(self.root).level {
            (&self.root_cands, self.root_u)
        } else {
            let (v, _) = self.descend(l, level);
            let parent = self.node(self.node(v).parent);
            (&parent.cands, parent.u)
        };
        if let Some(t) = trace.as_deref_mut() {
            t.path = QueryPath::Large { level };
            t.drift = drift;
        }
        verify_candidates(&self.seq, cands, l, r, beta, drift, trace)
    }

    fn query_medium(&self, l: usize, r: usize, beta: Fraction, trace: Option<&mut QueryTrace>) -> Option<Vec<Symbol>> {
        let len = (r - l + 1) as u64;
        let (leaf, start) = self.descend(l, 0);
        let arenas = self.node(leaf).arenas.as_deref()?;
        let level = (0..=self.params.mini_levels).rev().find(|&lv| self.params.mini_len(lv) > len)?;
        let (s, _) = arenas.mini.locate(level as usize, (l - start) as u64);
        let slot = &arenas.mini.slots[s as usize];
        let cands: Vec<(Symbol, u64)> = slot.cands.iter().map(|&(c, n)| (c, n as u64)).collect();
        let drift = slot.u as u64;
        let mut trace = trace;
        if let Some(t) = trace.as_deref_mut() {
            t.path = QueryPath::Medium { level };
            t.drift = drift;
        }
        Some(verify_candidates(&self.seq, &cands, l, r, beta, drift, trace))
    }

    /// β sub-level query; `None` when no sub-level fits the range.
    fn query_beta(
        &self,
        l: usize,
        r: usize,
        beta: Fraction,
        mut trace: Option<&mut QueryTrace>,
    ) -> Option<Vec<Symbol>> {
        let len = (r - l + 1) as u64;
        let p = &self.params;
        let level = (0..p.beta_levels).rev().find(|&lv| p.beta_len(lv) > len)?;
        if 2 * len < p.beta_len(level) || p.beta_alpha(level) > beta {
            return None;
        }
        if self.root == NIL {
            return None;
        }
        let (leaf, start) = self.descend(l, 0);
        let arenas = self.node(leaf).arenas.as_deref()?;
        let b = &arenas.beta[level as usize];
        let (k, _, _) = b.route.locate((l - start) as u64);
        let block = &b.blocks[k];
        let drift = block.u as u64;
        let window = block.window as u64;
        if let Some(t) = trace.as_deref_mut() {
            t.path = QueryPath::Beta { level };
            t.drift = drift;
        }
        let mut out = Vec::new();
        let mut scan = scan_chunks(&block.cands);
        let mut buf = Vec::new();
        while let Some(q) = scan.upcoming() {
            // Symbols in chunk q had fewer than window / 2^(q-1) occurrences.
            let bound = if q == 0 { window } else { (window - 1) >> (q - 1) };
            if at_most(bound + drift, beta, len) {
                if let Some(t) = trace.as_deref_mut() {
                    while let Ok(Some(q)) = scan.next_chunk_into(&mut buf) {
                        let bound = if q == 0 { window } else { (window - 1) >> (q - 1) };
                        t.skipped.extend(buf.iter().map(|&c| (c, bound)));
                    }
                }
                break;
            }
            scan.next_chunk_into(&mut buf).expect("well-formed chunk stream");
            if let Some(t) = trace.as_deref_mut() {
                t.chunks += 1;
                t.verified += buf.len();
            }
            for &c in &buf {
                let count = self.seq.count_in(c, l, r) as u64;
                if exceeds(count, beta, len) {
                    out.push(c);
                }
            }
        }
        out.sort_unstable();
        Some(out)
    }
}
