//! Dynamic range α-minority index.
//!
//! `S` is cut into pieces holding `A..=3A` distinct symbols, `A = 1 + ⌊1/α⌋`
//! (a sole piece may hold fewer). Bitvector `P` marks piece starts and `C`
//! marks one occurrence of every distinct symbol of each piece. A range
//! touching at most two pieces has its minorities among their marked
//! symbols; a range containing a whole piece with `A` distinct symbols has a
//! minority among that piece's marks, since they cannot all exceed `α·len`.

use crate::dynseq::{DynamicBitvector, DynamicSequence};
use crate::error::{Error, Result};
use crate::fraction::{at_most, Fraction};
use crate::majority::AuditError;
use crate::Symbol;

/// Rank/select over a piece bitvector, 0-based like [`DynamicBitvector`].
pub trait PieceBits {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn get(&self, i: usize) -> bool;
    /// Ones among the first `i` bits.
    fn rank1(&self, i: usize) -> usize;
    /// Index of the `k`-th one.
    fn select1(&self, k: usize) -> Option<usize>;
}

impl PieceBits for DynamicBitvector {
    fn len(&self) -> usize {
        DynamicBitvector::len(self)
    }
    fn get(&self, i: usize) -> bool {
        DynamicBitvector::get(self, i)
    }
    fn rank1(&self, i: usize) -> usize {
        DynamicBitvector::rank1(self, i)
    }
    fn select1(&self, k: usize) -> Option<usize> {
        DynamicBitvector::select1(self, k)
    }
}

/// `1 + ⌊1/α⌋`.
pub fn candidate_budget(alpha: Fraction) -> usize {
    (alpha.denom() / alpha.numer()) as usize + 1
}

pub(crate) fn check_alpha(alpha: Fraction) -> Result<()> {
    if *alpha.numer() == 0 || alpha >= Fraction::from_integer(1) {
        return Err(Error::ThresholdOutOfRange(alpha.to_string()));
    }
    Ok(())
}

/// What one minority query looked at.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinorityTrace {
    /// Pieces overlapped by the range.
    pub pieces: usize,
    /// Candidates counted.
    pub candidates: usize,
    /// Distinct symbols of the contained piece, when that path ran.
    pub contained_distinct: Option<usize>,
    /// The contained piece yielded nothing and the end pieces were tried.
    pub fallback: bool,
}

/// Start of piece `k` (1-based), as a 1-based position.
fn piece_start<B: PieceBits>(p: &B, k: usize) -> Option<usize> {
    p.select1(k).map(|x| x + 1)
}

fn piece_end<B: PieceBits>(p: &B, k: usize) -> usize {
    piece_start(p, k + 1).map_or(p.len(), |s| s - 1)
}

/// Shared query over `S`, `P` and `C`; positions are 1-based and valid.
#[allow(clippy::too_many_arguments)]
pub(crate) fn find_minority<B: PieceBits>(
    seq: &DynamicSequence,
    p: &B,
    c: &B,
    alpha: Fraction,
    l: usize,
    r: usize,
    trace: &mut MinorityTrace,
) -> Option<Symbol> {
    let len = (r - l + 1) as u64;
    let try_marks = |x: usize, y: usize, trace: &mut MinorityTrace| {
        let base = c.rank1(x - 1);
        let mut k = 1;
        while let Some(pos) = c.select1(base + k).map(|q| q + 1).filter(|&q| q <= y) {
            let sym = seq.access_unchecked(pos);
            let count = seq.count_in(sym, l, r) as u64;
            trace.candidates += 1;
            if count > 0 && at_most(count, alpha, len) {
                return Some(sym);
            }
            k += 1;
        }
        None
    };
    let (kl, kr) = (p.rank1(l), p.rank1(r));
    trace.pieces = kr - kl + 1;
    let x = piece_start(p, kl).expect("P[1] is set");
    let y = piece_end(p, kr);
    if kr - kl < 2 {
        return try_marks(x, y, trace);
    }
    let k0 = p.rank1(l - 1) + 1;
    let (s, e) = (piece_start(p, k0).expect("contained piece"), piece_end(p, k0));
    trace.contained_distinct = Some(c.rank1(e) - c.rank1(s - 1));
    if let Some(sym) = try_marks(s, e, trace) {
        return Some(sym);
    }
    trace.fallback = true;
    try_marks(x, piece_end(p, kl), trace).or_else(|| try_marks(piece_start(p, kr).unwrap(), y, trace))
}

/// Counters behind the amortized repartition bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinorityStats {
    /// Pieces written by repartitions (each one counts the pieces it left).
    pub pieces_produced: u64,
    pub repartitions: u64,
    /// Underflowing pieces joined with a neighbor.
    pub merges: u64,
    /// Queries whose contained piece held `A` distinct symbols yet gave no
    /// minority. Always zero unless the structure is broken.
    pub guarantee_misses: u64,
    pub fallbacks: u64,
}

/// Piece partition of a sequence owned elsewhere. Every update must first be
/// applied to the sequence, then reported here.
#[derive(Clone, Debug)]
pub struct PieceIndex {
    alpha: Fraction,
    a: usize,
    p: DynamicBitvector,
    c: DynamicBitvector,
    stats: MinorityStats,
}

impl PieceIndex {
    /// Greedy left-to-right partition: a piece ends just before the symbol
    /// that would make it hold `A + 1` distinct symbols. A short tail joins
    /// the piece before it.
    pub fn build(seq: &DynamicSequence, alpha: Fraction) -> Result<Self> {
        check_alpha(alpha)?;
        let a = candidate_budget(alpha);
        let symbols = seq.to_vec();
        let (p, c) = greedy_pieces(&symbols, seq.sigma(), a);
        Ok(PieceIndex {
            alpha,
            a,
            p: DynamicBitvector::from_bits(p),
            c: DynamicBitvector::from_bits(c),
            stats: MinorityStats::default(),
        })
    }

    pub fn alpha(&self) -> Fraction {
        self.alpha
    }

    /// `A = 1 + ⌊1/α⌋`.
    pub fn budget(&self) -> usize {
        self.a
    }

    pub fn piece_count(&self) -> usize {
        self.p.count_ones()
    }

    pub fn stats(&self) -> MinorityStats {
        self.stats
    }

    pub fn starts(&self) -> &DynamicBitvector {
        &self.p
    }

    pub fn marks(&self) -> &DynamicBitvector {
        &self.c
    }

    /// `n − A·(m − 1)` for `m` pieces.
    pub fn potential(&self) -> i64 {
        self.p.len() as i64 - self.a as i64 * (self.piece_count() as i64 - 1)
    }

    /// Piece spans as 1-based inclusive ranges.
    pub fn pieces(&self) -> Vec<(usize, usize)> {
        (1..=self.piece_count()).map(|k| (piece_start(&self.p, k).unwrap(), piece_end(&self.p, k))).collect()
    }

    /// Bits of `P` and `C`.
    pub fn size_bits(&self) -> u64 {
        self.p.size_bits() + self.c.size_bits()
    }

    pub fn query(&mut self, seq: &DynamicSequence, l: usize, r: usize) -> Result<Option<Symbol>> {
        self.query_traced(seq, l, r).map(|(s, _)| s)
    }

    pub fn query_traced(
        &mut self,
        seq: &DynamicSequence,
        l: usize,
        r: usize,
    ) -> Result<(Option<Symbol>, MinorityTrace)> {
        check_range(seq.len(), l, r)?;
        let mut trace = MinorityTrace::default();
        let found = find_minority(seq, &self.p, &self.c, self.alpha, l, r, &mut trace);
        if trace.fallback {
            self.stats.fallbacks += 1;
            if trace.contained_distinct >= Some(self.a) && found.is_none() {
                self.stats.guarantee_misses += 1;
            }
        }
        Ok((found, trace))
    }

    fn piece_of(&self, i: usize) -> (usize, usize, usize) {
        let k = self.p.rank1(i);
        (k, piece_start(&self.p, k).unwrap(), piece_end(&self.p, k))
    }

    fn distinct(&self, x: usize, y: usize) -> usize {
        self.c.rank1(y) - self.c.rank1(x - 1)
    }

    /// Records that `S[i]` was just inserted.
    pub fn after_insert(&mut self, seq: &DynamicSequence, i: usize) -> Result<()> {
        let n = seq.len();
        if i == 0 || i > n || n != self.p.len() + 1 {
            return Err(Error::PositionOutOfRange { pos: i, len: n });
        }
        self.p.insert(i - 1, false);
        self.c.insert(i - 1, false);
        if i == 1 {
            // the new symbol joins the first piece
            self.p.set(0, true);
            if n > 1 {
                self.p.set(1, false);
            }
        }
        let sym = seq.access_unchecked(i);
        let (_, x, y) = self.piece_of(i);
        if seq.count_in(sym, x, y) == 1 {
            self.c.set(i - 1, true);
            if self.distinct(x, y) > 3 * self.a {
                self.repartition(seq, x, y);
            }
        }
        Ok(())
    }

    /// Records that `S[i]`, holding `sym`, was just deleted.
    pub fn after_delete(&mut self, seq: &DynamicSequence, i: usize, sym: Symbol) -> Result<()> {
        let n = seq.len();
        if i == 0 || i > n + 1 || n + 1 != self.p.len() {
            return Err(Error::PositionOutOfRange { pos: i, len: n + 1 });
        }
        let was_start = self.p.remove(i - 1);
        let was_mark = self.c.remove(i - 1);
        let at = if was_start {
            if i > n || self.p.get(i - 1) {
                // the piece held only this position and is gone
                return Ok(());
            }
            self.p.set(i - 1, true);
            i
        } else {
            i - 1
        };
        if !was_mark {
            return Ok(());
        }
        let (k, x, y) = self.piece_of(at);
        if seq.count_in(sym, x, y) > 0 {
            let q = seq.select_unchecked(sym, seq.rank_unchecked(sym, x - 1) + 1).unwrap();
            self.c.set(q - 1, true);
            return Ok(());
        }
        let m = self.piece_count();
        if self.distinct(x, y) >= self.a || m == 1 {
            return Ok(());
        }
        // Join with the previous piece, or the next one for the first piece.
        let (x, y) = if k > 1 {
            self.p.set(x - 1, false);
            (piece_start(&self.p, k - 1).unwrap(), y)
        } else {
            self.p.set(y, false);
            (x, piece_end(&self.p, k))
        };
        self.stats.merges += 1;
        self.repartition(seq, x, y);
        Ok(())
    }
}

impl PieceIndex {
    /// Re-cuts the single piece `S[x..=y]` into pieces of exactly `A`
    /// distinct symbols, folding a short tail into the last of them.
    fn repartition(&mut self, seq: &DynamicSequence, x: usize, y: usize) {
        let base = self.c.rank1(x - 1);
        let marked: Vec<usize> = (1..=self.c.rank1(y) - base).map(|k| self.c.select1(base + k).unwrap()).collect();
        let mut syms: Vec<Symbol> = marked.iter().map(|&q| seq.access_unchecked(q + 1)).collect();
        for q in marked {
            self.c.set(q, false);
        }
        syms.sort_unstable();
        syms.dedup();
        let first_from =
            |s: Symbol, from: usize| seq.select_unchecked(s, seq.rank_unchecked(s, from - 1) + 1).filter(|&q| q <= y);
        let a = self.a;
        let mut start = x;
        let mut prev: Option<(usize, Vec<Symbol>)> = None;
        let mut produced = 0;
        let mut next: Vec<(usize, Symbol)> = Vec::with_capacity(syms.len());
        loop {
            next.clear();
            next.extend(syms.iter().filter_map(|&s| first_from(s, start).map(|q| (q, s))));
            syms.clear();
            syms.extend(next.iter().map(|&(_, s)| s));
            if next.len() > a {
                next.select_nth_unstable(a);
                let cut = next[a].0;
                for &(q, _) in &next[..a] {
                    self.c.set(q - 1, true);
                }
                self.p.set(cut - 1, true);
                produced += 1;
                prev = Some((start, next[..a].iter().map(|&(_, s)| s).collect()));
                start = cut;
            } else if next.len() == a || prev.is_none() {
                for &(q, _) in &next {
                    self.c.set(q - 1, true);
                }
                produced += 1;
                break;
            } else {
                // Tail below A: the last piece built absorbs it.
                let (prev_start, mut all) = prev.take().unwrap();
                self.p.set(start - 1, false);
                for &s in &all {
                    self.c.set(first_from(s, prev_start).unwrap() - 1, false);
                }
                all.extend(next.iter().map(|&(_, s)| s));
                all.sort_unstable();
                all.dedup();
                for s in all {
                    self.c.set(first_from(s, prev_start).unwrap() - 1, true);
                }
                break;
            }
        }
        self.stats.repartitions += 1;
        self.stats.pieces_produced += produced;
    }

    /// Checks `P[1]`, the distinct-count bounds of every piece, and that `C`
    /// marks each distinct symbol of each piece exactly once.
    pub fn audit(&self, seq: &DynamicSequence) -> std::result::Result<(), AuditError> {
        let fail = |m: String| Err(AuditError(m));
        let n = seq.len();
        if self.p.len() != n || self.c.len() != n {
            return fail(format!("P/C lengths {}/{} differ from n = {n}", self.p.len(), self.c.len()));
        }
        if n == 0 {
            return Ok(());
        }
        if !self.p.get(0) {
            return fail("P[1] is not set".into());
        }
        let pieces = self.pieces();
        let sole = pieces.len() == 1;
        for (x, y) in pieces {
            let mut distinct = seq.extract(x, y).unwrap();
            distinct.sort_unstable();
            distinct.dedup();
            let mut marked: Vec<Symbol> =
                (x..=y).filter(|&q| self.c.get(q - 1)).map(|q| seq.access_unchecked(q)).collect();
            marked.sort_unstable();
            if marked != distinct {
                return fail(format!("piece {x}..{y}: marks {marked:?} vs distinct {distinct:?}"));
            }
            let d = distinct.len();
            if d > 3 * self.a || (!sole && d < self.a) {
                return fail(format!("piece {x}..{y} has {d} distinct symbols, A = {}", self.a));
            }
        }
        Ok(())
    }
}

/// Piece starts and marks of the greedy partition of `symbols`.
pub(crate) fn greedy_pieces(symbols: &[Symbol], sigma: u32, a: usize) -> (Vec<bool>, Vec<bool>) {
    let n = symbols.len();
    let (mut p, mut c) = (vec![false; n], vec![false; n]);
    let mut stamp = vec![0u32; sigma as usize + 1];
    let (mut id, mut distinct, mut start, mut prev_start) = (1u32, 0, 0, None);
    for (i, &s) in symbols.iter().enumerate() {
        if stamp[s as usize] == id {
            continue;
        }
        if distinct == a {
            prev_start = Some(start);
            start = i;
            id += 1;
            distinct = 0;
            p[i] = true;
        }
        stamp[s as usize] = id;
        distinct += 1;
        c[i] = true;
    }
    if n > 0 {
        p[0] = true;
    }
    if let (true, Some(ps)) = (distinct < a, prev_start) {
        p[start] = false;
        id += 1;
        for i in ps..n {
            let s = symbols[i] as usize;
            c[i] = stamp[s] != id;
            stamp[s] = id;
        }
    }
    (p, c)
}

fn check_range(n: usize, l: usize, r: usize) -> Result<()> {
    if l > r {
        return Err(Error::EmptyRange { from: l, to: r });
    }
    if l == 0 || r > n {
        return Err(Error::PositionOutOfRange { pos: if l == 0 { l } else { r }, len: n });
    }
    Ok(())
}

/// Sequence plus its piece partition, for minority queries alone.
#[derive(Clone, Debug)]
pub struct MinorityIndex {
    seq: DynamicSequence,
    pieces: PieceIndex,
}

impl MinorityIndex {
    pub fn build(symbols: &[Symbol], sigma: u32, alpha: Fraction) -> Result<Self> {
        let seq = DynamicSequence::from_symbols(symbols, sigma)?;
        Self::from_sequence(seq, alpha)
    }

    pub fn from_sequence(seq: DynamicSequence, alpha: Fraction) -> Result<Self> {
        let pieces = PieceIndex::build(&seq, alpha)?;
        Ok(MinorityIndex { seq, pieces })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn sequence(&self) -> &DynamicSequence {
        &self.seq
    }

    pub fn pieces(&self) -> &PieceIndex {
        &self.pieces
    }

    pub fn query(&mut self, l: usize, r: usize) -> Result<Option<Symbol>> {
        self.pieces.query(&self.seq, l, r)
    }

    pub fn query_traced(&mut self, l: usize, r: usize) -> Result<(Option<Symbol>, MinorityTrace)> {
        self.pieces.query_traced(&self.seq, l, r)
    }

    pub fn insert(&mut self, c: Symbol, i: usize) -> Result<()> {
        self.seq.insert(c, i)?;
        self.pieces.after_insert(&self.seq, i)
    }

    pub fn delete(&mut self, i: usize) -> Result<Symbol> {
        let c = self.seq.delete(i)?;
        self.pieces.after_delete(&self.seq, i, c)?;
        Ok(c)
    }

    pub fn audit(&self) -> std::result::Result<(), AuditError> {
        self.pieces.audit(&self.seq)
    }
}
