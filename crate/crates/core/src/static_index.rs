//! Frozen indexes over an immutable sequence.
//!
//! The majority side keeps one table per dyadic block size `s = 2^j`. Block
//! `k` stores, with exact counts, every symbol occurring more than `α·s/2`
//! times in blocks `k` and `k + 1` together, where `α = max(1/n, 1/σ)`. A
//! range of length `len` with `s/2 < len <= s` starting in block `k` lies
//! inside those two blocks, so each of its β-majorities is listed there for
//! any `β >= α`. Stored counts are exact, so the scan stops at the first
//! candidate whose window count is at most `β·len`.
//!
//! The minority side is the piece partition of [`crate::minority`] over
//! plain rank/select bitvectors.
//!
//! # Snapshot layout
//!
//! All integers little-endian. A `vec<T>` is a `u64` element count followed
//! by the elements.
//!
//! ```text
//! magic      b"RFQIDX01"
//! version    u32 (= 1)
//! n          u64
//! sigma      u32
//! alpha      u64 numerator, u64 denominator   (majority build threshold)
//! table      vec<u8>        byte of each symbol 1..=sigma (may be empty)
//! symbols    vec<u32>       S[1..=n]
//! min_log    u32            log2 of the smallest block size
//! levels     u32            count, then per level:
//!              offsets vec<u32>, symbols vec<u32>, counts vec<u32>
//! minority   u8             0 = absent, 1 = present, then:
//!              alpha u64 numerator, u64 denominator
//!              P: u64 bit length, vec<u64> words
//!              C: u64 bit length, vec<u64> words
//! ```

use std::io::{Read, Write};
use std::sync::Arc;

use crate::dynseq::{ceil_log2, select_in_word, Alphabet, DynamicSequence};
use crate::error::{Error, Result};
use crate::fraction::{exceeds, floor_mul, Fraction};
use crate::frequent::{scan_majorities, WindowTally};
use crate::majority::verify_candidates;
use crate::minority::{candidate_budget, check_alpha, find_minority, greedy_pieces, MinorityTrace, PieceBits};
use crate::Symbol;

/// Read-only bitvector with a per-word rank directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticBitvector {
    words: Vec<u64>,
    len: usize,
    ranks: Vec<u32>,
}

impl StaticBitvector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % 64);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    fn from_words(words: Vec<u64>, len: usize) -> Self {
        let mut ranks = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        ranks.push(0);
        for w in &words {
            acc += w.count_ones();
            ranks.push(acc);
        }
        StaticBitvector { words, len, ranks }
    }

    pub fn count_ones(&self) -> usize {
        *self.ranks.last().unwrap() as usize
    }

    pub fn size_bits(&self) -> u64 {
        (self.words.len() * 64 + self.ranks.len() * 32) as u64
    }
}

impl PieceBits for StaticBitvector {
    fn len(&self) -> usize {
        self.len
    }

    fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    fn rank1(&self, i: usize) -> usize {
        let r = self.ranks[i / 64] as usize;
        if i.is_multiple_of(64) {
            r
        } else {
            r + (self.words[i / 64] & ((1u64 << (i % 64)) - 1)).count_ones() as usize
        }
    }

    fn select1(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.count_ones() {
            return None;
        }
        // first word whose running count reaches k
        let w = self.ranks.partition_point(|&r| (r as usize) < k) - 1;
        Some(w * 64 + select_in_word(self.words[w], k - self.ranks[w] as usize))
    }
}

/// Smallest tabulated block size is `2^MIN_LOG` (or the whole text when shorter).
const MIN_LOG: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    offsets: Vec<u32>,
    symbols: Vec<Symbol>,
    counts: Vec<u32>,
}

impl Level {
    fn list(&self, block: usize) -> impl Iterator<Item = (Symbol, u64)> + '_ {
        let (a, b) = (self.offsets[block] as usize, self.offsets[block + 1] as usize);
        self.symbols[a..b].iter().zip(&self.counts[a..b]).map(|(&s, &c)| (s, c as u64))
    }

    fn size_bits(&self) -> u64 {
        32 * (self.offsets.len() + self.symbols.len() + self.counts.len()) as u64
    }
}

/// How a frozen majority query was answered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StaticPath {
    /// Every symbol of the alphabet was counted.
    AllSymbols,
    /// The range was short enough to scan.
    Scan,
    /// Candidates of the block table with this `log2` size.
    Table { log_size: u32 },
}

/// Range β-majority queries for any `β` in `(0, 1)` over a frozen sequence.
#[derive(Clone, Debug)]
pub struct StaticMajorityIndex {
    seq: Arc<DynamicSequence>,
    alpha: Fraction,
    min_log: u32,
    levels: Vec<Level>,
}

impl StaticMajorityIndex {
    pub fn freeze(symbols: &[Symbol], sigma: u32) -> Result<Self> {
        Self::from_sequence(Arc::new(DynamicSequence::from_symbols(symbols, sigma)?))
    }

    pub fn from_sequence(seq: Arc<DynamicSequence>) -> Result<Self> {
        let n = seq.len();
        if n == 0 {
            return Err(Error::InvalidParameter("cannot freeze an empty sequence".into()));
        }
        let alpha = Fraction::new(1, (n as u64).min(seq.sigma() as u64));
        let top = ceil_log2(n as u64);
        let min_log = MIN_LOG.min(top);
        let symbols = seq.to_vec();
        let mut tally = WindowTally::new(seq.sigma());
        let levels = (min_log..=top).map(|j| build_level(&symbols, &mut tally, alpha, 1 << j)).collect();
        Ok(StaticMajorityIndex { seq, alpha, min_log, levels })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn sigma(&self) -> u32 {
        self.seq.sigma()
    }

    /// `max(1/n, 1/σ)`.
    pub fn build_alpha(&self) -> Fraction {
        self.alpha
    }

    pub fn sequence(&self) -> &Arc<DynamicSequence> {
        &self.seq
    }

    /// `log2` block sizes of the tables, smallest first.
    pub fn level_sizes(&self) -> Vec<u32> {
        (self.min_log..self.min_log + self.levels.len() as u32).collect()
    }

    /// Bits of the block tables.
    pub fn size_bits(&self) -> u64 {
        self.levels.iter().map(Level::size_bits).sum()
    }

    pub fn query(&self, l: usize, r: usize, beta: Fraction) -> Result<Vec<Symbol>> {
        self.query_traced(l, r, beta).map(|(out, _, _)| out)
    }

    /// Also returns the path taken and the number of candidates counted.
    pub fn query_traced(&self, l: usize, r: usize, beta: Fraction) -> Result<(Vec<Symbol>, StaticPath, usize)> {
        check_alpha(beta)?;
        check_range(self.len(), l, r)?;
        let len = (r - l + 1) as u64;
        if beta <= self.alpha {
            let out: Vec<Symbol> =
                (1..=self.sigma()).filter(|&c| exceeds(self.seq.count_in(c, l, r) as u64, beta, len)).collect();
            return Ok((out, StaticPath::AllSymbols, self.sigma() as usize));
        }
        let j = ceil_log2(len);
        if j < self.min_log {
            let window = self.seq.extract(l, r)?;
            return Ok((scan_majorities(&window, beta)?, StaticPath::Scan, 0));
        }
        let level = &self.levels[(j - self.min_log) as usize];
        let cands: Vec<(Symbol, u64)> = level.list((l - 1) >> j).collect();
        let mut trace = crate::majority::QueryTrace::new(crate::majority::QueryPath::Direct);
        let out = verify_candidates(&self.seq, &cands, l, r, beta, 0, Some(&mut trace));
        Ok((out, StaticPath::Table { log_size: j }, trace.verified))
    }
}

fn build_level(symbols: &[Symbol], tally: &mut WindowTally, alpha: Fraction, size: usize) -> Level {
    let theta = floor_mul(alpha / 2, size as u64);
    let blocks = symbols.len().div_ceil(size);
    let mut level = Level { offsets: Vec::with_capacity(blocks + 1), symbols: Vec::new(), counts: Vec::new() };
    level.offsets.push(0);
    for k in 0..blocks {
        let window = &symbols[k * size..((k + 2) * size).min(symbols.len())];
        for (s, c) in tally.above(window, theta).entries {
            level.symbols.push(s);
            level.counts.push(c as u32);
        }
        level.offsets.push(level.symbols.len() as u32);
    }
    level
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

/// Range α-minority queries for a fixed `α` over a frozen sequence.
#[derive(Clone, Debug)]
pub struct StaticMinorityIndex {
    seq: Arc<DynamicSequence>,
    alpha: Fraction,
    p: StaticBitvector,
    c: StaticBitvector,
}

impl StaticMinorityIndex {
    pub fn freeze(symbols: &[Symbol], sigma: u32, alpha: Fraction) -> Result<Self> {
        Self::from_sequence(Arc::new(DynamicSequence::from_symbols(symbols, sigma)?), alpha)
    }

    /// One greedy pass, the same partition the dynamic index starts from.
    pub fn from_sequence(seq: Arc<DynamicSequence>, alpha: Fraction) -> Result<Self> {
        check_alpha(alpha)?;
        let (p, c) = greedy_pieces(&seq.to_vec(), seq.sigma(), candidate_budget(alpha));
        Ok(StaticMinorityIndex { seq, alpha, p: StaticBitvector::from_bits(p), c: StaticBitvector::from_bits(c) })
    }

    pub fn alpha(&self) -> Fraction {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn piece_count(&self) -> usize {
        self.p.count_ones()
    }

    pub fn size_bits(&self) -> u64 {
        self.p.size_bits() + self.c.size_bits()
    }

    pub fn query(&self, l: usize, r: usize) -> Result<Option<Symbol>> {
        check_range(self.len(), l, r)?;
        Ok(find_minority(&self.seq, &self.p, &self.c, self.alpha, l, r, &mut MinorityTrace::default()))
    }
}

const MAGIC: &[u8; 8] = b"RFQIDX01";
const VERSION: u32 = 1;

/// A frozen text: its alphabet, the majority tables, and optionally the
/// minority pieces, stored in the layout described in the module docs.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub alphabet: Alphabet,
    pub majority: StaticMajorityIndex,
    pub minority: Option<StaticMinorityIndex>,
}

impl Snapshot {
    /// Freezes `text`; the minority side is added when `minority_alpha` is given.
    pub fn freeze(text: &[u8], minority_alpha: Option<Fraction>) -> Result<Self> {
        let (seq, alphabet) = Alphabet::encode_bytes(text);
        let seq = Arc::new(seq);
        let majority = StaticMajorityIndex::from_sequence(seq.clone())?;
        let minority = minority_alpha.map(|a| StaticMinorityIndex::from_sequence(seq, a)).transpose()?;
        Ok(Snapshot { alphabet, majority, minority })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let m = &self.majority;
        w.write_all(MAGIC)?;
        put_u32(w, VERSION)?;
        put_u64(w, m.len() as u64)?;
        put_u32(w, m.sigma())?;
        put_fraction(w, m.alpha)?;
        put_u64(w, self.alphabet.table().len() as u64)?;
        w.write_all(self.alphabet.table())?;
        put_u32s(w, &m.seq.to_vec())?;
        put_u32(w, m.min_log)?;
        put_u32(w, m.levels.len() as u32)?;
        for level in &m.levels {
            put_u32s(w, &level.offsets)?;
            put_u32s(w, &level.symbols)?;
            put_u32s(w, &level.counts)?;
        }
        match &self.minority {
            None => w.write_all(&[0]),
            Some(mi) => {
                w.write_all(&[1])?;
                put_fraction(w, mi.alpha)?;
                for bv in [&mi.p, &mi.c] {
                    put_u64(w, bv.len as u64)?;
                    put_u64(w, bv.words.len() as u64)?;
                    for &x in &bv.words {
                        put_u64(w, x)?;
                    }
                }
                Ok(())
            }
        }
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = get_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = get_u64(r)? as usize;
        let sigma = get_u32(r)?;
        let alpha = get_fraction(r)?;
        let table_len = get_u64(r)? as usize;
        let mut table = vec![0u8; table_len];
        read_exact(r, &mut table)?;
        let symbols = get_u32s(r)?;
        if symbols.len() != n {
            return Err(Error::Format(format!("{} symbols for n = {n}", symbols.len())));
        }
        let seq = Arc::new(DynamicSequence::from_symbols(&symbols, sigma)?);
        let min_log = get_u32(r)?;
        let count = get_u32(r)?;
        let mut levels = Vec::with_capacity(count as usize);
        for j in 0..count {
            let level = Level { offsets: get_u32s(r)?, symbols: get_u32s(r)?, counts: get_u32s(r)? };
            let blocks = n.div_ceil(1usize << (min_log + j));
            if level.offsets.len() != blocks + 1
                || level.symbols.len() != level.counts.len()
                || level.offsets.last().map(|&o| o as usize) != Some(level.symbols.len())
                || level.offsets.windows(2).any(|p| p[0] > p[1])
                || level.symbols.iter().any(|&s| s == 0 || s > sigma)
            {
                return Err(Error::Format(format!("malformed table {j}")));
            }
            levels.push(level);
        }
        if count as usize != (ceil_log2(n as u64) + 1).saturating_sub(min_log) as usize {
            return Err(Error::Format("wrong number of tables".into()));
        }
        let majority = StaticMajorityIndex { seq: seq.clone(), alpha, min_log, levels };
        let mut flag = [0u8];
        read_exact(r, &mut flag)?;
        let minority = match flag[0] {
            0 => None,
            1 => {
                let alpha = get_fraction(r)?;
                check_alpha(alpha)?;
                let mut bits = Vec::new();
                for _ in 0..2 {
                    let len = get_u64(r)? as usize;
                    let words = (0..get_u64(r)?).map(|_| get_u64(r)).collect::<Result<Vec<_>>>()?;
                    if len != n || words.len() != len.div_ceil(64) {
                        return Err(Error::Format("piece bitvector length".into()));
                    }
                    bits.push(StaticBitvector::from_words(words, len));
                }
                let c = bits.pop().unwrap();
                let p = bits.pop().unwrap();
                Some(StaticMinorityIndex { seq, alpha, p, c })
            }
            f => return Err(Error::Format(format!("bad minority flag {f}"))),
        };
        Ok(Snapshot { alphabet: Alphabet::from_table(table), majority, minority })
    }
}

fn put_u32<W: Write>(w: &mut W, x: u32) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_u64<W: Write>(w: &mut W, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_fraction<W: Write>(w: &mut W, f: Fraction) -> std::io::Result<()> {
    put_u64(w, *f.numer())?;
    put_u64(w, *f.denom())
}

fn put_u32s<W: Write>(w: &mut W, xs: &[u32]) -> std::io::Result<()> {
    put_u64(w, xs.len() as u64)?;
    for &x in xs {
        put_u32(w, x)?;
    }
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::Format(format!("truncated snapshot: {e}")))
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_fraction<R: Read>(r: &mut R) -> Result<Fraction> {
    let (n, d) = (get_u64(r)?, get_u64(r)?);
    if d == 0 {
        return Err(Error::Format("zero denominator".into()));
    }
    Ok(Fraction::new(n, d))
}

fn get_u32s<R: Read>(r: &mut R) -> Result<Vec<u32>> {
    let len = get_u64(r)?;
    // grow as data arrives so a corrupt length cannot force a huge allocation
    let mut out = Vec::with_capacity(len.min(1 << 20) as usize);
    for _ in 0..len {
        out.push(get_u32(r)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frozen(text: &str) -> (StaticMajorityIndex, Alphabet) {
        let s = Snapshot::freeze(text.as_bytes(), None).unwrap();
        (s.majority, s.alphabet)
    }

    fn brute(s: &[Symbol], l: usize, r: usize, beta: Fraction) -> Vec<Symbol> {
        let mut counts = std::collections::BTreeMap::new();
        for &c in &s[l - 1..r] {
            *counts.entry(c).or_insert(0u64) += 1;
        }
        counts.into_iter().filter(|&(_, k)| exceeds(k, beta, (r - l + 1) as u64)).map(|(c, _)| c).collect()
    }

    #[test]
    fn majority_examples() {
        let (m, a) = frozen("abracadabra");
        let sym_a = a.symbol_of(b'a').unwrap();
        assert_eq!(m.query(1, 11, Fraction::new(3, 10)).unwrap(), vec![sym_a]);
        assert_eq!(m.query(1, 11, Fraction::new(1, 2)).unwrap(), Vec::<Symbol>::new());
        for i in 1..=11 {
            assert_eq!(m.query(i, i, Fraction::new(9, 10)).unwrap(), vec![m.sequence().access(i).unwrap()]);
        }
        assert!(matches!(m.query(1, 12, Fraction::new(1, 2)), Err(Error::PositionOutOfRange { .. })));
        assert!(matches!(m.query(1, 2, Fraction::new(1, 1)), Err(Error::ThresholdOutOfRange(_))));
        let (m, _) = frozen("a");
        assert_eq!(m.level_sizes(), vec![0]);
        assert_eq!(m.query(1, 1, Fraction::new(1, 2)).unwrap(), vec![1]);
        assert!(Snapshot::freeze(b"", None).is_err());
    }

    #[test]
    fn low_thresholds_count_every_symbol() {
        let (m, _) = frozen("abcabcabcaa");
        assert_eq!(m.build_alpha(), Fraction::new(1, 3));
        let (out, path, _) = m.query_traced(1, 11, Fraction::new(1, 4)).unwrap();
        assert_eq!(path, StaticPath::AllSymbols);
        assert_eq!(out, vec![1, 2, 3]);
    }

    #[test]
    fn minority_examples() {
        let m = StaticMinorityIndex::freeze(&[1, 1, 1, 2], 2, Fraction::new(1, 2)).unwrap();
        assert_eq!(m.query(1, 4).unwrap(), Some(2));
        let m = StaticMinorityIndex::freeze(&[1, 1, 1, 1], 1, Fraction::new(1, 2)).unwrap();
        assert_eq!(m.query(1, 4).unwrap(), None);
    }

    #[test]
    fn snapshot_roundtrip() {
        let text = b"mississippi river banks are muddy in spring".repeat(20);
        let snap = Snapshot::freeze(&text, Some(Fraction::new(1, 4))).unwrap();
        let mut bytes = Vec::new();
        snap.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = Snapshot::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.alphabet, snap.alphabet);
        assert_eq!(back.majority.levels, snap.majority.levels);
        let (m0, m1) = (snap.minority.as_ref().unwrap(), back.minority.as_ref().unwrap());
        assert_eq!((&m0.p, &m0.c), (&m1.p, &m1.c));
        for (l, r) in [(1, 5), (3, 300), (1, text.len()), (100, 101)] {
            assert_eq!(back.majority.query(l, r, Fraction::new(1, 9)), snap.majority.query(l, r, Fraction::new(1, 9)));
            assert_eq!(m1.query(l, r), m0.query(l, r));
        }
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, bytes);
        for cut in [0, 7, 12, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(Snapshot::read_from(&mut &bytes[..cut]), Err(Error::Format(_))));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Snapshot::read_from(&mut bad.as_slice()), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn static_bits_match_naive(bits in proptest::collection::vec(any::<bool>(), 0..700)) {
            let bv = StaticBitvector::from_bits(bits.iter().copied());
            let mut ones = 0;
            for (i, &b) in bits.iter().enumerate() {
                prop_assert_eq!(bv.rank1(i), ones);
                prop_assert_eq!(bv.get(i), b);
                if b {
                    ones += 1;
                    prop_assert_eq!(bv.select1(ones), Some(i));
                }
            }
            prop_assert_eq!(bv.rank1(bits.len()), ones);
            prop_assert_eq!(bv.select1(ones + 1), None);
        }

        #[test]
        fn majority_matches_brute_force(sigma in prop_oneof![Just(2u32), Just(5), Just(40)],
                                        raw in proptest::collection::vec(any::<u32>(), 1..600),
                                        queries in proptest::collection::vec((any::<usize>(), any::<usize>(), 1u64..64), 1..40)) {
            let s: Vec<Symbol> = raw.iter().map(|x| x % sigma + 1).collect();
            let m = StaticMajorityIndex::freeze(&s, sigma).unwrap();
            for (l, r, num) in queries {
                let (l, r) = (l % s.len() + 1, r % s.len() + 1);
                let (l, r) = (l.min(r), l.max(r));
                let beta = Fraction::new(num, 64);
                prop_assert_eq!(m.query(l, r, beta).unwrap(), brute(&s, l, r, beta));
            }
        }
    }
}
