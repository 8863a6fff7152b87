//! Elias γ codes and candidate lists grouped by quantized frequency.
//!
//! Integers are shifted by one before coding, so `0` costs a single `1` bit
//! and doubles as the end-of-chunk marker.

use std::fmt;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::Symbol;

/// Append-only bit buffer with a read cursor, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct GammaStream {
    words: Vec<u64>,
    len: usize,
    cursor: usize,
}

impl GammaStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a string of `0`/`1` characters; other characters are ignored.
    pub fn from_bit_str(bits: &str) -> Self {
        let mut s = Self::new();
        for ch in bits.chars() {
            match ch {
                '0' => s.push_bit(false),
                '1' => s.push_bit(true),
                _ => {}
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn rewind(&mut self) {
        self.cursor = 0;
    }

    pub fn remaining(&self) -> usize {
        self.len - self.cursor
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1u64 << (63 - self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    fn read_bit(&mut self) -> Result<bool> {
        if self.cursor >= self.len {
            return Err(Error::TruncatedStream);
        }
        let b = self.get(self.cursor);
        self.cursor += 1;
        Ok(b)
    }

    /// Appends the code of `x + 1`.
    pub fn push_gamma(&mut self, x: u64) {
        let v = x as u128 + 1;
        let width = 128 - v.leading_zeros();
        self.push_zeros(width as usize - 1);
        if width > 64 {
            self.push_bits((v >> 64) as u64, width - 64);
            self.push_bits(v as u64, 64);
        } else {
            self.push_bits(v as u64, width);
        }
    }

    fn push_zeros(&mut self, n: usize) {
        self.len += n;
        self.words.resize(self.len.div_ceil(64), 0);
    }

    /// Appends the low `width` bits of `v`, most significant first.
    fn push_bits(&mut self, v: u64, width: u32) {
        if width == 0 {
            return;
        }
        let v = if width == 64 { v } else { v & ((1u64 << width) - 1) };
        let used = (self.len % 64) as u32;
        if used == 0 {
            self.words.push(v << (64 - width));
        } else {
            let free = 64 - used;
            let last = self.words.last_mut().unwrap();
            if width <= free {
                *last |= v << (free - width);
            } else {
                *last |= v >> (width - free);
                self.words.push(v << (64 - (width - free)));
            }
        }
        self.len += width as usize;
    }

    /// Reads one code word at the cursor and returns `x` for the code of `x + 1`.
    pub fn read_gamma(&mut self) -> Result<u64> {
        let start = self.cursor;
        let mut zeros = 0u32;
        loop {
            match self.read_bit() {
                Ok(true) => break,
                Ok(false) => zeros += 1,
                Err(e) => {
                    self.cursor = start;
                    return Err(e);
                }
            }
            if zeros > 64 {
                self.cursor = start;
                return Err(Error::MalformedStream("gamma code longer than 64 bits"));
            }
        }
        if self.remaining() < zeros as usize {
            self.cursor = start;
            return Err(Error::TruncatedStream);
        }
        let mut v: u128 = 1;
        for _ in 0..zeros {
            v = (v << 1) | self.read_bit()? as u128;
        }
        Ok((v - 1) as u64)
    }

    pub fn size_bits(&self) -> u64 {
        self.words.len() as u64 * 64
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for GammaStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GammaStream({})", self.to_bit_string())
    }
}

/// The code word for `x` as a `0`/`1` string.
pub fn gamma_encode(x: u64) -> String {
    let mut s = GammaStream::new();
    s.push_gamma(x);
    s.to_bit_string()
}

/// Decodes the next code word of `stream`.
pub fn gamma_decode(stream: &mut GammaStream) -> Result<u64> {
    stream.read_gamma()
}

/// Smallest `q` with `count * 2^q >= window_len`, i.e. `⌈lg(window_len / count)⌉`.
pub fn quantized_frequency(count: u64, window_len: u64) -> u32 {
    debug_assert!(count > 0);
    let mut q = 0;
    while (count as u128) << q < window_len as u128 {
        q += 1;
    }
    q
}

/// `⌈lg(1 / f)⌉` for a fraction `0 < f <= 1`.
pub fn max_chunk_index(min_freq: Fraction) -> u32 {
    quantized_frequency(*min_freq.numer(), *min_freq.denom())
}

/// Candidate symbols bucketed by `⌈lg(window_len / count)⌉`, γ-coded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkedCandidates {
    stream: GammaStream,
    q_max: u32,
    count: usize,
}

impl ChunkedCandidates {
    /// A list with no candidates and the chunk count implied by `min_freq`.
    pub fn empty(min_freq: Fraction) -> Self {
        let q_max = max_chunk_index(min_freq);
        let mut stream = GammaStream::new();
        for _ in 0..=q_max {
            stream.push_gamma(0);
        }
        ChunkedCandidates { stream, q_max, count: 0 }
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn encoded_bits(&self) -> usize {
        self.stream.len()
    }

    pub fn size_bits(&self) -> u64 {
        self.stream.size_bits() + 2 * 64
    }

    pub fn stream(&self) -> &GammaStream {
        &self.stream
    }

    /// Raw decoded values per chunk (first symbol, then deltas, then `0`).
    pub fn raw_values(&self) -> Result<Vec<Vec<u64>>> {
        let mut s = self.stream.clone();
        s.rewind();
        let mut out = Vec::new();
        for _ in 0..=self.q_max {
            let mut chunk = Vec::new();
            loop {
                let v = s.read_gamma()?;
                chunk.push(v);
                if v == 0 {
                    break;
                }
            }
            out.push(chunk);
        }
        Ok(out)
    }
}

/// Builds the chunked list; `min_freq` fixes the number of chunks.
pub fn encode_chunks(candidates: &[(Symbol, u64)], window_len: u64, min_freq: Fraction) -> Result<ChunkedCandidates> {
    let q_max = max_chunk_index(min_freq);
    let mut keyed: Vec<(u32, Symbol)> = Vec::with_capacity(candidates.len());
    for &(symbol, count) in candidates {
        let below = count == 0
            || (count as u128) * (*min_freq.denom() as u128) < (*min_freq.numer() as u128) * (window_len as u128);
        if below {
            return Err(Error::FrequencyBelowMinimum { symbol });
        }
        if symbol == 0 {
            return Err(Error::InvalidParameter("symbol 0 cannot be chunk-coded".into()));
        }
        keyed.push((quantized_frequency(count, window_len), symbol));
    }
    keyed.sort_unstable();
    let mut stream = GammaStream::new();
    let mut next = keyed.iter().peekable();
    for q in 0..=q_max {
        let mut prev = 0;
        while let Some(&(_, s)) = next.next_if(|&&(k, _)| k == q) {
            if s == prev {
                return Err(Error::InvalidParameter(format!("duplicate candidate {s}")));
            }
            stream.push_gamma((s - prev) as u64);
            prev = s;
        }
        stream.push_gamma(0);
    }
    Ok(ChunkedCandidates { stream, q_max, count: candidates.len() })
}

/// Decodes chunk by chunk; see [`ChunkScan::next_chunk`] for early stopping.
pub fn scan_chunks(cc: &ChunkedCandidates) -> ChunkScan<'_> {
    ChunkScan { cc, cursor: 0, next_q: 0, pending: Vec::new(), pos: 0 }
}

pub struct ChunkScan<'a> {
    cc: &'a ChunkedCandidates,
    cursor: usize,
    next_q: u32,
    pending: Vec<Symbol>,
    pos: usize,
}

impl ChunkScan<'_> {
    /// The quantized frequency of the chunk the next `next_chunk` call decodes.
    pub fn upcoming(&self) -> Option<u32> {
        (self.next_q <= self.cc.q_max).then_some(self.next_q)
    }

    /// Decodes one whole chunk, including empty ones.
    pub fn next_chunk(&mut self) -> Result<Option<(u32, Vec<Symbol>)>> {
        let mut out = Vec::new();
        match self.next_chunk_into(&mut out)? {
            Some(q) => Ok(Some((q, out))),
            None => Ok(None),
        }
    }

    pub fn next_chunk_into(&mut self, out: &mut Vec<Symbol>) -> Result<Option<u32>> {
        out.clear();
        let q = match self.upcoming() {
            Some(q) => q,
            None => {
                return if self.cursor == self.cc.stream.len() {
                    Ok(None)
                } else {
                    Err(Error::MalformedStream("trailing bits after the last chunk"))
                };
            }
        };
        let mut s = ReadAt { stream: &self.cc.stream, cursor: self.cursor };
        let mut prev: u64 = 0;
        loop {
            let v = s.read()?;
            if v == 0 {
                break;
            }
            prev += v;
            if prev > Symbol::MAX as u64 {
                return Err(Error::MalformedStream("symbol value overflow"));
            }
            out.push(prev as Symbol);
        }
        self.cursor = s.cursor;
        self.next_q += 1;
        Ok(Some(q))
    }
}

impl Iterator for ChunkScan<'_> {
    type Item = Result<(u32, Symbol)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.pos < self.pending.len() {
                self.pos += 1;
                return Some(Ok((self.next_q - 1, self.pending[self.pos - 1])));
            }
            let mut buf = std::mem::take(&mut self.pending);
            match self.next_chunk_into(&mut buf) {
                Ok(Some(_)) => {
                    self.pending = buf;
                    self.pos = 0;
                }
                Ok(None) => return None,
                Err(e) => {
                    self.next_q = self.cc.q_max + 1;
                    self.cursor = self.cc.stream.len();
                    return Some(Err(e));
                }
            }
        }
    }
}

struct ReadAt<'a> {
    stream: &'a GammaStream,
    cursor: usize,
}

impl ReadAt<'_> {
    fn read(&mut self) -> Result<u64> {
        let len = self.stream.len();
        let mut zeros = 0usize;
        loop {
            if self.cursor >= len {
                return Err(Error::TruncatedStream);
            }
            let b = self.stream.get(self.cursor);
            self.cursor += 1;
            if b {
                break;
            }
            zeros += 1;
            if zeros > 64 {
                return Err(Error::MalformedStream("gamma code longer than 64 bits"));
            }
        }
        if self.cursor + zeros > len {
            return Err(Error::TruncatedStream);
        }
        let mut v: u128 = 1;
        for _ in 0..zeros {
            v = (v << 1) | self.stream.get(self.cursor) as u128;
            self.cursor += 1;
        }
        Ok((v - 1) as u64)
    }
}
