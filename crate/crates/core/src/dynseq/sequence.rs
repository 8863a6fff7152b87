use super::bitvector::DynamicBitvector;
use crate::error::{Error, Result};
use crate::Symbol;

/// Mutable sequence over the alphabet `1..=sigma`.
///
/// A pointer-free wavelet tree: node `k` of the complete binary tree of depth
/// `ceil(lg sigma)` lives at index `k` of `nodes` (root at 1, children at `2k`
/// and `2k + 1`). Each symbol is routed by the bits of `symbol - 1`, most
/// significant first. Positions in the public API are 1-based.
#[derive(Clone, Debug)]
pub struct DynamicSequence {
    nodes: Vec<DynamicBitvector>,
    depth: u32,
    sigma: u32,
    len: usize,
}

impl DynamicSequence {
    pub fn new(sigma: u32) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::InvalidParameter("alphabet size must be at least 1".into()));
        }
        let depth = ceil_log2(sigma as u64);
        let nodes = (0..(1usize << depth)).map(|_| DynamicBitvector::new()).collect();
        Ok(DynamicSequence { nodes, depth, sigma, len: 0 })
    }

    /// Bulk construction; every symbol must lie in `1..=sigma`.
    pub fn from_symbols(symbols: &[Symbol], sigma: u32) -> Result<Self> {
        let mut seq = Self::new(sigma)?;
        for &c in symbols {
            seq.check_symbol(c)?;
        }
        if seq.depth > 0 {
            let mut bits: Vec<Vec<bool>> = vec![Vec::new(); 1 << seq.depth];
            for &c in symbols {
                let code = c - 1;
                let mut node = 1usize;
                for level in 0..seq.depth {
                    let b = (code >> (seq.depth - 1 - level)) & 1 == 1;
                    bits[node].push(b);
                    node = 2 * node + b as usize;
                }
            }
            for (k, b) in bits.into_iter().enumerate().skip(1) {
                seq.nodes[k] = DynamicBitvector::from_bits(b);
            }
        }
        seq.len = symbols.len();
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    #[inline]
    fn bit_of(&self, code: u32, level: u32) -> bool {
        (code >> (self.depth - 1 - level)) & 1 == 1
    }

    fn check_symbol(&self, c: Symbol) -> Result<()> {
        if c == 0 || c > self.sigma {
            return Err(Error::SymbolOutOfRange { symbol: c, sigma: self.sigma });
        }
        Ok(())
    }

    fn check_pos(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len {
            return Err(Error::PositionOutOfRange { pos: i, len: self.len });
        }
        Ok(())
    }

    /// `S[i]`.
    pub fn access(&self, i: usize) -> Result<Symbol> {
        self.check_pos(i)?;
        Ok(self.access_unchecked(i))
    }

    pub(crate) fn access_unchecked(&self, i: usize) -> Symbol {
        let mut pos = i - 1;
        let mut node = 1usize;
        let mut code = 0u32;
        for _ in 0..self.depth {
            let bv = &self.nodes[node];
            let b = bv.get(pos);
            pos = bv.rank(b, pos);
            code = (code << 1) | b as u32;
            node = 2 * node + b as usize;
        }
        code + 1
    }

    /// Occurrences of `c` in `S[1..=i]`.
    pub fn rank(&self, c: Symbol, i: usize) -> Result<usize> {
        self.check_symbol(c)?;
        if i > self.len {
            return Err(Error::PositionOutOfRange { pos: i, len: self.len });
        }
        Ok(self.rank_unchecked(c, i))
    }

    #[inline]
    pub(crate) fn rank_unchecked(&self, c: Symbol, i: usize) -> usize {
        let code = c - 1;
        let mut pos = i;
        let mut node = 1usize;
        for level in 0..self.depth {
            if pos == 0 {
                return 0;
            }
            let b = self.bit_of(code, level);
            pos = self.nodes[node].rank(b, pos);
            node = 2 * node + b as usize;
        }
        pos
    }

    /// Occurrences of `c` in `S[l..=r]`.
    #[inline]
    pub(crate) fn count_in(&self, c: Symbol, l: usize, r: usize) -> usize {
        self.rank_unchecked(c, r) - self.rank_unchecked(c, l - 1)
    }

    /// Position of the `k`-th occurrence of `c`.
    pub fn select(&self, c: Symbol, k: usize) -> Result<usize> {
        self.check_symbol(c)?;
        self.select_unchecked(c, k).ok_or(Error::OccurrenceNotFound { symbol: c, k })
    }

    pub(crate) fn select_unchecked(&self, c: Symbol, k: usize) -> Option<usize> {
        if k == 0 {
            return None;
        }
        let code = c - 1;
        let mut path = Vec::with_capacity(self.depth as usize);
        let mut node = 1usize;
        for level in 0..self.depth {
            let b = self.bit_of(code, level);
            path.push((node, b));
            node = 2 * node + b as usize;
        }
        let mut idx = k;
        for &(node, b) in path.iter().rev() {
            idx = self.nodes[node].select(idx, b)? + 1;
        }
        if idx > self.len {
            None
        } else {
            Some(idx)
        }
    }

    /// Inserts `c` so that it becomes `S[i]`.
    pub fn insert(&mut self, c: Symbol, i: usize) -> Result<()> {
        self.check_symbol(c)?;
        if i == 0 || i > self.len + 1 {
            return Err(Error::PositionOutOfRange { pos: i, len: self.len + 1 });
        }
        let code = c - 1;
        let mut pos = i - 1;
        let mut node = 1usize;
        for level in 0..self.depth {
            let b = self.bit_of(code, level);
            let bv = &mut self.nodes[node];
            let next = bv.rank(b, pos);
            bv.insert(pos, b);
            pos = next;
            node = 2 * node + b as usize;
        }
        self.len += 1;
        Ok(())
    }

    /// Removes and returns `S[i]`.
    pub fn delete(&mut self, i: usize) -> Result<Symbol> {
        self.check_pos(i)?;
        let mut pos = i - 1;
        let mut node = 1usize;
        let mut code = 0u32;
        for _ in 0..self.depth {
            let bv = &mut self.nodes[node];
            let b = bv.get(pos);
            let next = bv.rank(b, pos);
            bv.remove(pos);
            pos = next;
            code = (code << 1) | b as u32;
            node = 2 * node + b as usize;
        }
        self.len -= 1;
        Ok(code + 1)
    }

    /// `S[i..=j]`.
    pub fn extract(&self, i: usize, j: usize) -> Result<Vec<Symbol>> {
        if i > j {
            return Err(Error::EmptyRange { from: i, to: j });
        }
        self.check_pos(i)?;
        self.check_pos(j)?;
        let mut out = Vec::with_capacity(j - i + 1);
        self.extract_into(i, j, &mut out);
        Ok(out)
    }

    /// Appends `S[i..=j]` to `out`; the range must be valid.
    pub(crate) fn extract_into(&self, i: usize, j: usize, out: &mut Vec<Symbol>) {
        let start = out.len();
        let n = j + 1 - i;
        out.resize(start + n, 0);
        let mut tmp = vec![0; n];
        self.extract_node(1, 0, i - 1, j, 0, &mut out[start..], &mut tmp);
    }

    // `tmp` is scratch of the same length as `out`.
    #[allow(clippy::too_many_arguments)]
    fn extract_node(
        &self,
        node: usize,
        level: u32,
        from: usize,
        to: usize,
        prefix: u32,
        out: &mut [Symbol],
        tmp: &mut [Symbol],
    ) {
        if level == self.depth {
            out.fill(prefix + 1);
            return;
        }
        let bv = &self.nodes[node];
        let bits = bv.bits_range(from, to);
        if level + 1 == self.depth {
            let base = (prefix << 1) + 1;
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = base + bits.get(k) as u32;
            }
            return;
        }
        let zeros_before = bv.rank0(from);
        let ones_before = from - zeros_before;
        let n = to - from;
        let zeros = n - bits.count_ones();
        {
            let (tl, tr) = tmp.split_at_mut(zeros);
            let (ol, or) = out.split_at_mut(zeros);
            if zeros > 0 {
                self.extract_node(2 * node, level + 1, zeros_before, zeros_before + zeros, prefix << 1, tl, ol);
            }
            if n > zeros {
                self.extract_node(
                    2 * node + 1,
                    level + 1,
                    ones_before,
                    ones_before + n - zeros,
                    (prefix << 1) | 1,
                    tr,
                    or,
                );
            }
        }
        let (mut a, mut b) = (0, zeros);
        for (k, slot) in out.iter_mut().enumerate() {
            if bits.get(k) {
                *slot = tmp[b];
                b += 1;
            } else {
                *slot = tmp[a];
                a += 1;
            }
        }
    }

    /// Symbols occurring more than `theta` times in `S[i..=j]`, with their
    /// counts, in ascending symbol order. Walks only the wavelet-tree nodes
    /// whose share of the range exceeds `theta`.
    pub(crate) fn heavy_symbols(&self, i: usize, j: usize, theta: u64, out: &mut Vec<(Symbol, u64)>) {
        self.heavy_node(1, 0, i - 1, j, 0, theta, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn heavy_node(
        &self,
        node: usize,
        level: u32,
        from: usize,
        to: usize,
        prefix: u32,
        theta: u64,
        out: &mut Vec<(Symbol, u64)>,
    ) {
        if ((to - from) as u64) <= theta {
            return;
        }
        if level == self.depth {
            out.push((prefix + 1, (to - from) as u64));
            return;
        }
        let bv = &self.nodes[node];
        let (z0, z1) = (bv.rank0(from), bv.rank0(to));
        self.heavy_node(2 * node, level + 1, z0, z1, prefix << 1, theta, out);
        self.heavy_node(2 * node + 1, level + 1, from - z0, to - z1, (prefix << 1) | 1, theta, out);
    }

    pub fn to_vec(&self) -> Vec<Symbol> {
        if self.len == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.len);
        self.extract_into(1, self.len, &mut out);
        out
    }

    /// Bits held by the wavelet-tree bitvectors.
    pub fn size_bits(&self) -> u64 {
        self.nodes.iter().skip(1).map(|bv| bv.size_bits()).sum()
    }
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}
