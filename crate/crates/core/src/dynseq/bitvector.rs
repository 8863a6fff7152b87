//! Dynamic bitvector with rank/select/insert/remove.
//!
//! Bits live in fixed-capacity leaves of `LEAF_BITS` bits, kept in position
//! order. Two Fenwick trees over the leaves hold per-leaf bit and one counts,
//! so locating a position, rank and select all descend the same implicit
//! balanced tree in `O(lg(n / LEAF_BITS))` steps before finishing inside one
//! leaf with word-level popcounts.
//!
//! Indices are 0-based: `rank1(i)` counts ones among the first `i` bits and
//! `select1(k)` returns the index of the `k`-th one (`k >= 1`). The 1-based
//! position of the `k`-th one is therefore `select1(k) + 1`.

const LEAF_WORDS: usize = 32;
const LEAF_BITS: usize = LEAF_WORDS * 64;
const MIN_LEAF_BITS: usize = LEAF_BITS / 4;
const BUILD_FILL: usize = LEAF_BITS * 3 / 4;

#[derive(Clone)]
struct Leaf {
    words: [u64; LEAF_WORDS],
    len: usize,
}

impl Leaf {
    fn new() -> Self {
        Leaf { words: [0; LEAF_WORDS], len: 0 }
    }

    #[inline]
    fn get(&self, off: usize) -> bool {
        (self.words[off / 64] >> (off % 64)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, off: usize, bit: bool) {
        let w = &mut self.words[off / 64];
        if bit {
            *w |= 1 << (off % 64);
        } else {
            *w &= !(1 << (off % 64));
        }
    }

    fn ones(&self) -> usize {
        let full = self.len.div_ceil(64);
        self.words[..full].iter().map(|w| w.count_ones() as usize).sum()
    }

    fn rank1(&self, off: usize) -> usize {
        let full = off / 64;
        let mut r: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        let rem = off % 64;
        if rem > 0 {
            r += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        r
    }

    fn select(&self, mut k: usize, ones: bool) -> usize {
        let nw = self.len.div_ceil(64);
        for (wi, &raw) in self.words[..nw].iter().enumerate() {
            let w = if ones { raw } else { !raw };
            let c = w.count_ones() as usize;
            if c >= k {
                return wi * 64 + select_in_word(w, k);
            }
            k -= c;
        }
        unreachable!("select past end of leaf")
    }

    fn insert(&mut self, off: usize, bit: bool) {
        debug_assert!(self.len < LEAF_BITS && off <= self.len);
        let w = off / 64;
        let nw = (self.len + 1).div_ceil(64);
        for j in (w + 1..nw).rev() {
            self.words[j] = (self.words[j] << 1) | (self.words[j - 1] >> 63);
        }
        let b = off % 64;
        let old = self.words[w];
        let low = old & low_mask(b);
        let high = old & !low_mask(b);
        self.words[w] = low | ((bit as u64) << b) | (high << 1);
        self.len += 1;
    }

    fn remove(&mut self, off: usize) -> bool {
        debug_assert!(off < self.len);
        let bit = self.get(off);
        let w = off / 64;
        let nw = self.len.div_ceil(64);
        let b = off % 64;
        let old = self.words[w];
        let low = old & low_mask(b);
        let high = if b == 63 { 0 } else { (old >> (b + 1)) << b };
        let carry = if w + 1 < nw { self.words[w + 1] << 63 } else { 0 };
        self.words[w] = low | high | carry;
        for j in w + 1..nw {
            let next = if j + 1 < nw { self.words[j + 1] << 63 } else { 0 };
            self.words[j] = (self.words[j] >> 1) | next;
        }
        self.len -= 1;
        // keep bits past `len` zero so popcounts over whole words stay exact
        if !self.len.is_multiple_of(64) {
            let last = self.len / 64;
            self.words[last] &= low_mask(self.len % 64);
        }
        if nw > self.len.div_ceil(64) {
            self.words[nw - 1] = 0;
        }
        bit
    }

    fn push(&mut self, bit: bool) {
        let off = self.len;
        self.len += 1;
        self.set(off, bit);
    }

    fn append_bits(&self, mut from: usize, to: usize, out: &mut BitBuf) {
        while from < to {
            let sh = from % 64;
            let take = (64 - sh).min(to - from);
            out.append((self.words[from / 64] >> sh) & low_mask(take), take);
            from += take;
        }
    }
}

#[inline]
fn low_mask(b: usize) -> u64 {
    if b >= 64 {
        u64::MAX
    } else {
        (1u64 << b) - 1
    }
}

/// Position of the `k`-th set bit of `w` (`k >= 1`).
#[inline]
pub(crate) fn select_in_word(mut w: u64, k: usize) -> usize {
    for _ in 1..k {
        w &= w - 1;
    }
    w.trailing_zeros() as usize
}

/// Packed bit buffer used for bulk extraction.
#[derive(Clone, Debug, Default)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl BitBuf {
    pub fn with_capacity(bits: usize) -> Self {
        BitBuf { words: Vec::with_capacity(bits.div_ceil(64)), len: 0 }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the low `n` bits of `bits`; higher bits must be zero.
    #[inline]
    pub fn append(&mut self, bits: u64, n: usize) {
        let sh = self.len % 64;
        if sh == 0 {
            self.words.push(bits);
        } else {
            *self.words.last_mut().unwrap() |= bits << sh;
            if sh + n > 64 {
                self.words.push(bits >> (64 - sh));
            }
        }
        self.len += n;
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Clone, Default)]
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn build(values: impl Iterator<Item = u64>) -> Self {
        let mut tree = vec![0];
        tree.extend(values);
        let n = tree.len() - 1;
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        Fenwick { tree }
    }

    #[inline]
    fn add(&mut self, leaf: usize, delta: i64) {
        let n = self.tree.len() - 1;
        let mut i = leaf + 1;
        while i <= n {
            self.tree[i] = (self.tree[i] as i64 + delta) as u64;
            i += i & i.wrapping_neg();
        }
    }
}

/// Mutable bit sequence with rank, select, insertion and removal.
#[derive(Clone, Default)]
pub struct DynamicBitvector {
    leaves: Vec<Leaf>,
    bits: Fenwick,
    ones_fw: Fenwick,
    len: usize,
    ones: usize,
    top_step: usize,
}

impl std::fmt::Debug for DynamicBitvector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynamicBitvector")
            .field("len", &self.len)
            .field("ones", &self.ones)
            .field("leaves", &self.leaves.len())
            .finish()
    }
}

impl DynamicBitvector {
    pub fn new() -> Self {
        let mut bv = DynamicBitvector::default();
        bv.reindex();
        bv
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut leaves = Vec::new();
        let mut cur = Leaf::new();
        for bit in bits {
            if cur.len == BUILD_FILL {
                leaves.push(std::mem::replace(&mut cur, Leaf::new()));
            }
            cur.push(bit);
        }
        if cur.len > 0 || leaves.is_empty() {
            leaves.push(cur);
        }
        let mut bv = DynamicBitvector { leaves, ..Default::default() };
        bv.reindex();
        bv
    }

    fn reindex(&mut self) {
        if self.leaves.is_empty() {
            self.leaves.push(Leaf::new());
        }
        let ones: Vec<u64> = self.leaves.iter().map(|l| l.ones() as u64).collect();
        self.len = self.leaves.iter().map(|l| l.len).sum();
        self.ones = ones.iter().sum::<u64>() as usize;
        self.bits = Fenwick::build(self.leaves.iter().map(|l| l.len as u64));
        self.ones_fw = Fenwick::build(ones.into_iter());
        let n = self.leaves.len();
        self.top_step = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    /// Leaf holding index `i` (`i < len`), its offset, and ones before it.
    #[inline]
    fn locate(&self, i: usize) -> (usize, usize, usize) {
        let n = self.leaves.len();
        let mut pos = 0;
        let mut rem = i;
        let mut ones = 0u64;
        let mut step = self.top_step;
        while step > 0 {
            let next = pos + step;
            if next <= n && (self.bits.tree[next] as usize) <= rem {
                pos = next;
                rem -= self.bits.tree[next] as usize;
                ones += self.ones_fw.tree[next];
            }
            step >>= 1;
        }
        (pos, rem, ones as usize)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let (leaf, off, _) = self.locate(i);
        self.leaves[leaf].get(off)
    }

    /// Ones among the first `i` bits.
    pub fn rank1(&self, i: usize) -> usize {
        assert!(i <= self.len);
        if i == self.len {
            return self.ones;
        }
        let (leaf, off, before) = self.locate(i);
        before + self.leaves[leaf].rank1(off)
    }

    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    pub fn rank(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    /// Index of the `k`-th one, `k >= 1`.
    pub fn select1(&self, k: usize) -> Option<usize> {
        self.select(k, true)
    }

    /// Index of the `k`-th zero, `k >= 1`.
    pub fn select0(&self, k: usize) -> Option<usize> {
        self.select(k, false)
    }

    pub fn select(&self, k: usize, bit: bool) -> Option<usize> {
        let total = if bit { self.ones } else { self.len - self.ones };
        if k == 0 || k > total {
            return None;
        }
        let n = self.leaves.len();
        let mut pos = 0;
        let mut rem = k;
        let mut bits_before = 0usize;
        let mut step = self.top_step;
        while step > 0 {
            let next = pos + step;
            if next <= n {
                let b = self.bits.tree[next] as usize;
                let o = self.ones_fw.tree[next] as usize;
                let c = if bit { o } else { b - o };
                if c < rem {
                    pos = next;
                    rem -= c;
                    bits_before += b;
                }
            }
            step >>= 1;
        }
        Some(bits_before + self.leaves[pos].select(rem, bit))
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len);
        let (leaf, off, _) = self.locate(i);
        let old = self.leaves[leaf].get(off);
        if old != bit {
            self.leaves[leaf].set(off, bit);
            let d = if bit { 1 } else { -1 };
            self.ones_fw.add(leaf, d);
            self.ones = (self.ones as i64 + d) as usize;
        }
    }

    pub fn insert(&mut self, i: usize, bit: bool) {
        assert!(i <= self.len, "insert index {i} out of range {}", self.len);
        let (mut leaf, mut off) = if i == self.len {
            let last = self.leaves.len() - 1;
            (last, self.leaves[last].len)
        } else {
            let (l, o, _) = self.locate(i);
            (l, o)
        };
        if self.leaves[leaf].len == LEAF_BITS {
            self.split_leaf(leaf);
            if off >= self.leaves[leaf].len {
                off -= self.leaves[leaf].len;
                leaf += 1;
            }
        }
        self.leaves[leaf].insert(off, bit);
        self.bits.add(leaf, 1);
        self.len += 1;
        if bit {
            self.ones_fw.add(leaf, 1);
            self.ones += 1;
        }
    }

    pub fn remove(&mut self, i: usize) -> bool {
        assert!(i < self.len, "remove index {i} out of range {}", self.len);
        let (leaf, off, _) = self.locate(i);
        let bit = self.leaves[leaf].remove(off);
        self.bits.add(leaf, -1);
        self.len -= 1;
        if bit {
            self.ones_fw.add(leaf, -1);
            self.ones -= 1;
        }
        if self.leaves[leaf].len < MIN_LEAF_BITS && self.leaves.len() > 1 {
            self.rebalance(leaf);
        }
        bit
    }

    fn split_leaf(&mut self, leaf: usize) {
        let old = &self.leaves[leaf];
        let half = old.len / 2;
        let mut left = Leaf::new();
        let mut right = Leaf::new();
        for off in 0..old.len {
            if off < half {
                left.push(old.get(off));
            } else {
                right.push(old.get(off));
            }
        }
        self.leaves[leaf] = left;
        self.leaves.insert(leaf + 1, right);
        self.reindex();
    }

    fn rebalance(&mut self, leaf: usize) {
        let (a, b) = if leaf + 1 < self.leaves.len() { (leaf, leaf + 1) } else { (leaf - 1, leaf) };
        let total = self.leaves[a].len + self.leaves[b].len;
        let mut all = Leaf::new();
        let mut spill = Leaf::new();
        let keep = if total <= LEAF_BITS * 3 / 4 { total } else { total / 2 };
        let mut k = 0;
        for idx in [a, b] {
            let l = &self.leaves[idx];
            for off in 0..l.len {
                if k < keep {
                    all.push(l.get(off));
                } else {
                    spill.push(l.get(off));
                }
                k += 1;
            }
        }
        self.leaves[a] = all;
        if spill.len > 0 {
            self.leaves[b] = spill;
        } else {
            self.leaves.remove(b);
        }
        self.reindex();
    }

    /// Bits `from..to` in order.
    pub fn bits_range(&self, from: usize, to: usize) -> BitBuf {
        assert!(from <= to && to <= self.len);
        let mut out = BitBuf::with_capacity(to - from);
        if from == to {
            return out;
        }
        let (mut leaf, mut off, _) = self.locate(from);
        let mut left = to - from;
        while left > 0 {
            let l = &self.leaves[leaf];
            let take = (l.len - off).min(left);
            l.append_bits(off, off + take, &mut out);
            left -= take;
            leaf += 1;
            off = 0;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.leaves.iter().flat_map(|l| (0..l.len).map(move |o| l.get(o)))
    }

    /// Allocated payload bits plus the two count directories.
    pub fn size_bits(&self) -> u64 {
        let leaf_bits = (self.leaves.len() * LEAF_BITS) as u64;
        let counter_width = (usize::BITS - self.len.max(1).leading_zeros()) as u64;
        leaf_bits + 2 * counter_width * self.leaves.len() as u64
    }

    #[cfg(test)]
    fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}
