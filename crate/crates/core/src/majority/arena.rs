//! Per-leaf miniblock storage for the medium levels `-l` and the β
//! sub-levels `-l*`.

use crate::gamma_chunks::ChunkedCandidates;
use crate::partial_sum::PartialSumSeq;
use crate::Symbol;

pub(crate) const NONE: u16 = u16::MAX;

/// Splits `len` into `max(1, ⌊len / min⌋)` near-equal parts.
pub(crate) fn partition(len: u64, min: u64) -> Vec<u64> {
    let k = (len / min.max(1)).max(1);
    let base = len / k;
    let extra = len % k;
    (0..k).map(|j| base + (j < extra) as u64).collect()
}

#[derive(Clone, Debug)]
pub(crate) struct MiniSlot {
    pub level: u8,
    pub len: u32,
    pub u: u32,
    pub prev: u16,
    pub next: u16,
    pub cands: Vec<(Symbol, u32)>,
}

/// Slot array holding the miniblocks of every medium level of one leaf.
///
/// Used slots always form a prefix; each level threads its miniblocks
/// through `prev`/`next` in sequence order.
#[derive(Clone, Debug, Default)]
pub(crate) struct MiniArena {
    pub slots: Vec<MiniSlot>,
    pub heads: Vec<u16>,
    pub tails: Vec<u16>,
}

impl MiniArena {
    /// Miniblock boundaries for a leaf of length `len`; candidates left empty.
    pub fn layout(len: u64, mins: &[u64]) -> MiniArena {
        let mut arena = MiniArena { slots: Vec::new(), heads: Vec::new(), tails: Vec::new() };
        for (level, &min) in mins.iter().enumerate() {
            let mut prev = NONE;
            for part in partition(len, min) {
                let id = arena.slots.len() as u16;
                if prev == NONE {
                    arena.heads.push(id);
                } else {
                    arena.slots[prev as usize].next = id;
                }
                arena.slots.push(MiniSlot {
                    level: level as u8,
                    len: part as u32,
                    u: 0,
                    prev,
                    next: NONE,
                    cands: Vec::new(),
                });
                prev = id;
            }
            arena.tails.push(prev);
        }
        arena
    }

    pub fn levels(&self) -> usize {
        self.heads.len()
    }

    /// Slot ids of `level` in sequence order.
    #[cfg(test)]
    pub fn order(&self, level: usize) -> Vec<u16> {
        let mut out = Vec::new();
        let mut s = self.heads[level];
        while s != NONE {
            out.push(s);
            s = self.slots[s as usize].next;
        }
        out
    }

    /// Slot containing 0-based leaf offset `offset`, and its start offset.
    /// An offset equal to the level's total length maps to the last slot.
    pub fn locate(&self, level: usize, offset: u64) -> (u16, u64) {
        let mut s = self.heads[level];
        let mut start = 0u64;
        loop {
            let slot = &self.slots[s as usize];
            if offset < start + slot.len as u64 || slot.next == NONE {
                return (s, start);
            }
            start += slot.len as u64;
            s = slot.next;
        }
    }

    /// Start offset of slot `s` within the leaf.
    pub fn start_of(&self, s: u16) -> u64 {
        let mut start = 0;
        let mut p = self.slots[s as usize].prev;
        while p != NONE {
            start += self.slots[p as usize].len as u64;
            p = self.slots[p as usize].prev;
        }
        start
    }

    /// Splits slot `s` into two halves; returns the new right half.
    pub fn split(&mut self, s: u16) -> u16 {
        let id = self.slots.len() as u16;
        let slot = &mut self.slots[s as usize];
        let total = slot.len;
        slot.len = total / 2;
        let (level, next) = (slot.level, slot.next);
        slot.next = id;
        self.slots.push(MiniSlot { level, len: total - total / 2, u: 0, prev: s, next, cands: Vec::new() });
        if next == NONE {
            self.tails[level as usize] = id;
        } else {
            self.slots[next as usize].prev = id;
        }
        id
    }

    /// Unlinks slot `s` and moves the last used slot into its place.
    /// Returns the id the moved slot had before, if one moved.
    pub fn remove(&mut self, s: u16) -> Option<u16> {
        let (level, prev, next) = {
            let slot = &self.slots[s as usize];
            (slot.level as usize, slot.prev, slot.next)
        };
        if prev == NONE {
            self.heads[level] = next;
        } else {
            self.slots[prev as usize].next = next;
        }
        if next == NONE {
            self.tails[level] = prev;
        } else {
            self.slots[next as usize].prev = prev;
        }
        let last = (self.slots.len() - 1) as u16;
        self.slots.swap_remove(s as usize);
        if last == s {
            return None;
        }
        let (level, prev, next) = {
            let slot = &self.slots[s as usize];
            (slot.level as usize, slot.prev, slot.next)
        };
        if prev == NONE {
            self.heads[level] = s;
        } else {
            self.slots[prev as usize].next = s;
        }
        if next == NONE {
            self.tails[level] = s;
        } else {
            self.slots[next as usize].prev = s;
        }
        Some(last)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BetaBlock {
    pub len: u32,
    pub u: u32,
    /// Window length when the candidates were computed.
    pub window: u32,
    pub cands: ChunkedCandidates,
}

#[derive(Clone, Debug)]
pub(crate) struct RouteNode {
    pub first: u32,
    pub sums: PartialSumSeq,
}

/// B-tree over the miniblocks of one β level, keyed by position.
#[derive(Clone, Debug, Default)]
pub(crate) struct Route {
    /// `levels[0]` indexes blocks, higher levels index the level below.
    pub levels: Vec<Vec<RouteNode>>,
}

/// Descent record: `(route level, node index, child slot)` from the top.
pub(crate) type RoutePath = Vec<(usize, usize, usize)>;

impl Route {
    pub fn build(lens: &[u64], fanout: usize) -> Route {
        let mut levels = Vec::new();
        let mut current: Vec<u64> = lens.to_vec();
        loop {
            let k = current.len();
            let groups = if k < fanout { 1 } else { k / fanout };
            let mut nodes = Vec::with_capacity(groups);
            let mut next = Vec::with_capacity(groups);
            let mut first = 0usize;
            for g in 0..groups {
                let part = k / groups + (g < k % groups) as usize;
                let sums = PartialSumSeq::rebuild(&current[first..first + part]);
                next.push(sums.total());
                nodes.push(RouteNode { first: first as u32, sums });
                first += part;
            }
            levels.push(nodes);
            if next.len() == 1 {
                break;
            }
            current = next;
        }
        Route { levels }
    }

    pub fn total(&self) -> u64 {
        self.levels.last().map_or(0, |top| top[0].sums.total())
    }

    /// Block containing 0-based `offset` (or the last block when `offset`
    /// equals the total), its start offset, and the descent path.
    pub fn locate(&self, offset: u64) -> (usize, u64, RoutePath) {
        let mut path = Vec::with_capacity(self.levels.len());
        let mut node = 0usize;
        let mut start = 0u64;
        for lvl in (0..self.levels.len()).rev() {
            let n = &self.levels[lvl][node];
            let local = offset - start;
            let j = if local < n.sums.total() {
                n.sums.search(local + 1).expect("offset within route node") - 1
            } else {
                n.sums.len() - 1
            };
            start += n.sums.sum(j).expect("child index in range");
            path.push((lvl, node, j));
            node = n.first as usize + j;
        }
        (node, start, path)
    }

    pub fn add(&mut self, path: &RoutePath, delta: i64) {
        for &(lvl, node, j) in path {
            self.levels[lvl][node].sums.update(j + 1, delta).expect("route sums stay non-negative");
        }
    }

    pub fn entry_count(&self) -> usize {
        self.levels.iter().flatten().map(|n| n.sums.len()).sum()
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct BetaLevel {
    pub blocks: Vec<BetaBlock>,
    pub route: Route,
}

impl BetaLevel {
    pub fn lens(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.len as u64).collect()
    }

    pub fn reroute(&mut self, fanout: usize) {
        self.route = Route::build(&self.lens(), fanout);
    }

    pub fn start_of(&self, k: usize) -> u64 {
        self.blocks[..k].iter().map(|b| b.len as u64).sum()
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LeafArenas {
    pub mini: MiniArena,
    pub beta: Vec<BetaLevel>,
}
