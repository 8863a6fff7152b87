//! Dynamic range α-majority and β-majority index.
//!
//! A weight-balanced B-tree (branching 8, leaf parameter `L`) partitions the
//! sequence into blocks. Every node keeps a list of symbols that may be
//! frequent in windows around its block, and every leaf keeps two families
//! of miniblocks for shorter ranges. Queries pick the size class of the
//! range, fetch the stored candidates and verify them with `rank`.

mod arena;
mod audit;
mod params;
mod query;
mod tree;
mod update;


pub use audit::AuditError;
pub use params::{IndexConfig, Params};
pub use query::{verify_candidates, QueryPath, QueryTrace};

use crate::dynseq::DynamicSequence;
use crate::error::{Error, Result};
use crate::fraction::{check_open_unit, Fraction};
use crate::frequent::WindowTally;
use crate::partial_sum::PartialSumSeq;
use crate::Symbol;

use arena::LeafArenas;

pub(crate) type NodeId = u32;
pub(crate) const NIL: NodeId = u32::MAX;

/// Marked-level navigation: lengths of the descendants `stride` levels down.
#[derive(Clone, Debug)]
pub(crate) struct Nav {
    pub sums: PartialSumSeq,
    pub targets: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub level: u32,
    pub len: u64,
    pub parent: NodeId,
    pub left: NodeId,
    pub right: NodeId,
    pub children: Vec<NodeId>,
    /// Candidate list shared by all children: they have the same window
    /// (this block plus its two same-level neighbors).
    pub cands: Vec<(Symbol, u64)>,
    /// Updates that touched that window since `cands` was computed.
    pub u: u64,
    pub nav: Option<Nav>,
    pub arenas: Option<Box<LeafArenas>>,
}

impl Node {
    fn new(level: u32, len: u64) -> Node {
        Node {
            level,
            len,
            parent: NIL,
            left: NIL,
            right: NIL,
            children: Vec::new(),
            cands: Vec::new(),
            u: 0,
            nav: None,
            arenas: None,
        }
    }
}

/// Counters of maintenance work, for reports and tests.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MajorityStats {
    pub node_rebuilds: u64,
    pub mini_rebuilds: u64,
    pub beta_rebuilds: u64,
    pub splits: u64,
    pub merges: u64,
    pub global_rebuilds: u64,
}

/// Node summary returned by [`MajorityIndex::descend_to_level`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeInfo {
    pub id: u32,
    pub level: u32,
    pub len: u64,
    /// 1-based position of the first symbol of the block.
    pub start: usize,
}

/// Bit counts of the index structures, excluding the sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MajoritySpace {
    pub tree_bits: u64,
    pub arena_bits: u64,
    pub beta_bits: u64,
}

/// Windows at least this long are counted by wavelet-tree descent rather
/// than extracted.
const HEAVY_DESCENT_MIN: usize = 512;

#[derive(Clone, Debug, Default)]
pub(crate) struct Workspace {
    scratch: Vec<Symbol>,
    tally: Option<WindowTally>,
    snapshot: Option<Vec<Symbol>>,
    // Region around the leaf being updated, extracted on first use.
    region: Option<(usize, usize)>,
    region_syms: Vec<Symbol>,
    region_ready: bool,
}

impl Workspace {
    /// Symbols of `S[from..=to]` occurring more than `theta` times.
    pub fn candidates(&mut self, seq: &DynamicSequence, from: usize, to: usize, theta: u64) -> Vec<(Symbol, u64)> {
        let Workspace { scratch, tally, snapshot, region, region_syms, region_ready } = self;
        let tally = tally.get_or_insert_with(|| WindowTally::new(seq.sigma()));
        let window: &[Symbol] = match (snapshot, *region) {
            (Some(s), _) => &s[from - 1..to],
            (None, Some((a, b))) if a <= from && to <= b => {
                if !*region_ready {
                    region_syms.clear();
                    seq.extract_into(a, b, region_syms);
                    *region_ready = true;
                }
                &region_syms[from - a..=to - a]
            }
            _ if to - from >= HEAVY_DESCENT_MIN => {
                let mut out = Vec::new();
                seq.heavy_symbols(from, to, theta, &mut out);
                out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                return out;
            }
            _ => {
                scratch.clear();
                seq.extract_into(from, to, scratch);
                scratch
            }
        };
        tally.above(window, theta).entries
    }

    /// Serves later windows inside `S[from..=to]` from one extraction, until
    /// [`Workspace::end_region`].
    pub fn begin_region(&mut self, from: usize, to: usize) {
        self.region = (from <= to).then_some((from, to));
        self.region_ready = false;
    }

    pub fn end_region(&mut self) {
        self.region = None;
        self.region_ready = false;
    }
}

/// Dynamic index answering range β-majority queries for any `β` at least
/// the build threshold, over a sequence that supports insert and delete.
#[derive(Clone, Debug)]
pub struct MajorityIndex {
    pub(crate) seq: DynamicSequence,
    pub(crate) params: Params,
    pub(crate) config: IndexConfig,
    pub(crate) nodes: Vec<Node>,
    pub(crate) free: Vec<NodeId>,
    pub(crate) root: NodeId,
    pub(crate) root_cands: Vec<(Symbol, u64)>,
    pub(crate) root_u: u64,
    pub(crate) since_build: u64,
    pub(crate) work: Workspace,
    pub(crate) stats: MajorityStats,
}

impl MajorityIndex {
    pub fn build(symbols: &[Symbol], sigma: u32, alpha: Fraction) -> Result<Self> {
        Self::build_with(symbols, sigma, alpha, IndexConfig::default())
    }

    pub fn build_with(symbols: &[Symbol], sigma: u32, alpha: Fraction, config: IndexConfig) -> Result<Self> {
        check_open_unit(alpha)?;
        let seq = DynamicSequence::from_symbols(symbols, sigma)?;
        Self::from_sequence(seq, alpha, config)
    }

    pub fn from_sequence(seq: DynamicSequence, alpha: Fraction, config: IndexConfig) -> Result<Self> {
        check_open_unit(alpha)?;
        let params = Params::new(seq.len(), seq.sigma(), alpha, &config);
        let mut index = MajorityIndex {
            seq,
            params,
            config,
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            root_cands: Vec::new(),
            root_u: 0,
            since_build: 0,
            work: Workspace::default(),
            stats: MajorityStats::default(),
        };
        index.rebuild_all();
        Ok(index)
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

    pub fn alpha(&self) -> Fraction {
        self.params.alpha
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn sequence(&self) -> &DynamicSequence {
        &self.seq
    }

    pub fn stats(&self) -> &MajorityStats {
        &self.stats
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    /// Level of the root, or `None` for an empty index.
    pub fn height(&self) -> Option<u32> {
        (self.root != NIL).then(|| self.nodes[self.root as usize].level)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub(crate) fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id as usize]
    }

    pub(crate) fn len_of(&self, id: NodeId) -> u64 {
        if id == NIL {
            0
        } else {
            self.nodes[id as usize].len
        }
    }

    pub(crate) fn alloc(&mut self, node: Node) -> NodeId {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as NodeId
            }
        }
    }

    pub(crate) fn release(&mut self, id: NodeId) {
        let n = &mut self.nodes[id as usize];
        n.children = Vec::new();
        n.cands = Vec::new();
        n.nav = None;
        n.arenas = None;
        n.parent = NIL;
        n.left = NIL;
        n.right = NIL;
        n.len = 0;
        self.free.push(id);
    }

    /// 1-based start position of the block of `id`.
    pub(crate) fn start_of(&self, id: NodeId) -> usize {
        let mut start = 1usize;
        let mut v = id;
        loop {
            let p = self.nodes[v as usize].parent;
            if p == NIL {
                return start;
            }
            for &c in &self.nodes[p as usize].children {
                if c == v {
                    break;
                }
                start += self.nodes[c as usize].len as usize;
            }
            v = p;
        }
    }

    /// Discards all derived structures and rebuilds them from the sequence.
    pub fn rebuild_all(&mut self) {
        self.params = Params::new(self.seq.len(), self.seq.sigma(), self.params.alpha, &self.config);
        self.nodes.clear();
        self.free.clear();
        self.root = NIL;
        self.root_cands.clear();
        self.root_u = 0;
        self.since_build = 0;
        self.stats.global_rebuilds += 1;
        let n = self.seq.len() as u64;
        if n == 0 {
            return;
        }
        self.work.snapshot = Some(self.seq.to_vec());
        let leaf = self.params.leaf;
        let count = if n < 2 * leaf {
            1
        } else {
            let lo = n.div_ceil(2 * leaf - 1);
            let hi = n / leaf;
            ((2 * n + 3 * leaf / 2) / (3 * leaf)).clamp(lo, hi)
        };
        let mut level_nodes: Vec<NodeId> = Vec::with_capacity(count as usize);
        for j in 0..count {
            let len = n / count + (j < n % count) as u64;
            level_nodes.push(self.alloc(Node::new(0, len)));
        }
        let mut level = 0u32;
        while level_nodes.len() > 1 {
            let unit = self.params.weight(level + 1);
            let lens: Vec<u64> = level_nodes.iter().map(|&v| self.len_of(v)).collect();
            let groups = if n < 2 * unit { 1 } else { n.div_ceil(3 * unit / 2) as usize };
            let sizes = cut_groups(&lens, groups);
            let mut parents = Vec::with_capacity(sizes.len());
            let mut first = 0;
            for size in sizes {
                let kids: Vec<NodeId> = level_nodes[first..first + size].to_vec();
                let len = lens[first..first + size].iter().sum();
                let mut node = Node::new(level + 1, len);
                node.children = kids.clone();
                let p = self.alloc(node);
                for k in kids {
                    self.node_mut(k).parent = p;
                }
                parents.push(p);
                first += size;
            }
            self.link_level(&level_nodes);
            level_nodes = parents;
            level += 1;
        }
        self.root = level_nodes[0];
        self.refresh_all();
        self.work.snapshot = None;
    }

    pub(crate) fn link_level(&mut self, ids: &[NodeId]) {
        for (k, &v) in ids.iter().enumerate() {
            let left = if k == 0 { NIL } else { ids[k - 1] };
            let right = ids.get(k + 1).copied().unwrap_or(NIL);
            let node = self.node_mut(v);
            node.left = left;
            node.right = right;
        }
    }

    /// Ids at `level` in sequence order, with their start positions.
    pub(crate) fn level_nodes(&self, level: u32) -> Vec<(NodeId, usize)> {
        let mut out = Vec::new();
        if self.root == NIL {
            return out;
        }
        let mut frontier = vec![(self.root, 1usize)];
        let mut lvl = self.node(self.root).level;
        while lvl > level {
            let mut next = Vec::new();
            for (v, start) in frontier {
                let mut s = start;
                for &c in &self.node(v).children {
                    next.push((c, s));
                    s += self.len_of(c) as usize;
                }
            }
            frontier = next;
            lvl -= 1;
        }
        out.extend(frontier);
        out
    }

    /// Recomputes every candidate list, navigation table and leaf arena.
    fn refresh_all(&mut self) {
        let height = self.node(self.root).level;
        for level in 1..=height {
            for (v, start) in self.level_nodes(level) {
                self.refresh_group(v, start);
                self.refresh_nav(v);
            }
        }
        self.refresh_root();
        let leaves = self.level_nodes(0);
        for &(v, _) in &leaves {
            self.layout_leaf(v);
        }
        for &(v, start) in &leaves {
            self.fill_leaf(v, start);
        }
    }

    /// Verifies `1 <= l <= r <= n`.
    pub(crate) fn check_range(&self, l: usize, r: usize) -> Result<()> {
        let n = self.len();
        if l == 0 || l > n {
            return Err(Error::PositionOutOfRange { pos: l, len: n });
        }
        if r < l || r > n {
            return Err(Error::PositionOutOfRange { pos: r, len: n });
        }
        Ok(())
    }
}

/// Group sizes that cut `lens` into `groups` runs of near-equal total,
/// each cut placed at the boundary nearest its ideal position.
pub(crate) fn cut_groups(lens: &[u64], groups: usize) -> Vec<usize> {
    let groups = groups.clamp(1, lens.len());
    let total: u64 = lens.iter().sum();
    let mut prefix = Vec::with_capacity(lens.len() + 1);
    prefix.push(0u64);
    for &l in lens {
        prefix.push(prefix.last().unwrap() + l);
    }
    let mut sizes = Vec::with_capacity(groups);
    let mut prev = 0usize;
    for j in 1..groups {
        let target = total as u128 * j as u128 / groups as u128;
        let lo = prev + 1;
        let hi = lens.len() - (groups - j);
        let mut best = lo;
        for k in lo..=hi {
            let d = (prefix[k] as i128 - target as i128).abs();
            let bd = (prefix[best] as i128 - target as i128).abs();
            if d < bd {
                best = k;
            }
        }
        sizes.push(best - prev);
        prev = best;
    }
    sizes.push(lens.len() - prev);
    sizes
}
