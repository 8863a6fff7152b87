//! Candidate refresh, navigation tables, leaf arenas and the split/merge
//! rules of the weight-balanced tree.

use super::arena::{partition, BetaBlock, BetaLevel, LeafArenas, MiniArena, NONE};
use super::{cut_groups, MajorityIndex, Nav, Node, NodeId, NodeInfo, NIL};
use crate::error::{Error, Result};
use crate::gamma_chunks::{encode_chunks, ChunkedCandidates};
use crate::partial_sum::PartialSumSeq;

impl MajorityIndex {
    /// Recomputes the list shared by the children of `p` (block at `start`).
    pub(crate) fn refresh_group(&mut self, p: NodeId, start: usize) {
        let (level, len, left, right) = {
            let n = self.node(p);
            (n.level, n.len, n.left, n.right)
        };
        debug_assert!(level > 0);
        let from = start - self.len_of(left) as usize;
        let to = start + (len + self.len_of(right)) as usize - 1;
        let theta = self.params.node_theta(level - 1);
        let cands = self.work.candidates(&self.seq, from, to, theta);
        let node = self.node_mut(p);
        node.cands = cands;
        node.u = 0;
        self.stats.node_rebuilds += 1;
    }

    /// Recomputes the root's own list; its window is the whole sequence.
    pub(crate) fn refresh_root(&mut self) {
        self.root_u = 0;
        if self.root == NIL {
            self.root_cands.clear();
            return;
        }
        let theta = self.params.node_theta(self.node(self.root).level);
        let n = self.seq.len();
        self.root_cands = self.work.candidates(&self.seq, 1, n, theta);
        self.stats.node_rebuilds += 1;
    }

    pub(crate) fn refresh_nav(&mut self, x: NodeId) {
        let level = self.node(x).level;
        if !self.params.is_marked(level) {
            self.node_mut(x).nav = None;
            return;
        }
        let mut frontier = vec![x];
        for _ in 0..self.params.stride {
            frontier = frontier.iter().flat_map(|&v| self.node(v).children.iter().copied()).collect();
        }
        let lens: Vec<u64> = frontier.iter().map(|&v| self.len_of(v)).collect();
        self.node_mut(x).nav = Some(Nav { sums: PartialSumSeq::rebuild(&lens), targets: frontier });
    }

    /// Refreshes navigation of `v` and every ancestor within `stride` levels.
    pub(crate) fn refresh_nav_around(&mut self, v: NodeId) {
        let top = self.node(v).level + self.params.stride;
        let mut a = v;
        while a != NIL && self.node(a).level <= top {
            self.refresh_nav(a);
            a = self.node(a).parent;
        }
    }

    pub(crate) fn wants_arenas(&self, leaf: NodeId) -> bool {
        !(leaf == self.root && self.node(leaf).len < self.params.leaf)
    }

    /// Fresh miniblock boundaries for `leaf`; candidates are filled separately.
    pub(crate) fn layout_leaf(&mut self, leaf: NodeId) {
        if !self.wants_arenas(leaf) {
            self.node_mut(leaf).arenas = None;
            return;
        }
        let p = &self.params;
        let len = self.node(leaf).len;
        let mins: Vec<u64> = (0..=p.mini_levels).map(|l| p.mini_len(l)).collect();
        let mini = MiniArena::layout(len, &mins);
        let beta = (0..p.beta_levels)
            .map(|l| {
                let empty = ChunkedCandidates::empty(p.beta_min_freq(l));
                let blocks = partition(len, p.beta_len(l))
                    .into_iter()
                    .map(|part| BetaBlock { len: part as u32, u: 0, window: 0, cands: empty.clone() })
                    .collect();
                let mut level = BetaLevel { blocks, route: Default::default() };
                level.reroute(p.fanout);
                level
            })
            .collect();
        self.node_mut(leaf).arenas = Some(Box::new(LeafArenas { mini, beta }));
    }

    pub(crate) fn arenas(&self, leaf: NodeId) -> Option<&LeafArenas> {
        if leaf == NIL {
            None
        } else {
            self.node(leaf).arenas.as_deref()
        }
    }

    fn arenas_mut(&mut self, leaf: NodeId) -> &mut LeafArenas {
        self.node_mut(leaf).arenas.as_deref_mut().expect("leaf has arenas")
    }

    /// Length of the first (`head`) or last miniblock of medium level `level`.
    fn mini_edge(&self, leaf: NodeId, level: usize, head: bool) -> u64 {
        match self.arenas(leaf) {
            Some(a) => {
                let s = if head { a.mini.heads[level] } else { a.mini.tails[level] };
                a.mini.slots[s as usize].len as u64
            }
            None => 0,
        }
    }

    fn beta_edge(&self, leaf: NodeId, level: usize, head: bool) -> u64 {
        match self.arenas(leaf) {
            Some(a) => {
                let blocks = &a.beta[level].blocks;
                let b = if head { &blocks[0] } else { &blocks[blocks.len() - 1] };
                b.len as u64
            }
            None => 0,
        }
    }

    /// Window `pred·M·succ` of medium slot `s`, as 1-based positions.
    pub(crate) fn mini_window(&self, leaf: NodeId, leaf_start: usize, s: u16) -> (usize, usize) {
        let node = self.node(leaf);
        let a = node.arenas.as_deref().expect("leaf has arenas");
        let slot = &a.mini.slots[s as usize];
        let level = slot.level as usize;
        let pred = if slot.prev != NONE {
            a.mini.slots[slot.prev as usize].len as u64
        } else {
            self.mini_edge(node.left, level, false)
        };
        let succ = if slot.next != NONE {
            a.mini.slots[slot.next as usize].len as u64
        } else {
            self.mini_edge(node.right, level, true)
        };
        let start = leaf_start + a.mini.start_of(s) as usize;
        (start - pred as usize, start + (slot.len as u64 + succ) as usize - 1)
    }

    pub(crate) fn fill_mini(&mut self, leaf: NodeId, leaf_start: usize, s: u16) {
        let (from, to) = self.mini_window(leaf, leaf_start, s);
        let level = self.arenas(leaf).unwrap().mini.slots[s as usize].level as u32;
        let theta = self.params.mini_theta(level);
        let cands = self.work.candidates(&self.seq, from, to, theta);
        let slot = &mut self.arenas_mut(leaf).mini.slots[s as usize];
        slot.cands = cands.into_iter().map(|(c, n)| (c, n as u32)).collect();
        slot.u = 0;
        self.stats.mini_rebuilds += 1;
    }

    /// Window of β block `k` at sub-level `level`, given its leaf offset.
    pub(crate) fn beta_window(
        &self,
        leaf: NodeId,
        leaf_start: usize,
        level: usize,
        k: usize,
        offset: u64,
    ) -> (usize, usize) {
        let node = self.node(leaf);
        let blocks = &node.arenas.as_deref().expect("leaf has arenas").beta[level].blocks;
        let pred = if k > 0 { blocks[k - 1].len as u64 } else { self.beta_edge(node.left, level, false) };
        let succ =
            if k + 1 < blocks.len() { blocks[k + 1].len as u64 } else { self.beta_edge(node.right, level, true) };
        let start = leaf_start + offset as usize;
        (start - pred as usize, start + (blocks[k].len as u64 + succ) as usize - 1)
    }

    pub(crate) fn fill_beta(&mut self, leaf: NodeId, leaf_start: usize, level: usize, k: usize, offset: u64) {
        let (from, to) = self.beta_window(leaf, leaf_start, level, k, offset);
        let lvl = level as u32;
        let theta = self.params.beta_theta(lvl);
        let min_freq = self.params.beta_min_freq(lvl);
        let window = (to - from + 1) as u64;
        let mut cands = self.work.candidates(&self.seq, from, to, theta);
        // Only a block awaiting a leaf restructure can be short enough to
        // hold candidates below the chunk minimum.
        cands.retain(|&(_, n)| n as u128 * *min_freq.denom() as u128 >= *min_freq.numer() as u128 * window as u128);
        let chunks = encode_chunks(&cands, window, min_freq).expect("candidates satisfy the chunk minimum");
        let block = &mut self.arenas_mut(leaf).beta[level].blocks[k];
        block.cands = chunks;
        block.window = window as u32;
        block.u = 0;
        self.stats.beta_rebuilds += 1;
    }

    pub(crate) fn fill_leaf(&mut self, leaf: NodeId, leaf_start: usize) {
        let Some(a) = self.arenas(leaf) else { return };
        let slots = a.mini.slots.len() as u16;
        let beta_lens: Vec<Vec<u64>> = a.beta.iter().map(|b| b.lens()).collect();
        for s in 0..slots {
            self.fill_mini(leaf, leaf_start, s);
        }
        for (level, lens) in beta_lens.iter().enumerate() {
            let mut offset = 0;
            for (k, len) in lens.iter().enumerate() {
                self.fill_beta(leaf, leaf_start, level, k, offset);
                offset += len;
            }
        }
    }

    /// Refreshes the first (`head`) or last miniblock of every level of `leaf`.
    pub(crate) fn fill_leaf_edge(&mut self, leaf: NodeId, leaf_start: usize, head: bool) {
        let Some(a) = self.arenas(leaf) else { return };
        let slots: Vec<u16> = if head { a.mini.heads.clone() } else { a.mini.tails.clone() };
        let edges: Vec<(usize, u64)> = a
            .beta
            .iter()
            .map(|b| if head { (0, 0) } else { (b.blocks.len() - 1, b.start_of(b.blocks.len() - 1)) })
            .collect();
        for s in slots {
            self.fill_mini(leaf, leaf_start, s);
        }
        for (level, (k, offset)) in edges.into_iter().enumerate() {
            self.fill_beta(leaf, leaf_start, level, k, offset);
        }
    }

    /// New layout and candidates for the consecutive leaves `leaves`
    /// (starting at `start`) and the adjoining miniblocks of their neighbors.
    pub(crate) fn relayout_leaves(&mut self, leaves: &[NodeId], start: usize) {
        let mut s = start;
        for &v in leaves {
            self.layout_leaf(v);
        }
        for &v in leaves {
            self.fill_leaf(v, s);
            s += self.len_of(v) as usize;
        }
        let left = self.node(leaves[0]).left;
        if left != NIL {
            self.fill_leaf_edge(left, start - self.len_of(left) as usize, false);
        }
        let right = self.node(*leaves.last().unwrap()).right;
        if right != NIL {
            self.fill_leaf_edge(right, s, true);
        }
    }

    /// Refreshes the lists of `nodes` (consecutive, starting at `start`)
    /// and of their outer neighbors.
    fn refresh_groups_around(&mut self, nodes: &[NodeId], start: usize) {
        let mut s = start;
        for &v in nodes {
            self.refresh_group(v, s);
            s += self.len_of(v) as usize;
        }
        let left = self.node(nodes[0]).left;
        if left != NIL {
            self.refresh_group(left, start - self.len_of(left) as usize);
        }
        let right = self.node(*nodes.last().unwrap()).right;
        if right != NIL {
            self.refresh_group(right, s);
        }
    }

    /// Refreshes everything derived from the blocks of `nodes`, which just
    /// changed shape, and navigation above them.
    fn after_reshape(&mut self, nodes: &[NodeId]) {
        let start = self.start_of(nodes[0]);
        if self.node(nodes[0]).level == 0 {
            self.relayout_leaves(nodes, start);
        } else {
            self.refresh_groups_around(nodes, start);
        }
        for &v in nodes {
            self.refresh_nav_around(v);
        }
    }

    /// Child index of `v` within its parent.
    fn child_index(&self, v: NodeId) -> usize {
        let p = self.node(v).parent;
        self.node(p).children.iter().position(|&c| c == v).expect("child is linked")
    }

    /// Splits `v` in two near-equal halves, creating a new root if needed.
    pub(crate) fn split(&mut self, v: NodeId) {
        self.stats.splits += 1;
        let level = self.node(v).level;
        let total = self.node(v).len;
        let w = self.alloc(Node::new(level, 0));
        if level == 0 {
            self.node_mut(v).len = total / 2;
            self.node_mut(w).len = total - total / 2;
        } else {
            let kids = std::mem::take(&mut self.node_mut(v).children);
            let lens: Vec<u64> = kids.iter().map(|&c| self.len_of(c)).collect();
            let k = cut_groups(&lens, 2)[0];
            let left_len: u64 = lens[..k].iter().sum();
            for &c in &kids[k..] {
                self.node_mut(c).parent = w;
            }
            self.node_mut(w).children = kids[k..].to_vec();
            self.node_mut(w).len = total - left_len;
            let vn = self.node_mut(v);
            vn.children = kids[..k].to_vec();
            vn.len = left_len;
        }
        let right = self.node(v).right;
        {
            let wn = self.node_mut(w);
            wn.left = v;
            wn.right = right;
        }
        if right != NIL {
            self.node_mut(right).left = w;
        }
        self.node_mut(v).right = w;
        let p = self.node(v).parent;
        let new_root = p == NIL;
        if new_root {
            let mut r = Node::new(level + 1, total);
            r.children = vec![v, w];
            let r = self.alloc(r);
            self.node_mut(v).parent = r;
            self.node_mut(w).parent = r;
            self.root = r;
        } else {
            let idx = self.child_index(v);
            self.node_mut(p).children.insert(idx + 1, w);
            self.node_mut(w).parent = p;
        }
        self.after_reshape(&[v, w]);
        if new_root {
            let r = self.root;
            self.refresh_group(r, 1);
            self.refresh_nav(r);
            self.refresh_root();
        }
    }

    /// Fixes a non-root node that fell below its weight bound by merging it
    /// with an adjacent sibling, splitting the union again if it is too big.
    pub(crate) fn merge(&mut self, v: NodeId) {
        self.stats.merges += 1;
        let p = self.node(v).parent;
        let idx = self.child_index(v);
        let siblings = self.node(p).children.len();
        let (a, b) =
            if idx + 1 < siblings { (v, self.node(p).children[idx + 1]) } else { (self.node(p).children[idx - 1], v) };
        let level = self.node(a).level;
        let total = self.len_of(a) + self.len_of(b);
        let keep_both = total >= self.params.split_at(level);
        if level == 0 {
            if keep_both {
                self.node_mut(a).len = total / 2;
                self.node_mut(b).len = total - total / 2;
            } else {
                self.node_mut(a).len = total;
            }
        } else {
            let mut kids = std::mem::take(&mut self.node_mut(a).children);
            kids.append(&mut self.node_mut(b).children);
            let lens: Vec<u64> = kids.iter().map(|&c| self.len_of(c)).collect();
            let k = if keep_both { cut_groups(&lens, 2)[0] } else { kids.len() };
            let left_len: u64 = lens[..k].iter().sum();
            for &c in &kids[..k] {
                self.node_mut(c).parent = a;
            }
            for &c in &kids[k..] {
                self.node_mut(c).parent = b;
            }
            self.node_mut(b).children = kids[k..].to_vec();
            self.node_mut(b).len = total - left_len;
            self.node_mut(a).children = kids[..k].to_vec();
            self.node_mut(a).len = left_len;
        }
        if keep_both {
            self.after_reshape(&[a, b]);
            return;
        }
        let bi = self.child_index(b);
        self.node_mut(p).children.remove(bi);
        let right = self.node(b).right;
        self.node_mut(a).right = right;
        if right != NIL {
            self.node_mut(right).left = a;
        }
        self.release(b);
        self.after_reshape(&[a]);
    }

    /// Replaces an internal root that has a single child by that child.
    pub(crate) fn collapse_root(&mut self) {
        let mut changed = false;
        while self.root != NIL && self.node(self.root).children.len() == 1 {
            let r = self.root;
            let c = self.node(r).children[0];
            self.node_mut(c).parent = NIL;
            self.release(r);
            self.root = c;
            changed = true;
        }
        if changed {
            let r = self.root;
            if self.node(r).level == 0 {
                let has = self.node(r).arenas.is_some();
                if has != self.wants_arenas(r) {
                    self.relayout_leaves(&[r], 1);
                }
            }
            self.refresh_root();
        }
    }

    /// Path from the root to the leaf that holds (or receives) position `i`,
    /// with the start position of each block.
    pub(crate) fn path_to(&self, i: usize) -> Vec<(NodeId, usize)> {
        let mut path = Vec::with_capacity(8);
        let mut v = self.root;
        let mut start = 1usize;
        path.push((v, start));
        loop {
            let node = self.node(v);
            if node.children.is_empty() {
                return path;
            }
            let last = node.children.len() - 1;
            for (k, &c) in node.children.iter().enumerate() {
                let len = self.len_of(c) as usize;
                if i < start + len || k == last {
                    v = c;
                    break;
                }
                start += len;
            }
            path.push((v, start));
        }
    }

    /// The node at `target_level` whose block contains position `i`, found
    /// top-down with navigation jumps between marked levels.
    pub fn descend_to_level(&self, i: usize, target_level: u32) -> Result<NodeInfo> {
        let n = self.len();
        if i == 0 || i > n {
            return Err(Error::PositionOutOfRange { pos: i, len: n });
        }
        let height = self.node(self.root).level;
        if target_level > height {
            return Err(Error::InvalidParameter(format!("level {target_level} above root level {height}")));
        }
        let (v, start) = self.descend(i, target_level);
        let node = self.node(v);
        Ok(NodeInfo { id: v, level: node.level, len: node.len, start })
    }

    pub(crate) fn descend(&self, i: usize, target_level: u32) -> (NodeId, usize) {
        let stride = self.params.stride;
        let mut v = self.root;
        let mut start = 1usize;
        loop {
            let node = self.node(v);
            if node.level <= target_level {
                return (v, start);
            }
            if let Some(nav) = node.nav.as_ref().filter(|_| node.level - stride >= target_level) {
                let j = nav.sums.search((i - start + 1) as u64).expect("position inside block") - 1;
                start += nav.sums.sum(j).expect("index in range") as usize;
                v = nav.targets[j];
                continue;
            }
            for &c in &node.children {
                let len = self.len_of(c) as usize;
                if i < start + len {
                    v = c;
                    break;
                }
                start += len;
            }
        }
    }

    /// The same node found by summing child lengths level by level.
    pub fn descend_naive(&self, i: usize, target_level: u32) -> Result<NodeInfo> {
        let n = self.len();
        if i == 0 || i > n {
            return Err(Error::PositionOutOfRange { pos: i, len: n });
        }
        let mut v = self.root;
        let mut start = 1usize;
        while self.node(v).level > target_level {
            for &c in &self.node(v).children {
                let len = self.len_of(c) as usize;
                if i < start + len {
                    v = c;
                    break;
                }
                start += len;
            }
        }
        let node = self.node(v);
        Ok(NodeInfo { id: v, level: node.level, len: node.len, start })
    }
}
