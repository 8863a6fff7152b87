//! Full structural audit against a plain copy of the sequence.

use std::collections::HashSet;

use super::arena::NONE;
use super::{MajorityIndex, MajoritySpace, NodeId, NIL};
use crate::dynseq::ceil_log2;
use crate::Symbol;

/// First invariant violation found by [`MajorityIndex::audit`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("audit failed: {0}")]
pub struct AuditError(pub String);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(AuditError(format!($($fmt)+)));
        }
    };
}

/// Symbols whose count in `window` satisfies `keep(count)`.
fn heavy(window: &[Symbol], counts: &mut [u64], keep: impl Fn(u64) -> bool) -> Vec<(Symbol, u64)> {
    for &c in window {
        counts[c as usize] += 1;
    }
    let mut out = Vec::new();
    for &c in window {
        let n = counts[c as usize];
        if n > 0 {
            if keep(n) {
                out.push((c, n));
            }
            counts[c as usize] = 0;
        }
    }
    out
}

impl MajorityIndex {
    /// Checks every structural invariant; meant for tests and debugging.
    pub fn audit(&self) -> Result<(), AuditError> {
        let n = self.len();
        if n == 0 {
            ensure!(self.root == NIL, "empty index keeps a root");
            return Ok(());
        }
        ensure!(self.root != NIL, "non-empty index without root");
        let text = self.seq.to_vec();
        let mut counts = vec![0u64; self.sigma() as usize + 1];
        let p = &self.params;
        let num = *p.alpha_eff.numer() as u128;
        let den = *p.alpha_eff.denom() as u128;
        let root = self.node(self.root);
        ensure!(root.len as usize == n, "root length {} != n {}", root.len, n);
        ensure!(root.parent == NIL && root.left == NIL && root.right == NIL, "root has links");
        let height = root.level;
        ensure!(height == 0 || root.children.len() >= 2, "internal root with {} children", root.children.len());
        ensure!(root.len < p.split_at(height), "root length {} at split size", root.len);

        for level in (0..=height).rev() {
            let nodes = self.level_nodes(level);
            for (k, &(v, start)) in nodes.iter().enumerate() {
                let node = self.node(v);
                ensure!(node.level == level, "node {v} level {} listed at {level}", node.level);
                let left = if k == 0 { NIL } else { nodes[k - 1].0 };
                let right = nodes.get(k + 1).map_or(NIL, |x| x.0);
                ensure!(node.left == left && node.right == right, "node {v} neighbor links broken");
                if v != self.root {
                    if level == 0 {
                        ensure!(
                            node.len >= p.leaf && node.len < 2 * p.leaf,
                            "leaf {v} length {} outside [{}, {})",
                            node.len,
                            p.leaf,
                            2 * p.leaf
                        );
                    } else {
                        ensure!(
                            !p.underflows(level, node.len) && node.len < p.split_at(level),
                            "node {v} at level {level} length {} out of bounds",
                            node.len
                        );
                    }
                }
                if level == 0 {
                    ensure!(node.children.is_empty(), "leaf {v} has children");
                    self.audit_leaf(v, start, &text, &mut counts)?;
                    continue;
                }
                ensure!(node.arenas.is_none(), "internal node {v} has arenas");
                ensure!(node.children.len() <= 32, "node {v} has {} children", node.children.len());
                ensure!(v == self.root || node.children.len() >= 2, "node {v} has one child");
                let mut sum = 0;
                for &c in &node.children {
                    let child = self.node(c);
                    ensure!(child.parent == v, "child {c} of {v} points elsewhere");
                    ensure!(child.level + 1 == level, "child {c} level mismatch");
                    sum += child.len;
                }
                ensure!(sum == node.len, "node {v} length {} != children sum {sum}", node.len);
                // Children list: every symbol above α·b_{level-1} in the window.
                ensure!(node.u < p.node_limit(level - 1), "node {v} counter {} at limit", node.u);
                let from = start - self.len_of(node.left) as usize;
                let to = start + (node.len + self.len_of(node.right)) as usize - 1;
                let w = p.weight(level - 1) as u128;
                let must = heavy(&text[from - 1..to], &mut counts, |c| 2 * c as u128 * den > num * w);
                self.check_listed(&must, &node.cands, &format!("children of node {v}"))?;
                let bound = ((192 * den).div_ceil(num) + 1) as usize;
                ensure!(node.cands.len() <= bound, "node {v} list has {} entries", node.cands.len());
                self.audit_nav(v)?;
            }
        }
        ensure!(self.root_u < p.node_limit(height), "root counter at limit");
        let w = p.weight(height) as u128;
        let must = heavy(&text, &mut counts, |c| 2 * c as u128 * den > num * w);
        self.check_listed(&must, &self.root_cands, "root")?;
        Ok(())
    }

    fn check_listed(&self, must: &[(Symbol, u64)], have: &[(Symbol, u64)], what: &str) -> Result<(), AuditError> {
        for w in have.windows(2) {
            ensure!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0), "{what}: list out of order");
        }
        let set: HashSet<Symbol> = have.iter().map(|e| e.0).collect();
        for &(c, count) in must {
            ensure!(set.contains(&c), "{what}: symbol {c} with count {count} missing");
        }
        Ok(())
    }

    fn audit_nav(&self, v: NodeId) -> Result<(), AuditError> {
        let node = self.node(v);
        let marked = self.params.is_marked(node.level);
        ensure!(marked == node.nav.is_some(), "node {v} navigation presence wrong");
        if let Some(nav) = &node.nav {
            let mut frontier = vec![v];
            for _ in 0..self.params.stride {
                frontier = frontier.iter().flat_map(|&x| self.node(x).children.iter().copied()).collect();
            }
            ensure!(nav.targets == frontier, "node {v} navigation targets stale");
            let lens: Vec<u64> = frontier.iter().map(|&x| self.len_of(x)).collect();
            ensure!(nav.sums.entries() == lens.as_slice(), "node {v} navigation sums stale");
        }
        Ok(())
    }

    fn audit_leaf(&self, v: NodeId, start: usize, text: &[Symbol], counts: &mut [u64]) -> Result<(), AuditError> {
        let node = self.node(v);
        let p = &self.params;
        ensure!(node.arenas.is_some() == self.wants_arenas(v), "leaf {v} arena presence wrong");
        let Some(a) = node.arenas.as_deref() else { return Ok(()) };
        let num = *p.alpha_eff.numer() as u128;
        let den = *p.alpha_eff.denom() as u128;
        let mini = &a.mini;
        ensure!(mini.levels() as u32 == p.mini_levels + 1, "leaf {v} medium level count");
        let mut seen = vec![false; mini.slots.len()];
        for level in 0..mini.levels() {
            let mut s = mini.heads[level];
            let mut prev = NONE;
            let mut total = 0u64;
            let min = p.mini_len(level as u32);
            while s != NONE {
                ensure!((s as usize) < mini.slots.len(), "leaf {v} slot {s} beyond used prefix");
                ensure!(!seen[s as usize], "leaf {v} slot {s} linked twice");
                seen[s as usize] = true;
                let slot = &mini.slots[s as usize];
                ensure!(slot.level as usize == level && slot.prev == prev, "leaf {v} slot {s} links broken");
                ensure!(
                    slot.len as u64 >= min && (slot.len as u64) < 2 * min,
                    "leaf {v} level -{level} miniblock length {} outside [{min}, {})",
                    slot.len,
                    2 * min
                );
                ensure!((slot.u as u64) < p.mini_limit(level as u32), "leaf {v} slot {s} counter at limit");
                let (from, to) = self.mini_window(v, start, s);
                ensure!(from >= 1 && to <= text.len(), "leaf {v} slot {s} window out of range");
                let m = min as u128;
                let must = heavy(&text[from - 1..to], counts, |c| 2 * c as u128 * den > num * m);
                let have: Vec<(Symbol, u64)> = slot.cands.iter().map(|&(c, n)| (c, n as u64)).collect();
                self.check_listed(&must, &have, &format!("leaf {v} slot {s}"))?;
                let bound = (24 * den).div_ceil(num) as usize;
                ensure!(slot.cands.len() <= bound, "leaf {v} slot {s} list has {} entries", slot.cands.len());
                total += slot.len as u64;
                prev = s;
                s = slot.next;
            }
            ensure!(mini.tails[level] == prev, "leaf {v} level -{level} tail stale");
            ensure!(total == node.len, "leaf {v} level -{level} lengths sum {total} != {}", node.len);
        }
        ensure!(seen.iter().all(|&x| x), "leaf {v} has used slots outside every list");

        ensure!(a.beta.len() as u32 == p.beta_levels, "leaf {v} β level count");
        for (level, b) in a.beta.iter().enumerate() {
            let lvl = level as u32;
            let min = p.beta_len(lvl);
            let total: u64 = b.blocks.iter().map(|x| x.len as u64).sum();
            ensure!(total == node.len, "leaf {v} β level {level} lengths sum {total} != {}", node.len);
            ensure!(b.route.total() == total, "leaf {v} β level {level} route total stale");
            let mut lower: Vec<u64> = b.blocks.iter().map(|x| x.len as u64).collect();
            for (rl, nodes) in b.route.levels.iter().enumerate() {
                let mut next = Vec::new();
                let mut covered = 0usize;
                for rn in nodes {
                    ensure!(rn.first as usize == covered, "leaf {v} β route level {rl} gap");
                    let k = rn.sums.len();
                    ensure!(k <= 2 * p.fanout && (nodes.len() == 1 || k >= p.fanout), "leaf {v} β route fanout {k}");
                    ensure!(rn.sums.entries() == &lower[covered..covered + k], "leaf {v} β route sums stale");
                    covered += k;
                    next.push(rn.sums.total());
                }
                ensure!(covered == lower.len(), "leaf {v} β route level {rl} incomplete");
                lower = next;
            }
            let alpha = p.beta_alpha(lvl);
            let (bn, bd) = (*alpha.numer() as u128, *alpha.denom() as u128);
            let mut offset = 0u64;
            for (k, block) in b.blocks.iter().enumerate() {
                ensure!(
                    block.len as u64 >= min && (block.len as u64) < 2 * min,
                    "leaf {v} β level {level} block length {} outside [{min}, {})",
                    block.len,
                    2 * min
                );
                ensure!((block.u as u64) < p.beta_limit(lvl), "leaf {v} β block {k} counter at limit");
                let (from, to) = self.beta_window(v, start, level, k, offset);
                let m = min as u128;
                let must = heavy(&text[from - 1..to], counts, |c| 2 * c as u128 * bd > bn * m);
                let stored: Vec<(u32, Symbol)> = crate::gamma_chunks::scan_chunks(&block.cands)
                    .collect::<crate::error::Result<_>>()
                    .map_err(|e| AuditError(format!("leaf {v} β block {k}: {e}")))?;
                for q in stored.windows(2) {
                    ensure!(q[0] < q[1], "leaf {v} β block {k} chunk order broken");
                }
                let set: HashSet<Symbol> = stored.iter().map(|e| e.1).collect();
                for &(c, count) in &must {
                    ensure!(
                        set.contains(&c),
                        "leaf {v} β level {level} block {k}: symbol {c} with count {count} missing"
                    );
                }
                let bound = ((24 * bd).div_ceil(bn)) as usize;
                ensure!(stored.len() <= bound, "leaf {v} β block {k} holds {} symbols", stored.len());
                offset += block.len as u64;
            }
        }
        Ok(())
    }

    /// Bits used by the tree, the medium arenas and the β arenas, using the
    /// field widths of the slot layout.
    pub fn space(&self) -> MajoritySpace {
        let mut out = MajoritySpace::default();
        if self.root == NIL {
            return out;
        }
        let p = &self.params;
        let n = self.len() as u64;
        let lg_sigma = ceil_log2(self.sigma() as u64).max(1) as u64;
        let lg_n = ceil_log2(n + 1).max(1) as u64;
        let lg_nodes = ceil_log2(self.node_count() as u64 + 1).max(1) as u64;
        let alpha_inv = (*p.alpha_eff.denom()).div_ceil(*p.alpha_eff.numer());
        let slot_cap = (4 * p.leaf).div_ceil(p.mini);
        let lg_slots = ceil_log2(slot_cap).max(1) as u64;
        let mini_slot = 24 * alpha_inv * lg_sigma
            + ceil_log2(2 * p.leaf) as u64
            + ceil_log2((p.leaf / 2).max(2)) as u64
            + 2 * lg_slots;
        let mut live = vec![true; self.nodes.len()];
        for &f in &self.free {
            live[f as usize] = false;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            // level, length, counter, parent, two neighbors, child pointers;
            // lengths and counts are bounded by the node or its window
            let limit = p.split_at(node.level).max(node.len);
            let lg_len = ceil_log2(limit + 1) as u64;
            let lg_count = ceil_log2(3 * limit + 1) as u64;
            let lg_u = ceil_log2(p.node_limit(node.level.saturating_sub(1)) + 1) as u64;
            out.tree_bits += 8 + lg_len + lg_u + 3 * lg_nodes + node.children.len() as u64 * lg_nodes;
            out.tree_bits += node.cands.len() as u64 * (lg_sigma + lg_count);
            if let Some(nav) = &node.nav {
                out.tree_bits += nav.sums.len() as u64 * (lg_len + lg_nodes);
            }
            if let Some(a) = node.arenas.as_deref() {
                out.arena_bits += slot_cap.max(a.mini.slots.len() as u64) * mini_slot;
                out.arena_bits += 2 * a.mini.levels() as u64 * lg_slots;
                for (level, b) in a.beta.iter().enumerate() {
                    let ms = p.beta_len(level as u32);
                    let lg_len = ceil_log2(2 * ms).max(1) as u64;
                    let lg_u = ceil_log2(p.beta_limit(level as u32) + 1).max(1) as u64;
                    let lg_w = ceil_log2(6 * ms).max(1) as u64;
                    for block in &b.blocks {
                        out.beta_bits += lg_len + lg_u + lg_w + block.cands.encoded_bits() as u64;
                    }
                    let lg_leaf = ceil_log2(2 * p.leaf).max(1) as u64;
                    out.beta_bits += b.route.entry_count() as u64 * (lg_leaf + lg_slots);
                }
            }
        }
        out.tree_bits += self.root_cands.len() as u64 * (lg_sigma + lg_n);
        out
    }
}
