//! Insert and delete maintenance.

use super::arena::NONE;
use super::params::t_for;
use super::{MajorityIndex, NodeId, NIL};
use crate::error::Result;
use crate::Symbol;

impl MajorityIndex {
    /// Inserts `c` so that it becomes `S[i]`.
    pub fn insert(&mut self, c: Symbol, i: usize) -> Result<()> {
        self.seq.insert(c, i)?;
        self.after_update(i, 1);
        Ok(())
    }

    /// Removes and returns `S[i]`.
    pub fn delete(&mut self, i: usize) -> Result<Symbol> {
        let c = self.seq.delete(i)?;
        self.after_update(i, -1);
        Ok(c)
    }

    /// Parameters are recomputed once `⌈lg n / lg lg n⌉` has moved and at
    /// least a quarter of the size at the last rebuild has been updated.
    fn params_stale(&self) -> bool {
        let n = self.seq.len();
        t_for(n) != self.params.t && self.since_build >= (self.params.n as u64 / 4).max(1)
    }

    fn after_update(&mut self, i: usize, delta: i64) {
        self.since_build += 1;
        if self.root == NIL || self.seq.is_empty() || self.params_stale() {
            self.rebuild_all();
            return;
        }
        let path = self.path_to(i);
        for &(v, start) in &path {
            let node = self.node_mut(v);
            if let Some(nav) = node.nav.as_mut() {
                let p = (i - start + 1) as u64;
                let j = if p <= nav.sums.total() {
                    nav.sums.search(p).expect("position in block") - 1
                } else {
                    nav.sums.len() - 1
                };
                nav.sums.update(j + 1, delta).expect("navigation sums stay non-negative");
            }
            node.len = (node.len as i64 + delta) as u64;
        }
        self.bump_groups(&path);
        self.root_u += 1;
        if self.root_u >= self.params.node_limit(self.node(self.root).level) {
            self.refresh_root();
        }
        let (leaf, leaf_start) = *path.last().unwrap();
        let len = self.node(leaf).len;
        let is_root = leaf == self.root;
        let reshaped = len >= self.params.split_at(0) || (!is_root && len < self.params.leaf);
        if !reshaped {
            if self.node(leaf).arenas.is_some() != self.wants_arenas(leaf) {
                self.relayout_leaves(&[leaf], leaf_start);
            } else if self.node(leaf).arenas.is_some() {
                self.arena_update(leaf, leaf_start, (i - leaf_start) as u64, delta);
            }
        }
        if delta > 0 {
            for &(v, _) in path.iter().rev() {
                if self.node(v).len >= self.params.split_at(self.node(v).level) {
                    self.split(v);
                }
            }
        } else {
            for &(v, _) in path.iter().rev() {
                let node = self.node(v);
                if node.parent != NIL && self.params.underflows(node.level, node.len) {
                    self.merge(v);
                }
            }
            self.collapse_root();
        }
    }

    /// Counts one update against every list whose window holds the position.
    fn bump_groups(&mut self, path: &[(NodeId, usize)]) {
        for &(x, start) in path {
            let (level, left, right, len) = {
                let n = self.node(x);
                (n.level, n.left, n.right, n.len)
            };
            if level == 0 {
                continue;
            }
            let limit = self.params.node_limit(level - 1);
            let starts =
                [(left, start.wrapping_sub(self.len_of(left) as usize)), (x, start), (right, start + len as usize)];
            for (g, s) in starts {
                if g == NIL {
                    continue;
                }
                let node = self.node_mut(g);
                node.u += 1;
                if node.u >= limit {
                    self.refresh_group(g, s);
                }
            }
        }
    }

    /// Medium and β miniblock maintenance for one update at leaf offset `off`.
    fn arena_update(&mut self, leaf: NodeId, leaf_start: usize, off: u64, delta: i64) {
        let levels = self.node(leaf).arenas.as_ref().unwrap().mini.levels();
        let (left, right) = (self.node(leaf).left, self.node(leaf).right);
        let from = leaf_start - self.len_of(left) as usize;
        let to = leaf_start + (self.len_of(leaf) + self.len_of(right)) as usize - 1;
        self.work.begin_region(from.max(1), to);
        for level in 0..levels {
            self.mini_update(leaf, leaf_start, level, off, delta);
        }
        for level in 0..self.params.beta_levels as usize {
            self.beta_update(leaf, leaf_start, level, off, delta);
        }
        self.work.end_region();
    }

    fn mini_update(&mut self, leaf: NodeId, leaf_start: usize, level: usize, off: u64, delta: i64) {
        let lvl = level as u32;
        let min = self.params.mini_len(lvl);
        let limit = self.params.mini_limit(lvl);
        let (left_leaf, right_leaf) = (self.node(leaf).left, self.node(leaf).right);
        let s = {
            let a = self.node_mut(leaf).arenas.as_mut().unwrap();
            let (s, _) = a.mini.locate(level, off);
            let slot = &mut a.mini.slots[s as usize];
            slot.len = (slot.len as i64 + delta) as u32;
            s
        };
        // Counters of M, pred(M) and succ(M), which may sit in neighbor leaves.
        let (prev, next) = {
            let slot = &self.node(leaf).arenas.as_ref().unwrap().mini.slots[s as usize];
            (slot.prev, slot.next)
        };
        let left_start = leaf_start.wrapping_sub(self.len_of(left_leaf) as usize);
        let right_start = leaf_start + self.len_of(leaf) as usize;
        let mut targets: Vec<(NodeId, usize, u16)> = vec![(leaf, leaf_start, s)];
        if prev != NONE {
            targets.push((leaf, leaf_start, prev));
        } else if let Some(a) = self.arenas(left_leaf) {
            targets.push((left_leaf, left_start, a.mini.tails[level]));
        }
        if next != NONE {
            targets.push((leaf, leaf_start, next));
        } else if let Some(a) = self.arenas(right_leaf) {
            targets.push((right_leaf, right_start, a.mini.heads[level]));
        }
        for &(l, ls, t) in &targets {
            let slot = &mut self.node_mut(l).arenas.as_mut().unwrap().mini.slots[t as usize];
            slot.u += 1;
            if slot.u as u64 >= limit {
                self.fill_mini(l, ls, t);
            }
        }
        let len = self.node(leaf).arenas.as_ref().unwrap().mini.slots[s as usize].len as u64;
        if delta > 0 && len >= 2 * min {
            let t = self.node_mut(leaf).arenas.as_mut().unwrap().mini.split(s);
            self.refill_mini_run(leaf, leaf_start, s, t);
        } else if delta < 0 && len < min {
            let a = self.node_mut(leaf).arenas.as_mut().unwrap();
            let slot = &a.mini.slots[s as usize];
            let (x, y) = if slot.next != NONE {
                (s, slot.next)
            } else if slot.prev != NONE {
                (slot.prev, s)
            } else {
                return;
            };
            let total = a.mini.slots[x as usize].len + a.mini.slots[y as usize].len;
            if total as u64 >= 2 * min {
                a.mini.slots[x as usize].len = total / 2;
                a.mini.slots[y as usize].len = total - total / 2;
                self.refill_mini_run(leaf, leaf_start, x, y);
            } else {
                a.mini.slots[x as usize].len = total;
                let moved = a.mini.remove(y);
                let x = if moved == Some(x) { y } else { x };
                self.refill_mini_run(leaf, leaf_start, x, x);
            }
        }
    }

    /// Refreshes slots `first..=last` (adjacent) and their outer neighbors.
    fn refill_mini_run(&mut self, leaf: NodeId, leaf_start: usize, first: u16, last: u16) {
        self.fill_mini(leaf, leaf_start, first);
        if last != first {
            self.fill_mini(leaf, leaf_start, last);
        }
        let (level, prev, next) = {
            let a = self.node(leaf).arenas.as_ref().unwrap();
            let f = &a.mini.slots[first as usize];
            (f.level as usize, f.prev, a.mini.slots[last as usize].next)
        };
        if prev != NONE {
            self.fill_mini(leaf, leaf_start, prev);
        } else {
            let left = self.node(leaf).left;
            if let Some(a) = self.arenas(left) {
                let t = a.mini.tails[level];
                let ls = leaf_start - self.len_of(left) as usize;
                self.fill_mini(left, ls, t);
            }
        }
        if next != NONE {
            self.fill_mini(leaf, leaf_start, next);
        } else {
            let right = self.node(leaf).right;
            if let Some(a) = self.arenas(right) {
                let h = a.mini.heads[level];
                let rs = leaf_start + self.len_of(leaf) as usize;
                self.fill_mini(right, rs, h);
            }
        }
    }

    fn beta_update(&mut self, leaf: NodeId, leaf_start: usize, level: usize, off: u64, delta: i64) {
        let lvl = level as u32;
        let min = self.params.beta_len(lvl);
        let limit = self.params.beta_limit(lvl);
        let fanout = self.params.fanout;
        let (left_leaf, right_leaf) = (self.node(leaf).left, self.node(leaf).right);
        let (k, start, count) = {
            let b = &mut self.node_mut(leaf).arenas.as_mut().unwrap().beta[level];
            let (k, start, path) = b.route.locate(off);
            b.route.add(&path, delta);
            let block = &mut b.blocks[k];
            block.len = (block.len as i64 + delta) as u32;
            (k, start, b.blocks.len())
        };
        let left_start = leaf_start.wrapping_sub(self.len_of(left_leaf) as usize);
        let right_start = leaf_start + self.len_of(leaf) as usize;
        let mut targets: Vec<(NodeId, usize, usize)> = vec![(leaf, leaf_start, k)];
        if k > 0 {
            targets.push((leaf, leaf_start, k - 1));
        } else if let Some(a) = self.arenas(left_leaf) {
            targets.push((left_leaf, left_start, a.beta[level].blocks.len() - 1));
        }
        if k + 1 < count {
            targets.push((leaf, leaf_start, k + 1));
        } else if self.arenas(right_leaf).is_some() {
            targets.push((right_leaf, right_start, 0));
        }
        for &(l, ls, t) in &targets {
            let b = &mut self.node_mut(l).arenas.as_mut().unwrap().beta[level];
            let block = &mut b.blocks[t];
            block.u += 1;
            if block.u as u64 >= limit {
                let offset = b.start_of(t);
                self.fill_beta(l, ls, level, t, offset);
            }
        }
        let b = &mut self.node_mut(leaf).arenas.as_mut().unwrap().beta[level];
        let len = b.blocks[k].len as u64;
        if delta > 0 && len >= 2 * min {
            let right = b.blocks[k].len - b.blocks[k].len / 2;
            b.blocks[k].len /= 2;
            let mut fresh = b.blocks[k].clone();
            fresh.len = right;
            b.blocks.insert(k + 1, fresh);
            b.reroute(fanout);
            self.refill_beta_run(leaf, leaf_start, level, k, k + 1, start);
        } else if delta < 0 && len < min && count > 1 {
            let (x, y) = if k + 1 < count { (k, k + 1) } else { (k - 1, k) };
            let total = b.blocks[x].len + b.blocks[y].len;
            let x_start = if x == k { start } else { start - b.blocks[x].len as u64 };
            if total as u64 >= 2 * min {
                b.blocks[x].len = total / 2;
                b.blocks[y].len = total - total / 2;
                b.reroute(fanout);
                self.refill_beta_run(leaf, leaf_start, level, x, y, x_start);
            } else {
                b.blocks[x].len = total;
                b.blocks.remove(y);
                b.reroute(fanout);
                self.refill_beta_run(leaf, leaf_start, level, x, x, x_start);
            }
        }
    }

    /// Refreshes blocks `first..=last` (starting at leaf offset `offset`)
    /// and their outer neighbors.
    fn refill_beta_run(
        &mut self,
        leaf: NodeId,
        leaf_start: usize,
        level: usize,
        first: usize,
        last: usize,
        offset: u64,
    ) {
        let lens: Vec<u64> = self.node(leaf).arenas.as_ref().unwrap().beta[level].lens();
        let mut o = offset;
        for (k, len) in lens.iter().enumerate().take(last + 1).skip(first) {
            self.fill_beta(leaf, leaf_start, level, k, o);
            o += len;
        }
        if first > 0 {
            self.fill_beta(leaf, leaf_start, level, first - 1, offset - lens[first - 1]);
        } else {
            let left = self.node(leaf).left;
            if let Some(a) = self.arenas(left) {
                let b = &a.beta[level];
                let k = b.blocks.len() - 1;
                let off = b.start_of(k);
                let ls = leaf_start - self.len_of(left) as usize;
                self.fill_beta(left, ls, level, k, off);
            }
        }
        if last + 1 < lens.len() {
            self.fill_beta(leaf, leaf_start, level, last + 1, o);
        } else {
            let right = self.node(leaf).right;
            if self.arenas(right).is_some() {
                let rs = leaf_start + self.len_of(leaf) as usize;
                self.fill_beta(right, rs, level, 0, 0);
            }
        }
    }
}
