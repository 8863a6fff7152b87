//! Searchable prefix sums over a short array of nonnegative integers.
//!
//! Entries are kept flat with one cached total per block of about `√m`
//! entries, so `sum`, `search` and `update` touch `O(√m)` words. All uses in
//! this crate keep `m` at `O(lg n)`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialSumSeq {
    entries: Vec<u64>,
    block_sums: Vec<u64>,
    block: usize,
    total: u64,
}

impl PartialSumSeq {
    /// Fresh structure holding exactly `values`.
    pub fn rebuild(values: &[u64]) -> Self {
        let m = values.len();
        let block = ((m as f64).sqrt().ceil() as usize).max(1);
        let block_sums = values.chunks(block).map(|c| c.iter().sum()).collect();
        PartialSumSeq { entries: values.to_vec(), block_sums, block, total: values.iter().sum() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Entry `i`, 1-based.
    pub fn get(&self, i: usize) -> Result<u64> {
        self.check_index(i)?;
        Ok(self.entries[i - 1])
    }

    /// `entries[1] + ... + entries[i]`.
    pub fn sum(&self, i: usize) -> Result<u64> {
        if i > self.entries.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.entries.len() });
        }
        let full = i / self.block;
        let head: u64 = self.block_sums[..full].iter().sum();
        Ok(head + self.entries[full * self.block..i].iter().sum::<u64>())
    }

    /// Smallest `i` with `sum(i) >= x`.
    pub fn search(&self, x: u64) -> Result<usize> {
        if x == 0 || x > self.total {
            return Err(Error::ValueOutOfRange { value: x, total: self.total });
        }
        let mut acc = 0;
        let mut b = 0;
        while acc + self.block_sums[b] < x {
            acc += self.block_sums[b];
            b += 1;
        }
        let mut i = b * self.block;
        loop {
            acc += self.entries[i];
            i += 1;
            if acc >= x {
                return Ok(i);
            }
        }
    }

    /// `entries[i] += delta`.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        self.check_index(i)?;
        let cur = self.entries[i - 1] as i64;
        if cur + delta < 0 {
            return Err(Error::NegativeResult { index: i });
        }
        self.entries[i - 1] = (cur + delta) as u64;
        let b = (i - 1) / self.block;
        self.block_sums[b] = (self.block_sums[b] as i64 + delta) as u64;
        self.total = (self.total as i64 + delta) as u64;
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.entries.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.entries.len() });
        }
        Ok(())
    }
}
