//! Frequent-symbol extraction over in-memory windows.
//!
//! [`misra_gries`] is the classic two-pass algorithm: a streaming pass with
//! `⌈|window| / θ⌉` counters that cannot lose a symbol occurring more than
//! `θ` times, then an exact recount that discards the false positives.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fraction::{floor_mul, Fraction};
use crate::Symbol;

/// Symbols with exact window counts, count-descending, ties by symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    pub entries: Vec<(Symbol, u64)>,
}

impl CandidateSet {
    pub fn from_counts(mut entries: Vec<(Symbol, u64)>) -> Self {
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        CandidateSet { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

/// Every symbol occurring more than `theta` times in `window`, exact counts.
pub fn misra_gries(window: &[Symbol], theta: u64) -> Result<CandidateSet> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if theta == 0 {
        return Err(Error::InvalidParameter("misra_gries threshold must be at least 1".into()));
    }
    let k = (window.len() as u64).div_ceil(theta) as usize;
    let mut counters: HashMap<Symbol, u64> = HashMap::with_capacity(k + 1);
    for &c in window {
        if let Some(v) = counters.get_mut(&c) {
            *v += 1;
        } else if counters.len() < k {
            counters.insert(c, 1);
        } else {
            counters.retain(|_, v| {
                *v -= 1;
                *v > 0
            });
        }
    }
    let candidates: Vec<Symbol> = counters.into_keys().collect();
    let counted = exact_counts(window, &candidates);
    Ok(CandidateSet::from_counts(counted.into_iter().filter(|&(_, n)| n > theta).collect()))
}

/// Exact count of each candidate in `window`, input order preserved.
pub fn exact_counts(window: &[Symbol], candidates: &[Symbol]) -> Vec<(Symbol, u64)> {
    let mut tally: HashMap<Symbol, u64> = candidates.iter().map(|&c| (c, 0)).collect();
    for c in window {
        if let Some(v) = tally.get_mut(c) {
            *v += 1;
        }
    }
    candidates.iter().map(|c| (*c, tally[c])).collect()
}

/// Symbols occurring more than `beta * |window|` times, ascending.
pub fn scan_majorities(window: &[Symbol], beta: Fraction) -> Result<Vec<Symbol>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let theta = floor_mul(beta, window.len() as u64);
    let set = if theta == 0 {
        let mut distinct: Vec<Symbol> = window.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        CandidateSet { entries: exact_counts(window, &distinct) }
    } else {
        misra_gries(window, theta)?
    };
    let mut out: Vec<Symbol> = set.symbols().collect();
    out.sort_unstable();
    Ok(out)
}

/// Dense exact tally used on the index rebuild path.
///
/// Returns the same set as [`misra_gries`] (every symbol with count above
/// `theta`, including `theta == 0`) using a reusable `sigma + 1` counter
/// array, which is much faster than hashing for byte-sized alphabets.
#[derive(Clone, Debug)]
pub struct WindowTally {
    counts: Vec<u64>,
    touched: Vec<Symbol>,
}

impl WindowTally {
    pub fn new(sigma: u32) -> Self {
        WindowTally { counts: vec![0; sigma as usize + 1], touched: Vec::new() }
    }

    pub fn above(&mut self, window: &[Symbol], theta: u64) -> CandidateSet {
        for &c in window {
            let slot = &mut self.counts[c as usize];
            if *slot == 0 {
                self.touched.push(c);
            }
            *slot += 1;
        }
        let mut entries = Vec::new();
        for c in self.touched.drain(..) {
            let n = std::mem::take(&mut self.counts[c as usize]);
            if n > theta {
                entries.push((c, n));
            }
        }
        CandidateSet::from_counts(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| (b - b'a' + 1) as Symbol).collect()
    }

    #[test]
    fn misra_gries_examples() {
        assert_eq!(misra_gries(&w("aabab"), 2).unwrap().entries, vec![(1, 3)]);
        assert!(misra_gries(&w("abc"), 3).unwrap().is_empty());
        assert_eq!(misra_gries(&w("aaaa"), 1).unwrap().entries, vec![(1, 4)]);
        assert_eq!(misra_gries(&[], 1), Err(Error::EmptyWindow));
    }

    #[test]
    fn exact_count_examples() {
        assert_eq!(exact_counts(&w("aabab"), &[1, 2]), vec![(1, 3), (2, 2)]);
        assert_eq!(exact_counts(&[], &[1]), vec![(1, 0)]);
        assert_eq!(exact_counts(&w("zz"), &[1]), vec![(1, 0)]);
    }

    #[test]
    fn scan_examples() {
        assert_eq!(scan_majorities(&w("aabbbab"), Fraction::new(1, 2)).unwrap(), vec![2]);
        assert_eq!(scan_majorities(&w("aabbbab"), Fraction::new(1, 3)).unwrap(), vec![1, 2]);
        assert_eq!(scan_majorities(&w("x"), Fraction::new(1, 2)).unwrap(), vec![24]);
        assert_eq!(scan_majorities(&[], Fraction::new(1, 2)), Err(Error::EmptyWindow));
    }

    #[test]
    fn ties_break_by_symbol() {
        let set = misra_gries(&w("bbaacc"), 1).unwrap();
        assert_eq!(set.entries, vec![(1, 2), (2, 2), (3, 2)]);
    }

    fn brute(window: &[Symbol], theta: u64) -> Vec<(Symbol, u64)> {
        let mut counts = std::collections::BTreeMap::new();
        for &c in window {
            *counts.entry(c).or_insert(0u64) += 1;
        }
        let mut v: Vec<_> = counts.into_iter().filter(|&(_, n)| n > theta).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    proptest! {
        #[test]
        fn never_drops_frequent_symbols(window in proptest::collection::vec(1u32..12, 1..2000), theta in 1u64..200) {
            let got = misra_gries(&window, theta).unwrap();
            prop_assert_eq!(&got.entries, &brute(&window, theta));
            prop_assert!(got.len() as u64 <= (window.len() as u64).div_ceil(theta));
            let mut tally = WindowTally::new(12);
            prop_assert_eq!(tally.above(&window, theta).entries, brute(&window, theta));
            prop_assert_eq!(tally.above(&window, 0).entries, brute(&window, 0));
        }

        #[test]
        fn scan_matches_brute(window in proptest::collection::vec(1u32..6, 1..500), num in 1u64..20, den in 1u64..20) {
            prop_assume!(num <= den);
            let beta = Fraction::new(num, den);
            let got = scan_majorities(&window, beta).unwrap();
            let mut want: Vec<Symbol> = brute(&window, 0).into_iter()
                .filter(|&(_, n)| n * den > num * window.len() as u64).map(|e| e.0).collect();
            want.sort();
            prop_assert_eq!(&got, &want);
            prop_assert!((got.len() as u64) * num < den || got.is_empty());
        }
    }
}
