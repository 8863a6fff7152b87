//! Empirical entropy of a symbol sequence.

use std::collections::BTreeMap;

use crate::Symbol;

fn h0_of_counts<'a>(counts: impl Iterator<Item = &'a u64>, total: u64) -> f64 {
    let t = total as f64;
    counts.filter(|&&c| c > 0).map(|&c| c as f64 / t * (t / c as f64).log2()).sum()
}

/// `H_k` in bits per symbol: the zero-order entropy of the symbols following
/// each length-`k` context, weighted by context frequency and averaged over
/// all `n` positions. Zero when `n <= k`.
pub fn entropy(s: &[Symbol], k: usize) -> f64 {
    let n = s.len();
    if n <= k {
        return 0.0;
    }
    if k == 0 {
        let mut counts: BTreeMap<Symbol, u64> = BTreeMap::new();
        for &c in s {
            *counts.entry(c).or_default() += 1;
        }
        return h0_of_counts(counts.values(), n as u64);
    }
    let mut by_context: BTreeMap<&[Symbol], BTreeMap<Symbol, u64>> = BTreeMap::new();
    for i in k..n {
        *by_context.entry(&s[i - k..i]).or_default().entry(s[i]).or_default() += 1;
    }
    let bits: f64 = by_context
        .values()
        .map(|next| {
            let total: u64 = next.values().sum();
            total as f64 * h0_of_counts(next.values(), total)
        })
        .sum();
    bits / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((entropy(&[1, 2, 1, 2], 0) - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&[1, 1, 1, 1], 0), 0.0);
        let alt: Vec<Symbol> = (0..100).map(|i| i % 2 + 1).collect();
        assert_eq!(entropy(&alt, 1), 0.0);
        assert_eq!(entropy(&[1], 1), 0.0);
        let four: Vec<Symbol> = (0..400).map(|i| i % 4 + 1).collect();
        assert!((entropy(&four, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn higher_orders_never_exceed_lower() {
        let mut x = 7u64;
        let s: Vec<Symbol> = (0..5000)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((x >> 40) % 3 + 1) as Symbol
            })
            .collect();
        let h: Vec<f64> = (0..4).map(|k| entropy(&s, k)).collect();
        for k in 1..4 {
            assert!(h[k] <= h[k - 1] + 1e-9);
        }
    }
}
