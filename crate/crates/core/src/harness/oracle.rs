//! Brute-force answers by sorting the range and counting runs. Nothing here
//! touches the index modules, so agreement with them means something.

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::Symbol;

fn runs(s: &[Symbol], l: usize, r: usize) -> Result<Vec<(Symbol, u64)>> {
    if l > r {
        return Err(Error::EmptyRange { from: l, to: r });
    }
    if l == 0 || r > s.len() {
        return Err(Error::PositionOutOfRange { pos: if l == 0 { l } else { r }, len: s.len() });
    }
    let mut sorted = s[l - 1..r].to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(Symbol, u64)> = Vec::new();
    for c in sorted {
        match out.last_mut() {
            Some((d, k)) if *d == c => *k += 1,
            _ => out.push((c, 1)),
        }
    }
    Ok(out)
}

/// `k > f·len`, cross-multiplied.
fn above(k: u64, f: Fraction, len: u64) -> bool {
    k as u128 * *f.denom() as u128 > *f.numer() as u128 * len as u128
}

/// Symbols occurring more than `β·(r − l + 1)` times in `s[l..=r]`, ascending.
pub fn brute_majorities(s: &[Symbol], l: usize, r: usize, beta: Fraction) -> Result<Vec<Symbol>> {
    let len = (r + 1).saturating_sub(l) as u64;
    Ok(runs(s, l, r)?.into_iter().filter(|&(_, k)| above(k, beta, len)).map(|(c, _)| c).collect())
}

/// Every symbol occurring at least once and at most `α·(r − l + 1)` times in
/// `s[l..=r]`, ascending.
pub fn brute_minority(s: &[Symbol], l: usize, r: usize, alpha: Fraction) -> Result<Vec<Symbol>> {
    let len = (r + 1).saturating_sub(l) as u64;
    Ok(runs(s, l, r)?.into_iter().filter(|&(_, k)| !above(k, alpha, len)).map(|(c, _)| c).collect())
}
