//! Exact rational thresholds.
//!
//! Every "occurs more than θ·r times" comparison in the crate goes through
//! [`exceeds`], which cross-multiplies in `u128` so no boundary case depends
//! on floating point rounding.

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Fraction = Ratio<u64>;

/// `count > frac * r`.
#[inline]
pub fn exceeds(count: u64, frac: Fraction, r: u64) -> bool {
    count as u128 * *frac.denom() as u128 > *frac.numer() as u128 * r as u128
}

/// `count <= frac * r`.
#[inline]
pub fn at_most(count: u64, frac: Fraction, r: u64) -> bool {
    !exceeds(count, frac, r)
}

/// Largest integer `k` with `k <= frac * r`.
#[inline]
pub fn floor_mul(frac: Fraction, r: u64) -> u64 {
    ((*frac.numer() as u128 * r as u128) / *frac.denom() as u128) as u64
}

/// Smallest integer `k` with `k >= frac * r`.
#[inline]
pub fn ceil_mul(frac: Fraction, r: u64) -> u64 {
    let num = *frac.numer() as u128 * r as u128;
    let den = *frac.denom() as u128;
    num.div_ceil(den) as u64
}

/// Parses `"1/4"`, `"0.25"`, `".25"` or `"1"` into an exact fraction.
pub fn parse_fraction(text: &str) -> Result<Fraction> {
    let bad = || Error::InvalidParameter(format!("not a fraction: {text:?}"));
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(n, d));
    }
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 18 {
        return Err(bad());
    }
    let den = 10u64.pow(frac_part.len() as u32);
    let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
    Ok(Fraction::new(num, den))
}

/// Checks `0 < frac < 1`.
pub fn check_open_unit(frac: Fraction) -> Result<()> {
    if *frac.numer() == 0 || frac.numer() >= frac.denom() {
        return Err(Error::ThresholdOutOfRange(frac.to_string()));
    }
    Ok(())
}

/// `min(max(alpha, 1/sigma), 1/2)`.
pub fn clamp_alpha(alpha: Fraction, sigma: u32) -> Fraction {
    let floor = Fraction::new(1, sigma.max(1) as u64);
    let half = Fraction::new(1, 2);
    let a = if alpha < floor { floor } else { alpha };
    if a > half {
        half
    } else {
        a
    }
}

/// `1 + floor(1/alpha)`.
pub fn minority_budget(alpha: Fraction) -> usize {
    1 + (*alpha.denom() / *alpha.numer()) as usize
}
