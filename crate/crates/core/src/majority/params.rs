//! Size parameters derived from `n`, `sigma` and the build threshold.

use crate::fraction::{clamp_alpha, Fraction};

/// Overrides for parameters that are normally derived from `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexConfig {
    /// Distance between marked tree levels; derived from `n` when `None`.
    pub stride: Option<u32>,
    /// Record skipped candidates in query traces for recount checks.
    pub instrument: bool,
}

/// `⌈lg n / lg lg n⌉`, with `n` taken as at least 4.
pub fn t_for(n: usize) -> u64 {
    let lg_n = (n.max(4) as f64).log2();
    ((lg_n / lg_n.log2()) - 1e-9).ceil().max(1.0) as u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: usize,
    pub sigma: u32,
    pub alpha: Fraction,
    pub alpha_eff: Fraction,
    /// `⌈lg n / lg lg n⌉`.
    pub t: u64,
    /// Leaf parameter `L`.
    pub leaf: u64,
    /// Medium/small boundary `L′`.
    pub mini: u64,
    /// `L*`.
    pub micro: u64,
    pub stride: u32,
    /// β routing tree fanout lower bound `B`.
    pub fanout: usize,
    pub lg_n: f64,
    pub lglg_n: f64,
    /// Deepest medium level `-l`.
    pub mini_levels: u32,
    /// Number of β sub-levels `-l*`.
    pub beta_levels: u32,
}

impl Params {
    pub fn new(n: usize, sigma: u32, alpha: Fraction, config: &IndexConfig) -> Params {
        let lg_n = (n.max(4) as f64).log2();
        let lglg_n = lg_n.log2();
        let t = t_for(n);
        let alpha_eff = clamp_alpha(alpha, sigma);
        let (num, den) = (*alpha_eff.numer(), *alpha_eff.denom());
        let leaf = (t * t * den).div_ceil(num);
        let mini = (t * den).div_ceil(num);
        let micro = t;
        let stride = config.stride.unwrap_or_else(|| ((lglg_n / 6.0) - 1e-9).ceil().max(1.0) as u32).max(1);
        let fanout = (lg_n.sqrt() - 1e-9).ceil().max(2.0) as usize;
        let mut mini_levels = 0;
        while (mini << (mini_levels + 1)) < leaf {
            mini_levels += 1;
        }
        let mut beta_levels = 1;
        while (micro << beta_levels) <= mini && num << beta_levels <= den {
            beta_levels += 1;
        }
        Params {
            n,
            sigma,
            alpha,
            alpha_eff,
            t,
            leaf,
            mini,
            micro,
            stride,
            fanout,
            lg_n,
            lglg_n,
            mini_levels,
            beta_levels,
        }
    }

    fn num(&self) -> u128 {
        *self.alpha_eff.numer() as u128
    }

    fn den(&self) -> u128 {
        *self.alpha_eff.denom() as u128
    }

    /// `8^l · L`, i.e. `2 b_l`.
    pub fn weight(&self, level: u32) -> u64 {
        self.leaf << (3 * level)
    }

    /// Stored-count threshold for nodes at `level`: keep counts `> α b_l / 2`.
    pub fn node_theta(&self, level: u32) -> u64 {
        (self.num() * self.weight(level) as u128 / (4 * self.den())) as u64
    }

    /// Updates tolerated between rebuilds of a node list at `level`: `⌈α b_l / 2⌉`.
    pub fn node_limit(&self, level: u32) -> u64 {
        ((self.num() * self.weight(level) as u128).div_ceil(4 * self.den()) as u64).max(1)
    }

    /// Miniblock minimum `m_l = ⌈L / 2^l⌉`.
    pub fn mini_len(&self, level: u32) -> u64 {
        self.leaf.div_ceil(1 << level)
    }

    pub fn mini_theta(&self, level: u32) -> u64 {
        (self.num() * self.mini_len(level) as u128 / (4 * self.den())) as u64
    }

    pub fn mini_limit(&self, level: u32) -> u64 {
        ((self.num() * self.mini_len(level) as u128).div_ceil(4 * self.den()) as u64).max(1)
    }

    /// `m_{l*} = ⌈L′ / 2^{l*}⌉`.
    pub fn beta_len(&self, level: u32) -> u64 {
        self.mini.div_ceil(1 << level)
    }

    /// `α_{l*} = α · 2^{l*}`.
    pub fn beta_alpha(&self, level: u32) -> Fraction {
        Fraction::new(*self.alpha_eff.numer() << level, *self.alpha_eff.denom())
    }

    pub fn beta_theta(&self, level: u32) -> u64 {
        ((self.num() << level) * self.beta_len(level) as u128 / (4 * self.den())) as u64
    }

    pub fn beta_limit(&self, level: u32) -> u64 {
        (((self.num() << level) * self.beta_len(level) as u128).div_ceil(4 * self.den()) as u64).max(1)
    }

    /// Minimum relative frequency stored at a β level: `α_{l*} / 24`.
    pub fn beta_min_freq(&self, level: u32) -> Fraction {
        self.beta_alpha(level) / Fraction::from_integer(24)
    }

    /// Lowest range length served by the β sub-levels for threshold `beta`.
    pub fn beta_floor(&self, beta: Fraction) -> u64 {
        let b = *beta.numer() as f64 / *beta.denom() as f64;
        (self.lg_n / (b * self.lglg_n) - 1e-9).ceil().max(1.0) as u64
    }

    pub fn is_marked(&self, level: u32) -> bool {
        level >= self.stride && level.is_multiple_of(self.stride)
    }

    /// Length at which a node at `level` splits.
    pub fn split_at(&self, level: u32) -> u64 {
        2 * self.weight(level)
    }

    /// An internal node is too small when `len <= b_l`.
    pub fn underflows(&self, level: u32, len: u64) -> bool {
        if level == 0 {
            len < self.leaf
        } else {
            2 * len <= self.weight(level)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_for_64k_at_quarter() {
        let p = Params::new(1 << 16, 256, Fraction::new(1, 4), &IndexConfig::default());
        assert_eq!((p.t, p.leaf, p.mini, p.micro), (4, 64, 16, 4));
        assert_eq!(p.stride, 1);
        assert_eq!(p.fanout, 4);
        assert_eq!(p.mini_len(1), 32);
        assert_eq!(p.mini_levels, 1);
        assert_eq!(p.weight(1), 512);
    }

    #[test]
    fn alpha_is_clamped_to_inverse_sigma() {
        let p = Params::new(1000, 4, Fraction::new(1, 10), &IndexConfig::default());
        assert_eq!(p.alpha_eff, Fraction::new(1, 4));
        let p = Params::new(1000, 256, Fraction::new(3, 4), &IndexConfig::default());
        assert_eq!(p.alpha_eff, Fraction::new(1, 2));
    }

    #[test]
    fn level_constants_are_consistent() {
        for &n in &[1usize, 7, 100, 4096, 1 << 20] {
            for &a in &[2u64, 4, 8, 16] {
                let p = Params::new(n, 256, Fraction::new(1, a), &IndexConfig::default());
                assert!(p.leaf >= p.mini && p.mini >= p.micro && p.micro >= 1);
                assert!(p.mini_len(p.mini_levels) <= 2 * p.mini);
                assert!(p.beta_alpha(p.beta_levels - 1) <= Fraction::from_integer(1));
                assert!(p.beta_len(p.beta_levels - 1) >= p.micro);
            }
        }
    }
}
