//! Space accounting against `n lg σ` and the empirical entropy.

use serde::Serialize;

use super::entropy::entropy;
use crate::document::Document;
use crate::majority::MajorityIndex;

/// Bits per component. `aux_bits` is everything but the sequence.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpaceReport {
    pub n: usize,
    pub sigma: u32,
    pub seq_bits: u64,
    pub tree_bits: u64,
    pub arena_bits: u64,
    pub beta_bits: u64,
    pub piece_bits: u64,
    pub aux_bits: u64,
    pub total_bits: u64,
    pub h0: f64,
    /// `H_1`, `H_2`, `H_3`.
    pub hk: Vec<f64>,
    /// `aux_bits / (n lg σ)`, with `lg σ` taken as at least 1.
    pub aux_ratio: f64,
    /// `seq_bits / (n H_0)`; absent when `H_0 = 0`.
    pub seq_ratio: Option<f64>,
}

impl SpaceReport {
    pub fn for_majority(index: &MajorityIndex) -> Self {
        let s = index.space();
        Self::assemble(index, s.tree_bits, s.arena_bits, s.beta_bits, 0)
    }

    pub fn for_document(doc: &Document) -> Self {
        let s = doc.majority().space();
        Self::assemble(doc.majority(), s.tree_bits, s.arena_bits, s.beta_bits, doc.pieces().size_bits())
    }

    fn assemble(index: &MajorityIndex, tree_bits: u64, arena_bits: u64, beta_bits: u64, piece_bits: u64) -> Self {
        let seq = index.sequence();
        let symbols = seq.to_vec();
        let n = symbols.len();
        let seq_bits = seq.size_bits();
        let aux_bits = tree_bits + arena_bits + beta_bits + piece_bits;
        let h0 = entropy(&symbols, 0);
        let lg_sigma = (index.sigma() as f64).log2().max(1.0);
        SpaceReport {
            n,
            sigma: index.sigma(),
            seq_bits,
            tree_bits,
            arena_bits,
            beta_bits,
            piece_bits,
            aux_bits,
            total_bits: seq_bits + aux_bits,
            h0,
            hk: (1..=3).map(|k| entropy(&symbols, k)).collect(),
            aux_ratio: if n == 0 { 0.0 } else { aux_bits as f64 / (n as f64 * lg_sigma) },
            seq_ratio: (h0 > 0.0).then(|| seq_bits as f64 / (n as f64 * h0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::Fraction;

    #[test]
    fn totals_add_up() {
        let symbols: Vec<u32> = (0..5000).map(|i| (i * 7 % 26) as u32 + 1).collect();
        let doc = Document::build(&symbols, 26, Fraction::new(1, 8), Fraction::new(1, 4)).unwrap();
        let r = SpaceReport::for_document(&doc);
        assert_eq!(r.aux_bits, r.tree_bits + r.arena_bits + r.beta_bits + r.piece_bits);
        assert_eq!(r.total_bits, r.seq_bits + r.aux_bits);
        assert!(r.piece_bits > 0 && r.arena_bits > 0);
        assert_eq!(r.hk.len(), 3);
        let constant = MajorityIndex::build(&[1; 100], 1, Fraction::new(1, 2)).unwrap();
        assert_eq!(SpaceReport::for_majority(&constant).seq_ratio, None);
    }
}
