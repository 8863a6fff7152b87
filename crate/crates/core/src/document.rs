//! One sequence serving both majority and minority queries.

use crate::error::Result;
use crate::fraction::Fraction;
use crate::majority::{AuditError, IndexConfig, MajorityIndex, QueryTrace};
use crate::minority::{MinorityTrace, PieceIndex};
use crate::Symbol;

/// A [`MajorityIndex`] and a [`PieceIndex`] over the same sequence. Each
/// update is applied to the sequence once, then reported to the pieces.
#[derive(Clone, Debug)]
pub struct Document {
    majority: MajorityIndex,
    pieces: PieceIndex,
}

impl Document {
    /// `alpha` is the smallest majority threshold to support; `minority_alpha`
    /// is the fixed minority threshold.
    pub fn build(symbols: &[Symbol], sigma: u32, alpha: Fraction, minority_alpha: Fraction) -> Result<Self> {
        Self::build_with(symbols, sigma, alpha, minority_alpha, IndexConfig::default())
    }

    pub fn build_with(
        symbols: &[Symbol],
        sigma: u32,
        alpha: Fraction,
        minority_alpha: Fraction,
        config: IndexConfig,
    ) -> Result<Self> {
        let majority = MajorityIndex::build_with(symbols, sigma, alpha, config)?;
        let pieces = PieceIndex::build(majority.sequence(), minority_alpha)?;
        Ok(Document { majority, pieces })
    }

    pub fn len(&self) -> usize {
        self.majority.len()
    }

    pub fn is_empty(&self) -> bool {
        self.majority.is_empty()
    }

    pub fn majority(&self) -> &MajorityIndex {
        &self.majority
    }

    pub fn pieces(&self) -> &PieceIndex {
        &self.pieces
    }

    pub fn insert(&mut self, c: Symbol, i: usize) -> Result<()> {
        self.majority.insert(c, i)?;
        self.pieces.after_insert(self.majority.sequence(), i)
    }

    pub fn delete(&mut self, i: usize) -> Result<Symbol> {
        let c = self.majority.delete(i)?;
        self.pieces.after_delete(self.majority.sequence(), i, c)?;
        Ok(c)
    }

    pub fn query_majority(&self, l: usize, r: usize, beta: Fraction) -> Result<Vec<Symbol>> {
        self.majority.query(l, r, beta)
    }

    pub fn query_majority_traced(&self, l: usize, r: usize, beta: Fraction) -> Result<(Vec<Symbol>, QueryTrace)> {
        self.majority.query_traced(l, r, beta)
    }

    pub fn query_minority(&mut self, l: usize, r: usize) -> Result<Option<Symbol>> {
        self.pieces.query(self.majority.sequence(), l, r)
    }

    pub fn query_minority_traced(&mut self, l: usize, r: usize) -> Result<(Option<Symbol>, MinorityTrace)> {
        self.pieces.query_traced(self.majority.sequence(), l, r)
    }

    pub fn audit(&self) -> std::result::Result<(), AuditError> {
        self.majority.audit()?;
        self.pieces.audit(self.majority.sequence())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn updates_reach_both_indexes() {
        let half = Fraction::new(1, 2);
        let mut d = Document::build(&[1, 1, 1, 2], 3, Fraction::new(1, 4), half).unwrap();
        assert_eq!(d.query_majority(1, 4, half).unwrap(), vec![1]);
        assert_eq!(d.query_minority(1, 4).unwrap(), Some(2));
        d.insert(2, 1).unwrap();
        d.insert(2, 1).unwrap();
        assert_eq!(d.query_majority(1, 6, half).unwrap(), Vec::<Symbol>::new());
        assert_eq!(d.delete(3).unwrap(), 1);
        assert_eq!(d.query_majority(1, 5, half).unwrap(), vec![2]);
        assert_eq!(d.query_minority(1, 5).unwrap(), Some(1));
        d.audit().unwrap();
        assert_eq!(d.len(), 5);
    }
}
