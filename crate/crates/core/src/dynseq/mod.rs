//! Dynamic bitvectors and the dynamic symbol sequence built on them.

mod bitvector;
mod sequence;

pub(crate) use bitvector::select_in_word;
pub use bitvector::{BitBuf, DynamicBitvector};
pub(crate) use sequence::ceil_log2;
pub use sequence::DynamicSequence;

use crate::Symbol;

/// Dense remapping of the byte values present in a text onto `1..=sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    to_byte: Vec<u8>,
    to_symbol: [u32; 256],
}

impl Alphabet {
    /// Alphabet of the distinct bytes of `text`, in increasing byte order.
    pub fn from_bytes(text: &[u8]) -> Self {
        let mut seen = [false; 256];
        for &b in text {
            seen[b as usize] = true;
        }
        let to_byte: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        Self::from_table(to_byte)
    }

    /// Alphabet whose symbol `k` is `table[k - 1]`.
    pub fn from_table(to_byte: Vec<u8>) -> Self {
        let mut to_symbol = [0u32; 256];
        for (k, &b) in to_byte.iter().enumerate() {
            to_symbol[b as usize] = k as u32 + 1;
        }
        Alphabet { to_byte, to_symbol }
    }

    /// Builds the alphabet and the sequence for `text` in one go.
    pub fn encode_bytes(text: &[u8]) -> (DynamicSequence, Alphabet) {
        let alphabet = Self::from_bytes(text);
        let symbols = alphabet.encode(text);
        let seq =
            DynamicSequence::from_symbols(&symbols, alphabet.sigma().max(1)).expect("symbols come from the alphabet");
        (seq, alphabet)
    }

    pub fn sigma(&self) -> u32 {
        self.to_byte.len() as u32
    }

    pub fn symbol_of(&self, byte: u8) -> Option<Symbol> {
        match self.to_symbol[byte as usize] {
            0 => None,
            s => Some(s),
        }
    }

    pub fn byte_of(&self, symbol: Symbol) -> Option<u8> {
        self.to_byte.get((symbol as usize).checked_sub(1)?).copied()
    }

    pub fn encode(&self, text: &[u8]) -> Vec<Symbol> {
        text.iter().map(|&b| self.to_symbol[b as usize]).collect()
    }

    pub fn decode(&self, symbols: &[Symbol]) -> Vec<u8> {
        symbols.iter().map(|&s| self.to_byte[s as usize - 1]).collect()
    }

    pub fn table(&self) -> &[u8] {
        &self.to_byte
    }
}
