//! Dynamic and static range majority / minority indexes over compressed
//! mutable sequences.
//!
//! * [`document`]: one text serving both majority and minority queries.
//! * [`dynseq`]: dynamic bitvectors and the wavelet-tree symbol sequence.
//! * [`partial_sum`]: small searchable prefix-sum arrays.
//! * [`frequent`]: Misra–Gries candidates and exact window counting.
//! * [`gamma_chunks`]: Elias γ codes and quantized-frequency chunk lists.
//! * [`majority`]: the dynamic range α/β-majority index.
//! * [`minority`]: the dynamic range α-minority index.
//! * [`static_index`]: frozen variants with a binary snapshot format.
//! * [`harness`]: brute-force oracles, entropy, space reports, workloads.

pub mod document;
pub mod dynseq;
pub mod error;
pub mod fraction;
pub mod frequent;
pub mod gamma_chunks;
pub mod harness;
pub mod majority;
pub mod minority;
pub mod partial_sum;
pub mod static_index;

/// Alphabet symbol, `1..=sigma`.
pub type Symbol = u32;

pub use document::Document;
pub use dynseq::{Alphabet, DynamicBitvector, DynamicSequence};
pub use error::{Error, Result};
pub use fraction::{parse_fraction, Fraction};
pub use majority::{IndexConfig, MajorityIndex, QueryPath, QueryTrace};
pub use minority::{MinorityIndex, PieceIndex};
pub use static_index::{Snapshot, StaticMajorityIndex, StaticMinorityIndex};
