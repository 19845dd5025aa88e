//! Sum-rank Hamming and simplex codes over small finite fields.
//!
//! The crate covers exact field and matrix arithmetic ([`galois`]), the
//! sum-rank metric and its isometries ([`sumrank`]), partial spreads
//! ([`spreads`]), code construction and distance analysis ([`codes`]),
//! single-error syndrome decoding ([`syndrome`]), a multishot
//! matrix-multiplicative channel ([`channel`]) and locally repairable codes
//! built on an outer sum-rank code ([`lrc`]).

pub mod channel;
pub mod codes;
pub mod error;
pub mod galois;
pub mod lrc;
pub mod spreads;
pub mod sumrank;
pub mod syndrome;
pub mod verify;

pub use error::{Error, Result};

/// Default work budget for searches and distance computations.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
