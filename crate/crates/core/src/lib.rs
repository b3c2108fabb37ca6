//! Universal Taylor series with respect to a prescribed subsequence: partial-sum
//! recentering, Ostrowski-gap analysis, windowed minimax approximation and
//! certified block-series constructions.

pub mod error;
pub mod float_serde;
pub mod gaps;
pub mod real;
pub mod construction;
pub mod series;
pub mod window;

pub use error::{Error, Result};
