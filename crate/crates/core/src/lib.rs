//! Weighted shift operators on Köthe echelon spaces `lambda_p(A)` and power
//! series spaces.
//!
//! Everything is evaluated on the log scale. Infinite-index conditions are
//! decided over finite truncations and reported as three-valued
//! [`checks::Verdict`]s.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod checks;
pub mod error;
pub mod gamma;
pub mod logreal;
pub mod sequence;
pub mod shift;
pub mod simulator;
pub mod space;

pub use error::{Error, Result};
pub use logreal::{log_add_exp, log_sum_exp, LogReal};
pub use sequence::{ExponentSequence, WeightFamily, WeightSequence};
pub use shift::{ShiftKind, ShiftOperator};
pub use space::{basis_vector, make_power_series_space, seminorm, FiniteVector, KoetheMatrix, PNorm, SeriesType, SpaceSpec};
