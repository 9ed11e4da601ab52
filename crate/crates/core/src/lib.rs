//! Exact Kloosterman sums over binary fields and over GL(2, q), the binary
//! code `C(GL(2, q))`, its weight distribution, and the recursions that
//! produce power moments of 2-dimensional Kloosterman sums from it.
//!
//! All arithmetic is exact: machine integers where the bounds allow,
//! arbitrary precision everywhere else.

pub mod classnum;
pub mod code;
pub mod error;
pub mod field;
pub mod glgroup;
pub mod kloosterman;
pub mod moments;
pub mod verify;

pub use code::{CodeContext, DualWeightTable, WeightDistribution};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldParams};
pub use glgroup::{FiberCensus, GLMatrix};
pub use kloosterman::{KloostermanTable, MomentValue, ValueCensus};
pub use moments::{MomentKind, StirlingTable};
pub use verify::{verify_all, RecursionReport};
