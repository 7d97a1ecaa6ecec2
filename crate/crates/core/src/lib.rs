//! PLUGIN optimal-bandwidth selection for univariate kernel density
//! estimation, computed on a software model of a Q32.32 fixed-point
//! hardware datapath and certified against a binary64 reference.
//!
//! The crate is organized around the datapath layers:
//!
//! * [`fixedq`] — bit-exact Q32.32 scalar arithmetic (Newton reciprocal,
//!   truncating multiplier, exact adder).
//! * [`elementary`] — fixed-point exp/ln (shift-and-add CORDIC style), a
//!   pipelined-style minimax-polynomial exp for the hot loops, powers and
//!   roots via `exp(y ln x)`, and the Remez generator that produces the
//!   polynomial.
//! * [`plugin`] — the seven-step PLUGIN bandwidth selector over `FixedQ`
//!   with z-score preprocessing, symmetry-halved functional sums, and the
//!   literal / minimal / fast loop strategies.
//! * [`oracle`] — the binary64 reference pipeline and accuracy reports.
//! * [`kde`] — binary64 Gaussian kernel density evaluation for demos and
//!   curve export.

pub mod elementary;
pub mod error;
pub mod fixedq;
pub mod kde;
pub mod oracle;
pub mod plugin;

mod wide;

pub use error::{Error, Result};
pub use fixedq::FixedQ;
pub use plugin::{BandwidthResult, Dataset, StandardizedDataset, Strategy};
