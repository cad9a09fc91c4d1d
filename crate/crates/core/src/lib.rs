//! Exact arithmetic for one-dimensional piecewise-constant probability
//! densities, together with the functionals that decide whether density
//! convergence carries differential entropy along with it.
//!
//! Densities are stored in log space (`log_value`, `log_length`) so that
//! spike constructions with heights like `e^n` and widths like `e^-n / n`
//! stay representable far beyond the linear `f64` range. Every integral
//! in the crate is a closed-form sum over pieces; an adaptive quadrature
//! routine exists only as an independent cross-check channel.
//!
//! The crate is `no_std` (with `alloc`); all types are immutable values
//! and all operations are pure functions, safe to evaluate concurrently.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod density;
pub mod diagnostics;
pub mod orlicz;
pub mod sequences;

mod math;
mod sum;

pub use density::{DensityError, Piece, PiecewisePdf};
pub use orlicz::{OrliczError, OrliczFn, SuperlinearityReport};
pub use sequences::{DiagnosticsRow, FamilySpec, MomentDescriptor, ProfileTable, SequenceError};
