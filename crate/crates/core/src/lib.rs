//! Locally D-optimal exact designs for nonlinear multifactor regression models.
//!
//! The crate is `no_std` and only needs an allocator. It contains the
//! numerical core: model definitions (built-in and parsed from expression
//! text), the local D-criterion with rank-one exchange updates, a bounded
//! Nelder-Mead minimiser, and the design search algorithms (discrete and
//! continuous point/coordinate exchange plus the three-phase refinement).
//!
//! IO, file formats and the command line live in the `ldod` crate.

#![no_std]
// Negated comparisons deliberately treat NaN as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod builtin;
pub mod criterion;
pub mod design;
mod error;
pub mod expr;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod presets;
pub mod search;
pub mod standard;

pub use design::{CandidateSet, Design, DesignError, DesignRegion, Factor, PriorTheta};
pub use error::{Error, EvalError};
pub use model::Model;
