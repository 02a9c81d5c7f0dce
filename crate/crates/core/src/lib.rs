//! Compact combined finite-difference schemes and their prefactored
//! (two-sweep explicit) form.

// Guards of the form `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod cli;
pub mod combined;
pub mod error;
pub mod fd;
pub mod fmt;
pub mod grid;
pub mod series;
pub mod solver;
pub mod spectral;
pub mod stencil;
pub mod sweep;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{DerivativePair, GridFunction};
pub use stencil::{build_ccd6, build_ccd8, CombinedStencil};
pub use weights::{mirror_backward, Direction, PrefactoredWeights};
