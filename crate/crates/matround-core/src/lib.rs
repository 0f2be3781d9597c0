//! Exact-rational engine for rounding fractional points of matroid-polytope
//! LPs via iterative refinement and relaxation.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `matround` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apps;
pub mod error;
pub mod ground;
pub mod matroid;
pub mod matroid_lp;
pub mod partition;
pub mod rat;
pub mod refine;
pub mod separation;
pub mod simplex;

pub use error::{Error, Result};
pub use ground::{ElementId, GroundSet};
pub use matroid::Matroid;
pub use rat::{Rat, RatVec};
