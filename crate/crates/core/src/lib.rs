//! Tree-crown counting core.
//!
//! Everything in this crate is pure computation over in-memory rasters and
//! feature matrices: the per-pixel feature bank, thirteen two-class pixel
//! classifiers, binary morphology (hole filling, exact distance transform,
//! watershed splitting, component labeling), moment-ellipse particle
//! analysis, the plantation constraint filter, a synthetic plantation
//! generator and the counting-error metrics used by the benchmark harness.
//!
//! The crate is `no_std` (it needs `alloc`). Enabling the `std` feature turns
//! on rayon-backed parallelism in the places whose output is contractually
//! identical to the sequential path.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bench;
pub mod classifiers;
pub mod domainfilter;
mod error;
pub mod features;
pub mod imaging;
pub mod morphology;
pub mod overlay;
pub mod particles;
pub mod seed;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
