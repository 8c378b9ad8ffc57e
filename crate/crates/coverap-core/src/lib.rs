//! Core algorithms for cooperative FMCW-radar perception.
//!
//! Everything in this crate is a pure function over immutable data: FMCW
//! signal synthesis and range/Doppler/angle processing, point-cloud
//! extraction, multi-sensor time alignment, synthetic scene generation, a
//! dense-tensor reverse-mode autodiff engine, the multi-branch attention
//! detector with middle/late fusion, and rotated-IoU evaluation.
//!
//! The crate is `no_std` (alloc required); file formats, parallelism and the
//! command-line pipeline live in the companion `coverap` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dataset;
pub mod detector;
pub mod dsp;
pub mod error;
pub mod geom;
pub mod nn;
pub mod sync;

pub use error::{Error, Result};
