//! A numerical laboratory for the cotangent sums `c0(r/b)`, the sawtooth
//! series `g` that describes their limiting distribution, its moments, and
//! the continued-fraction machinery that controls the size of `g`.
//!
//! Parallel work runs on the ambient rayon pool; callers that want a fixed
//! worker count install their own pool. Every result depends only on the
//! inputs and seeds, never on the number of workers.

pub mod contfrac;
pub mod cotangent;
pub mod distribution;
pub mod error;
pub mod gseries;
pub mod moments;
pub mod rng;
pub mod sum;
pub mod tolerances;

pub use error::{LabError, Result};
