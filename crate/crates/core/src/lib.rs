//! Subsampling for measurement-constrained linear regression under model
//! misspecification.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and an explicit RNG; IO, configuration and the
//! experiment driver live in the `lowcon` companion crate.
//!
//! The main entry point is [`sampler::lowcon`]: scale the sample to the cube,
//! lay an orthogonal Latin hypercube design over a percentile-trimmed box and
//! claim the nearest sample point for each design point. The resulting
//! subsample has a well-conditioned information matrix, which keeps the
//! worst-case bias of the subsample least-squares fit small (see
//! [`estimate::worst_case_mse`]).
#![no_std]
// Negated comparisons are how argument checks reject NaN together with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod design;
mod error;
pub mod estimate;
pub mod huber;
pub mod linalg;
pub mod sampler;
pub mod seed;
pub mod spatial;
mod stats;

pub use error::{Error, Result};
pub use linalg::{Matrix, SingularSpectrum};
