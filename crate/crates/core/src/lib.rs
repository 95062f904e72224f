//! Numerical laboratory for complexity growth under random Hamiltonian evolution.
//!
//! The crate is `no_std` + `alloc`. Enable the `parallel` feature (on by
//! default) to fan Monte Carlo trials out over a rayon pool; every estimator
//! collects per-trial results in stream-index order before reducing, so the
//! output is bit-identical with or without it.
//!
//! Time evolution follows `U_t = exp(-i H t)` throughout. All random models in
//! this crate are symmetric under `H -> -H`, so the sign does not change any
//! distributional statement.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod compiler;
pub mod complexity;
pub mod concentration;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix, PureState, Spectrum, UnitaryMatrix, C64};

#[allow(unused_imports)]
pub(crate) mod prelude {
    pub use crate::linalg::C64;
    pub use alloc::boxed::Box;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use num_traits::Float as _;
}
