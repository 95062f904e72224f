//! Standard-library companion to `rmtlab-core`: matrix, circuit and gate-set
//! file formats, CSV and manifest emission, and the `rmtlab` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod grid;
pub mod output;

pub use cli::{parse_args, run, Invocation, RunConfig};
pub use error::{LabError, LabResult};
