pub mod circuit;
pub mod cmpx;
pub mod gateset;

pub use circuit::{emit_circuit, parse_circuit};
pub use cmpx::{load_matrix, read_matrix, save_matrix, write_matrix};
pub use gateset::{read_gate_set, write_gate_set};
