//! Gate-set files: repeated blocks of a label line followed by a CMPX matrix.

use std::io::{self, BufRead, Write};

use rmtlab_core::complexity::GateSet;
use rmtlab_core::UnitaryMatrix;

use super::cmpx::{read_matrix, write_matrix};
use crate::error::{LabError, LabResult};

pub fn write_gate_set<W: Write>(w: &mut W, gs: &GateSet) -> io::Result<()> {
    for (label, g) in gs.iter() {
        writeln!(w, "{label}")?;
        write_matrix(w, g.matrix())?;
    }
    Ok(())
}

pub fn read_gate_set<R: BufRead>(r: &mut R) -> LabResult<GateSet> {
    let mut gates = Vec::new();
    loop {
        let mut label = Vec::new();
        if r.read_until(b'\n', &mut label)? == 0 {
            break;
        }
        if label.pop() != Some(b'\n') {
            return Err(LabError::format(
                "gate-set file",
                "label line without matrix",
            ));
        }
        let label = String::from_utf8(label)
            .map_err(|_| LabError::format("gate-set file", "label is not UTF-8"))?
            .trim()
            .to_string();
        let m = read_matrix(r)?;
        let u = UnitaryMatrix::new(m)
            .map_err(|e| LabError::format("gate-set file", format!("gate `{label}`: {e}")))?;
        gates.push((label, u));
    }
    if gates.is_empty() {
        return Err(LabError::format("gate-set file", "no gates"));
    }
    Ok(GateSet::new(gates)?)
}
