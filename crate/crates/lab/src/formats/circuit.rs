//! Plain-text circuits.
//!
//! ```text
//! QUBITS 2
//! CNOT 0 1
//! RZ 1 -4.2000000000000002e-1
//! RZQ 0 1.0000000000000000e0 1.0000000000000000e-3
//! ```
//!
//! Qubits are zero-based. Blank lines and lines starting with `#` are ignored.
//! Angles are written with 17 significant digits, so emit then parse
//! reproduces every gate bit for bit.

use std::fmt::Write as _;

use rmtlab_core::compiler::{Circuit, Gate};

use crate::error::{LabError, LabResult};

pub fn emit_circuit(c: &Circuit) -> String {
    let mut s = format!("QUBITS {}\n", c.n());
    for g in c.gates() {
        let _ = writeln!(s, "{g}");
    }
    s
}

fn bad(line: usize, detail: impl std::fmt::Display) -> LabError {
    LabError::format("circuit file", format!("line {line}: {detail}"))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> LabResult<T> {
    let tok = tok.ok_or_else(|| bad(line, format!("missing {name}")))?;
    tok.parse()
        .map_err(|_| bad(line, format!("cannot parse {name} `{tok}`")))
}

pub fn parse_circuit(text: &str) -> LabResult<Circuit> {
    let mut n = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let mut toks = s.split_whitespace();
        let op = toks.next().unwrap();
        if n.is_none() && op != "QUBITS" {
            return Err(bad(line, "expected `QUBITS n` before the first gate"));
        }
        let gate = match op {
            "QUBITS" => {
                if n.is_some() {
                    return Err(bad(line, "duplicate QUBITS header"));
                }
                n = Some(field::<usize>(toks.next(), line, "qubit count")?);
                None
            }
            "CNOT" => Some(Gate::Cnot {
                control: field(toks.next(), line, "control")?,
                target: field(toks.next(), line, "target")?,
            }),
            "RZ" => Some(Gate::Rz {
                qubit: field(toks.next(), line, "qubit")?,
                angle: field(toks.next(), line, "angle")?,
            }),
            "RZQ" => Some(Gate::Rzq {
                qubit: field(toks.next(), line, "qubit")?,
                angle: field(toks.next(), line, "angle")?,
                delta: field(toks.next(), line, "delta")?,
            }),
            other => return Err(bad(line, format!("unknown gate `{other}`"))),
        };
        if let Some(extra) = toks.next() {
            return Err(bad(line, format!("unexpected token `{extra}`")));
        }
        gates.extend(gate);
    }
    let n = n.ok_or_else(|| LabError::format("circuit file", "missing `QUBITS n` header"))?;
    Ok(Circuit::new(n, gates)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rmtlab_core::compiler::compile_diagonal;

    #[test]
    fn compiled_circuit_round_trips_exactly() {
        let h: Vec<f64> = (0..16).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let (c, _) = compile_diagonal(&h, 1.3, 1e-3).unwrap();
        let text = emit_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(emit_circuit(&back), text);
    }

    #[test]
    fn awkward_angles_keep_their_bits() {
        let angles = [0.1, -1.0 / 3.0, 1e-300, 5e-324, -0.0, 123456.789];
        let gates: Vec<Gate> = angles
            .iter()
            .map(|&angle| Gate::Rz { qubit: 0, angle })
            .collect();
        let c = Circuit::new(1, gates).unwrap();
        let back = parse_circuit(&emit_circuit(&c)).unwrap();
        for (a, b) in c.gates().iter().zip(back.gates()) {
            assert_eq!(
                a.realized_angle().unwrap().to_bits(),
                b.realized_angle().unwrap().to_bits()
            );
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let c = parse_circuit("# header\n\nQUBITS 2\n  CNOT 0 1\n# x\nRZ 1 0.5\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.gates()[1],
            Gate::Rz {
                qubit: 1,
                angle: 0.5
            }
        );
    }

    #[test]
    fn malformed_inputs() {
        for (text, needle) in [
            ("CNOT 0 1\n", "QUBITS"),
            ("QUBITS 2\nCNOT 0\n", "missing target"),
            ("QUBITS 2\nRZ 0 abc\n", "angle"),
            ("QUBITS 2\nSWAP 0 1\n", "unknown gate"),
            ("QUBITS 2\nRZ 0 1 2\n", "unexpected token"),
            ("QUBITS 2\nQUBITS 2\n", "duplicate"),
            ("", "missing"),
        ] {
            let err = parse_circuit(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?}: {err}");
        }
        assert!(parse_circuit("QUBITS 2\nCNOT 0 2\n").is_err());
        assert!(parse_circuit("QUBITS 2\nCNOT 1 1\n").is_err());
    }
}
