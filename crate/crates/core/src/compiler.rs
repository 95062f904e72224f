//! Compilation of diagonal Hamiltonian evolutions into CNOT and Z-rotation
//! circuits, with exact verification by monomial simulation.
//!
//! Qubit `j` is bit `j` of the basis index, so `Z^alpha` has diagonal
//! `(-1)^{popcount(alpha & x)}`. `RZ(theta) = diag(e^{-i theta/2}, e^{i theta/2})`.

use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::metrics::opnorm_from_phases;
use crate::prelude::*;
use crate::stats::least_squares_2;

pub const MAX_QUBITS: usize = 20;

/// A set of qubits, one bit per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliZMask(pub u32);

impl PauliZMask {
    pub fn support(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |j| self.0 >> j & 1 == 1)
    }

    pub fn weight(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest set bit.
    pub fn pivot(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// `(-1)^{alpha . x}`.
    pub fn sign(self, x: usize) -> f64 {
        if (self.0 & x as u32).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidArgument(alloc::format!(
            "diagonal length {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidArgument(alloc::format!(
            "{n} qubits exceeds the limit of {MAX_QUBITS}"
        )));
    }
    Ok(n)
}

/// In-place unnormalized Walsh-Hadamard butterflies.
fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Coefficients `lambda_alpha` of `H = sum_alpha lambda_alpha Z^alpha`, indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshCoefficients {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl WalshCoefficients {
    pub fn get(&self, alpha: PauliZMask) -> f64 {
        self.coeffs[alpha.0 as usize]
    }

    /// `H_xx = sum_alpha lambda_alpha (-1)^{alpha . x}`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        fwht(&mut v);
        v
    }

    /// Non-zero terms other than the identity, in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (PauliZMask, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c != 0.0)
            .map(|(a, &c)| (PauliZMask(a as u32), c))
    }
}

/// `lambda_alpha = 2^{-n} sum_x (-1)^{alpha . x} H_xx`, by the fast transform.
pub fn walsh_decompose(diag: &[f64]) -> Result<WalshCoefficients> {
    let n = qubits_for_len(diag.len())?;
    if diag.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut coeffs = diag.to_vec();
    fwht(&mut coeffs);
    let scale = 1.0 / diag.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(WalshCoefficients { n, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Cnot {
        control: usize,
        target: usize,
    },
    Rz {
        qubit: usize,
        angle: f64,
    },
    /// Rotation by `angle` rounded onto the grid of [`quantization_grid`]`(delta)`.
    Rzq {
        qubit: usize,
        angle: f64,
        delta: f64,
    },
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Rz { qubit, .. } | Gate::Rzq { qubit, .. } => (qubit, None),
        }
    }

    /// Angle actually applied by a rotation gate.
    pub fn realized_angle(&self) -> Option<f64> {
        match *self {
            Gate::Cnot { .. } => None,
            Gate::Rz { angle, .. } => Some(angle),
            Gate::Rzq { angle, delta, .. } => Some(quantize_angle(angle, delta)),
        }
    }

    /// Cost in the weighted count: 1 per CNOT and exact rotation, and the
    /// number of grid bits for a quantized rotation.
    pub fn cost(&self) -> u64 {
        match *self {
            Gate::Rzq { delta, .. } => quantization_grid(delta).bits as u64,
            _ => 1,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Rz { qubit, angle } => write!(f, "RZ {qubit} {angle:.16e}"),
            Gate::Rzq {
                qubit,
                angle,
                delta,
            } => write!(f, "RZQ {qubit} {angle:.16e} {delta:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::InvalidArgument(alloc::format!(
                "{n} qubits exceeds the limit of {MAX_QUBITS}"
            )));
        }
        for g in &gates {
            let (a, b) = g.qubits();
            if a >= n || b.is_some_and(|b| b >= n) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "gate `{g}` addresses a qubit >= {n}"
                )));
            }
            if b == Some(a) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "gate `{g}` has control equal to target"
                )));
            }
            if let Gate::Rzq { delta, .. } = g {
                if !(*delta > 0.0) {
                    return Err(Error::InvalidArgument(
                        "quantization delta must be positive".into(),
                    ));
                }
            }
            if g.realized_angle().is_some_and(|a| !a.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { n, gates })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn weighted_cost(&self) -> u64 {
        self.gates.iter().map(Gate::cost).sum()
    }

    /// Applies the gates in order to every basis state. Returns the image
    /// index and accumulated phase angle for each input basis state.
    pub fn simulate_monomial(&self) -> (Vec<usize>, Vec<f64>) {
        let dim = 1usize << self.n;
        let mut image: Vec<usize> = (0..dim).collect();
        let mut phase = vec![0.0; dim];
        for g in &self.gates {
            match *g {
                Gate::Cnot { control, target } => {
                    for y in &mut image {
                        *y ^= ((*y >> control) & 1) << target;
                    }
                }
                _ => {
                    let (q, _) = g.qubits();
                    let half = 0.5 * g.realized_angle().expect("rotation");
                    for (y, p) in image.iter().zip(phase.iter_mut()) {
                        *p += if (y >> q) & 1 == 0 { -half } else { half };
                    }
                }
            }
        }
        (image, phase)
    }
}

/// Grid for quantized rotations: `2^bits` points of spacing `4 pi / 2^bits`
/// on the `4 pi` period of `RZ`. `bits = 0` means the grid is `{0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationGrid {
    pub bits: u32,
    pub spacing: f64,
}

/// Finest power-of-two grid no coarser than `2 arcsin(delta / 2)`.
pub fn quantization_grid(delta: f64) -> QuantizationGrid {
    if delta >= 2.0 {
        return QuantizationGrid {
            bits: 0,
            spacing: 4.0 * PI,
        };
    }
    let s = 2.0 * (0.5 * delta).asin();
    let bits = (4.0 * PI / s).log2().ceil().clamp(0.0, 1000.0) as u32;
    QuantizationGrid {
        bits,
        spacing: 4.0 * PI * 0.5f64.powi(bits as i32),
    }
}

/// `angle` rounded to the nearest grid point for `delta`.
pub fn quantize_angle(angle: f64, delta: f64) -> f64 {
    let grid = quantization_grid(delta);
    if grid.bits == 0 {
        return 0.0;
    }
    (angle / grid.spacing).round() * grid.spacing
}

/// A quantized `RZ` whose operator-norm error against `RZ(angle)` is at most `delta`.
pub fn rz_quantized(qubit: usize, angle: f64, delta: f64) -> Result<Gate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(
            "quantization delta must be positive".into(),
        ));
    }
    Ok(Gate::Rzq {
        qubit,
        angle,
        delta,
    })
}

/// CNOTs `(j -> p)` for every `j` in the support other than the pivot `p`,
/// so that `V Z_p V^dag = Z^alpha`.
pub fn build_conjugator(alpha: PauliZMask) -> Result<(Vec<Gate>, usize)> {
    let p = alpha
        .pivot()
        .ok_or_else(|| Error::InvalidArgument("conjugator needs a non-zero mask".into()))?;
    let gates = alpha
        .support()
        .filter(|&j| j != p)
        .map(|j| Gate::Cnot {
            control: j,
            target: p,
        })
        .collect();
    Ok((gates, p))
}

/// Gate accounting produced alongside a compiled circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileLedger {
    pub n: usize,
    pub epsilon: f64,
    pub terms: usize,
    /// Per-term rotation budget `epsilon / terms`.
    pub delta: f64,
    pub cnots: usize,
    pub rotations: usize,
    pub rotation_bits: u64,
}

impl CompileLedger {
    pub fn gate_count(&self) -> usize {
        self.cnots + self.rotations
    }

    /// CNOTs plus grid bits per rotation.
    pub fn weighted_cost(&self) -> u64 {
        self.cnots as u64 + self.rotation_bits
    }

    /// `4 n 2^n (n + log2(1 / epsilon))`.
    pub fn budget(&self) -> f64 {
        gate_budget(self.n, self.epsilon)
    }
}

pub fn gate_budget(n: usize, epsilon: f64) -> f64 {
    4.0 * n as f64 * (1u64 << n) as f64 * (n as f64 + (1.0 / epsilon).log2())
}

fn compile_terms(
    diag: &[f64],
    t: f64,
    rotation: impl Fn(usize, f64) -> Result<Gate>,
) -> Result<(Circuit, usize, usize)> {
    let w = walsh_decompose(diag)?;
    let mut gates = Vec::new();
    let mut terms = 0;
    let mut cnots = 0;
    for (alpha, lambda) in w.terms() {
        let (conj, p) = build_conjugator(alpha)?;
        cnots += 2 * conj.len();
        gates.extend_from_slice(&conj);
        gates.push(rotation(p, 2.0 * t * lambda)?);
        gates.extend(conj.iter().rev().copied());
        terms += 1;
    }
    Ok((Circuit::new(w.n, gates)?, terms, cnots))
}

/// Compiles `exp(-i t diag(H))` up to global phase with projective
/// operator-norm error at most `epsilon`.
pub fn compile_diagonal(diag: &[f64], t: f64, epsilon: f64) -> Result<(Circuit, CompileLedger)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let terms = walsh_decompose(diag)?.terms().count();
    let delta = if terms > 0 {
        epsilon / terms as f64
    } else {
        epsilon
    };
    let (circuit, terms, cnots) = compile_terms(diag, t, |q, a| rz_quantized(q, a, delta))?;
    let bits = quantization_grid(delta).bits as u64;
    let ledger = CompileLedger {
        n: circuit.n(),
        epsilon,
        terms,
        delta,
        cnots,
        rotations: terms,
        rotation_bits: bits * terms as u64,
    };
    Ok((circuit, ledger))
}

/// Same circuit structure with exact `RZ` rotations.
pub fn compile_diagonal_exact(diag: &[f64], t: f64) -> Result<Circuit> {
    compile_terms(diag, t, |qubit, angle| Ok(Gate::Rz { qubit, angle })).map(|(c, _, _)| c)
}

/// Projective operator-norm distance between the circuit and `exp(-i t diag(H))`.
///
/// Fails with a structural error if the circuit does not act diagonally.
pub fn verify_circuit(circuit: &Circuit, diag: &[f64], t: f64) -> Result<f64> {
    let n = qubits_for_len(diag.len())?;
    crate::error::check_dims(n, circuit.n())?;
    let (image, phase) = circuit.simulate_monomial();
    if let Some(x) = image.iter().enumerate().position(|(x, &y)| x != y) {
        return Err(Error::Structural(alloc::format!(
            "circuit maps basis state {x} to {}; conjugators are unbalanced",
            image[x]
        )));
    }
    let rel: Vec<f64> = phase.iter().zip(diag).map(|(p, h)| p + t * h).collect();
    Ok(opnorm_from_phases(&rel))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCountRow {
    pub n: usize,
    pub epsilon: f64,
    pub weighted_cost: u64,
    pub gate_count: usize,
    pub budget: f64,
    pub fitted: f64,
    pub relative_residual: f64,
}

/// Fit of `cost ~ A n 2^n (B + ln(1 / epsilon))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCountReport {
    pub a: f64,
    pub b: f64,
    pub rows: Vec<GateCountRow>,
    /// Root mean square of the relative residuals.
    pub rms_residual: f64,
    pub max_residual: f64,
}

/// Relative least-squares fit of the weighted costs in `ledgers`.
pub fn gate_count_report(ledgers: &[CompileLedger]) -> Result<GateCountReport> {
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for l in ledgers {
        let scale = l.n as f64 * (1u64 << l.n) as f64;
        let c = l.weighted_cost() as f64;
        u.push(scale);
        v.push(scale * (1.0 / l.epsilon).ln());
        y.push(c);
        w.push(if c > 0.0 { 1.0 / (c * c) } else { 0.0 });
    }
    let (ab, a) = least_squares_2(&u, &v, &y, &w).ok_or_else(|| {
        Error::InvalidArgument("gate count fit needs at least two distinct configurations".into())
    })?;
    let b = if a != 0.0 { ab / a } else { 0.0 };
    let rows: Vec<GateCountRow> = ledgers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let fitted = ab * u[i] + a * v[i];
            let c = y[i];
            GateCountRow {
                n: l.n,
                epsilon: l.epsilon,
                weighted_cost: l.weighted_cost(),
                gate_count: l.gate_count(),
                budget: l.budget(),
                fitted,
                relative_residual: if c > 0.0 { (fitted - c) / c } else { 0.0 },
            }
        })
        .collect();
    let rms = (rows
        .iter()
        .map(|r| r.relative_residual.powi(2))
        .sum::<f64>()
        / rows.len() as f64)
        .sqrt();
    let max = rows
        .iter()
        .map(|r| r.relative_residual.abs())
        .fold(0.0, f64::max);
    Ok(GateCountReport {
        a,
        b,
        rows,
        rms_residual: rms,
        max_residual: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::normal;
    use crate::linalg::{ComplexMatrix, C64};
    use crate::rng::SeedStream;

    fn random_diag(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeedStream::new(seed, n as u64).rng();
        (0..1usize << n).map(|_| normal(&mut rng)).collect()
    }

    #[test]
    fn walsh_hand_examples() {
        let w = walsh_decompose(&[1.0, -1.0]).unwrap();
        assert_eq!(w.coeffs, vec![0.0, 1.0]);
        let w = walsh_decompose(&[1.0, 1.0, 1.0, -1.0]).unwrap();
        assert_eq!(w.coeffs, vec![0.5, 0.5, 0.5, -0.5]);
        assert!(walsh_decompose(&[1.0, 2.0, 3.0]).is_err());
        assert!(walsh_decompose(&[]).is_err());
    }

    #[test]
    fn walsh_round_trip_and_direct_sum() {
        let h = random_diag(6, 1);
        let w = walsh_decompose(&h).unwrap();
        for (x, hx) in h.iter().enumerate() {
            let direct: f64 = (0..64)
                .map(|a| w.coeffs[a] * PauliZMask(a as u32).sign(x))
                .sum();
            assert!((direct - hx).abs() < 1e-12);
        }
        let back = w.reconstruct();
        assert!(back.iter().zip(&h).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    /// Sign bookkeeping: conjugating `Z_p` by the CNOT list equals `Z^alpha` on every basis state.
    fn conjugation_holds(alpha: PauliZMask, n: usize) -> bool {
        let (gates, p) = build_conjugator(alpha).unwrap();
        (0..1usize << n).all(|x| {
            let mut y = x;
            for g in &gates {
                if let Gate::Cnot { control, target } = *g {
                    y ^= ((y >> control) & 1) << target;
                }
            }
            let z = if (y >> p) & 1 == 0 { 1.0 } else { -1.0 };
            z == alpha.sign(x)
        })
    }

    #[test]
    fn conjugator_examples() {
        let (g, p) = build_conjugator(PauliZMask(0b100)).unwrap();
        assert!(g.is_empty() && p == 2);
        let (g, p) = build_conjugator(PauliZMask(0b10101)).unwrap();
        assert_eq!(p, 0);
        assert_eq!(
            g,
            vec![
                Gate::Cnot {
                    control: 2,
                    target: 0
                },
                Gate::Cnot {
                    control: 4,
                    target: 0
                }
            ]
        );
        for a in 1..64 {
            assert!(conjugation_holds(PauliZMask(a), 6));
        }
        assert!(build_conjugator(PauliZMask(0)).is_err());
    }

    #[test]
    fn cnot_conjugation_matrix_identity() {
        // CNOT(1 -> 0) Z_0 CNOT(1 -> 0) = Z_0 Z_1 as 4x4 matrices.
        let cnot = ComplexMatrix::from_fn(4, |i, j| {
            let img = j ^ ((j >> 1) & 1);
            if i == img {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let z0 = ComplexMatrix::from_diagonal(&[1.0, -1.0, 1.0, -1.0].map(|x| C64::new(x, 0.0)));
        let zz = ComplexMatrix::from_diagonal(&[1.0, -1.0, -1.0, 1.0].map(|x| C64::new(x, 0.0)));
        let lhs = cnot.matmul(&z0).unwrap().matmul(&cnot).unwrap();
        assert!(lhs.sub(&zz).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn quantized_rotation_error() {
        let delta = 1e-3;
        for i in 0..200 {
            let theta = -20.0 + 0.2 * i as f64 + 0.01234;
            let q = quantize_angle(theta, delta);
            // || RZ(theta) - RZ(q) ||_op from the 2x2 diagonal.
            let e = (C64::from_polar(1.0, -theta / 2.0) - C64::from_polar(1.0, -q / 2.0))
                .norm()
                .max((C64::from_polar(1.0, theta / 2.0) - C64::from_polar(1.0, q / 2.0)).norm());
            assert!(e <= delta, "theta = {theta}: {e}");
        }
        let grid = quantization_grid(delta);
        let on_grid = 37.0 * grid.spacing;
        assert_eq!(quantize_angle(on_grid, delta), on_grid);
        assert_eq!(quantize_angle(1.3, 2.5), 0.0);
        assert!(rz_quantized(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn compile_zero_and_single_z() {
        let (c, l) = compile_diagonal(&[0.0; 8], 1.0, 0.1).unwrap();
        assert!(c.is_empty() && l.terms == 0);
        assert_eq!(verify_circuit(&c, &[0.0; 8], 1.0).unwrap(), 0.0);

        let c = compile_diagonal_exact(&[1.0, -1.0], PI / 2.0).unwrap();
        assert_eq!(
            c.gates(),
            &[Gate::Rz {
                qubit: 0,
                angle: PI
            }]
        );
        assert!(verify_circuit(&c, &[1.0, -1.0], PI / 2.0).unwrap() < 1e-15);
    }

    #[test]
    fn compile_verify_end_to_end() {
        for n in 1..=6 {
            let h = random_diag(n, 7);
            for &eps in &[1e-1, 1e-2, 1e-3, 1e-4] {
                for &t in &[0.3, 1.0, 10.0] {
                    let (c, l) = compile_diagonal(&h, t, eps).unwrap();
                    let err = verify_circuit(&c, &h, t).unwrap();
                    assert!(err <= eps, "n={n} eps={eps} t={t}: {err}");
                    assert_eq!(c.len(), l.gate_count());
                    assert_eq!(c.cnot_count(), l.cnots);
                    assert_eq!(c.weighted_cost(), l.weighted_cost());
                    assert!(l.cnots <= 2 * (n - 1) * ((1 << n) - 1));
                    assert!((l.weighted_cost() as f64) <= l.budget());
                }
            }
            let exact = compile_diagonal_exact(&h, 2.0).unwrap();
            assert!(verify_circuit(&exact, &h, 2.0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn unbalanced_conjugator_is_structural_error() {
        let c = Circuit::new(
            2,
            vec![
                Gate::Cnot {
                    control: 1,
                    target: 0,
                },
                Gate::Rz {
                    qubit: 0,
                    angle: 0.4,
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            verify_circuit(&c, &[0.0; 4], 1.0),
            Err(Error::Structural(_))
        ));
        assert!(Circuit::new(
            2,
            vec![Gate::Cnot {
                control: 1,
                target: 1
            }]
        )
        .is_err());
        assert!(Circuit::new(
            2,
            vec![Gate::Rz {
                qubit: 2,
                angle: 0.0
            }]
        )
        .is_err());
    }

    #[test]
    fn gate_counts_monotone_and_fit() {
        let mut ledgers = Vec::new();
        for n in 3..=6 {
            let h = random_diag(n, 3);
            let mut last = 0;
            for &eps in &[1e-1, 1e-2, 1e-3] {
                let (_, l) = compile_diagonal(&h, 1.0, eps).unwrap();
                assert!(l.weighted_cost() >= last);
                last = l.weighted_cost();
                ledgers.push(l);
            }
        }
        let r = gate_count_report(&ledgers).unwrap();
        assert!(r.a > 0.0);
        assert!(r.rms_residual < 0.5);
        assert!(gate_count_report(&ledgers[..1]).is_err());
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn walsh_round_trip(n in 0usize..8, values in proptest::collection::vec(-1e3f64..1e3, 128)) {
            let h = &values[..1 << n];
            let back = walsh_decompose(h).unwrap().reconstruct();
            for (a, b) in h.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn exact_compilation_is_exact(n in 1usize..6, t in -2.0f64..2.0, values in proptest::collection::vec(-3.0f64..3.0, 32)) {
            let h = &values[..1 << n];
            let c = compile_diagonal_exact(h, t).unwrap();
            prop_assert!(verify_circuit(&c, h, t).unwrap() < 1e-9);
        }
    }
}
