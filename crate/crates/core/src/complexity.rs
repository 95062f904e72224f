//! Exact ε-complexity by breadth-first enumeration of gate words.
//!
//! A word `[g1, g2, ..., gl]` realizes `g_l ... g_2 g_1`, so `g1` acts first.

use core::fmt;

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::linalg::{
    apply_state, cis, eig_hermitian, evolve, ComplexMatrix, PureState, UnitaryMatrix, C64,
};
use crate::metrics::{hs_proj_distance, opnorm_proj_distance, trace_distance_states, Metric};
use crate::par::try_map_trials;
use crate::prelude::*;

pub const DEFAULT_WORD_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    dim: usize,
    labels: Vec<String>,
    gates: Vec<UnitaryMatrix>,
}

impl GateSet {
    pub fn new(gates: Vec<(String, UnitaryMatrix)>) -> Result<Self> {
        let dim = gates
            .first()
            .map(|(_, g)| g.dim())
            .ok_or_else(|| Error::InvalidArgument("gate set is empty".into()))?;
        let mut labels = Vec::with_capacity(gates.len());
        let mut mats = Vec::with_capacity(gates.len());
        for (label, g) in gates {
            crate::error::check_dims(dim, g.dim())?;
            if labels.contains(&label) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "duplicate gate label `{label}`"
                )));
            }
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "invalid gate label `{label}`"
                )));
            }
            // Re-validate in case the matrix was built without checks.
            mats.push(UnitaryMatrix::new(g.into_matrix())?);
            labels.push(label);
        }
        Ok(Self {
            dim,
            labels,
            gates: mats,
        })
    }

    /// The two-gate qubit set: `R = diag(1, e^{i pi/8})` of order 16 and the
    /// Hadamard involution `H`.
    pub fn default_pair() -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let r = UnitaryMatrix::diagonal_phases(&[0.0, core::f64::consts::PI / 8.0]);
        let h = ComplexMatrix::from_row_major(
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
            ],
        )
        .expect("finite entries");
        Self::new(vec![
            ("R".to_string(), r),
            (
                "H".to_string(),
                UnitaryMatrix::new(h).expect("Hadamard is unitary"),
            ),
        ])
        .expect("valid gate set")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gates(&self) -> &[UnitaryMatrix] {
        &self.gates
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &UnitaryMatrix)> {
        self.labels.iter().map(String::as_str).zip(&self.gates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub gates: Vec<u16>,
    pub unitary: UnitaryMatrix,
}

impl Word {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Space-separated gate labels in application order, `I` for the empty word.
    pub fn label(&self, gs: &GateSet) -> String {
        if self.gates.is_empty() {
            return "I".to_string();
        }
        let parts: Vec<&str> = self
            .gates
            .iter()
            .map(|&g| gs.labels[g as usize].as_str())
            .collect();
        parts.join(" ")
    }
}

/// `sum_{l <= max_len} |G|^l`, saturating.
pub fn word_count(gates: usize, max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(level);
        level = level.saturating_mul(gates as u128);
    }
    total
}

/// Kept words in breadth-first order, so lengths are nondecreasing.
#[derive(Debug, Clone)]
pub struct WordTable {
    pub gate_set: GateSet,
    pub max_len: usize,
    pub dedup_tol: f64,
    pub words: Vec<Word>,
}

/// `d_inf(U, V) <= tol`, with a Hilbert-Schmidt screen `d_hs <= sqrt(d) d_inf`.
fn within_opnorm(u: &UnitaryMatrix, v: &UnitaryMatrix, tol: f64) -> Result<bool> {
    if hs_proj_distance(u, v)? > (u.dim() as f64).sqrt() * tol {
        return Ok(false);
    }
    Ok(opnorm_proj_distance(u, v)? <= tol)
}

/// Breadth-first closure of the gate set up to `max_len`. A word is kept only
/// if its projective operator-norm distance to every kept word exceeds `dedup_tol`.
pub fn enumerate_words(
    gs: &GateSet,
    max_len: usize,
    dedup_tol: f64,
    budget: u128,
) -> Result<WordTable> {
    if !(dedup_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "dedup tolerance must be non-negative".into(),
        ));
    }
    let count = word_count(gs.len(), max_len);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let mut words = vec![Word {
        gates: Vec::new(),
        unitary: UnitaryMatrix::identity(gs.dim()),
    }];
    let mut frontier = 0..1;
    for _ in 0..max_len {
        let start = words.len();
        for w in frontier.clone() {
            for (gi, g) in gs.gates.iter().enumerate() {
                let u = UnitaryMatrix::new_unchecked(g.matrix().matmul(words[w].unitary.matrix())?);
                let mut dup = false;
                if dedup_tol > 0.0 {
                    for kept in &words {
                        if within_opnorm(&u, &kept.unitary, dedup_tol)? {
                            dup = true;
                            break;
                        }
                    }
                } else {
                    dup = words.iter().any(|k| k.unitary == u);
                }
                if !dup {
                    let mut gates = words[w].gates.clone();
                    gates.push(gi as u16);
                    words.push(Word { gates, unitary: u });
                }
            }
        }
        frontier = start..words.len();
        if frontier.is_empty() {
            break;
        }
    }
    Ok(WordTable {
        gate_set: gs.clone(),
        max_len,
        dedup_tol,
        words,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Complexity {
    Exactly(usize),
    /// No word of length `<= max_len` is within ε.
    Exceeds,
}

impl Complexity {
    pub fn value(self) -> Option<usize> {
        match self {
            Complexity::Exactly(r) => Some(r),
            Complexity::Exceeds => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Complexity::Exactly(0)
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Complexity::Exactly(r) => write!(f, "{r}"),
            Complexity::Exceeds => f.write_str("exceeds"),
        }
    }
}

/// Answer with its guard band: `C_{eps + guard} <= value <= C_{eps - guard}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityAnswer {
    pub value: Complexity,
    pub epsilon: f64,
    pub guard: f64,
    /// Index into the word table of the witness, when one exists.
    pub witness: Option<usize>,
}

/// Largest change in `metric` caused by replacing a word with one within
/// `tol` in projective operator norm.
pub fn guard_band(metric: Metric, dim: usize, tol: f64) -> f64 {
    match metric {
        Metric::OpNormProj => tol,
        Metric::Diamond => 2.0 * tol,
        Metric::HsProj => (dim as f64).sqrt() * tol,
    }
}

impl WordTable {
    pub fn build(gs: &GateSet, max_len: usize, dedup_tol: f64) -> Result<Self> {
        enumerate_words(gs, max_len, dedup_tol, DEFAULT_WORD_BUDGET)
    }

    fn check_tol(&self, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.dedup_tol > epsilon / 4.0 {
            return Err(Error::Precondition(alloc::format!(
                "dedup tolerance {} exceeds eps / 4 = {}",
                self.dedup_tol,
                epsilon / 4.0
            )));
        }
        Ok(())
    }

    /// Kept words of length `< k`.
    pub fn shorter_than(&self, k: usize) -> &[Word] {
        let end = self.words.partition_point(|w| w.len() < k);
        &self.words[..end]
    }

    pub fn unitary_complexity(
        &self,
        u: &UnitaryMatrix,
        epsilon: f64,
        metric: Metric,
    ) -> Result<ComplexityAnswer> {
        self.check_tol(epsilon)?;
        crate::error::check_dims(self.gate_set.dim(), u.dim())?;
        let mut witness = None;
        for (i, w) in self.words.iter().enumerate() {
            if metric.distance(u, &w.unitary)? <= epsilon {
                witness = Some(i);
                break;
            }
        }
        Ok(ComplexityAnswer {
            value: witness.map_or(Complexity::Exceeds, |i| {
                Complexity::Exactly(self.words[i].len())
            }),
            epsilon,
            guard: guard_band(metric, u.dim(), self.dedup_tol),
            witness,
        })
    }

    /// Fewest gates taking `psi0` to within trace distance ε of `psi`.
    pub fn state_complexity(
        &self,
        psi: &PureState,
        psi0: &PureState,
        epsilon: f64,
    ) -> Result<ComplexityAnswer> {
        self.check_tol(epsilon)?;
        let mut witness = None;
        for (i, w) in self.words.iter().enumerate() {
            if trace_distance_states(psi, &apply_state(&w.unitary, psi0)?)? <= epsilon {
                witness = Some(i);
                break;
            }
        }
        Ok(ComplexityAnswer {
            value: witness.map_or(Complexity::Exceeds, |i| {
                Complexity::Exactly(self.words[i].len())
            }),
            epsilon,
            guard: self.dedup_tol,
            witness,
        })
    }
}

pub fn exact_unitary_complexity(
    u: &UnitaryMatrix,
    gs: &GateSet,
    epsilon: f64,
    max_len: usize,
    metric: Metric,
    dedup_tol: f64,
) -> Result<ComplexityAnswer> {
    WordTable::build(gs, max_len, dedup_tol)?.unitary_complexity(u, epsilon, metric)
}

pub fn exact_state_complexity(
    psi: &PureState,
    gs: &GateSet,
    psi0: &PureState,
    epsilon: f64,
    max_len: usize,
    dedup_tol: f64,
) -> Result<ComplexityAnswer> {
    WordTable::build(gs, max_len, dedup_tol)?.state_complexity(psi, psi0, epsilon)
}

/// Reference search over every gate sequence, without any pruning.
pub fn exhaustive_unitary_complexity(
    u: &UnitaryMatrix,
    gs: &GateSet,
    epsilon: f64,
    max_len: usize,
    metric: Metric,
) -> Result<Complexity> {
    let count = word_count(gs.len(), max_len);
    if count > DEFAULT_WORD_BUDGET {
        return Err(Error::BudgetExceeded {
            count,
            budget: DEFAULT_WORD_BUDGET,
        });
    }
    for len in 0..=max_len {
        let mut idx = vec![0usize; len];
        loop {
            // Product g_{idx[len-1]} ... g_{idx[0]}, built left to right.
            let mut m = ComplexMatrix::identity(gs.dim());
            for &g in idx.iter().rev() {
                m = m.matmul(gs.gates[g].matrix())?;
            }
            if metric.distance(u, &UnitaryMatrix::new_unchecked(m))? <= epsilon {
                return Ok(Complexity::Exactly(len));
            }
            // Odometer increment.
            let mut pos = 0;
            while pos < len {
                idx[pos] += 1;
                if idx[pos] < gs.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == len {
                break;
            }
        }
    }
    Ok(Complexity::Exceeds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityCurve {
    pub t_grid: Vec<f64>,
    pub values: Vec<Complexity>,
    pub metric: Metric,
    pub epsilon: f64,
}

impl ComplexityCurve {
    /// First `t` with positive complexity.
    pub fn threshold(&self) -> Option<f64> {
        self.values
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.t_grid[i])
    }

    /// Zero on a non-empty initial segment and positive afterwards.
    pub fn has_jump(&self) -> bool {
        match self.values.iter().position(|c| !c.is_zero()) {
            Some(i) if i > 0 => self.values[i..].iter().all(|c| !c.is_zero()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpCurveReport {
    pub curves: Vec<ComplexityCurve>,
    /// Median over samples per `t`, with `Exceeds` ordered above every length.
    pub median: Vec<Complexity>,
    pub thresholds: Vec<Option<f64>>,
    pub jump_fraction: f64,
}

/// `U_t = exp(-i H t)` for each sampled `H` and `t` in the grid.
fn sample_evolutions(
    spec: &EnsembleSpec,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<UnitaryMatrix>>> {
    try_map_trials(seed, n_samples, |_, rng| {
        let h = spec.sample(rng)?;
        let s = eig_hermitian(&h)?;
        Ok::<_, Error>(t_grid.iter().map(|&t| evolve(&s, t)).collect())
    })
}

/// Exact `C_eps(U_t)` along `t_grid` for `n_samples` Hamiltonians.
pub fn complexity_jump_curve(
    spec: &EnsembleSpec,
    table: &WordTable,
    epsilon: f64,
    metric: Metric,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<JumpCurveReport> {
    crate::error::check_dims(table.gate_set.dim(), spec.dim)?;
    let evolutions = sample_evolutions(spec, t_grid, n_samples, seed)?;
    let curves = evolutions
        .iter()
        .map(|us| {
            let values = us
                .iter()
                .map(|u| {
                    table
                        .unitary_complexity(u, epsilon, metric)
                        .map(|a| a.value)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ComplexityCurve {
                t_grid: t_grid.to_vec(),
                values,
                metric,
                epsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let median = (0..t_grid.len())
        .map(|k| {
            let mut col: Vec<Complexity> = curves.iter().map(|c| c.values[k]).collect();
            col.sort();
            col.get(col.len() / 2)
                .copied()
                .unwrap_or(Complexity::Exceeds)
        })
        .collect();
    let thresholds = curves.iter().map(ComplexityCurve::threshold).collect();
    let jumps = curves.iter().filter(|c| c.has_jump()).count();
    Ok(JumpCurveReport {
        median,
        thresholds,
        jump_fraction: if curves.is_empty() {
            0.0
        } else {
            jumps as f64 / curves.len() as f64
        },
        curves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionBoundRow {
    pub word: String,
    pub length: usize,
    /// Frequency of `U_t` within ε of the word.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionBoundReport {
    pub t: f64,
    pub k: usize,
    pub n_samples: usize,
    pub rows: Vec<UnionBoundRow>,
    /// Frequency of `C_eps(U_t) < k`.
    pub below_k: f64,
}

impl UnionBoundReport {
    pub fn frequency_sum(&self) -> f64 {
        self.rows.iter().map(|r| r.frequency).sum()
    }
}

/// Per-word ball hit frequencies for words of length `< k` at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn union_bound_diagnostic(
    spec: &EnsembleSpec,
    table: &WordTable,
    epsilon: f64,
    metric: Metric,
    t: f64,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<UnionBoundReport> {
    crate::error::check_dims(table.gate_set.dim(), spec.dim)?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let words = table.shorter_than(k);
    let evolutions = sample_evolutions(spec, &[t], n_samples, seed)?;
    let mut hits = vec![0usize; words.len()];
    let mut below = 0usize;
    for us in &evolutions {
        let mut any = false;
        for (h, w) in hits.iter_mut().zip(words) {
            if metric.distance(&us[0], &w.unitary)? <= epsilon {
                *h += 1;
                any = true;
            }
        }
        if any {
            below += 1;
        }
    }
    let n = n_samples as f64;
    Ok(UnionBoundReport {
        t,
        k,
        n_samples,
        rows: words
            .iter()
            .zip(&hits)
            .map(|(w, &h)| UnionBoundRow {
                word: w.label(&table.gate_set),
                length: w.len(),
                frequency: h as f64 / n,
            })
            .collect(),
        below_k: below as f64 / n,
    })
}

/// `e^{i phi} U`.
pub fn with_global_phase(u: &UnitaryMatrix, phi: f64) -> UnitaryMatrix {
    UnitaryMatrix::new_unchecked(u.matrix().scale(cis(phi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_haar_unitary;
    use crate::rng::SeedStream;
    use core::f64::consts::PI;

    fn pauli_x() -> GateSet {
        let m = ComplexMatrix::from_row_major(
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        GateSet::new(vec![("X".into(), UnitaryMatrix::new(m).unwrap())]).unwrap()
    }

    #[test]
    fn enumeration_small_cases() {
        let gs = GateSet::default_pair();
        let t = enumerate_words(&gs, 0, 1e-6, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(t.words.len(), 1);
        let t = enumerate_words(&pauli_x(), 3, 1e-6, DEFAULT_WORD_BUDGET).unwrap();
        let lens: Vec<usize> = t.words.iter().map(Word::len).collect();
        assert_eq!(lens, vec![0, 1]);
        let t = enumerate_words(&gs, 6, 1e-6, DEFAULT_WORD_BUDGET).unwrap();
        assert!((t.words.len() as u128) <= word_count(2, 6));
        assert!(t.words.windows(2).all(|w| w[0].len() <= w[1].len()));
        for w in &t.words {
            let mut m = ComplexMatrix::identity(2);
            for &g in &w.gates {
                m = gs.gates()[g as usize].matrix().matmul(&m).unwrap();
            }
            assert!(m.sub(w.unitary.matrix()).unwrap().max_abs() < 1e-9);
        }
        let err = enumerate_words(&gs, 20, 1e-6, DEFAULT_WORD_BUDGET).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn gate_set_validation() {
        let gs = GateSet::default_pair();
        let dup = vec![
            ("A".to_string(), gs.gates()[0].clone()),
            ("A".to_string(), gs.gates()[1].clone()),
        ];
        assert!(GateSet::new(dup).is_err());
        assert!(GateSet::new(vec![]).is_err());
        let mixed = vec![
            ("A".to_string(), gs.gates()[0].clone()),
            ("B".to_string(), UnitaryMatrix::identity(3)),
        ];
        assert!(GateSet::new(mixed).is_err());
    }

    #[test]
    fn trivial_complexities() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 6, 1e-6).unwrap();
        let id = UnitaryMatrix::identity(2);
        assert_eq!(
            table
                .unitary_complexity(&id, 0.01, Metric::Diamond)
                .unwrap()
                .value,
            Complexity::Exactly(0)
        );
        let h = &gs.gates()[1];
        assert_eq!(
            table
                .unitary_complexity(h, 0.05, Metric::OpNormProj)
                .unwrap()
                .value,
            Complexity::Exactly(1)
        );
        assert!(table
            .unitary_complexity(&id, 1e-6, Metric::Diamond)
            .is_err());
    }

    #[test]
    fn composite_matches_exhaustive_oracle() {
        let gs = GateSet::default_pair();
        let g = gs.gates();
        let target = g[1]
            .mul(&g[0])
            .unwrap()
            .mul(&g[0])
            .unwrap()
            .mul(&g[1])
            .unwrap();
        let table0 = WordTable::build(&gs, 6, 0.0).unwrap();
        let table = WordTable::build(&gs, 6, 0.01).unwrap();
        for metric in [Metric::Diamond, Metric::OpNormProj, Metric::HsProj] {
            let oracle = exhaustive_unitary_complexity(&target, &gs, 0.05, 6, metric).unwrap();
            assert_eq!(
                table0
                    .unitary_complexity(&target, 0.05, metric)
                    .unwrap()
                    .value,
                oracle
            );
            let a = table.unitary_complexity(&target, 0.05, metric).unwrap();
            let lo =
                exhaustive_unitary_complexity(&target, &gs, 0.05 + a.guard, 6, metric).unwrap();
            let hi =
                exhaustive_unitary_complexity(&target, &gs, 0.05 - a.guard, 6, metric).unwrap();
            assert!(
                lo <= a.value && a.value <= hi,
                "{metric}: {lo} {:?} {hi}",
                a.value
            );
        }
    }

    #[test]
    fn random_targets_dedup_free_equal_oracle() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 7, 0.0).unwrap();
        for i in 0..10 {
            let mut rng = SeedStream::new(21, i).rng();
            let u = sample_haar_unitary(2, &mut rng);
            for &eps in &[0.3, 0.6] {
                let a = table
                    .unitary_complexity(&u, eps, Metric::Diamond)
                    .unwrap()
                    .value;
                let b = exhaustive_unitary_complexity(&u, &gs, eps, 7, Metric::Diamond).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn monotone_in_eps_and_phase_invariant() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 8, 1e-4).unwrap();
        for i in 0..8 {
            let mut rng = SeedStream::new(5, i).rng();
            let u = sample_haar_unitary(2, &mut rng);
            let mut last = Complexity::Exactly(0);
            for &eps in &[1.0, 0.6, 0.4, 0.3] {
                let c = table
                    .unitary_complexity(&u, eps, Metric::Diamond)
                    .unwrap()
                    .value;
                assert!(c >= last);
                last = c;
                let cp = table
                    .unitary_complexity(&with_global_phase(&u, 1.234), eps, Metric::Diamond)
                    .unwrap()
                    .value;
                assert_eq!(c, cp);
            }
        }
    }

    #[test]
    fn state_complexity_cases() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 6, 1e-6).unwrap();
        let zero = PureState::basis(2, 0);
        assert_eq!(
            table.state_complexity(&zero, &zero, 0.1).unwrap().value,
            Complexity::Exactly(0)
        );
        let plus = apply_state(&gs.gates()[1], &zero).unwrap();
        assert_eq!(
            table.state_complexity(&plus, &zero, 0.1).unwrap().value,
            Complexity::Exactly(1)
        );
        // A diagonal gate alone never moves |0> towards |1>.
        let xs = WordTable::build(
            &GateSet::new(vec![("R".into(), gs.gates()[0].clone())]).unwrap(),
            4,
            1e-6,
        )
        .unwrap();
        let one = PureState::basis(2, 1);
        assert_eq!(
            xs.state_complexity(&one, &zero, 0.1).unwrap().value,
            Complexity::Exceeds
        );
    }

    #[test]
    fn jump_curve_starts_at_zero() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 6, 1e-6).unwrap();
        let grid = [0.0, 0.05, 1.0, 2.0, 4.0];
        let r = complexity_jump_curve(
            &EnsembleSpec::gue(2),
            &table,
            0.2,
            Metric::Diamond,
            &grid,
            20,
            3,
        )
        .unwrap();
        assert!(r.curves.iter().all(|c| c.values[0].is_zero()));
        assert_eq!(r.median[0], Complexity::Exactly(0));
        assert_eq!(r.thresholds.len(), 20);
    }

    #[test]
    fn union_bound_at_zero_and_long_time() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 4, 1e-6).unwrap();
        let r = union_bound_diagnostic(
            &EnsembleSpec::gue(2),
            &table,
            0.2,
            Metric::Diamond,
            0.0,
            3,
            50,
            1,
        )
        .unwrap();
        assert_eq!(r.rows[0].frequency, 1.0);
        assert_eq!(r.below_k, 1.0);
        assert!(r.frequency_sum() >= r.below_k);

        // Long-time diagonal model: relative phase uniform on the circle, so
        // P(|1 - e^{i theta}| <= eps) = 2 arcsin(eps / 2) / pi.
        let eps = 0.5;
        let n = 4000;
        let r = union_bound_diagnostic(
            &EnsembleSpec::diag_gaussian(2),
            &table,
            eps,
            Metric::Diamond,
            60.0,
            2,
            n,
            2,
        )
        .unwrap();
        let p = 2.0 * (eps / 2.0).asin() / PI;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (r.rows[0].frequency - p).abs() < 4.0 * se,
            "{} vs {p}",
            r.rows[0].frequency
        );
        assert!(r.frequency_sum() + 1e-12 >= r.below_k);
    }
}
